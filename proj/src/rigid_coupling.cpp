#include "vmsfem/rigid_coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vmsfem {

FrictionModel parse_friction_model(const std::string& name) {
  if (name == "non_slip" || name == "rough") return FrictionModel::non_slip;
  if (name == "slip" || name == "smooth") return FrictionModel::slip;
  if (name == "coulomb") return FrictionModel::coulomb;
  throw std::invalid_argument("unknown friction model '" + name + "' (expected non_slip, slip or coulomb)");
}

const char* to_string(FrictionModel model) {
  switch (model) {
    case FrictionModel::non_slip:
      return "non_slip";
    case FrictionModel::slip:
      return "slip";
    case FrictionModel::coulomb:
      return "coulomb";
  }
  return "?";
}

RigidBody::RigidBody(Circle shape, FrictionModel friction, double mu_fric)
    : shape_(shape), friction_(friction), mu_fric_(mu_fric) {
  if (!(shape.radius > 0.0)) throw std::invalid_argument("RigidBody: circle radius must be positive");
  if (!(mu_fric >= 0.0)) throw std::invalid_argument("RigidBody: friction coefficient must be >= 0");
}

RigidBody::RigidBody(Polyline shape, FrictionModel friction, double mu_fric)
    : shape_(std::move(shape)), friction_(friction), mu_fric_(mu_fric) {
  if (std::get<Polyline>(shape_).vertices.size() < 2) {
    throw std::invalid_argument("RigidBody: polyline needs at least 2 vertices");
  }
  if (!(mu_fric >= 0.0)) throw std::invalid_argument("RigidBody: friction coefficient must be >= 0");
}

void RigidBody::translate(const Vec2& d) {
  if (auto* c = std::get_if<Circle>(&shape_)) {
    c->center += d;
  } else {
    for (Vec2& v : std::get<Polyline>(shape_).vertices) v += d;
  }
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((x - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (a + t * d - x).norm();
}

std::size_t segment_count(const Polyline& p) {
  return p.closed ? p.vertices.size() : p.vertices.size() - 1;
}

std::pair<Vec2, Vec2> segment(const Polyline& p, std::size_t k) {
  return {p.vertices[k], p.vertices[(k + 1) % p.vertices.size()]};
}

bool inside_polygon(const Polyline& p, const Vec2& x) {
  bool in = false;
  const std::size_t n = p.vertices.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = p.vertices[i];
    const Vec2& b = p.vertices[j];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x.x() < xc) in = !in;
    }
  }
  return in;
}

}  // namespace

double RigidBody::distance(const Vec2& x) const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return (x - c->center).norm() - c->radius;
  const auto& p = std::get<Polyline>(shape_);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < segment_count(p); ++k) {
    const auto [a, b] = segment(p, k);
    d = std::min(d, segment_distance(x, a, b));
  }
  if (p.closed && inside_polygon(p, x)) d = -d;
  return d;
}

bool RigidBody::contains(const Vec2& x, double tol) const { return distance(x) <= tol; }

double RigidBody::bottom() const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return c->center.y() - c->radius;
  double y = std::numeric_limits<double>::infinity();
  for (const Vec2& v : std::get<Polyline>(shape_).vertices) y = std::min(y, v.y());
  return y;
}

Vec2 RigidBody::reference_point() const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return c->center;
  return std::get<Polyline>(shape_).vertices.front();
}

CutResult find_cutting_points(const RigidBody& body, const GridMesh& mesh) {
  const double h = mesh.h_ele();
  const double tol = 1e-12 * h;
  const double stol = 1e-12;
  CutResult out;

  std::vector<char> inside(static_cast<std::size_t>(mesh.node_count()), 0);
  for (int n = 0; n < mesh.node_count(); ++n) {
    if (body.contains(mesh.node(n), tol)) inside[static_cast<std::size_t>(n)] = 1;
  }

  struct Hit {
    double s;
    Vec2 normal;
  };

  auto add_hits = [&](int nl, int nr, std::vector<Hit>& hits) {
    const Vec2 pl = mesh.node(nl);
    const Vec2 pr = mesh.node(nr);
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.s < b.s; });
    double last = -1.0;
    for (const Hit& hit : hits) {
      if (hit.s < -stol || hit.s > 1.0 + stol) continue;
      if (hit.s <= stol) {
        inside[static_cast<std::size_t>(nl)] = 1;
        continue;
      }
      if (hit.s >= 1.0 - stol) {
        inside[static_cast<std::size_t>(nr)] = 1;
        continue;
      }
      if (std::abs(hit.s - last) <= stol) continue;
      last = hit.s;
      CuttingPoint cp;
      cp.edge = {nl, nr};
      cp.alpha = 1.0 - hit.s;
      cp.position = cp.alpha * pl + (1.0 - cp.alpha) * pr;
      cp.normal = hit.normal.normalized();
      cp.tangent = Vec2(-cp.normal.y(), cp.normal.x());
      out.points.push_back(cp);
    }
  };

  const auto edges = mesh.edges();
  std::vector<Hit> hits;
  if (const auto* c = std::get_if<Circle>(&body.shape())) {
    const double r2 = c->radius * c->radius;
    for (const auto& [nl, nr] : edges) {
      const Vec2 pl = mesh.node(nl);
      const Vec2 d = mesh.node(nr) - pl;
      const Vec2 f = pl - c->center;
      const double a = d.squaredNorm();
      const double b = 2.0 * d.dot(f);
      const double cc = f.squaredNorm() - r2;
      double disc = b * b - 4.0 * a * cc;
      const double disc_tol = 1e-12 * 4.0 * a * r2;
      if (disc < -disc_tol) continue;
      hits.clear();
      auto push = [&](double s) {
        const Vec2 p = pl + s * d;
        hits.push_back({s, (p - c->center) / c->radius});
      };
      if (disc <= disc_tol) {
        push(-b / (2.0 * a));
      } else {
        disc = std::sqrt(disc);
        push((-b - disc) / (2.0 * a));
        push((-b + disc) / (2.0 * a));
      }
      add_hits(nl, nr, hits);
    }
  } else {
    const auto& poly = std::get<Polyline>(body.shape());
    Vec2 lo = poly.vertices.front();
    Vec2 hi = lo;
    for (const Vec2& v : poly.vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    for (const auto& [nl, nr] : edges) {
      const Vec2 pl = mesh.node(nl);
      const Vec2 pr = mesh.node(nr);
      if (std::max(pl.x(), pr.x()) < lo.x() - tol || std::min(pl.x(), pr.x()) > hi.x() + tol ||
          std::max(pl.y(), pr.y()) < lo.y() - tol || std::min(pl.y(), pr.y()) > hi.y() + tol) {
        continue;
      }
      const Vec2 d = pr - pl;
      hits.clear();
      for (std::size_t k = 0; k < segment_count(poly); ++k) {
        const auto [q0, q1] = segment(poly, k);
        const Vec2 e = q1 - q0;
        const double denom = cross(d, e);
        if (std::abs(denom) <= 1e-14 * d.norm() * e.norm()) continue;
        const Vec2 w = q0 - pl;
        const double s = cross(w, e) / denom;
        const double t = cross(w, d) / denom;
        if (t < -stol || t > 1.0 + stol) continue;
        const Vec2 en = e.normalized();
        hits.push_back({s, Vec2(en.y(), -en.x())});
      }
      add_hits(nl, nr, hits);
    }
  }

  // Cuts on edges whose nodes were pinned afterwards are still valid rows.
  for (int n = 0; n < mesh.node_count(); ++n) {
    if (inside[static_cast<std::size_t>(n)] != 0) out.inside_nodes.push_back(n);
  }
  return out;
}

SparseMatrix ConstraintSet::a_matrix(int velocity_dofs) const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int k = 0; k < rows[r].count; ++k) {
      trip.emplace_back(static_cast<int>(r), rows[r].dof[static_cast<std::size_t>(k)],
                        rows[r].coef[static_cast<std::size_t>(k)]);
    }
  }
  SparseMatrix a(static_cast<Eigen::Index>(rows.size()), velocity_dofs);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

Eigen::VectorXd ConstraintSet::b_vector() const {
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) b[static_cast<Eigen::Index>(r)] = rows[r].rhs;
  return b;
}

double ConstraintSet::violation(const Eigen::VectorXd& u) const {
  double worst = 0.0;
  for (const ConstraintRow& row : rows) {
    double v = -row.rhs;
    for (int k = 0; k < row.count; ++k) v += row.coef[static_cast<std::size_t>(k)] * u[row.dof[static_cast<std::size_t>(k)]];
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

ConstraintSet build_constraints(const CutResult& cut, const RigidBody& body) {
  ConstraintSet cs;
  cs.points = cut.points;
  cs.inside_nodes = cut.inside_nodes;
  cs.model = body.friction();
  cs.body_velocity = body.velocity();
  const Vec2 v = body.velocity();

  std::vector<ConstraintRow> rows;
  for (std::size_t p = 0; p < cut.points.size(); ++p) {
    const CuttingPoint& cp = cut.points[p];
    const int l = cp.edge[0];
    const int r = cp.edge[1];
    const double a = cp.alpha;
    if (cs.model == FrictionModel::non_slip) {
      for (int c = 0; c < 2; ++c) {
        ConstraintRow row;
        row.dof = {2 * l + c, 2 * r + c, 0, 0};
        row.coef = {a, 1.0 - a, 0.0, 0.0};
        row.count = 2;
        row.rhs = v[c];
        row.direction = c == 0 ? Vec2::UnitX() : Vec2::UnitY();
        row.point = static_cast<int>(p);
        rows.push_back(row);
      }
    } else {
      ConstraintRow row;
      row.dof = {2 * l, 2 * l + 1, 2 * r, 2 * r + 1};
      row.coef = {a * cp.normal.x(), a * cp.normal.y(), (1.0 - a) * cp.normal.x(), (1.0 - a) * cp.normal.y()};
      row.count = 4;
      row.rhs = v.dot(cp.normal);
      row.direction = cp.normal;
      row.point = static_cast<int>(p);
      rows.push_back(row);
    }
  }
  for (int n : cut.inside_nodes) {
    for (int c = 0; c < 2; ++c) {
      ConstraintRow row;
      row.dof = {2 * n + c, 0, 0, 0};
      row.coef = {1.0, 0.0, 0.0, 0.0};
      row.count = 1;
      row.rhs = v[c];
      row.direction = c == 0 ? Vec2::UnitX() : Vec2::UnitY();
      rows.push_back(row);
    }
  }

  // Drop zero coefficients, then exact duplicates.
  for (ConstraintRow& row : rows) {
    int k = 0;
    for (int i = 0; i < row.count; ++i) {
      if (row.coef[static_cast<std::size_t>(i)] == 0.0) continue;
      row.dof[static_cast<std::size_t>(k)] = row.dof[static_cast<std::size_t>(i)];
      row.coef[static_cast<std::size_t>(k)] = row.coef[static_cast<std::size_t>(i)];
      ++k;
    }
    row.count = k;
  }
  auto same = [](const ConstraintRow& x, const ConstraintRow& y) {
    if (x.count != y.count || std::abs(x.rhs - y.rhs) > 1e-12 * (1.0 + std::abs(x.rhs))) return false;
    for (int i = 0; i < x.count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (x.dof[k] != y.dof[k] || std::abs(x.coef[k] - y.coef[k]) > 1e-12) return false;
    }
    return true;
  };
  std::map<int, std::vector<std::size_t>> by_first;
  for (ConstraintRow& row : rows) {
    if (row.count == 0) continue;
    auto& bucket = by_first[row.dof[0]];
    const bool dup = std::any_of(bucket.begin(), bucket.end(), [&](std::size_t i) { return same(cs.rows[i], row); });
    if (dup) {
      ++cs.duplicates_removed;
      continue;
    }
    bucket.push_back(cs.rows.size());
    cs.rows.push_back(row);
  }
  return cs;
}

namespace {

SaddleResult saddle_impl(const LinearSystem& sys, const Eigen::VectorXd& rhs, ConstraintSet& cs,
                         const FieldState& state) {
  const int n = sys.layout.size();
  const int nv = sys.layout.velocity_count();
  const auto nrows = cs.rows.size();
  cs.lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nrows));
  cs.solved = false;

  if (nrows == 0) {
    SaddleResult res{solve_sparse(sys.matrix, rhs, "solve_saddle")};
    cs.solved = true;
    return res;
  }

  // Row scale comparable to the velocity block of the tangent.
  double diag = 0.0;
  int cnt = 0;
  for (int i = 0; i < nv; ++i) {
    if (sys.is_fixed(i)) continue;
    diag += std::abs(sys.matrix.coeff(i, i));
    ++cnt;
  }
  const double s = cnt > 0 && diag > 0.0 ? diag / cnt : 1.0;

  // Reduced rows: fixed unknowns move to the right-hand side.
  struct Reduced {
    std::vector<std::pair<int, double>> entries;
    double rhs = 0.0;
    std::size_t source = 0;
  };
  std::vector<Reduced> red;
  red.reserve(nrows);
  double bmax = 0.0;
  for (const ConstraintRow& row : cs.rows) bmax = std::max(bmax, std::abs(row.rhs));
  for (std::size_t r = 0; r < nrows; ++r) {
    const ConstraintRow& row = cs.rows[r];
    Reduced rr;
    rr.source = r;
    rr.rhs = row.rhs;
    for (int k = 0; k < row.count; ++k) {
      const int dof = row.dof[static_cast<std::size_t>(k)];
      const double c = row.coef[static_cast<std::size_t>(k)];
      if (dof < 0 || dof >= nv) throw std::invalid_argument("solve_saddle: constraint refers to a non-velocity unknown");
      rr.rhs -= c * state.u[dof];
      if (sys.is_fixed(dof)) {
        rr.rhs -= c * sys.fixed_increment[dof];
      } else {
        rr.entries.emplace_back(dof, c);
      }
    }
    if (rr.entries.empty()) {
      if (std::abs(rr.rhs) > 1e-8 * (1.0 + bmax)) {
        std::ostringstream msg;
        msg << "solve_saddle: constraint row " << r << " acts only on fixed unknowns and is violated by " << rr.rhs;
        throw SolverFailure(msg.str());
      }
      continue;
    }
    red.push_back(std::move(rr));
  }

  // Rows made redundant by earlier rows (an outside node pinned through two
  // cut edges whose inner ends are pinned) are dropped with zero multiplier.
  {
    std::map<int, double> pinned;
    std::vector<int> state_of(red.size(), 0);  // 0 pending, 1 kept, 2 dropped
    auto free_entries = [&](const Reduced& rr, double& rest) {
      std::vector<std::pair<int, double>> f;
      rest = rr.rhs;
      for (const auto& [dof, c] : rr.entries) {
        const auto it = pinned.find(dof);
        if (it == pinned.end()) {
          f.emplace_back(dof, c);
        } else {
          rest -= c * it->second;
        }
      }
      return f;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t r = 0; r < red.size(); ++r) {
        if (state_of[r] != 0) continue;
        double rest = 0.0;
        const auto f = free_entries(red[r], rest);
        if (f.size() == 1) {
          pinned[f.front().first] = rest / f.front().second;
          state_of[r] = 1;
          changed = true;
        } else if (f.empty()) {
          if (std::abs(rest) > 1e-8 * (1.0 + bmax)) {
            std::ostringstream msg;
            msg << "solve_saddle: constraint row " << red[r].source << " contradicts earlier rows by " << rest;
            throw SolverFailure(msg.str());
          }
          state_of[r] = 2;
          ++cs.duplicates_removed;
          changed = true;
        }
      }
    }
    std::vector<Reduced> kept;
    kept.reserve(red.size());
    for (std::size_t r = 0; r < red.size(); ++r) {
      if (state_of[r] != 2) kept.push_back(std::move(red[r]));
    }
    red = std::move(kept);
  }

  const int m = static_cast<int>(red.size());
  std::vector<std::vector<std::pair<int, double>>> col_rows(static_cast<std::size_t>(nv));
  for (int r = 0; r < m; ++r) {
    for (const auto& [dof, c] : red[static_cast<std::size_t>(r)].entries) {
      col_rows[static_cast<std::size_t>(dof)].emplace_back(n + r, s * c);
    }
  }

  SparseMatrix kkt(n + m, n + m);
  std::vector<int> outer(static_cast<std::size_t>(n + m + 1), 0);
  std::vector<int> inner;
  std::vector<double> values;
  inner.reserve(static_cast<std::size_t>(sys.matrix.nonZeros()) + 4 * red.size());
  values.reserve(inner.capacity());
  for (int c = 0; c < n; ++c) {
    for (SparseMatrix::InnerIterator it(sys.matrix, c); it; ++it) {
      inner.push_back(static_cast<int>(it.row()));
      values.push_back(it.value());
    }
    if (c < nv) {
      for (const auto& [row, v] : col_rows[static_cast<std::size_t>(c)]) {
        inner.push_back(row);
        values.push_back(v);
      }
    }
    outer[static_cast<std::size_t>(c + 1)] = static_cast<int>(inner.size());
  }
  for (int r = 0; r < m; ++r) {
    auto entries = red[static_cast<std::size_t>(r)].entries;
    std::sort(entries.begin(), entries.end());
    for (const auto& [dof, c] : entries) {
      inner.push_back(dof);
      values.push_back(s * c);
    }
    outer[static_cast<std::size_t>(n + r + 1)] = static_cast<int>(inner.size());
  }
  kkt = Eigen::Map<const SparseMatrix>(n + m, n + m, static_cast<Eigen::Index>(inner.size()), outer.data(),
                                       inner.data(), values.data());

  Eigen::VectorXd full(n + m);
  full.head(n) = rhs;
  for (int r = 0; r < m; ++r) full[n + r] = s * red[static_cast<std::size_t>(r)].rhs;

  Eigen::VectorXd sol;
  try {
    sol = solve_sparse(kkt, full, "solve_saddle");
  } catch (const SolverFailure& e) {
    std::ostringstream msg;
    msg << e.what() << "; " << m << " constraint rows (" << cs.points.size() << " cutting points, "
        << cs.inside_nodes.size() << " inside nodes, " << cs.duplicates_removed
        << " duplicates removed) may be linearly dependent";
    throw SolverFailure(msg.str());
  }
  for (int r = 0; r < m; ++r) {
    cs.lambda[static_cast<Eigen::Index>(red[static_cast<std::size_t>(r)].source)] = -s * sol[n + r];
  }
  cs.solved = true;
  return {sol.head(n)};
}

}  // namespace

SaddleResult solve_saddle(const LinearSystem& system, ConstraintSet& constraints, const FieldState& state) {
  if (system.rhs.size() != system.layout.size()) {
    throw std::invalid_argument("solve_saddle: system is not sized to its layout");
  }
  constraints.friction.assign(constraints.points.size(), 0.0);
  return saddle_impl(system, system.rhs, constraints, state);
}

SaddleResult coulomb_iteration(const LinearSystem& system, ConstraintSet& cs, const FieldState& state,
                               double mu_fric) {
  if (cs.model == FrictionModel::non_slip) {
    throw std::invalid_argument("coulomb_iteration: constraints were built for the non-slip model");
  }
  SaddleResult first = solve_saddle(system, cs, state);
  if (!(mu_fric > 0.0) || cs.points.empty()) return first;

  std::vector<double> lambda_n(cs.points.size(), 0.0);
  for (std::size_t r = 0; r < cs.rows.size(); ++r) {
    if (cs.rows[r].point >= 0) lambda_n[static_cast<std::size_t>(cs.rows[r].point)] = cs.lambda[static_cast<Eigen::Index>(r)];
  }
  const int nv = system.layout.velocity_count();
  const Eigen::VectorXd u_new = state.u + first.dx.head(nv);
  std::vector<double> fric(cs.points.size(), 0.0);
  Eigen::VectorXd rhs = system.rhs;
  bool any = false;
  for (std::size_t p = 0; p < cs.points.size(); ++p) {
    const CuttingPoint& cp = cs.points[p];
    const int l = cp.edge[0];
    const int r = cp.edge[1];
    const Vec2 ul(u_new[2 * l], u_new[2 * l + 1]);
    const Vec2 ur(u_new[2 * r], u_new[2 * r + 1]);
    const double ut = (cp.alpha * ul + (1.0 - cp.alpha) * ur - cs.body_velocity).dot(cp.tangent);
    const double sgn = ut > 0.0 ? 1.0 : (ut < 0.0 ? -1.0 : 0.0);
    const double f = -sgn * mu_fric * std::max(lambda_n[p], 0.0);
    fric[p] = f;
    if (f == 0.0) continue;
    any = true;
    for (int c = 0; c < 2; ++c) {
      const int dl = 2 * l + c;
      const int dr = 2 * r + c;
      if (!system.is_fixed(dl)) rhs[dl] += cp.alpha * f * cp.tangent[c];
      if (!system.is_fixed(dr)) rhs[dr] += (1.0 - cp.alpha) * f * cp.tangent[c];
    }
  }
  if (!any) return first;
  SaddleResult second = saddle_impl(system, rhs, cs, state);
  cs.friction = std::move(fric);
  return second;
}

Vec2 resultant_force(const ConstraintSet& cs) {
  if (!cs.solved || cs.lambda.size() != static_cast<Eigen::Index>(cs.rows.size())) {
    throw StateError("resultant_force: constraints have not been solved");
  }
  Vec2 f = Vec2::Zero();
  for (std::size_t r = 0; r < cs.rows.size(); ++r) f -= cs.lambda[static_cast<Eigen::Index>(r)] * cs.rows[r].direction;
  for (std::size_t p = 0; p < cs.friction.size() && p < cs.points.size(); ++p) f -= cs.friction[p] * cs.points[p].tangent;
  return f;
}

}  // namespace vmsfem
