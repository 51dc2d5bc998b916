#include "vmsfem/history_transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace vmsfem {

KernelParams KernelParams::defaults(const GridMesh& mesh) {
  const double h = mesh.h_ele();
  return {h, 2.5 * h};
}

void KernelParams::validate() const {
  if (!(r0 > 0.0)) throw std::invalid_argument("KernelParams: r0 must be positive");
  if (!(re >= r0)) throw std::invalid_argument("KernelParams: re must be >= r0");
}

double gaussian_weight(double r, const KernelParams& params) {
  if (r > params.re) return 0.0;
  const double q = r / params.r0;
  return std::exp(-q * q) / std::sqrt(2.0 * std::numbers::pi);
}

SamplePointCloud SamplePointCloud::gauss_points(const GridMesh& mesh) {
  SamplePointCloud c;
  c.positions.reserve(static_cast<std::size_t>(4 * mesh.element_count()));
  for (int e = 0; e < mesh.element_count(); ++e) {
    for (const Vec2& ref : gauss2x2_points()) c.positions.push_back(mesh.to_physical(e, ref));
  }
  return c;
}

HistoryState HistoryState::zeros(std::size_t count) {
  HistoryState h;
  h.sigma.assign(count, SymTensor2{});
  h.xi.assign(count, 0.0);
  h.y0.assign(count, 0.0);
  h.gamma_rate.assign(count, 0.0);
  return h;
}

bool HistoryState::consistent() const {
  const std::size_t n = sigma.size();
  return xi.size() == n && y0.size() == n && gamma_rate.size() == n;
}

bool HistoryState::finite() const {
  auto fin = [](double v) { return std::isfinite(v); };
  return std::all_of(sigma.begin(), sigma.end(), [](const SymTensor2& s) { return s.finite(); }) &&
         std::all_of(xi.begin(), xi.end(), fin) && std::all_of(y0.begin(), y0.end(), fin) &&
         std::isfinite(time);
}

SamplePointCloud convect_positions(const SamplePointCloud& cloud, const VelocityView& u, double dt, int* clamped) {
  const GridMesh& mesh = u.mesh();
  SamplePointCloud out;
  out.positions.reserve(cloud.count());
  int nclamp = 0;
  for (const Vec2& x : cloud.positions) {
    const Vec2 moved = x + u.at(x) * dt;
    const Vec2 c = mesh.clamp(moved);
    if (c != moved) ++nclamp;
    out.positions.push_back(c);
  }
  if (clamped != nullptr) *clamped = nclamp;
  return out;
}

PointBins::PointBins(const std::vector<Vec2>& points, double cell) : points_(&points), cell_(cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("PointBins: cell size must be positive");
  if (points.empty()) {
    lo_ = Vec2::Zero();
    start_.assign(2, 0);
    return;
  }
  lo_ = points.front();
  Vec2 hi = lo_;
  for (const Vec2& p : points) {
    lo_ = lo_.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // cap the bin count for tiny radii
  const double max_bins = 4.0 * static_cast<double>(points.size()) + 16.0;
  while (((hi.x() - lo_.x()) / cell_ + 1.0) * ((hi.y() - lo_.y()) / cell_ + 1.0) > max_bins) cell_ *= 2.0;
  nx_ = std::max(1, static_cast<int>(std::floor((hi.x() - lo_.x()) / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::floor((hi.y() - lo_.y()) / cell_)) + 1);
  const auto ncell = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  start_.assign(ncell + 1, 0);
  std::vector<int> bin(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int bx = std::min(nx_ - 1, static_cast<int>((points[i].x() - lo_.x()) / cell_));
    const int by = std::min(ny_ - 1, static_cast<int>((points[i].y() - lo_.y()) / cell_));
    bin[i] = bx + nx_ * by;
    ++start_[static_cast<std::size_t>(bin[i]) + 1];
  }
  for (std::size_t c = 0; c < ncell; ++c) start_[c + 1] += start_[c];
  ids_.resize(points.size());
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ids_[static_cast<std::size_t>(fill[static_cast<std::size_t>(bin[i])]++)] = static_cast<int>(i);
  }
}

std::vector<int> PointBins::query(const Vec2& center, double radius) const {
  std::vector<int> out;
  visit(center, radius, [&](int id, double) { out.push_back(id); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> neighbor_query(const SamplePointCloud& cloud, const Vec2& center, double re) {
  if (cloud.positions.empty()) return {};
  const PointBins bins(cloud.positions, re > 0.0 ? re : 1.0);
  return bins.query(center, re);
}

namespace {

// keep_masked: sources and field points share indices, and a source whose own
// field point is masked keeps its values without counting as a fallback.
HistoryState average_impl(const HistoryState& history, const std::vector<Vec2>& sources,
                          const std::vector<Vec2>& field_positions, const KernelParams& params,
                          TransportStats* stats, const std::vector<char>* active, bool keep_masked) {
  params.validate();
  if (!history.consistent() || history.size() != field_positions.size()) {
    throw std::invalid_argument("nonlocal_average: history channels do not match the field points");
  }
  if (active != nullptr && active->size() != field_positions.size()) {
    throw std::invalid_argument("nonlocal_average: active mask does not match the field points");
  }
  auto is_active = [&](int n) { return active == nullptr || (*active)[static_cast<std::size_t>(n)] != 0; };

  HistoryState out = HistoryState::zeros(sources.size());
  out.time = history.time;
  const PointBins bins(field_positions, params.re);
  int fallbacks = 0;
  for (std::size_t m = 0; m < sources.size(); ++m) {
    if (keep_masked && !is_active(static_cast<int>(m))) {
      out.sigma[m] = history.sigma[m];
      out.xi[m] = history.xi[m];
      out.y0[m] = history.y0[m];
      continue;
    }
    double wsum = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    double xi = 0.0;
    double y0 = 0.0;
    bins.visit(sources[m], params.re, [&](int n, double d) {
      if (!is_active(n)) return;
      const double w = gaussian_weight(d, params);
      const auto k = static_cast<std::size_t>(n);
      wsum += w;
      sxx += w * history.sigma[k].xx;
      syy += w * history.sigma[k].yy;
      sxy += w * history.sigma[k].xy;
      xi += w * history.xi[k];
      y0 += w * history.y0[k];
    });
    if (wsum > 0.0) {
      out.sigma[m] = {sxx / wsum, syy / wsum, sxy / wsum};
      out.xi[m] = xi / wsum;
      out.y0[m] = y0 / wsum;
      continue;
    }
    ++fallbacks;
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < field_positions.size(); ++n) {
      if (!is_active(static_cast<int>(n))) continue;
      const double d = (field_positions[n] - sources[m]).squaredNorm();
      if (d < bd) {
        bd = d;
        best = static_cast<int>(n);
      }
    }
    if (history.size() == 0) continue;
    const std::size_t k = best >= 0 ? static_cast<std::size_t>(best) : std::min(m, history.size() - 1);
    out.sigma[m] = history.sigma[k];
    out.xi[m] = history.xi[k];
    out.y0[m] = history.y0[k];
  }
  if (stats != nullptr) stats->fallbacks = fallbacks;
  return out;
}

}  // namespace

HistoryState nonlocal_average(const HistoryState& history, const std::vector<Vec2>& sources,
                              const std::vector<Vec2>& field_positions, const KernelParams& params,
                              TransportStats* stats, const std::vector<char>* active) {
  return average_impl(history, sources, field_positions, params, stats, active, false);
}

HistoryState nonlocal_transport(const HistoryState& history, const SamplePointCloud& cloud, const VelocityView& u,
                                double dt, const KernelParams& params, TransportStats* stats,
                                const std::vector<char>* active) {
  if (history.size() != cloud.count()) {
    throw std::invalid_argument("nonlocal_transport: history size does not match the sample cloud");
  }
  int clamped = 0;
  const SamplePointCloud moved = convect_positions(cloud, u, dt, &clamped);
  HistoryState out = average_impl(history, cloud.positions, moved.positions, params, stats, active, true);
  out.time = history.time + dt;
  if (stats != nullptr) stats->clamped = clamped;
  return out;
}

}  // namespace vmsfem
