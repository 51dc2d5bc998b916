#include "vmsfem/soil_plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vmsfem {

void SoilParams::validate() const {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("SoilParams: sigma0 must be positive");
  if (!(delta_rem > 0.0 && delta_rem <= 1.0)) throw std::invalid_argument("SoilParams: delta_rem must be in (0, 1]");
  if (!(xi95 > 0.0)) throw std::invalid_argument("SoilParams: xi95 must be positive");
  if (!(mu_rate >= 0.0)) throw std::invalid_argument("SoilParams: mu_rate must be >= 0");
  if (!(gamma_ref > 0.0)) throw std::invalid_argument("SoilParams: gamma_ref must be positive");
  if (!(young > 0.0)) throw std::invalid_argument("SoilParams: young must be positive");
  if (!(poisson > 0.0 && poisson < 0.5)) throw std::invalid_argument("SoilParams: poisson must be in (0, 0.5)");
}

SoilParams SoilModel::at(double y0) const {
  if (!depth_dependent) return base;
  SoilParams p = base;
  p.sigma0 = su_mudline + k_su * std::abs(y0 - y0_free);
  if (young_over_su > 0.0) p.young = young_over_su * p.sigma0;
  return p;
}

StrainIncrement strain_increment(const Mat2& g, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("strain_increment: dt must be positive");
  const double exx = g(0, 0);
  const double eyy = g(1, 1);
  const double exy = 0.5 * (g(0, 1) + g(1, 0));
  StrainIncrement inc;
  inc.d_eps = {exx * dt, eyy * dt, exy * dt};
  const double c = 0.5 * (exx + eyy);
  const double r = std::sqrt(0.25 * (exx - eyy) * (exx - eyy) + exy * exy);
  inc.rate1 = c + r;
  inc.rate2 = c - r;
  return inc;
}

StrainIncrement strain_increment(const VelocityView& u, int elem, const Vec2& ref, double dt) {
  return strain_increment(u.gradient(elem, ref.x(), ref.y()), dt);
}

double tresca_measure(const SymTensor2& s) {
  const double d = s.xx - s.yy;
  return std::sqrt(0.25 * d * d + s.xy * s.xy);
}

double yield_stress(double xi, double gamma_max, const SoilParams& p) {
  const double soft = p.delta_rem + (1.0 - p.delta_rem) * std::exp(-xi / p.xi95);
  const double rate = 1.0 + p.mu_rate * std::log10(std::max(gamma_max, p.gamma_ref) / p.gamma_ref);
  return p.sigma0 * soft * rate;
}

PlasticReturn return_map(const SymTensor2& sigma_old, const StrainIncrement& inc, double xi_old, double dt,
                         const SoilParams& p) {
  if (!(dt > 0.0)) throw std::invalid_argument("return_map: dt must be positive");
  const double g = p.shear_modulus();
  const double m_old = sigma_old.mean();
  const double m_eps = 0.5 * (inc.d_eps.xx + inc.d_eps.yy);
  SymTensor2 trial{sigma_old.xx - m_old + 2.0 * g * (inc.d_eps.xx - m_eps),
                   sigma_old.yy - m_old + 2.0 * g * (inc.d_eps.yy - m_eps), sigma_old.xy + 2.0 * g * inc.d_eps.xy};
  if (!trial.finite() || !std::isfinite(xi_old)) {
    throw ConsistencyFailure("return_map: non-finite trial state");
  }

  PlasticReturn out;
  out.xi = xi_old;
  const double q_tr = tresca_measure(trial);
  if (q_tr <= yield_stress(xi_old, inc.gamma_max(), p)) {
    out.sigma = trial;
    return out;
  }

  auto psi = [&](double dl) { return q_tr - g * dl - yield_stress(xi_old + dl, dl / dt, p); };
  const double tol = 1e-12 * p.sigma0;
  double lo = 0.0;
  double hi = q_tr / g;
  double f_lo = psi(lo);
  double f_hi = psi(hi);
  int doublings = 0;
  while (f_hi > 0.0 && doublings < 60) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = psi(hi);
    ++doublings;
  }
  if (f_lo < 0.0 || f_hi > 0.0) {
    std::ostringstream msg;
    msg << "return_map: no sign change of the consistency function (q_tr=" << q_tr << ", xi=" << xi_old
        << ", psi(lo)=" << f_lo << ", psi(hi)=" << f_hi << ")";
    throw ConsistencyFailure(msg.str());
  }
  double dl = 0.5 * (lo + hi);
  int it = 0;
  for (; it < 400; ++it) {
    dl = 0.5 * (lo + hi);
    const double f = psi(dl);
    if (std::abs(f) <= tol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    if (f > 0.0) {
      lo = dl;
    } else {
      hi = dl;
    }
  }
  const double scale = 1.0 - g * dl / q_tr;
  out.sigma = {trial.xx * scale, trial.yy * scale, trial.xy * scale};
  const double m = out.sigma.mean();
  out.sigma.xx -= m;
  out.sigma.yy -= m;
  out.xi = xi_old + dl;
  out.dlambda = dl;
  out.yielded = true;
  out.iterations = it + 1;
  return out;
}

HistoryState update_extra_stress(const HistoryState& history, const VelocityView& u, double dt,
                                 const SoilModel& soil, const std::vector<char>& soil_mask,
                                 ConstitutiveStats* stats) {
  const GridMesh& mesh = u.mesh();
  const auto n = static_cast<std::size_t>(4 * mesh.element_count());
  if (history.size() != n || !history.consistent()) {
    throw std::invalid_argument("update_extra_stress: history must hold 4 points per element");
  }
  if (soil_mask.size() != n) throw std::invalid_argument("update_extra_stress: soil mask size mismatch");
  HistoryState out = history;
  ConstitutiveStats st;
  const auto& pts = gauss2x2_points();
  for (int e = 0; e < mesh.element_count(); ++e) {
    for (int q = 0; q < 4; ++q) {
      const auto k = static_cast<std::size_t>(4 * e + q);
      const StrainIncrement inc = strain_increment(u, e, pts[static_cast<std::size_t>(q)], dt);
      out.gamma_rate[k] = inc.gamma_max();
      if (soil_mask[k] == 0) continue;
      ++st.soil_points;
      const SoilParams params = soil.at(history.y0[k]);
      PlasticReturn r;
      try {
        r = return_map(history.sigma[k], inc, history.xi[k], dt, params);
      } catch (const ConsistencyFailure& ex) {
        throw ConsistencyFailure(std::string(ex.what()) + " at sample point " + std::to_string(k));
      }
      out.sigma[k] = r.sigma;
      out.xi[k] = r.xi;
      if (r.yielded) ++st.yielded;
    }
  }
  if (stats != nullptr) *stats = st;
  return out;
}

}  // namespace vmsfem
