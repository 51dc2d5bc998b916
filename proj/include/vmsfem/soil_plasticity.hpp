#pragma once

#include "vmsfem/fields.hpp"
#include "vmsfem/history_transport.hpp"
#include "vmsfem/mesh.hpp"

#include <vector>

namespace vmsfem {

struct SoilParams {
  double sigma0 = 1100.0;
  double delta_rem = 1.0;
  double xi95 = 10.0;
  double mu_rate = 0.0;
  double gamma_ref = 3e-6;
  double young = 440000.0;
  double poisson = 0.495;

  void validate() const;
  [[nodiscard]] double shear_modulus() const { return young / (2.0 * (1.0 + poisson)); }
};

/// Strength profile: optionally s_u(y0) = s_um + k_su |y0 - y0_free| with
/// E = young_over_su * s_u when young_over_su > 0.
struct SoilModel {
  SoilParams base;
  bool depth_dependent = false;
  double su_mudline = 0.0;
  double k_su = 0.0;
  double y0_free = 0.0;
  double young_over_su = 0.0;

  [[nodiscard]] SoilParams at(double y0) const;
};

struct StrainIncrement {
  SymTensor2 d_eps;
  double rate1 = 0.0;
  double rate2 = 0.0;

  [[nodiscard]] double gamma_max() const { return rate1 - rate2; }
};

/// d_eps = sym(grad u) dt; rates are the ordered eigenvalues of sym(grad u).
StrainIncrement strain_increment(const Mat2& grad_u, double dt);
StrainIncrement strain_increment(const VelocityView& u, int elem, const Vec2& ref, double dt);

/// sqrt(0.25 (s11 - s22)^2 + s12^2) of the deviator.
double tresca_measure(const SymTensor2& sigma);

/// sigma0 (d + (1-d) exp(-xi/xi95)) (1 + mu log10(max(rate, ref)/ref)).
double yield_stress(double xi, double gamma_max, const SoilParams& params);

struct PlasticReturn {
  SymTensor2 sigma;
  double xi = 0.0;
  double dlambda = 0.0;
  bool yielded = false;
  int iterations = 0;
};

/// Deviatoric elastic trial followed by a radial return with dlambda found by
/// bisection on the consistency condition. Mean stress stays zero.
PlasticReturn return_map(const SymTensor2& sigma_old, const StrainIncrement& inc, double xi_old, double dt,
                         const SoilParams& params);

struct ConstitutiveStats {
  int yielded = 0;
  int soil_points = 0;
};

/// Applies return_map at every point with soil_mask != 0; other points are
/// copied unchanged. gamma_rate is refreshed at every point.
HistoryState update_extra_stress(const HistoryState& history, const VelocityView& u, double dt,
                                 const SoilModel& soil, const std::vector<char>& soil_mask,
                                 ConstitutiveStats* stats = nullptr);

}  // namespace vmsfem
