#pragma once

#include "vmsfem/history_transport.hpp"
#include "vmsfem/mesh.hpp"
#include "vmsfem/rigid_coupling.hpp"
#include "vmsfem/soil_plasticity.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <string>
#include <vector>

namespace vmsfem {

/// Configuration parse or validation problem; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scale { desk, full };

Scale parse_scale(const std::string& s);

/// Body velocity `velocity` until time `t_end`.
struct ScheduleSegment {
  double t_end = 0.0;
  Vec2 velocity = Vec2::Zero();
};

enum class BodyShape { circle, plate };

struct ScenarioConfig {
  std::string id = "custom";
  double length = 1.0;

  Rect domain;
  int nx = 10;
  int ny = 10;
  bool symmetry_top = false;
  Vec2 pressure_pin = Vec2::Zero();

  double dt = 1e-3;
  int steps = 1;

  BodyShape shape = BodyShape::circle;
  Vec2 center = Vec2::Zero();
  double radius = 0.5;
  double plate_x = 0.0;
  double plate_y0 = 0.0;
  double plate_y1 = 1.0;
  FrictionModel friction = FrictionModel::non_slip;
  double mu_fric = 0.0;
  std::vector<ScheduleSegment> schedule;

  double soil_rho = 1700.0;
  double soil_mu = 10.0;
  SoilModel soil;
  double unit_weight = 0.0;

  bool water = false;
  double water_rho = 1000.0;
  double water_mu = 1.0;
  double mudline = 0.0;

  bool bubble = false;
  bool stabilized = true;
  double beta1 = 0.5;
  double kernel_r0 = 0.25;  // in units of h
  double kernel_re = 2.5;  // in units of h

  char force_axis = 'x';
  double force_sign = -1.0;
  double force_multiplier = 1.0;
  double su_ref = 1100.0;

  std::string out_dir = "out";
  int csv_every = 1;
  int vtk_every = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  [[nodiscard]] Vec2 velocity_at(double t) const;
  [[nodiscard]] double last_switch_time() const;
  [[nodiscard]] KernelParams kernel(const GridMesh& mesh) const;
  /// Configuration echoed as INI text (defaults filled in).
  [[nodiscard]] std::string to_ini() const;
};

ScenarioConfig parse_config(const std::string& ini_text, Scale scale = Scale::desk);
ScenarioConfig load_config(const std::string& path, Scale scale = Scale::desk);

/// Built-in presets.
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
std::string preset_ini(const std::string& name);
ScenarioConfig load_preset(const std::string& name, Scale scale = Scale::desk);

/// Accepted steady-window band of N for presets that have an analytical target.
std::optional<std::pair<double, double>> acceptance_band(const std::string& preset);

/// A preset name or a path to an INI file.
ScenarioConfig resolve_config(const std::string& name_or_path, Scale scale = Scale::desk);

}  // namespace vmsfem
