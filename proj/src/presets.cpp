#include "vmsfem/scenario_config.hpp"

#include <algorithm>
#include <map>

namespace vmsfem {

namespace {

// Desk-scale defaults; *_full keys hold the paper-scale mesh where known.
const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p{
      {"plate_5x6", R"(; Buried plate dragged horizontally; half of a 5B x 6B domain.
[scenario]
id = plate_5x6
length = 1.0
[mesh]
x1 = 5.0
y1 = 3.0
nx = 120
ny = 72
nx_full = 240
ny_full = 144
symmetry_top = true
pin_x = 5.0
pin_y = 1.5
[time]
dt = 1e-3
steps = 2000
[body]
shape = plate
plate_x = 2.5
plate_y0 = 2.5
plate_y1 = 3.0
friction = non_slip
schedule = 1000 0.1 0
[soil]
rho = 1700
mu = 10
su = 1100
young_over_su = 400
poisson = 0.495
[numerics]
bubble = true
[force]
axis = x
sign = -1
multiplier = 2
)"},
      {"pipe_10x10", R"(; Fully buried pipe dragged horizontally in a 10D x 10D domain.
[scenario]
id = pipe_10x10
length = 1.0
[mesh]
x1 = 10.0
y1 = 10.0
nx = 100
ny = 100
nx_full = 355
ny_full = 355
pin_x = 10.0
pin_y = 5.0
[time]
dt = 1e-3
steps = 1200
steps_full = 20000
[body]
shape = circle
center_x = 5.0
center_y = 5.0
radius = 0.5
friction = non_slip
schedule = 1000 0.1 0
schedule_full = 1000 0.01 0
[soil]
rho = 1700
mu = 10
su = 1100
young_over_su = 400
poisson = 0.495
[numerics]
bubble = true
[force]
axis = x
sign = -1
)"},
      {"pipe_penetration_rough", R"(; Vertical penetration of a pipe into uniform soil under water, fully rough.
[scenario]
id = pipe_penetration_rough
length = 1.0
[mesh]
y0 = 1.5
x1 = 6.0
y1 = 5.0
nx = 72
ny = 42
nx_full = 180
ny_full = 105
pin_x = 0.0
pin_y = 5.0
[time]
dt = 1.5e-3
steps = 1340
[body]
shape = circle
center_x = 3.0
center_y = 4.0
radius = 0.5
friction = non_slip
schedule = 1000 0 -0.25
[soil]
rho = 1700
mu = 10
su = 1100
young_over_su = 400
poisson = 0.495
[water]
enabled = true
rho = 1000
mu = 10
mudline = 3.5
[numerics]
bubble = false
[force]
axis = y
sign = 1
)"},
      {"pipe_penetration_smooth", R"(; Vertical penetration of a pipe into uniform soil under water, smooth.
[scenario]
id = pipe_penetration_smooth
length = 1.0
[mesh]
y0 = 1.5
x1 = 6.0
y1 = 5.0
nx = 72
ny = 42
nx_full = 180
ny_full = 105
pin_x = 0.0
pin_y = 5.0
[time]
dt = 1.5e-3
steps = 1340
[body]
shape = circle
center_x = 3.0
center_y = 4.0
radius = 0.5
friction = slip
schedule = 1000 0 -0.25
[soil]
rho = 1700
mu = 10
su = 1100
young_over_su = 400
poisson = 0.495
[water]
enabled = true
rho = 1000
mu = 10
mudline = 3.5
[numerics]
bubble = false
[force]
axis = y
sign = 1
)"},
      {"pipe_lateral_ideal", R"(; Penetration to 0.45D, hold, then lateral sweep; depth-dependent ideal soil.
[scenario]
id = pipe_lateral_ideal
length = 0.8
[mesh]
y0 = 1.6
x1 = 7.2
y1 = 4.4
nx = 108
ny = 42
nx_full = 225
ny_full = 88
pin_x = 0.0
pin_y = 4.4
[time]
dt = 5e-4
steps = 6300
[body]
shape = circle
center_x = 2.4
center_y = 3.6
radius = 0.4
friction = non_slip
schedule = 0.9 0 -0.4; 1.15 0 0; 1000 0.4 0
[soil]
rho = 1663
mu = 10
su_mudline = 2300
k_su = 3600
y0_free = 3.2
depth_dependent = true
young_over_su = 400
poisson = 0.495
unit_weight = 6500
[water]
enabled = true
rho = 1000
mu = 10
mudline = 3.2
[numerics]
bubble = false
[force]
axis = x
sign = -1
su_ref = 2300
)"},
      {"pipe_lateral_softening", R"(; As pipe_lateral_ideal with strain softening and rate hardening.
[scenario]
id = pipe_lateral_softening
length = 0.8
[mesh]
y0 = 1.6
x1 = 7.2
y1 = 4.4
nx = 108
ny = 42
nx_full = 225
ny_full = 88
pin_x = 0.0
pin_y = 4.4
[time]
dt = 5e-4
steps = 6300
[body]
shape = circle
center_x = 2.4
center_y = 3.6
radius = 0.4
friction = non_slip
schedule = 0.9 0 -0.4; 1.15 0 0; 1000 0.4 0
[soil]
rho = 1663
mu = 10
su_mudline = 2300
k_su = 3600
y0_free = 3.2
depth_dependent = true
young_over_su = 400
poisson = 0.495
unit_weight = 6500
delta_rem = 0.3125
xi95 = 10
mu_rate = 0.1
gamma_ref = 1.5e-4
[water]
enabled = true
rho = 1000
mu = 10
mudline = 3.2
[numerics]
bubble = false
[force]
axis = x
sign = -1
su_ref = 2300
)"},
  };
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : presets()) names.push_back(name);
  return names;
}

bool is_preset(const std::string& name) { return presets().count(name) != 0; }

std::string preset_ini(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

std::optional<std::pair<double, double>> acceptance_band(const std::string& preset) {
  if (preset == "plate_5x6") return std::make_pair(10.3, 12.6);
  if (preset == "pipe_10x10") return std::make_pair(10.2, 13.7);
  return std::nullopt;
}

ScenarioConfig load_preset(const std::string& name, Scale scale) {
  try {
    return parse_config(preset_ini(name), scale);
  } catch (const ConfigError& e) {
    throw ConfigError("preset " + name + ": " + e.what());
  }
}

}  // namespace vmsfem
