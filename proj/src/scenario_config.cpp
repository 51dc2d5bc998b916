#include "vmsfem/scenario_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace vmsfem {

namespace pt = boost::property_tree;

Scale parse_scale(const std::string& s) {
  if (s == "desk") return Scale::desk;
  if (s == "full") return Scale::full;
  throw ConfigError("scale must be 'desk' or 'full' (got '" + s + "')");
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"scenario", {"id", "length"}},
      {"mesh", {"x0", "y0", "x1", "y1", "nx", "ny", "nx_full", "ny_full", "symmetry_top", "pin_x", "pin_y"}},
      {"time", {"dt", "steps", "dt_full", "steps_full"}},
      {"body",
       {"shape", "center_x", "center_y", "radius", "plate_x", "plate_y0", "plate_y1", "friction", "mu_fric",
        "schedule", "schedule_full"}},
      {"soil",
       {"rho", "mu", "su", "delta_rem", "xi95", "mu_rate", "gamma_ref", "young_over_su", "poisson",
        "depth_dependent", "su_mudline", "k_su", "y0_free", "unit_weight"}},
      {"water", {"enabled", "rho", "mu", "mudline"}},
      {"numerics", {"bubble", "stabilized", "beta1", "kernel_r0", "kernel_re"}},
      {"force", {"axis", "sign", "multiplier", "su_ref"}},
      {"output", {"dir", "csv_every", "vtk_every"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  T get(const std::string& section, const std::string& key, const T& fallback) const {
    const auto node = tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.'));
    if (!node) return fallback;
    return convert<T>(section, key, node->data());
  }

  template <typename T>
  T require(const std::string& section, const std::string& key) const {
    const auto node = tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.'));
    if (!node) throw ConfigError("missing required field '" + key + "' in section [" + section + "]");
    return convert<T>(section, key, node->data());
  }

  [[nodiscard]] bool has(const std::string& section, const std::string& key) const {
    return static_cast<bool>(tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.')));
  }

 private:
  const pt::ptree& tree_;

  template <typename T>
  static T convert(const std::string& section, const std::string& key, const std::string& raw) {
    std::istringstream in(raw);
    T v{};
    if constexpr (std::is_same_v<T, bool>) {
      std::string s;
      in >> s;
      if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
      if (s == "false" || s == "0" || s == "no" || s == "off") return false;
      throw ConfigError("field '" + key + "' in [" + section + "] must be a boolean (got '" + raw + "')");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return raw;
    } else {
      in >> v;
      std::string rest;
      if (in.fail() || (in >> rest)) {
        throw ConfigError("field '" + key + "' in [" + section + "] has invalid value '" + raw + "'");
      }
      return v;
    }
  }
};

std::vector<ScheduleSegment> parse_schedule(const std::string& text) {
  std::vector<ScheduleSegment> out;
  std::istringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    std::istringstream in(item);
    ScheduleSegment seg;
    double vx = 0.0;
    double vy = 0.0;
    if (!(in >> seg.t_end)) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      throw ConfigError("field 'schedule' in [body]: cannot parse segment '" + item + "'");
    }
    if (!(in >> vx >> vy)) throw ConfigError("field 'schedule' in [body]: segment '" + item + "' needs t_end vx vy");
    seg.velocity = {vx, vy};
    out.push_back(seg);
  }
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto need = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError("invalid field '" + field + "': " + what);
  };
  need(length > 0.0, "length", "must be positive");
  need(domain.width() > 0.0, "x1", "domain must have positive width");
  need(domain.height() > 0.0, "y1", "domain must have positive height");
  need(nx >= 1, "nx", "must be >= 1");
  need(ny >= 1, "ny", "must be >= 1");
  need(dt > 0.0 && std::isfinite(dt), "dt", "must be positive");
  need(steps >= 0, "steps", "must be >= 0");
  need(shape != BodyShape::circle || radius > 0.0, "radius", "must be positive");
  need(shape != BodyShape::plate || plate_y1 > plate_y0, "plate_y1", "must exceed plate_y0");
  need(mu_fric >= 0.0, "mu_fric", "must be >= 0");
  double last = 0.0;
  for (const auto& seg : schedule) {
    need(seg.t_end > last, "schedule", "segment end times must be positive and strictly increasing");
    last = seg.t_end;
  }
  need(soil_rho > 0.0, "rho", "soil density must be positive");
  need(soil_mu >= 0.0, "mu", "soil viscosity must be >= 0");
  try {
    soil.base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid soil parameters: ") + e.what());
  }
  need(!soil.depth_dependent || soil.su_mudline > 0.0, "su_mudline", "must be positive");
  need(!water || water_rho > 0.0, "rho", "water density must be positive");
  need(!water || water_mu >= 0.0, "mu", "water viscosity must be >= 0");
  need(beta1 >= 0.0, "beta1", "must be >= 0");
  need(kernel_r0 > 0.0, "kernel_r0", "must be positive");
  need(kernel_re >= kernel_r0, "kernel_re", "must be >= kernel_r0");
  need(force_axis == 'x' || force_axis == 'y', "axis", "must be x or y");
  need(su_ref > 0.0, "su_ref", "must be positive");
  need(csv_every >= 1, "csv_every", "must be >= 1");
  need(vtk_every >= 0, "vtk_every", "must be >= 0");
}

Vec2 ScenarioConfig::velocity_at(double t) const {
  for (const auto& seg : schedule) {
    if (t < seg.t_end - 1e-12 * dt) return seg.velocity;
  }
  return Vec2::Zero();
}

double ScenarioConfig::last_switch_time() const {
  const double t_final = steps * dt;
  double last = 0.0;
  for (const auto& seg : schedule) {
    if (seg.t_end < t_final - 1e-12 * dt) last = seg.t_end;
  }
  return last;
}

KernelParams ScenarioConfig::kernel(const GridMesh& mesh) const {
  const double h = mesh.h_ele();
  return {kernel_r0 * h, kernel_re * h};
}

std::string ScenarioConfig::to_ini() const {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "[scenario]\nid = " << id << "\nlength = " << length << "\n\n";
  o << "[mesh]\nx0 = " << domain.x0 << "\ny0 = " << domain.y0 << "\nx1 = " << domain.x1 << "\ny1 = " << domain.y1
    << "\nnx = " << nx << "\nny = " << ny << "\nsymmetry_top = " << (symmetry_top ? "true" : "false")
    << "\npin_x = " << pressure_pin.x() << "\npin_y = " << pressure_pin.y() << "\n\n";
  o << "[time]\ndt = " << dt << "\nsteps = " << steps << "\n\n";
  o << "[body]\nshape = " << (shape == BodyShape::circle ? "circle" : "plate") << "\n";
  if (shape == BodyShape::circle) {
    o << "center_x = " << center.x() << "\ncenter_y = " << center.y() << "\nradius = " << radius << "\n";
  } else {
    o << "plate_x = " << plate_x << "\nplate_y0 = " << plate_y0 << "\nplate_y1 = " << plate_y1 << "\n";
  }
  o << "friction = " << to_string(friction) << "\nmu_fric = " << mu_fric << "\nschedule = ";
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    o << (i ? "; " : "") << schedule[i].t_end << " " << schedule[i].velocity.x() << " " << schedule[i].velocity.y();
  }
  o << "\n\n[soil]\nrho = " << soil_rho << "\nmu = " << soil_mu << "\nsu = " << soil.base.sigma0
    << "\ndelta_rem = " << soil.base.delta_rem << "\nxi95 = " << soil.base.xi95 << "\nmu_rate = " << soil.base.mu_rate
    << "\ngamma_ref = " << soil.base.gamma_ref << "\nyoung_over_su = " << soil.base.young / soil.base.sigma0
    << "\npoisson = " << soil.base.poisson << "\ndepth_dependent = " << (soil.depth_dependent ? "true" : "false")
    << "\nsu_mudline = " << soil.su_mudline << "\nk_su = " << soil.k_su << "\ny0_free = " << soil.y0_free
    << "\nunit_weight = " << unit_weight << "\n\n";
  o << "[water]\nenabled = " << (water ? "true" : "false") << "\nrho = " << water_rho << "\nmu = " << water_mu
    << "\nmudline = " << mudline << "\n\n";
  o << "[numerics]\nbubble = " << (bubble ? "true" : "false") << "\nstabilized = " << (stabilized ? "true" : "false")
    << "\nbeta1 = " << beta1 << "\nkernel_r0 = " << kernel_r0 << "\nkernel_re = " << kernel_re << "\n\n";
  o << "[force]\naxis = " << force_axis << "\nsign = " << force_sign << "\nmultiplier = " << force_multiplier
    << "\nsu_ref = " << su_ref << "\n\n";
  o << "[output]\ndir = " << out_dir << "\ncsv_every = " << csv_every << "\nvtk_every = " << vtk_every << "\n";
  return o.str();
}

ScenarioConfig parse_config(const std::string& ini_text, Scale scale) {
  pt::ptree tree;
  try {
    std::istringstream in(ini_text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, child] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (child.empty()) throw ConfigError("key '" + section + "' must belong to a section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& kv : child) {
      if (it->second.count(kv.first) == 0) {
        throw ConfigError("unknown field '" + kv.first + "' in section [" + section + "]");
      }
    }
  }

  const Reader r(tree);
  ScenarioConfig c;
  c.id = r.get<std::string>("scenario", "id", c.id);
  c.length = r.get("scenario", "length", c.length);

  c.domain.x0 = r.get("mesh", "x0", 0.0);
  c.domain.y0 = r.get("mesh", "y0", 0.0);
  c.domain.x1 = r.require<double>("mesh", "x1");
  c.domain.y1 = r.require<double>("mesh", "y1");
  c.nx = r.require<int>("mesh", "nx");
  c.ny = r.require<int>("mesh", "ny");
  if (scale == Scale::full) {
    c.nx = r.get("mesh", "nx_full", c.nx);
    c.ny = r.get("mesh", "ny_full", c.ny);
  }
  c.symmetry_top = r.get("mesh", "symmetry_top", false);
  c.pressure_pin = {r.get("mesh", "pin_x", c.domain.x1), r.get("mesh", "pin_y", 0.5 * (c.domain.y0 + c.domain.y1))};

  c.dt = r.require<double>("time", "dt");
  c.steps = r.require<int>("time", "steps");
  if (scale == Scale::full) {
    c.dt = r.get("time", "dt_full", c.dt);
    c.steps = r.get("time", "steps_full", c.steps);
  }

  const std::string shape = r.get<std::string>("body", "shape", "circle");
  if (shape == "circle") {
    c.shape = BodyShape::circle;
  } else if (shape == "plate") {
    c.shape = BodyShape::plate;
  } else {
    throw ConfigError("field 'shape' in [body] must be circle or plate (got '" + shape + "')");
  }
  c.center = {r.get("body", "center_x", 0.5 * (c.domain.x0 + c.domain.x1)),
              r.get("body", "center_y", 0.5 * (c.domain.y0 + c.domain.y1))};
  c.radius = r.get("body", "radius", 0.5 * c.length);
  c.plate_x = r.get("body", "plate_x", c.center.x());
  c.plate_y0 = r.get("body", "plate_y0", c.center.y() - 0.5 * c.length);
  c.plate_y1 = r.get("body", "plate_y1", c.center.y() + 0.5 * c.length);
  try {
    c.friction = parse_friction_model(r.get<std::string>("body", "friction", "non_slip"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field 'friction' in [body]: ") + e.what());
  }
  c.mu_fric = r.get("body", "mu_fric", 0.0);
  c.schedule = parse_schedule(r.get<std::string>("body", "schedule", ""));
  if (scale == Scale::full && r.has("body", "schedule_full")) {
    c.schedule = parse_schedule(r.get<std::string>("body", "schedule_full", ""));
  }

  c.soil_rho = r.get("soil", "rho", c.soil_rho);
  c.soil_mu = r.get("soil", "mu", c.soil_mu);
  SoilParams& sp = c.soil.base;
  sp.sigma0 = r.get("soil", "su", sp.sigma0);
  sp.delta_rem = r.get("soil", "delta_rem", 1.0);
  sp.xi95 = r.get("soil", "xi95", sp.xi95);
  sp.mu_rate = r.get("soil", "mu_rate", 0.0);
  sp.gamma_ref = r.get("soil", "gamma_ref", sp.gamma_ref);
  const double e_ratio = r.get("soil", "young_over_su", 400.0);
  sp.poisson = r.get("soil", "poisson", sp.poisson);
  c.soil.depth_dependent = r.get("soil", "depth_dependent", false);
  c.soil.su_mudline = r.get("soil", "su_mudline", sp.sigma0);
  c.soil.k_su = r.get("soil", "k_su", 0.0);
  c.soil.y0_free = r.get("soil", "y0_free", c.domain.y1);
  if (c.soil.depth_dependent) {
    c.soil.young_over_su = e_ratio;
    sp.sigma0 = c.soil.su_mudline;
  }
  sp.young = e_ratio * sp.sigma0;
  c.unit_weight = r.get("soil", "unit_weight", 0.0);

  c.water = r.get("water", "enabled", false);
  c.water_rho = r.get("water", "rho", c.water_rho);
  c.water_mu = r.get("water", "mu", c.water_mu);
  c.mudline = r.get("water", "mudline", c.soil.y0_free);

  c.bubble = r.get("numerics", "bubble", false);
  c.stabilized = r.get("numerics", "stabilized", true);
  c.beta1 = r.get("numerics", "beta1", c.beta1);
  c.kernel_r0 = r.get("numerics", "kernel_r0", c.kernel_r0);
  c.kernel_re = r.get("numerics", "kernel_re", c.kernel_re);

  const std::string axis = r.get<std::string>("force", "axis", "x");
  if (axis != "x" && axis != "y") throw ConfigError("field 'axis' in [force] must be x or y");
  c.force_axis = axis[0];
  c.force_sign = r.get("force", "sign", -1.0);
  c.force_multiplier = r.get("force", "multiplier", 1.0);
  c.su_ref = r.get("force", "su_ref", c.soil.depth_dependent ? c.soil.su_mudline : sp.sigma0);

  c.out_dir = r.get<std::string>("output", "dir", "out/" + c.id);
  c.csv_every = r.get("output", "csv_every", 1);
  c.vtk_every = r.get("output", "vtk_every", 0);

  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path, Scale scale) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str(), scale);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ScenarioConfig resolve_config(const std::string& name_or_path, Scale scale) {
  if (is_preset(name_or_path)) return load_preset(name_or_path, scale);
  return load_config(name_or_path, scale);
}

}  // namespace vmsfem
