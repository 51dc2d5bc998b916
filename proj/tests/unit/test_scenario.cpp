#include "vmsfem/output.hpp"
#include "vmsfem/scenario_config.hpp"
#include "vmsfem/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vmsfem;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"([scenario]
id = small
[mesh]
x1 = 2.0
y1 = 2.0
nx = 12
ny = 12
[time]
dt = 1e-3
steps = 4
[body]
center_x = 1.0
center_y = 1.0
radius = 0.3
schedule = 1 0.1 0
[soil]
su = 1100
[numerics]
bubble = true
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("vmsfem_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  if (at != std::string::npos) s.replace(at, from.size(), to);
  return s;
}

}  // namespace

TEST(Config, ParsesAndFillsDefaults) {
  const ScenarioConfig c = parse_config(kSmall);
  EXPECT_EQ(c.id, "small");
  EXPECT_EQ(c.nx, 12);
  EXPECT_DOUBLE_EQ(c.dt, 1e-3);
  EXPECT_EQ(c.steps, 4);
  EXPECT_TRUE(c.bubble);
  EXPECT_FALSE(c.water);
  EXPECT_EQ(c.friction, FrictionModel::non_slip);
  ASSERT_EQ(c.schedule.size(), 1u);
  EXPECT_DOUBLE_EQ(c.soil.base.young, 400.0 * 1100.0);
  EXPECT_GT(c.kernel_r0, 0.0);
  const ScenarioConfig again = parse_config(c.to_ini());
  EXPECT_EQ(again.to_ini(), c.to_ini());
}

TEST(Config, MissingDtNamesField) {
  try {
    parse_config(replace(kSmall, "dt = 1e-3\n", ""));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'dt'"), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config(replace(kSmall, "radius = 0.3", "radius = 0.3\nradious = 1")), ConfigError);
  EXPECT_THROW(parse_config(replace(kSmall, "[numerics]", "[bogus]")), ConfigError);
  EXPECT_THROW(parse_config(replace(kSmall, "dt = 1e-3", "dt = -1")), ConfigError);
  EXPECT_THROW(parse_config(replace(kSmall, "nx = 12", "nx = twelve")), ConfigError);
  EXPECT_THROW(parse_config(replace(kSmall, "schedule = 1 0.1 0", "schedule = 2 0 0; 1 0 0")), ConfigError);
  EXPECT_THROW(parse_config(replace(kSmall, "schedule = 1 0.1 0", "friction = sticky")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/cfg.ini"), ConfigError);
  EXPECT_THROW(load_preset("nope"), ConfigError);
  EXPECT_THROW(parse_scale("huge"), ConfigError);
}

TEST(Config, VelocitySchedule) {
  ScenarioConfig c = parse_config(replace(kSmall, "schedule = 1 0.1 0", "schedule = 0.5 0 -0.1; 0.7 0 0; 2 0.2 0"));
  EXPECT_EQ(c.velocity_at(0.0), Vec2(0, -0.1));
  EXPECT_EQ(c.velocity_at(0.6), Vec2(0, 0));
  EXPECT_EQ(c.velocity_at(1.0), Vec2(0.2, 0));
  EXPECT_EQ(c.velocity_at(3.0), Vec2(0, 0));
  c.steps = 2000;
  EXPECT_DOUBLE_EQ(c.last_switch_time(), 0.7);
}

TEST(Presets, PaperParameters) {
  const ScenarioConfig plate = load_preset("plate_5x6");
  EXPECT_DOUBLE_EQ(plate.length, 1.0);
  EXPECT_DOUBLE_EQ(plate.dt, 1e-3);
  EXPECT_DOUBLE_EQ(plate.domain.width(), 5.0);
  EXPECT_DOUBLE_EQ(2 * plate.domain.height(), 6.0);
  EXPECT_TRUE(plate.symmetry_top);
  EXPECT_NEAR(plate.velocity_at(0.0).x(), 0.1, 1e-15);

  const ScenarioConfig pipe = load_preset("pipe_10x10", Scale::full);
  EXPECT_EQ(pipe.nx, 355);
  EXPECT_EQ(pipe.ny, 355);
  EXPECT_DOUBLE_EQ(pipe.domain.width(), 10.0);
  EXPECT_DOUBLE_EQ(pipe.domain.height(), 10.0);
  EXPECT_NEAR(pipe.velocity_at(0.0).x(), 0.01, 1e-15);
  EXPECT_EQ(load_preset("pipe_10x10").nx, 100);

  for (const std::string& name : preset_names()) {
    EXPECT_NO_THROW(load_preset(name, Scale::desk)) << name;
    EXPECT_NO_THROW(load_preset(name, Scale::full)) << name;
  }
  EXPECT_TRUE(acceptance_band("plate_5x6").has_value());
  EXPECT_FALSE(acceptance_band("pipe_lateral_ideal").has_value());
}

TEST(SteadyWindow, FinalHalfAfterSwitch) {
  std::vector<ForceRecord> r;
  for (int i = 1; i <= 10; ++i) r.push_back({0.1 * i, 0, 0, static_cast<double>(i), 0});
  const WindowStats s = steady_window(r, 0.25);
  EXPECT_EQ(s.count, 4);
  EXPECT_DOUBLE_EQ(s.mean, 8.5);
  EXPECT_NEAR(s.stddev, std::sqrt(1.25), 1e-14);
  EXPECT_EQ(steady_window(r, 5.0).count, 0);
}

TEST(ForceCsv, Format) {
  const fs::path d = temp_dir("csv");
  write_force_csv({ForceRecord{}}, (d / "f.csv").string());
  EXPECT_EQ(slurp(d / "f.csv"), "t,fx,fy,n_dimless,embedment\n0,0,0,0,0\n");
  EXPECT_THROW(write_force_csv({}, (d / "g.csv").string()), std::invalid_argument);
  EXPECT_THROW(write_force_csv({ForceRecord{}}, "/nonexistent/dir/f.csv"), std::runtime_error);
  EXPECT_EQ(format_force_csv({ForceRecord{0.1, 1.0 / 3.0, 0, 0, 0}}),
            "t,fx,fy,n_dimless,embedment\n0.10000000000000001,0.33333333333333331,0,0,0\n");
}

TEST(VtkSnapshot, CountsAndFields) {
  const fs::path d = temp_dir("vtk");
  GridMesh m(2, 2, Rect{0, 0, 1, 1});
  FieldState s = FieldState::zeros(m, false);
  for (int n = 0; n < m.node_count(); ++n) s.u[2 * n] = 0.7;
  HistoryState h = HistoryState::zeros(16);
  for (auto& sg : h.sigma) sg = {-50.0, -50.0, 0.0};
  PhaseField phase;
  const VelocityView uv(m, s);
  SoilModel soil;
  h = update_extra_stress(h, uv, 0.01, soil, std::vector<char>(16, 0));
  write_field_snapshot(s, phase, h, m, soil, (d / "s.vtk").string());
  const std::string text = slurp(d / "s.vtk");
  EXPECT_NE(text.find("POINTS 9 double"), std::string::npos);
  EXPECT_NE(text.find("CELL_DATA 4"), std::string::npos);

  auto cell_block = [&](const std::string& name) {
    std::istringstream in(text.substr(text.find("SCALARS " + name)));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::vector<double> v(4);
    for (double& x : v) in >> x;
    return v;
  };
  for (double v : cell_block("tresca")) EXPECT_EQ(v, 0.0);
  for (double v : cell_block("gamma_max")) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(write_field_snapshot(s, phase, HistoryState::zeros(3), m, soil, (d / "x.vtk").string()),
               std::invalid_argument);
}

TEST(Run, ZeroVelocityGivesZeroForce) {
  ScenarioConfig c = parse_config(replace(kSmall, "schedule = 1 0.1 0\n", ""));
  Simulation sim(c);
  sim.advance(3);
  for (const ForceRecord& r : sim.forces()) {
    EXPECT_NEAR(r.fx, 0.0, 1e-9);
    EXPECT_NEAR(r.fy, 0.0, 1e-9);
  }
  EXPECT_NEAR(sim.state().u.lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
}

TEST(Run, DragOpposesMotionAndConsistentDimensionless) {
  const ScenarioConfig c = parse_config(kSmall);
  Simulation sim(c);
  sim.advance(3);
  const ForceRecord& r = sim.forces().back();
  EXPECT_LT(r.fx, 0.0);
  EXPECT_NEAR(r.n_dimless, -r.fx / (c.length * c.su_ref), 1e-12 * std::abs(r.n_dimless));
  EXPECT_GT(sim.diagnostics().cutting_points, 0);
  EXPECT_LE(sim.diagnostics().constraint_violation, 1e-8 * sim.diagnostics().constraint_scale);
  EXPECT_NEAR(sim.body().reference_point().x(), 1.0 + 3 * 0.1 * 1e-3, 1e-12);
}

TEST(Run, CopiesBranchIndependently) {
  Simulation a(parse_config(kSmall));
  a.advance(2);
  Simulation b = a;
  b.set_schedule({ScheduleSegment{1.0, Vec2(0, 0)}});
  a.step();
  b.step();
  EXPECT_EQ(a.step_index(), 3);
  EXPECT_EQ(b.step_index(), 3);
  EXPECT_NE(a.body().reference_point().x(), b.body().reference_point().x());
}

TEST(Run, DeterministicOutputFiles) {
  ScenarioConfig c = parse_config(kSmall);
  c.vtk_every = 2;
  RunOptions o;
  o.log_progress = false;
  const fs::path first = temp_dir("det_a");
  o.out_dir = first.string();
  const RunSummary s1 = run(c, o);
  o.out_dir = temp_dir("det_b").string();
  run(c, o);
  EXPECT_EQ(s1.steps, 4);
  const std::string a = slurp(first / "forces.csv");
  const std::string b = slurp(fs::path(o.out_dir) / "forces.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  EXPECT_TRUE(fs::exists(fs::path(o.out_dir) / "summary.json"));
  EXPECT_TRUE(fs::exists(fs::path(o.out_dir) / "config_echo.ini"));
  EXPECT_TRUE(fs::exists(fs::path(o.out_dir) / "snapshot_000004.vtk"));
  // 1 header + 4 rows
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 5);
}

TEST(Run, WaterLayerSetsEmbedment) {
  const ScenarioConfig c = load_preset("pipe_penetration_rough");
  Simulation sim(c);
  EXPECT_NEAR(sim.embedment(), (c.mudline - (c.center.y() - c.radius)) / c.length, 1e-12);
  const int e_top = sim.mesh().element_id(3, sim.mesh().ny() - 1);
  EXPECT_NEAR(sim.properties_at(e_top, sim.mesh().element_center(e_top)).rho, c.water_rho, 1e-9);
  const int e_bot = sim.mesh().element_id(3, 0);
  EXPECT_NEAR(sim.properties_at(e_bot, sim.mesh().element_center(e_bot)).rho, c.soil_rho, 1e-9);
}
