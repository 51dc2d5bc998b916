#include "vmsfem/simulation.hpp"

#include "vmsfem/linear_solver.hpp"
#include "vmsfem/output.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace vmsfem {

WindowStats steady_window(const std::vector<ForceRecord>& records, double t_start) {
  std::vector<double> v;
  for (const ForceRecord& r : records) {
    if (r.t > t_start) v.push_back(r.n_dimless);
  }
  WindowStats s;
  if (v.empty()) return s;
  const std::size_t first = v.size() / 2;
  s.count = static_cast<int>(v.size() - first);
  double sum = 0.0;
  for (std::size_t i = first; i < v.size(); ++i) sum += v[i];
  s.mean = sum / s.count;
  double var = 0.0;
  for (std::size_t i = first; i < v.size(); ++i) var += (v[i] - s.mean) * (v[i] - s.mean);
  s.stddev = std::sqrt(var / s.count);
  return s;
}

RigidBody make_body(const ScenarioConfig& cfg) {
  if (cfg.shape == BodyShape::circle) {
    return RigidBody(Circle{cfg.center, cfg.radius}, cfg.friction, cfg.mu_fric);
  }
  Polyline plate;
  plate.vertices = {Vec2(cfg.plate_x, cfg.plate_y0), Vec2(cfg.plate_x, cfg.plate_y1)};
  return RigidBody(plate, cfg.friction, cfg.mu_fric);
}

namespace {

int nearest_node(const GridMesh& mesh, const Vec2& x) {
  const Vec2 c = mesh.clamp(x);
  const int i = static_cast<int>(std::lround((c.x() - mesh.x0()) / mesh.hx()));
  const int j = static_cast<int>(std::lround((c.y() - mesh.y0()) / mesh.hy()));
  return mesh.node_id(std::clamp(i, 0, mesh.nx()), std::clamp(j, 0, mesh.ny()));
}

}  // namespace

Simulation::Simulation(ScenarioConfig config)
    : cfg_(std::move(config)), body_(make_body(cfg_)) {
  cfg_.validate();
  mesh_ = std::make_shared<const GridMesh>(cfg_.nx, cfg_.ny, cfg_.domain);
  assembler_ = std::make_shared<const NsAssembler>(*mesh_);
  state_ = FieldState::zeros(*mesh_, cfg_.bubble);
  cloud_ = SamplePointCloud::gauss_points(*mesh_);
  history_ = HistoryState::zeros(cloud_.count());
  for (std::size_t k = 0; k < cloud_.count(); ++k) history_.y0[k] = cloud_.positions[k].y();
  phase_.beta1 = cfg_.beta1;
  phase_.interface_halfwidth = 1.5 * mesh_->h_ele();
  if (cfg_.water) {
    Eigen::VectorXd phi(mesh_->node_count());
    for (int n = 0; n < mesh_->node_count(); ++n) phi[n] = cfg_.mudline - mesh_->node(n).y();
    phase_.phi.push_back(phi);
  }
  bc_ = no_slip_box(*mesh_, cfg_.symmetry_top, nearest_node(*mesh_, cfg_.pressure_pin));
}

double Simulation::phi_at(int elem, const Vec2& x) const {
  const Vec2 c = mesh_->element_center(elem);
  const Vec2 ref((x.x() - c.x()) / (0.5 * mesh_->hx()), (x.y() - c.y()) / (0.5 * mesh_->hy()));
  return interpolate_nodal(*mesh_, phase_.phi.front(), elem, ref);
}

double Simulation::soil_fraction(int elem, const Vec2& x) const {
  if (!cfg_.water) return 1.0;
  return smoothed_heaviside(phi_at(elem, x), phase_.interface_halfwidth);
}

PhaseProperties Simulation::properties_at(int elem, const Vec2& x) const {
  const double h = soil_fraction(elem, x);
  PhaseProperties p;
  p.rho = h * cfg_.soil_rho + (1.0 - h) * cfg_.water_rho;
  p.mu = h * cfg_.soil_mu + (1.0 - h) * cfg_.water_mu;
  p.body_force = Vec2(0.0, -h * cfg_.unit_weight);
  p.has_history_stress = h >= 0.5;
  return p;
}

double Simulation::embedment() const {
  if (!cfg_.water) return 0.0;
  return (cfg_.mudline - body_.bottom()) / cfg_.length;
}

void Simulation::step() {
  const double dt = cfg_.dt;
  const Vec2 v = cfg_.velocity_at(state_.t);
  body_.set_velocity(v);
  const VelocityView uview(*mesh_, state_);
  const double tol = 1e-12 * mesh_->h_ele();

  const std::size_t np = cloud_.count();
  std::vector<char> active(np, 1);
  for (std::size_t k = 0; k < np; ++k) active[k] = body_.contains(cloud_.positions[k], tol) ? 0 : 1;

  TransportStats ts;
  history_ = nonlocal_transport(history_, cloud_, uview, dt, cfg_.kernel(*mesh_), &ts, &active);

  std::vector<char> soil(np, 0);
  for (std::size_t k = 0; k < np; ++k) {
    if (active[k] == 0) continue;
    const int e = static_cast<int>(k / 4);
    soil[k] = (!cfg_.water || phi_at(e, cloud_.positions[k]) >= 0.0) ? 1 : 0;
  }
  ConstitutiveStats cst;
  history_ = update_extra_stress(history_, uview, dt, cfg_.soil, soil, &cst);
  for (std::size_t k = 0; k < np; ++k) {
    if (soil[k] == 0) history_.sigma[k] = SymTensor2{};
  }

  NsProblem pb;
  pb.mesh = mesh_.get();
  pb.properties = [this](int e, const Vec2& x) { return properties_at(e, x); };
  pb.extra_stress = history_.sigma;
  pb.dt = dt;
  pb.bubble = cfg_.bubble;
  pb.stabilized = cfg_.stabilized;
  LinearSystem sys = assembler_->system(pb, state_, state_, state_);
  apply_dirichlet(sys, bc_, state_);

  const CutResult cut = find_cutting_points(body_, *mesh_);
  constraints_ = build_constraints(cut, body_);
  const SaddleResult res = cfg_.friction == FrictionModel::coulomb
                               ? coulomb_iteration(sys, constraints_, state_, cfg_.mu_fric)
                               : solve_saddle(sys, constraints_, state_);
  state_ = apply_increment(state_, sys, res.dx, dt);
  if (!state_.finite()) {
    throw SolverFailure("step " + std::to_string(step_ + 1) + ": field update produced non-finite values");
  }

  if (cfg_.water) advance_phase_field(phase_, *mesh_, VelocityView(*mesh_, state_), dt);
  body_.translate(v * dt);

  const Vec2 f = resultant_force(constraints_);
  ForceRecord rec;
  rec.t = state_.t;
  rec.fx = f.x();
  rec.fy = f.y();
  const double comp = cfg_.force_axis == 'x' ? f.x() : f.y();
  rec.n_dimless = cfg_.force_sign * comp * cfg_.force_multiplier / (cfg_.length * cfg_.su_ref);
  rec.embedment = embedment();
  forces_.push_back(rec);

  ++step_;
  diag_ = StepDiagnostics{};
  diag_.step = step_;
  diag_.cutting_points = static_cast<int>(cut.points.size());
  diag_.inside_nodes = static_cast<int>(cut.inside_nodes.size());
  diag_.constraint_rows = static_cast<int>(constraints_.rows.size());
  diag_.transport_fallbacks = ts.fallbacks;
  diag_.clamped_points = ts.clamped;
  diag_.yielded_points = cst.yielded;
  diag_.constraint_violation = constraints_.violation(state_.u);
  diag_.constraint_scale = 1.0 + constraints_.b_vector().lpNorm<Eigen::Infinity>();
  total_fallbacks_ += ts.fallbacks;
  total_clamped_ += ts.clamped;
  if (on_step) on_step(*this);
}

void Simulation::advance(int steps) {
  for (int i = 0; i < steps; ++i) step();
}

RunSummary run(const ScenarioConfig& config, const RunOptions& options) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  Simulation sim(config);
  const int steps = options.steps_override >= 0 ? options.steps_override : config.steps;
  const std::string dir = options.out_dir.empty() ? config.out_dir : options.out_dir;
  if (options.write_files) fs::create_directories(dir);

  RunSummary summary;
  summary.id = config.id;
  summary.backend = sparse_backend_name();
  std::vector<ForceRecord> csv_rows;
  auto flush = [&] {
    if (!options.write_files || csv_rows.empty()) return;
    write_force_csv(csv_rows, (fs::path(dir) / "forces.csv").string());
  };
  auto snapshot = [&](int index) {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_%06d.vtk", index);
    write_field_snapshot(sim.state(), sim.phase(), sim.history(), sim.mesh(), sim.config().soil,
                         (fs::path(dir) / name).string());
  };

  if (options.write_files) {
    std::ofstream(fs::path(dir) / "config_echo.ini") << config.to_ini();
    if (config.vtk_every > 0) snapshot(0);
  }
  const int report = std::max(1, steps / 10);
  try {
    for (int i = 0; i < steps; ++i) {
      sim.step();
      const StepDiagnostics& d = sim.diagnostics();
      summary.max_constraint_violation = std::max(summary.max_constraint_violation, d.constraint_violation);
      if (sim.step_index() % config.csv_every == 0) csv_rows.push_back(sim.forces().back());
      if (options.write_files && config.vtk_every > 0 && sim.step_index() % config.vtk_every == 0) {
        snapshot(sim.step_index());
      }
      if (options.log_progress && (sim.step_index() % report == 0 || sim.step_index() == steps)) {
        const ForceRecord& r = sim.forces().back();
        std::cerr << config.id << " step " << sim.step_index() << "/" << steps << " t=" << r.t
                  << " N=" << r.n_dimless << " cuts=" << d.cutting_points << " fallbacks=" << d.transport_fallbacks
                  << "\n";
      }
    }
  } catch (const std::exception& e) {
    flush();
    throw std::runtime_error(config.id + ": aborted at step " + std::to_string(sim.step_index() + 1) + ": " +
                             e.what());
  }
  flush();

  summary.steps = sim.step_index();
  summary.steady = steady_window(sim.forces(), config.last_switch_time());
  if (!sim.forces().empty()) {
    summary.final_fx = sim.forces().back().fx;
    summary.final_fy = sim.forces().back().fy;
  }
  summary.transport_fallbacks = sim.total_fallbacks();
  summary.clamped_points = sim.total_clamped();
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (options.write_files) write_summary_json(summary, (fs::path(dir) / "summary.json").string());
  return summary;
}

}  // namespace vmsfem
