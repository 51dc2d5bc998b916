#pragma once

#include "vmsfem/fields.hpp"
#include "vmsfem/history_transport.hpp"
#include "vmsfem/level_set.hpp"
#include "vmsfem/mesh.hpp"
#include "vmsfem/ns_solver.hpp"
#include "vmsfem/rigid_coupling.hpp"
#include "vmsfem/scenario_config.hpp"
#include "vmsfem/soil_plasticity.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace vmsfem {

struct ForceRecord {
  double t = 0.0;
  double fx = 0.0;
  double fy = 0.0;
  double n_dimless = 0.0;
  double embedment = 0.0;
};

struct StepDiagnostics {
  int step = 0;
  int cutting_points = 0;
  int inside_nodes = 0;
  int constraint_rows = 0;
  int transport_fallbacks = 0;
  int clamped_points = 0;
  int yielded_points = 0;
  double constraint_violation = 0.0;
  double constraint_scale = 0.0;
};

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

/// Mean and standard deviation of n_dimless over the final half of the
/// records after t_start.
WindowStats steady_window(const std::vector<ForceRecord>& records, double t_start);

/// One scenario instance: fields, history, phase field and body, advanced
/// step by step. Copies share the immutable grid and assembly pattern, so a
/// run can be branched cheaply.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig config);

  void step();
  void advance(int steps);

  [[nodiscard]] const ScenarioConfig& config() const { return cfg_; }
  [[nodiscard]] const GridMesh& mesh() const { return *mesh_; }
  [[nodiscard]] const FieldState& state() const { return state_; }
  [[nodiscard]] const HistoryState& history() const { return history_; }
  [[nodiscard]] const PhaseField& phase() const { return phase_; }
  [[nodiscard]] const RigidBody& body() const { return body_; }
  [[nodiscard]] const ConstraintSet& constraints() const { return constraints_; }
  [[nodiscard]] const std::vector<ForceRecord>& forces() const { return forces_; }
  [[nodiscard]] const StepDiagnostics& diagnostics() const { return diag_; }
  [[nodiscard]] int step_index() const { return step_; }
  [[nodiscard]] double time() const { return state_.t; }
  [[nodiscard]] long total_fallbacks() const { return total_fallbacks_; }
  [[nodiscard]] long total_clamped() const { return total_clamped_; }

  /// Embedment below the mudline normalised by the body length.
  [[nodiscard]] double embedment() const;
  /// Replaces the motion schedule (absolute times).
  void set_schedule(std::vector<ScheduleSegment> schedule) { cfg_.schedule = std::move(schedule); }
  void set_soil(const SoilModel& soil) { cfg_.soil = soil; }

  /// Per-step observer (called after each step).
  std::function<void(const Simulation&)> on_step;

  [[nodiscard]] PhaseProperties properties_at(int elem, const Vec2& x) const;
  /// Soil indicator in [0, 1] at x.
  [[nodiscard]] double soil_fraction(int elem, const Vec2& x) const;

 private:
  ScenarioConfig cfg_;
  std::shared_ptr<const GridMesh> mesh_;
  std::shared_ptr<const NsAssembler> assembler_;
  FieldState state_;
  HistoryState history_;
  SamplePointCloud cloud_;
  PhaseField phase_;
  RigidBody body_;
  ConstraintSet constraints_;
  DirichletSet bc_;
  std::vector<ForceRecord> forces_;
  StepDiagnostics diag_;
  int step_ = 0;
  long total_fallbacks_ = 0;
  long total_clamped_ = 0;

  [[nodiscard]] double phi_at(int elem, const Vec2& x) const;
};

RigidBody make_body(const ScenarioConfig& cfg);

struct RunSummary {
  std::string id;
  int steps = 0;
  double wall_seconds = 0.0;
  WindowStats steady;
  double final_fx = 0.0;
  double final_fy = 0.0;
  long transport_fallbacks = 0;
  long clamped_points = 0;
  double max_constraint_violation = 0.0;
  std::string backend;
};

struct RunOptions {
  std::string out_dir;
  int steps_override = -1;
  bool write_files = true;
  bool log_progress = true;
};

/// Runs the configured number of steps, writing the force CSV, VTK snapshots
/// and a JSON summary into the output directory.
RunSummary run(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace vmsfem
