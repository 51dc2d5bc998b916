#include "vmsfem/output.hpp"

#include "vmsfem/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vmsfem {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string format_force_csv(const std::vector<ForceRecord>& records) {
  std::string s = "t,fx,fy,n_dimless,embedment\n";
  for (const ForceRecord& r : records) {
    s += g17(r.t) + "," + g17(r.fx) + "," + g17(r.fy) + "," + g17(r.n_dimless) + "," + g17(r.embedment) + "\n";
  }
  return s;
}

void write_force_csv(const std::vector<ForceRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("write_force_csv: no records");
  std::ofstream out = open_out(path);
  out << format_force_csv(records);
  if (!out) throw std::runtime_error("write_force_csv: write to '" + path + "' failed");
}

void write_field_snapshot(const FieldState& state, const PhaseField& phase, const HistoryState& history,
                          const GridMesh& mesh, const SoilModel& soil, const std::string& path) {
  const int nn = mesh.node_count();
  const int ne = mesh.element_count();
  if (state.u.size() != 2 * nn || state.p.size() != nn || history.size() != static_cast<std::size_t>(4 * ne)) {
    throw std::invalid_argument("write_field_snapshot: field sizes do not match the grid");
  }
  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\nvmsfem t=" << g17(state.t) << "\nASCII\nDATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << mesh.nx() + 1 << " " << mesh.ny() + 1 << " 1\n";
  out << "POINTS " << nn << " double\n";
  for (int n = 0; n < nn; ++n) {
    const Vec2 x = mesh.node(n);
    out << g17(x.x()) << " " << g17(x.y()) << " 0\n";
  }
  out << "POINT_DATA " << nn << "\nVECTORS velocity double\n";
  for (int n = 0; n < nn; ++n) out << g17(state.u[2 * n]) << " " << g17(state.u[2 * n + 1]) << " 0\n";
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < nn; ++n) out << g17(state.p[n]) << "\n";
  for (std::size_t k = 0; k < phase.phi.size(); ++k) {
    out << "SCALARS phi_" << k << " double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < nn; ++n) out << g17(phase.phi[k][n]) << "\n";
  }

  out << "CELL_DATA " << ne << "\n";
  auto cell_avg = [&](const char* name, auto value) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int e = 0; e < ne; ++e) {
      double s = 0.0;
      for (int q = 0; q < 4; ++q) s += value(static_cast<std::size_t>(4 * e + q));
      out << g17(0.25 * s) << "\n";
    }
  };
  cell_avg("tresca", [&](std::size_t k) { return tresca_measure(history.sigma[k]); });
  cell_avg("gamma_max", [&](std::size_t k) { return history.gamma_rate[k]; });
  cell_avg("xi", [&](std::size_t k) { return history.xi[k]; });
  out << "SCALARS phase_id int 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < ne; ++e) {
    int id = 1;
    if (!phase.phi.empty()) id = interpolate_nodal(mesh, phase.phi.front(), e, Vec2::Zero()) >= 0.0 ? 1 : 2;
    out << id << "\n";
  }
  const double su0 = soil.depth_dependent ? soil.su_mudline : soil.base.sigma0;
  cell_avg("k_marker", [&](std::size_t k) {
    if (!soil.depth_dependent || !(su0 > 0.0)) return 0.0;
    return std::abs(history.y0[k] - soil.y0_free) * soil.k_su / su0;
  });
  if (!out) throw std::runtime_error("write_field_snapshot: write to '" + path + "' failed");
}

void write_summary_json(const RunSummary& s, const std::string& path) {
  nlohmann::json j;
  j["id"] = s.id;
  j["steps"] = s.steps;
  j["wall_seconds"] = s.wall_seconds;
  j["steady_mean"] = s.steady.mean;
  j["steady_stddev"] = s.steady.stddev;
  j["steady_samples"] = s.steady.count;
  j["final_fx"] = s.final_fx;
  j["final_fy"] = s.final_fy;
  j["transport_fallbacks"] = s.transport_fallbacks;
  j["clamped_points"] = s.clamped_points;
  j["max_constraint_violation"] = s.max_constraint_violation;
  j["sparse_backend"] = s.backend;
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace vmsfem
