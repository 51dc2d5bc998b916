#pragma once

#include "vmsfem/fields.hpp"
#include "vmsfem/history_transport.hpp"
#include "vmsfem/level_set.hpp"
#include "vmsfem/mesh.hpp"
#include "vmsfem/soil_plasticity.hpp"

#include <string>
#include <vector>

namespace vmsfem {

struct ForceRecord;
struct RunSummary;

/// t,fx,fy,n_dimless,embedment with 17 significant digits.
void write_force_csv(const std::vector<ForceRecord>& records, const std::string& path);
std::string format_force_csv(const std::vector<ForceRecord>& records);

/// Legacy ASCII structured-grid VTK file.
void write_field_snapshot(const FieldState& state, const PhaseField& phase, const HistoryState& history,
                          const GridMesh& mesh, const SoilModel& soil, const std::string& path);

void write_summary_json(const RunSummary& summary, const std::string& path);

}  // namespace vmsfem
