#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "iscreen/fields.hpp"
#include "iscreen/known_structure.hpp"
#include "iscreen/model.hpp"
#include "iscreen/moments.hpp"
#include "iscreen/sampling.hpp"
#include "iscreen/screening.hpp"
#include "iscreen/structure.hpp"
#include "iscreen/verify.hpp"

namespace iscreen {

// ---- low-level file plumbing -------------------------------------------

std::string read_text_file(const std::string& path);

// Write-temp-then-rename so readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit content hash, reported as 16 hex digits.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Parses with a SchemaError on malformed JSON.
nlohmann::json load_json(const std::string& path);

// ---- model --------------------------------------------------------------

struct ModelMeta {
  std::string generator = "manual";
  std::uint64_t seed = 0;
  double gamma = 0.0;
};

nlohmann::json model_to_json(const IsingModel& m, const ModelMeta& meta);
IsingModel model_from_json(const nlohmann::json& j, ModelMeta* meta = nullptr);
void write_model(const std::string& path, const IsingModel& m, const ModelMeta& meta);
IsingModel read_model(const std::string& path, ModelMeta* meta = nullptr);

// ---- dataset --------------------------------------------------------------
// One JSON header line {"n":..,"p":..,"seed":..,"method":..}, then n rows of
// comma-separated +/-1 entries.

void write_dataset(const std::string& path, const Dataset& d);
Dataset read_dataset(const std::string& path);

// ---- moments --------------------------------------------------------------

nlohmann::json moments_to_json(const MomentTable& t, const nlohmann::json& meta);
MomentTable moments_from_json(const nlohmann::json& j);
void write_moments(const std::string& path, const MomentTable& t,
                   const nlohmann::json& meta);
MomentTable read_moments(const std::string& path);

// ---- schedules --------------------------------------------------------------

nlohmann::json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);
nlohmann::json fields_schedule_to_json(const FieldsSchedule& s);
FieldsSchedule fields_schedule_from_json(const nlohmann::json& j);

// ---- estimates --------------------------------------------------------------
// Same shape as the model file plus method/schedule/diagnostics; the fields
// stage appends under "fields_stage2".

nlohmann::json estimate_to_json(const CouplingEstimate& est, const nlohmann::json& meta);
void write_estimate(const std::string& path, const CouplingEstimate& est,
                    const nlohmann::json& meta);
// Reads the symmetrized view (couplings, fields, schedule); per-node raw
// parameter vectors and diagnostics are not reconstructed.
CouplingEstimate read_estimate(const std::string& path);

nlohmann::json fields_stage_to_json(const FieldEstimate& fe);
// Loads `estimate_path`, attaches the stage-2 block, writes to `out_path`.
void write_estimate_with_fields(const std::string& estimate_path, const std::string& out_path,
                                const FieldEstimate& fe);

nlohmann::json known_estimate_to_json(const KnownStructureEstimate& est,
                                      const nlohmann::json& meta);
void write_known_estimate(const std::string& path, const KnownStructureEstimate& est,
                          const nlohmann::json& meta);

// ---- edges --------------------------------------------------------------

void write_edges(const std::string& path, const EdgeSet& es);
std::vector<std::pair<int, int>> read_edges(const std::string& path);

// ---- verify reports --------------------------------------------------------

nlohmann::json reports_to_json(const std::vector<CheckReport>& reports);

// ---- run manifests --------------------------------------------------------
// Written next to each artifact as <out>.manifest.json: content hashes of
// every input file, the seeds and schedule in force, and the wall time.

void write_manifest(const std::string& out_path,
                    const std::vector<std::string>& input_paths,
                    const nlohmann::json& seeds, const nlohmann::json& schedule,
                    double wall_time_s);

}  // namespace iscreen
