#include "iscreen/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iscreen/errors.hpp"

namespace iscreen {

using nlohmann::json;

// ---- low-level file plumbing -------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw SchemaError("cannot read file: " + path);
  return ss.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename failed for " + path + ": " + ec.message());
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

json load_json(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("malformed JSON in " + path + ": " + e.what());
  }
}

// ---- validation helpers ---------------------------------------------------

namespace {

const json& require_key(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw SchemaError(std::string(what) + ": missing key \"" + key + "\"");
  return j.at(key);
}

std::int64_t as_int(const json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw SchemaError(std::string(what) + ": expected an integer");
  return j.get<std::int64_t>();
}

double as_double(const json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string(what) + ": expected a number");
  return j.get<double>();
}

std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::string& path, const json& j) {
  atomic_write_file(path, dump_pretty(j));
}

}  // namespace

// ---- model --------------------------------------------------------------

json model_to_json(const IsingModel& m, const ModelMeta& meta) {
  json couplings = json::array();
  for (const auto& e : m.coupling_entries()) couplings.push_back({e.u, e.v, e.value});
  return json{{"p", m.p()},
              {"couplings", couplings},
              {"fields", m.fields()},
              {"meta",
               {{"generator", meta.generator}, {"seed", meta.seed}, {"gamma", meta.gamma}}}};
}

IsingModel model_from_json(const json& j, ModelMeta* meta) {
  const int p = static_cast<int>(as_int(require_key(j, "p", "model"), "model.p"));
  const json& jc = require_key(j, "couplings", "model");
  const json& jf = require_key(j, "fields", "model");
  if (!jc.is_array()) throw SchemaError("model.couplings: expected an array");
  if (!jf.is_array()) throw SchemaError("model.fields: expected an array");

  std::vector<CouplingEntry> entries;
  for (const auto& row : jc) {
    if (!row.is_array() || row.size() != 3)
      throw SchemaError("model.couplings: expected [u, v, value] triples");
    CouplingEntry e;
    e.u = static_cast<int>(as_int(row[0], "model.couplings[u]"));
    e.v = static_cast<int>(as_int(row[1], "model.couplings[v]"));
    e.value = as_double(row[2], "model.couplings[value]");
    entries.push_back(e);
  }
  std::vector<double> fields;
  for (const auto& f : jf) fields.push_back(as_double(f, "model.fields"));

  if (meta && j.contains("meta") && j["meta"].is_object()) {
    const json& jm = j["meta"];
    if (jm.contains("generator") && jm["generator"].is_string())
      meta->generator = jm["generator"].get<std::string>();
    if (jm.contains("seed")) meta->seed = jm["seed"].get<std::uint64_t>();
    if (jm.contains("gamma")) meta->gamma = as_double(jm["gamma"], "model.meta.gamma");
  }
  try {
    return IsingModel(p, std::move(entries), std::move(fields));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
}

void write_model(const std::string& path, const IsingModel& m, const ModelMeta& meta) {
  write_json_file(path, model_to_json(m, meta));
}

IsingModel read_model(const std::string& path, ModelMeta* meta) {
  return model_from_json(load_json(path), meta);
}

// ---- dataset --------------------------------------------------------------

void write_dataset(const std::string& path, const Dataset& d) {
  json header{{"n", d.n}, {"p", d.p}, {"seed", d.seed},
              {"method", sample_method_name(d.method)}};
  if (d.method == SampleMethod::gibbs) {
    header["burn_in"] = d.burn_in;
    header["thinning"] = d.thinning;
  }
  std::string out = header.dump();
  out += '\n';
  out.reserve(out.size() + static_cast<std::size_t>(d.n) * (d.p * 3 + 1));
  for (std::int64_t t = 0; t < d.n; ++t) {
    const std::int8_t* row = d.spins.data() + t * d.p;
    for (int i = 0; i < d.p; ++i) {
      if (i) out += ',';
      out += row[i] > 0 ? "1" : "-1";
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

Dataset read_dataset(const std::string& path) {
  const std::string text = read_text_file(path);
  const std::size_t nl = text.find('\n');
  if (nl == std::string::npos) throw SchemaError("dataset: missing header line in " + path);
  json header;
  try {
    header = json::parse(text.substr(0, nl));
  } catch (const json::parse_error& e) {
    throw SchemaError("dataset: malformed header in " + path + ": " + e.what());
  }

  Dataset d;
  d.n = as_int(require_key(header, "n", "dataset"), "dataset.n");
  d.p = static_cast<int>(as_int(require_key(header, "p", "dataset"), "dataset.p"));
  d.seed = require_key(header, "seed", "dataset").get<std::uint64_t>();
  d.method = sample_method_from_name(
      require_key(header, "method", "dataset").get<std::string>());
  if (header.contains("burn_in")) d.burn_in = as_int(header["burn_in"], "dataset.burn_in");
  if (header.contains("thinning")) d.thinning = as_int(header["thinning"], "dataset.thinning");
  if (d.n < 1 || d.p < 1) throw SchemaError("dataset: n and p must be >= 1");

  d.spins.reserve(static_cast<std::size_t>(d.n) * d.p);
  std::size_t pos = nl + 1;
  for (std::int64_t t = 0; t < d.n; ++t) {
    int cols = 0;
    while (true) {
      if (pos < text.size() && text[pos] == '+') ++pos;
      if (pos >= text.size()) throw SchemaError("dataset: truncated sample rows");
      std::int8_t value;
      if (text[pos] == '1') {
        value = 1;
        ++pos;
      } else if (text[pos] == '-' && pos + 1 < text.size() && text[pos + 1] == '1') {
        value = -1;
        pos += 2;
      } else {
        throw SchemaError("dataset: entries must be +1 or -1");
      }
      d.spins.push_back(value);
      ++cols;
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      break;
    }
    if (cols != d.p) throw SchemaError("dataset: row width differs from p");
    if (pos < text.size() && text[pos] == '\r') ++pos;
    if (pos < text.size()) {
      if (text[pos] != '\n') throw SchemaError("dataset: malformed row terminator");
      ++pos;
    } else if (t + 1 < d.n) {
      throw SchemaError("dataset: fewer rows than the header promises");
    }
  }
  return d;
}

// ---- moments --------------------------------------------------------------

json moments_to_json(const MomentTable& t, const json& meta) {
  json entries = json::array();
  for (const auto& [mask, value] : t.entries())
    entries.push_back({MonomialKey(mask).str(), value});
  json j{{"p", t.p()},
         {"degree", t.max_degree()},
         {"n", nullptr},
         {"entries", entries},
         {"meta", meta.is_null() ? json::object() : meta}};
  if (!t.is_oracle()) j["n"] = t.n();
  return j;
}

MomentTable moments_from_json(const json& j) {
  const int p = static_cast<int>(as_int(require_key(j, "p", "moments"), "moments.p"));
  const int degree =
      static_cast<int>(as_int(require_key(j, "degree", "moments"), "moments.degree"));
  const json& jn = require_key(j, "n", "moments");
  const std::int64_t n = jn.is_null() ? kOracleN : as_int(jn, "moments.n");
  const json& je = require_key(j, "entries", "moments");
  if (!je.is_array()) throw SchemaError("moments.entries: expected an array");

  MomentTable table = [&] {
    try {
      return MomentTable(p, degree, n);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("moments: ") + e.what());
    }
  }();
  for (const auto& row : je) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_string())
      throw SchemaError("moments.entries: expected [\"i;j;k\", value] pairs");
    const MonomialKey key = MonomialKey::parse(row[0].get<std::string>(), p);
    if (table.contains(key.mask))
      throw SchemaError("moments.entries: duplicate key \"" + row[0].get<std::string>() + "\"");
    try {
      table.set(key.mask, as_double(row[1], "moments.entries[value]"));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("moments: ") + e.what());
    }
  }
  return table;
}

void write_moments(const std::string& path, const MomentTable& t, const json& meta) {
  write_json_file(path, moments_to_json(t, meta));
}

MomentTable read_moments(const std::string& path) {
  return moments_from_json(load_json(path));
}

// ---- schedules --------------------------------------------------------------

json schedule_to_json(const Schedule& s) {
  return json{{"mode", schedule_mode_name(s.mode)},
              {"gamma", s.gamma},
              {"epsilon", s.epsilon},
              {"delta", s.delta},
              {"d", s.d},
              {"T", s.T},
              {"eta", s.eta},
              {"n", s.n}};
}

Schedule schedule_from_json(const json& j) {
  Schedule s;
  s.mode = schedule_mode_from_name(
      require_key(j, "mode", "schedule").get<std::string>());
  s.gamma = as_double(require_key(j, "gamma", "schedule"), "schedule.gamma");
  s.epsilon = as_double(require_key(j, "epsilon", "schedule"), "schedule.epsilon");
  s.delta = as_double(require_key(j, "delta", "schedule"), "schedule.delta");
  s.d = static_cast<int>(as_int(require_key(j, "d", "schedule"), "schedule.d"));
  s.T = as_int(require_key(j, "T", "schedule"), "schedule.T");
  s.eta = as_double(require_key(j, "eta", "schedule"), "schedule.eta");
  s.n = as_double(require_key(j, "n", "schedule"), "schedule.n");
  return s;
}

json fields_schedule_to_json(const FieldsSchedule& s) {
  return json{{"schedule", schedule_to_json(s.sched)},
              {"D", s.D},
              {"eps_c", s.eps_c},
              {"eps_internal", s.eps_internal},
              {"L", s.L}};
}

FieldsSchedule fields_schedule_from_json(const json& j) {
  FieldsSchedule s;
  s.sched = schedule_from_json(require_key(j, "schedule", "fields schedule"));
  s.D = static_cast<int>(as_int(require_key(j, "D", "fields schedule"), "fields schedule.D"));
  s.eps_c = as_double(require_key(j, "eps_c", "fields schedule"), "fields schedule.eps_c");
  s.eps_internal = as_double(require_key(j, "eps_internal", "fields schedule"),
                             "fields schedule.eps_internal");
  s.L = as_double(require_key(j, "L", "fields schedule"), "fields schedule.L");
  return s;
}

// ---- estimates --------------------------------------------------------------

namespace {

json diagnostics_to_json(const std::vector<NodeDiagnostics>& diags) {
  json nodes = json::array();
  for (const auto& d : diags) {
    json trace = json::array();
    for (const auto& [t, v] : d.loss_trace) trace.push_back({t, v});
    nodes.push_back({{"node", d.node},
                     {"initial_grad_inf", d.initial_grad_inf},
                     {"final_grad_inf", d.final_grad_inf},
                     {"iterations", d.iterations},
                     {"loss_trace", trace}});
  }
  return json{{"nodes", nodes}};
}

std::vector<CouplingEntry> couplings_from_json(const json& jc, int p) {
  if (!jc.is_array()) throw SchemaError("estimate.couplings: expected an array");
  std::vector<CouplingEntry> entries;
  for (const auto& row : jc) {
    if (!row.is_array() || row.size() != 3)
      throw SchemaError("estimate.couplings: expected [u, v, value] triples");
    CouplingEntry e;
    e.u = static_cast<int>(as_int(row[0], "estimate.couplings[u]"));
    e.v = static_cast<int>(as_int(row[1], "estimate.couplings[v]"));
    e.value = as_double(row[2], "estimate.couplings[value]");
    if (e.u < 0 || e.v >= p || e.u >= e.v)
      throw SchemaError("estimate.couplings: indices must satisfy 0 <= u < v < p");
    entries.push_back(e);
  }
  std::sort(entries.begin(), entries.end(),
            [](const CouplingEntry& a, const CouplingEntry& b) {
              return a.u != b.u ? a.u < b.u : a.v < b.v;
            });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].u == entries[i - 1].u && entries[i].v == entries[i - 1].v)
      throw SchemaError("estimate.couplings: duplicate pair");
  return entries;
}

}  // namespace

json estimate_to_json(const CouplingEstimate& est, const json& meta) {
  json couplings = json::array();
  for (const auto& e : est.couplings) couplings.push_back({e.u, e.v, e.value});
  return json{{"p", est.p},
              {"method", "screening"},
              {"couplings", couplings},
              {"fields", est.fields},
              {"meta", meta.is_null() ? json::object() : meta},
              {"schedule", schedule_to_json(est.schedule)},
              {"diagnostics", diagnostics_to_json(est.diagnostics)}};
}

void write_estimate(const std::string& path, const CouplingEstimate& est, const json& meta) {
  write_json_file(path, estimate_to_json(est, meta));
}

CouplingEstimate read_estimate(const std::string& path) {
  const json j = load_json(path);
  CouplingEstimate est;
  est.p = static_cast<int>(as_int(require_key(j, "p", "estimate"), "estimate.p"));
  if (est.p < 1) throw SchemaError("estimate: p must be >= 1");
  est.couplings = couplings_from_json(require_key(j, "couplings", "estimate"), est.p);
  const json& jf = require_key(j, "fields", "estimate");
  if (!jf.is_array() || jf.size() != static_cast<std::size_t>(est.p))
    throw SchemaError("estimate.fields: expected an array of length p");
  for (const auto& f : jf) est.fields.push_back(as_double(f, "estimate.fields"));
  est.schedule = schedule_from_json(require_key(j, "schedule", "estimate"));
  return est;
}

json fields_stage_to_json(const FieldEstimate& fe) {
  json bounds = json::array();
  for (int u = 0; u < fe.p; ++u)
    bounds.push_back({{"node", u},
                      {"eps_h_term", fe.bound_eps_h_term[u]},
                      {"coupling_term", fe.bound_coupling_term[u]},
                      {"total", fe.bound_eps_h_term[u] + fe.bound_coupling_term[u]}});
  return json{{"fields", fe.fields},
              {"neighborhood_sizes", fe.neighborhood_sizes},
              {"bounds", bounds},
              {"schedule", fields_schedule_to_json(fe.schedule)},
              {"diagnostics", diagnostics_to_json(fe.diagnostics)}};
}

void write_estimate_with_fields(const std::string& estimate_path, const std::string& out_path,
                                const FieldEstimate& fe) {
  json j = load_json(estimate_path);
  j["fields_stage2"] = fields_stage_to_json(fe);
  write_json_file(out_path, j);
}

json known_estimate_to_json(const KnownStructureEstimate& est, const json& meta) {
  json couplings = json::array();
  for (const auto& e : est.couplings) couplings.push_back({e.u, e.v, e.value});
  return json{{"p", est.p},
              {"method", "known_structure"},
              {"couplings", couplings},
              {"fields", est.fields},
              {"meta", meta.is_null() ? json::object() : meta},
              {"schedule", schedule_to_json(est.schedule)},
              {"diagnostics", diagnostics_to_json(est.diagnostics)}};
}

void write_known_estimate(const std::string& path, const KnownStructureEstimate& est,
                          const json& meta) {
  write_json_file(path, known_estimate_to_json(est, meta));
}

// ---- edges --------------------------------------------------------------

void write_edges(const std::string& path, const EdgeSet& es) {
  json arr = json::array();
  for (const auto& [u, v] : es.edges) arr.push_back({u, v});
  write_json_file(path, arr);
}

std::vector<std::pair<int, int>> read_edges(const std::string& path) {
  const json j = load_json(path);
  if (!j.is_array()) throw SchemaError("edges: expected a top-level array");
  std::vector<std::pair<int, int>> out;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 2)
      throw SchemaError("edges: expected [u, v] pairs");
    const int u = static_cast<int>(as_int(row[0], "edges[u]"));
    const int v = static_cast<int>(as_int(row[1], "edges[v]"));
    if (u < 0 || v < 0 || u >= v) throw SchemaError("edges: pairs must satisfy 0 <= u < v");
    out.emplace_back(u, v);
  }
  return out;
}

// ---- verify reports --------------------------------------------------------

json reports_to_json(const std::vector<CheckReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    json params = json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    arr.push_back({{"name", r.name},
                   {"params", params},
                   {"observed", r.observed},
                   {"bound", r.bound},
                   {"pass", r.pass},
                   {"runtime_s", r.runtime_s}});
  }
  return arr;
}

// ---- run manifests --------------------------------------------------------

void write_manifest(const std::string& out_path, const std::vector<std::string>& input_paths,
                    const json& seeds, const json& schedule, double wall_time_s) {
  json inputs = json::array();
  for (const auto& path : input_paths)
    inputs.push_back({{"path", path}, {"fnv1a64", fnv1a64_hex(read_text_file(path))}});
  const json j{{"output", out_path},
               {"inputs", inputs},
               {"seeds", seeds.is_null() ? json::object() : seeds},
               {"schedule", schedule.is_null() ? json::object() : schedule},
               {"wall_time_s", wall_time_s}};
  write_json_file(out_path + ".manifest.json", j);
}

}  // namespace iscreen
