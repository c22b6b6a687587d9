// Command-line front end: model generation, sampling, moment extraction,
// learning stages, verification suite, and config-driven pipelines.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "iscreen/errors.hpp"
#include "iscreen/fields.hpp"
#include "iscreen/generators.hpp"
#include "iscreen/io.hpp"
#include "iscreen/known_structure.hpp"
#include "iscreen/model.hpp"
#include "iscreen/moments.hpp"
#include "iscreen/optimizer.hpp"
#include "iscreen/polyexpand.hpp"
#include "iscreen/sampling.hpp"
#include "iscreen/screening.hpp"
#include "iscreen/structure.hpp"
#include "iscreen/verify.hpp"

namespace {

using iscreen::Schedule;
using nlohmann::json;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- gen-model --------------------------------------------------------------

struct GenModelArgs {
  int p = 0;
  std::string topology = "ring";
  double gamma = -1.0;
  double alpha = 0.1;
  double beta = -1.0;
  double field_range = -1.0;
  int degree = 2;
  double er_prob = -1.0;
  std::uint64_t seed = 0;
  std::string out;
};

void run_gen_model(const GenModelArgs& a) {
  const auto t0 = Clock::now();
  iscreen::GeneratorOptions opt;
  opt.p = a.p;
  opt.topology = iscreen::topology_from_name(a.topology);
  opt.gamma = a.gamma;
  opt.alpha = a.alpha;
  opt.beta = a.beta;
  opt.field_range = a.field_range;
  opt.degree = a.degree;
  opt.er_prob = a.er_prob;
  opt.seed = a.seed;
  const iscreen::IsingModel m = iscreen::generate_model(opt);

  iscreen::ModelMeta meta;
  meta.generator = a.topology;
  meta.seed = a.seed;
  meta.gamma = iscreen::l1_width(m);
  iscreen::write_model(a.out, m, meta);
  iscreen::write_manifest(a.out, {}, json{{"seed", a.seed}}, json(nullptr),
                          seconds_since(t0));
  std::printf("wrote %s: p=%d edges=%zu l1_width=%.12g\n", a.out.c_str(), m.p(),
              m.coupling_entries().size(), iscreen::l1_width(m));
}

// ---- sample --------------------------------------------------------------

struct SampleArgs {
  std::string model;
  std::int64_t n = 0;
  std::string method = "exact";
  std::uint64_t seed = 0;
  std::int64_t burn_in = -1;
  std::int64_t thinning = -1;
  std::string out;
};

void run_sample(const SampleArgs& a) {
  const auto t0 = Clock::now();
  const iscreen::IsingModel m = iscreen::read_model(a.model);
  const iscreen::SampleMethod method = iscreen::sample_method_from_name(a.method);
  const iscreen::Dataset d =
      method == iscreen::SampleMethod::exact
          ? iscreen::sample_exact(m, a.n, a.seed)
          : iscreen::sample_gibbs(m, a.n, a.seed, a.burn_in, a.thinning);
  iscreen::write_dataset(a.out, d);
  iscreen::write_manifest(a.out, {a.model}, json{{"seed", a.seed}}, json(nullptr),
                          seconds_since(t0));
  std::printf("wrote %s: n=%lld p=%d method=%s\n", a.out.c_str(),
              static_cast<long long>(d.n), d.p, a.method.c_str());
}

// ---- moments --------------------------------------------------------------

struct MomentsArgs {
  std::string data;
  int degree = 2;
  std::string out;
};

void run_moments(const MomentsArgs& a) {
  const auto t0 = Clock::now();
  const iscreen::Dataset d = iscreen::read_dataset(a.data);
  const iscreen::MomentTable t = iscreen::build_moments(d, a.degree);
  iscreen::write_moments(a.out, t, json{{"source", a.data}});
  iscreen::write_manifest(a.out, {a.data}, json{{"seed", d.seed}}, json(nullptr),
                          seconds_since(t0));
  std::printf("wrote %s: p=%d degree=%d entries=%zu\n", a.out.c_str(), t.p(),
              t.max_degree(), t.size());
}

// ---- learn --------------------------------------------------------------

struct LearnArgs {
  std::string moments;
  double gamma = 0.0;
  std::string mode = "practical";
  double epsilon = -1.0;
  double delta = 0.1;
  std::optional<int> d;
  std::optional<std::int64_t> T;
  std::optional<double> eta;
  int threads = 0;
  bool confirm_theory = false;
  std::string out;
};

void run_learn(const LearnArgs& a) {
  const auto t0 = Clock::now();
  const iscreen::MomentTable table = iscreen::read_moments(a.moments);
  const double eps = a.epsilon > 0.0 ? a.epsilon : 0.5 * a.gamma;

  Schedule sched;
  if (iscreen::schedule_mode_from_name(a.mode) == iscreen::ScheduleMode::theory) {
    sched = iscreen::schedule_theory(table.p(), a.gamma, eps, a.delta);
    std::printf("theory schedule: d=%d T=%lld n=%.6g eta=%.6g\n", sched.d,
                static_cast<long long>(sched.T), sched.n, sched.eta);
    if (!a.confirm_theory)
      throw iscreen::TheoryUnconfirmedError(
          "theory-scale T and n shown above; pass --confirm-theory to execute");
  } else {
    const std::int64_t n_data = table.is_oracle() ? 1 : table.n();
    sched = iscreen::schedule_practical(table.p(), a.gamma, eps, n_data, a.d, a.T, a.eta);
  }

  const iscreen::CouplingEstimate est = iscreen::learn_couplings(table, sched, a.threads);
  iscreen::write_estimate(a.out, est, json{{"moments_file", a.moments}});
  iscreen::write_manifest(a.out, {a.moments}, json(nullptr),
                          iscreen::schedule_to_json(sched), seconds_since(t0));
  double cmax = 0.0;
  for (const auto& e : est.couplings) cmax = std::max(cmax, std::abs(e.value));
  std::printf("wrote %s: p=%d d=%d T=%lld max|coupling|=%.6g\n", a.out.c_str(), est.p,
              sched.d, static_cast<long long>(sched.T), cmax);
}

// ---- structure --------------------------------------------------------------

struct StructureArgs {
  std::string estimate;
  double alpha = 0.0;
  std::string out;
};

void run_structure(const StructureArgs& a) {
  const auto t0 = Clock::now();
  const iscreen::CouplingEstimate est = iscreen::read_estimate(a.estimate);
  const iscreen::EdgeSet es = iscreen::threshold_edges(est, a.alpha);
  iscreen::write_edges(a.out, es);
  iscreen::write_manifest(a.out, {a.estimate}, json(nullptr),
                          json{{"alpha", a.alpha}}, seconds_since(t0));
  std::printf("wrote %s: %zu edges (alpha=%.6g)\n", a.out.c_str(), es.edges.size(), a.alpha);
}

// ---- fields --------------------------------------------------------------

struct FieldsArgs {
  std::string estimate;
  std::string edges;
  std::string moments;
  std::string mode = "practical";
  double gamma = -1.0;
  double eps_c = 0.0;
  double eps_h = 0.0;
  double delta = 0.1;
  std::optional<int> d;
  std::optional<std::int64_t> T;
  std::optional<double> eta;
  int threads = 0;
  bool confirm_theory = false;
  std::string out;
};

iscreen::EdgeSet load_edge_set(const std::string& path, int p) {
  try {
    return iscreen::make_edge_set(p, iscreen::read_edges(path));
  } catch (const std::invalid_argument& e) {
    throw iscreen::SchemaError("edges: " + std::string(e.what()));
  }
}

void run_fields(const FieldsArgs& a) {
  const auto t0 = Clock::now();
  const iscreen::CouplingEstimate est = iscreen::read_estimate(a.estimate);
  const iscreen::MomentTable table = iscreen::read_moments(a.moments);
  const iscreen::EdgeSet es = load_edge_set(a.edges, table.p());
  const double gamma = a.gamma > 0.0 ? a.gamma : est.schedule.gamma;
  if (!(gamma > 0.0))
    throw iscreen::SchemaError("fields: no positive gamma in the estimate; pass --gamma");

  iscreen::FieldsSchedule fs;
  if (iscreen::schedule_mode_from_name(a.mode) == iscreen::ScheduleMode::theory) {
    const double eps_h = a.eps_h > 0.0 ? a.eps_h : 0.05;
    const double eps_c = a.eps_c > 0.0 ? a.eps_c : 0.05;
    fs = iscreen::schedule_fields(gamma, es.max_degree(), eps_c, eps_h, a.delta, table.p());
    std::printf("theory schedule: d=%d T=%lld n=%.6g eta=%.6g\n", fs.sched.d,
                static_cast<long long>(fs.sched.T), fs.sched.n, fs.sched.eta);
    if (!a.confirm_theory)
      throw iscreen::TheoryUnconfirmedError(
          "theory-scale T and n shown above; pass --confirm-theory to execute");
  } else {
    const std::int64_t n_data = table.is_oracle() ? 1 : table.n();
    fs = iscreen::schedule_fields_practical(table.p(), gamma, n_data, a.d, a.T, a.eta,
                                            a.eps_c, a.eps_h, es.max_degree());
  }

  const iscreen::FieldEstimate fe = iscreen::learn_fields(est, es, table, fs, a.threads);
  iscreen::write_estimate_with_fields(a.estimate, a.out, fe);
  iscreen::write_manifest(a.out, {a.estimate, a.edges, a.moments}, json(nullptr),
                          iscreen::fields_schedule_to_json(fs), seconds_since(t0));
  double fmax = 0.0;
  for (double f : fe.fields) fmax = std::max(fmax, std::abs(f));
  std::printf("wrote %s: p=%d max|field|=%.6g\n", a.out.c_str(), fe.p, fmax);
}

// ---- known --------------------------------------------------------------

struct KnownArgs {
  std::string moments;
  std::string edges;
  double gamma = 0.0;
  std::string mode = "practical";
  double epsilon = -1.0;
  double delta = 0.1;
  std::optional<std::int64_t> T;
  std::optional<double> eta;
  int threads = 0;
  bool confirm_theory = false;
  std::string out;
};

void run_known(const KnownArgs& a) {
  const auto t0 = Clock::now();
  const iscreen::MomentTable table = iscreen::read_moments(a.moments);
  const iscreen::EdgeSet es = load_edge_set(a.edges, table.p());
  const int D = es.max_degree();

  std::int64_t T = a.T.value_or(5000);
  double eta = a.eta.value_or(
      iscreen::gd_step_size(a.gamma, 2.0 * std::sqrt(D + 1.0) * std::exp(a.gamma), T));
  if (iscreen::schedule_mode_from_name(a.mode) == iscreen::ScheduleMode::theory) {
    const double eps = a.epsilon > 0.0 ? a.epsilon : 0.5 * a.gamma;
    const iscreen::KnownSchedule ks = iscreen::schedule_known_theory(D, a.gamma, eps, a.delta);
    std::printf("theory schedule: T=%lld n=%.6g eta=%.6g\n",
                static_cast<long long>(ks.sched.T), ks.sched.n, ks.sched.eta);
    if (!a.confirm_theory)
      throw iscreen::TheoryUnconfirmedError(
          "theory-scale T and n shown above; pass --confirm-theory to execute");
    T = ks.sched.T;
    eta = ks.sched.eta;
  }

  const iscreen::KnownStructureEstimate est =
      iscreen::learn_known_structure(table, es, a.gamma, T, eta, a.threads);
  iscreen::write_known_estimate(a.out, est, json{{"moments_file", a.moments}});
  iscreen::write_manifest(a.out, {a.moments, a.edges}, json(nullptr),
                          iscreen::schedule_to_json(est.schedule), seconds_since(t0));
  std::printf("wrote %s: p=%d D=%d T=%lld\n", a.out.c_str(), est.p, D,
              static_cast<long long>(T));
}

// ---- verify --------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 2024;
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  const std::vector<iscreen::CheckReport> reports = iscreen::run_verify_suite(a.suite, a.seed);
  std::fputs(iscreen::format_reports(reports).c_str(), stdout);
  if (!a.out.empty())
    iscreen::atomic_write_file(a.out, iscreen::reports_to_json(reports).dump(2) + "\n");
  const bool all_pass =
      std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  return all_pass ? 0 : 1;
}

// ---- pipeline --------------------------------------------------------------

struct SweepPoint {
  std::optional<std::int64_t> n;
  std::optional<int> d;
  std::optional<std::int64_t> T;
  std::optional<double> gamma;
};

std::optional<double> opt_number(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number())
    throw iscreen::SchemaError(std::string("pipeline config: ") + key + " must be a number");
  return j.at(key).get<double>();
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void run_pipeline(const std::string& config_path, int threads) {
  const json cfg = iscreen::load_json(config_path);
  if (!cfg.is_object()) throw iscreen::SchemaError("pipeline config: expected a JSON object");
  if (!cfg.contains("out_dir") || !cfg.at("out_dir").is_string())
    throw iscreen::SchemaError("pipeline config: missing out_dir");
  const std::string out_dir = cfg.at("out_dir").get<std::string>();
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> stages = {"couplings"};
  if (cfg.contains("stages")) {
    if (!cfg.at("stages").is_array())
      throw iscreen::SchemaError("pipeline config: stages must be an array");
    stages.clear();
    for (const auto& s : cfg.at("stages")) {
      if (!s.is_string()) throw iscreen::SchemaError("pipeline config: stage names are strings");
      stages.push_back(s.get<std::string>());
    }
  }
  auto staged = [&](const std::string& name) {
    return std::find(stages.begin(), stages.end(), name) != stages.end();
  };
  for (const auto& s : stages)
    if (s != "couplings" && s != "structure" && s != "fields" && s != "known")
      throw iscreen::SchemaError("pipeline config: unknown stage \"" + s + "\"");
  const bool has_edge_file = cfg.contains("edges_file");
  if (staged("structure") && !staged("couplings"))
    throw iscreen::InfeasibleError("pipeline: the structure stage needs the couplings stage");
  if (staged("fields") && !(staged("structure") || has_edge_file))
    throw iscreen::InfeasibleError(
        "pipeline: the fields stage needs the structure stage or an edges_file");
  if (staged("known") && !(staged("structure") || has_edge_file))
    throw iscreen::InfeasibleError(
        "pipeline: the known stage needs the structure stage or an edges_file");
  if ((staged("fields") || staged("structure")) && !staged("couplings"))
    throw iscreen::InfeasibleError("pipeline: downstream stages need the couplings stage");

  // Sweep lists (cartesian product); absent lists contribute a single
  // pass-through point.
  std::vector<SweepPoint> points{{}};
  const bool has_sweeps = cfg.contains("sweeps") && cfg.at("sweeps").is_object() &&
                          !cfg.at("sweeps").empty();
  if (has_sweeps) {
    const json& sw = cfg.at("sweeps");
    auto extend = [&](const char* key, auto assign) {
      if (!sw.contains(key)) return;
      if (!sw.at(key).is_array())
        throw iscreen::SchemaError("pipeline config: sweeps entries must be arrays");
      std::vector<SweepPoint> next;
      for (const auto& value : sw.at(key)) {
        if (!value.is_number())
          throw iscreen::SchemaError("pipeline config: sweep values must be numbers");
        for (SweepPoint pt : points) {
          assign(pt, value.get<double>());
          next.push_back(pt);
        }
      }
      points = std::move(next);
    };
    extend("n", [](SweepPoint& pt, double v) { pt.n = static_cast<std::int64_t>(v); });
    extend("d", [](SweepPoint& pt, double v) { pt.d = static_cast<int>(v); });
    extend("T", [](SweepPoint& pt, double v) { pt.T = static_cast<std::int64_t>(v); });
    extend("gamma", [](SweepPoint& pt, double v) { pt.gamma = v; });
  }

  std::string csv =
      "run,n,d,T,gamma,eta,coupling_err,false_positives,false_negatives,structure_exact,"
      "field_err,known_coupling_err,known_field_err\n";

  for (std::size_t run = 0; run < points.size(); ++run) {
    const SweepPoint& pt = points[run];
    const std::string prefix =
        out_dir + "/" + (points.size() == 1 ? std::string() : "run" + std::to_string(run) + "_");

    // --- model ---
    iscreen::IsingModel truth(1, {}, {0.0});
    std::uint64_t model_seed = 0;
    if (cfg.contains("model") && cfg.at("model").is_object() &&
        cfg.at("model").contains("file")) {
      truth = iscreen::read_model(cfg.at("model").at("file").get<std::string>());
    } else if (cfg.contains("model") && cfg.at("model").is_object() &&
               cfg.at("model").contains("generator")) {
      const json& g = cfg.at("model").at("generator");
      iscreen::GeneratorOptions opt;
      opt.p = static_cast<int>(
          opt_number(g, "p").value_or(0.0));
      if (g.contains("topology"))
        opt.topology = iscreen::topology_from_name(g.at("topology").get<std::string>());
      opt.gamma = pt.gamma.value_or(opt_number(g, "gamma").value_or(-1.0));
      opt.alpha = opt_number(g, "alpha").value_or(0.1);
      opt.beta = opt_number(g, "beta").value_or(-1.0);
      opt.field_range = opt_number(g, "field_range").value_or(-1.0);
      opt.degree = static_cast<int>(opt_number(g, "degree").value_or(2.0));
      opt.er_prob = opt_number(g, "er_prob").value_or(-1.0);
      opt.seed = static_cast<std::uint64_t>(opt_number(g, "seed").value_or(0.0));
      model_seed = opt.seed;
      truth = iscreen::generate_model(opt);
    } else {
      throw iscreen::SchemaError("pipeline config: model needs a file or a generator block");
    }
    const std::string model_path = prefix + "model.json";
    iscreen::ModelMeta meta;
    meta.generator = "pipeline";
    meta.seed = model_seed;
    meta.gamma = iscreen::l1_width(truth);
    iscreen::write_model(model_path, truth, meta);

    const double gamma =
        pt.gamma.value_or(opt_number(cfg.contains("schedule") ? cfg.at("schedule") : json(),
                                     "gamma")
                              .value_or(iscreen::l1_width(truth)));

    // --- sample ---
    const json sampler = cfg.contains("sampler") ? cfg.at("sampler") : json::object();
    const std::int64_t n =
        pt.n.value_or(static_cast<std::int64_t>(opt_number(sampler, "n").value_or(10000.0)));
    const std::uint64_t sample_seed =
        static_cast<std::uint64_t>(opt_number(sampler, "seed").value_or(1.0));
    iscreen::SampleMethod method = iscreen::SampleMethod::exact;
    if (sampler.contains("method"))
      method = iscreen::sample_method_from_name(sampler.at("method").get<std::string>());
    const iscreen::Dataset data =
        method == iscreen::SampleMethod::exact
            ? iscreen::sample_exact(truth, n, sample_seed)
            : iscreen::sample_gibbs(
                  truth, n, sample_seed,
                  static_cast<std::int64_t>(opt_number(sampler, "burn_in").value_or(-1.0)),
                  static_cast<std::int64_t>(opt_number(sampler, "thinning").value_or(-1.0)));
    const std::string data_path = prefix + "data.csv";
    iscreen::write_dataset(data_path, data);

    // --- schedule + moments ---
    const json sched_cfg = cfg.contains("schedule") ? cfg.at("schedule") : json::object();
    const double eps = opt_number(sched_cfg, "epsilon").value_or(0.5 * gamma);
    std::optional<int> d_override = pt.d;
    if (!d_override && sched_cfg.contains("d") && !sched_cfg.at("d").is_null())
      d_override = static_cast<int>(opt_number(sched_cfg, "d").value_or(0.0));
    std::optional<std::int64_t> T_override = pt.T;
    if (!T_override && sched_cfg.contains("T") && !sched_cfg.at("T").is_null())
      T_override = static_cast<std::int64_t>(opt_number(sched_cfg, "T").value_or(0.0));
    std::optional<double> eta_override = opt_number(sched_cfg, "eta");
    const Schedule sched =
        iscreen::schedule_practical(truth.p(), gamma, eps, n, d_override, T_override,
                                    eta_override);

    const int auto_degree = iscreen::required_table_degree_couplings(sched.d, truth.p());
    const int degree = static_cast<int>(
        opt_number(cfg.contains("moments") ? cfg.at("moments") : json(), "degree")
            .value_or(auto_degree));
    const iscreen::MomentTable table = iscreen::build_moments(data, degree);
    const std::string moments_path = prefix + "moments.json";
    iscreen::write_moments(moments_path, table, json{{"source", data_path}});

    // --- learn couplings ---
    const iscreen::CouplingEstimate est = iscreen::learn_couplings(table, sched, threads);
    const std::string est_path = prefix + "estimate.json";
    iscreen::write_estimate(est_path, est, json{{"moments_file", moments_path}});

    double coupling_err = 0.0;
    for (int u = 0; u < truth.p(); ++u)
      for (int v = u + 1; v < truth.p(); ++v)
        coupling_err = std::max(coupling_err,
                                std::abs(est.coupling(u, v) - truth.coupling(u, v)));

    // --- structure ---
    std::string fp = "", fn = "", exact = "", field_err = "", known_c = "", known_f = "";
    iscreen::EdgeSet edges;
    bool have_edges = false;
    if (staged("structure")) {
      if (!cfg.contains("alpha") || !cfg.at("alpha").is_number())
        throw iscreen::SchemaError("pipeline config: the structure stage needs alpha");
      edges = iscreen::threshold_edges(est, cfg.at("alpha").get<double>());
      have_edges = true;
      iscreen::write_edges(prefix + "edges.json", edges);
      const iscreen::EdgeComparison cmp =
          iscreen::compare_edges(edges, iscreen::edges_of(truth));
      fp = std::to_string(cmp.false_positives);
      fn = std::to_string(cmp.false_negatives);
      exact = cmp.exact ? "1" : "0";
    } else if (has_edge_file) {
      edges = load_edge_set(cfg.at("edges_file").get<std::string>(), truth.p());
      have_edges = true;
    }

    // --- fields ---
    if (staged("fields")) {
      if (!have_edges) throw iscreen::InfeasibleError("pipeline: fields stage has no edges");
      const json fcfg = cfg.contains("fields") ? cfg.at("fields") : json::object();
      std::optional<int> fd;
      if (fcfg.contains("d") && !fcfg.at("d").is_null())
        fd = static_cast<int>(opt_number(fcfg, "d").value_or(20.0));
      std::optional<std::int64_t> fT;
      if (fcfg.contains("T") && !fcfg.at("T").is_null())
        fT = static_cast<std::int64_t>(opt_number(fcfg, "T").value_or(5000.0));
      const iscreen::FieldsSchedule fs = iscreen::schedule_fields_practical(
          truth.p(), gamma, n, fd, fT, opt_number(fcfg, "eta"),
          opt_number(fcfg, "eps_c").value_or(0.0), opt_number(fcfg, "eps_h").value_or(0.0),
          edges.max_degree());
      const iscreen::FieldEstimate fe =
          iscreen::learn_fields(est, edges, table, fs, threads);
      iscreen::write_estimate_with_fields(est_path, prefix + "estimate_fields.json", fe);
      double err = 0.0;
      for (int u = 0; u < truth.p(); ++u)
        err = std::max(err, std::abs(fe.fields[u] - truth.fields()[u]));
      field_err = csv_num(err);
    }

    // --- known structure ---
    if (staged("known")) {
      if (!have_edges) throw iscreen::InfeasibleError("pipeline: known stage has no edges");
      const json kcfg = cfg.contains("known") ? cfg.at("known") : json::object();
      const std::int64_t kT =
          static_cast<std::int64_t>(opt_number(kcfg, "T").value_or(5000.0));
      const double keta = opt_number(kcfg, "eta").value_or(iscreen::gd_step_size(
          gamma, 2.0 * std::sqrt(edges.max_degree() + 1.0) * std::exp(gamma), kT));
      const iscreen::KnownStructureEstimate kest =
          iscreen::learn_known_structure(table, edges, gamma, kT, keta, threads);
      iscreen::write_known_estimate(prefix + "known.json", kest,
                                    json{{"moments_file", moments_path}});
      double cerr = 0.0, ferr = 0.0;
      for (int u = 0; u < truth.p(); ++u) {
        ferr = std::max(ferr, std::abs(kest.fields[u] - truth.fields()[u]));
        for (int v = u + 1; v < truth.p(); ++v) {
          double kv = 0.0;
          for (const auto& e : kest.couplings)
            if (e.u == u && e.v == v) kv = e.value;
          cerr = std::max(cerr, std::abs(kv - truth.coupling(u, v)));
        }
      }
      known_c = csv_num(cerr);
      known_f = csv_num(ferr);
    }

    csv += std::to_string(run) + "," + std::to_string(n) + "," + std::to_string(sched.d) +
           "," + std::to_string(sched.T) + "," + csv_num(gamma) + "," + csv_num(sched.eta) +
           "," + csv_num(coupling_err) + "," + fp + "," + fn + "," + exact + "," + field_err +
           "," + known_c + "," + known_f + "\n";
    std::printf("run %zu: n=%lld d=%d T=%lld coupling_err=%.6g\n", run,
                static_cast<long long>(n), sched.d, static_cast<long long>(sched.T),
                coupling_err);
  }

  if (has_sweeps) {
    iscreen::atomic_write_file(out_dir + "/metrics.csv", csv);
    std::printf("wrote %s/metrics.csv (%zu runs)\n", out_dir.c_str(), points.size());
  }
  iscreen::write_manifest(out_dir + "/pipeline", {config_path}, json(nullptr), json(nullptr),
                          0.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse Ising estimation from low-order moments"};
  app.require_subcommand(1);
  app.footer(
      "exit codes: 2 = malformed file or config, 3 = missing moment order,\n"
      "            4 = infeasible configuration, 5 = theory schedule not confirmed");

  GenModelArgs gen;
  auto* cgen = app.add_subcommand("gen-model", "generate a random model file");
  cgen->add_option("--p", gen.p, "number of spins")->required();
  cgen->add_option("--topology", gen.topology, "er|regular|ring|grid");
  cgen->add_option("--gamma", gen.gamma, "target l1 width (<=0 keeps raw draws)");
  cgen->add_option("--alpha", gen.alpha, "minimum |coupling|");
  cgen->add_option("--beta", gen.beta, "maximum |coupling| (default alpha)");
  cgen->add_option("--field-range", gen.field_range, "fields uniform on [-h, h]");
  cgen->add_option("--degree", gen.degree, "degree for regular topology");
  cgen->add_option("--er-prob", gen.er_prob, "edge probability for er topology");
  cgen->add_option("--seed", gen.seed, "rng seed");
  cgen->add_option("--out", gen.out, "output model JSON")->required();
  cgen->callback([&] { run_gen_model(gen); });

  SampleArgs smp;
  auto* csmp = app.add_subcommand("sample", "draw configurations from a model");
  csmp->add_option("--model", smp.model, "model JSON")->required();
  csmp->add_option("--n", smp.n, "sample count")->required();
  csmp->add_option("--method", smp.method, "exact|gibbs");
  csmp->add_option("--seed", smp.seed, "rng seed");
  csmp->add_option("--burn-in", smp.burn_in, "gibbs burn-in sweeps (default 10p)");
  csmp->add_option("--thinning", smp.thinning, "gibbs sweeps between records (default p)");
  csmp->add_option("--out", smp.out, "output dataset CSV")->required();
  csmp->callback([&] { run_sample(smp); });

  MomentsArgs mom;
  auto* cmom = app.add_subcommand("moments", "reduce a dataset to low-order moments");
  cmom->add_option("--data", mom.data, "dataset CSV")->required();
  cmom->add_option("--degree", mom.degree, "highest moment degree")->required();
  cmom->add_option("--out", mom.out, "output moments JSON")->required();
  cmom->callback([&] { run_moments(mom); });

  LearnArgs lrn;
  auto* clrn = app.add_subcommand("learn", "estimate couplings from moments");
  clrn->add_option("--moments", lrn.moments, "moments JSON")->required();
  clrn->add_option("--gamma", lrn.gamma, "l1 radius")->required();
  clrn->add_option("--mode", lrn.mode, "practical|theory");
  clrn->add_option("--epsilon", lrn.epsilon, "target accuracy (default gamma/2)");
  clrn->add_option("--delta", lrn.delta, "failure probability (theory mode)");
  clrn->add_option("--d", lrn.d, "surrogate degree override");
  clrn->add_option("--T", lrn.T, "iteration count override");
  clrn->add_option("--eta", lrn.eta, "step size override");
  clrn->add_option("--threads", lrn.threads, "worker threads (0 = auto)");
  clrn->add_flag("--confirm-theory", lrn.confirm_theory, "actually run a theory schedule");
  clrn->add_option("--out", lrn.out, "output estimate JSON")->required();
  clrn->callback([&] { run_learn(lrn); });

  StructureArgs str;
  auto* cstr = app.add_subcommand("structure", "threshold an estimate into an edge set");
  cstr->add_option("--estimate", str.estimate, "estimate JSON")->required();
  cstr->add_option("--alpha", str.alpha, "smallest nonzero |coupling| prior")->required();
  cstr->add_option("--out", str.out, "output edge list JSON")->required();
  cstr->callback([&] { run_structure(str); });

  FieldsArgs fld;
  auto* cfld = app.add_subcommand("fields", "re-learn fields on a fixed structure");
  cfld->add_option("--estimate", fld.estimate, "estimate JSON")->required();
  cfld->add_option("--edges", fld.edges, "edge list JSON")->required();
  cfld->add_option("--moments", fld.moments, "moments JSON")->required();
  cfld->add_option("--mode", fld.mode, "practical|theory");
  cfld->add_option("--gamma", fld.gamma, "l1 radius (default: estimate's schedule)");
  cfld->add_option("--eps-c", fld.eps_c, "assumed coupling accuracy (bound reporting)");
  cfld->add_option("--eps-h", fld.eps_h, "field accuracy target (bound reporting)");
  cfld->add_option("--delta", fld.delta, "failure probability (theory mode)");
  cfld->add_option("--d", fld.d, "surrogate degree override (default 20)");
  cfld->add_option("--T", fld.T, "iteration count override (default 5000)");
  cfld->add_option("--eta", fld.eta, "step size override");
  cfld->add_option("--threads", fld.threads, "worker threads (0 = auto)");
  cfld->add_flag("--confirm-theory", fld.confirm_theory, "actually run a theory schedule");
  cfld->add_option("--out", fld.out, "output estimate JSON with fields_stage2")->required();
  cfld->callback([&] { run_fields(fld); });

  KnownArgs kwn;
  auto* ckwn = app.add_subcommand("known", "learn with a known edge set (Walsh path)");
  ckwn->add_option("--moments", kwn.moments, "moments JSON")->required();
  ckwn->add_option("--edges", kwn.edges, "edge list JSON")->required();
  ckwn->add_option("--gamma", kwn.gamma, "l1 radius")->required();
  ckwn->add_option("--mode", kwn.mode, "practical|theory");
  ckwn->add_option("--epsilon", kwn.epsilon, "target accuracy (theory mode)");
  ckwn->add_option("--delta", kwn.delta, "failure probability (theory mode)");
  ckwn->add_option("--T", kwn.T, "iteration count (default 5000)");
  ckwn->add_option("--eta", kwn.eta, "step size override");
  ckwn->add_option("--threads", kwn.threads, "worker threads (0 = auto)");
  ckwn->add_flag("--confirm-theory", kwn.confirm_theory, "actually run a theory schedule");
  ckwn->add_option("--out", kwn.out, "output estimate JSON")->required();
  ckwn->callback([&] { run_known(kwn); });

  VerifyArgs ver;
  int verify_rc = 0;
  auto* cver = app.add_subcommand("verify", "numerical checks of the analysis bounds");
  cver->add_option("--suite", ver.suite, "all or a single check name");
  cver->add_option("--seed", ver.seed, "rng seed");
  cver->add_option("--out", ver.out, "optional JSON report path");
  cver->callback([&] { verify_rc = run_verify(ver); });

  std::string pipeline_config;
  int pipeline_threads = 0;
  auto* cpip = app.add_subcommand("pipeline", "config-driven multi-stage run");
  cpip->add_option("--config", pipeline_config, "pipeline config JSON")->required();
  cpip->add_option("--threads", pipeline_threads, "worker threads (0 = auto)");
  cpip->callback([&] { run_pipeline(pipeline_config, pipeline_threads); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const iscreen::SchemaError& e) {
    std::fprintf(stderr, "error (schema): %s\n", e.what());
    return 2;
  } catch (const iscreen::MissingMomentError& e) {
    std::fprintf(stderr, "error (missing moment): %s\n", e.what());
    return 3;
  } catch (const iscreen::InfeasibleError& e) {
    std::fprintf(stderr, "error (infeasible): %s\n", e.what());
    return 4;
  } catch (const iscreen::TheoryUnconfirmedError& e) {
    std::fprintf(stderr, "error (theory unconfirmed): %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return verify_rc;
}
