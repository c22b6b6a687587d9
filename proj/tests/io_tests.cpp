#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/io.hpp"
#include "iscreen/model.hpp"
#include "iscreen/moments.hpp"
#include "iscreen/optimizer.hpp"
#include "iscreen/sampling.hpp"
#include "iscreen/structure.hpp"
#include "iscreen/verify.hpp"

using namespace iscreen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("iscreen_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a64("ab") != fnv1a64("ba"));
}

TEST_CASE("atomic write leaves no temp file and overwrites") {
  TempDir td;
  const std::string path = td / "a.txt";
  atomic_write_file(path, "hello\n");
  CHECK(read_text_file(path) == "hello\n");
  CHECK(!fs::exists(path + ".tmp"));
  atomic_write_file(path, "second");
  CHECK(read_text_file(path) == "second");
  CHECK_THROWS_AS(read_text_file(td / "missing.txt"), SchemaError);
}

TEST_CASE("load_json rejects malformed input") {
  TempDir td;
  const std::string path = td / "bad.json";
  atomic_write_file(path, "{\"p\": 3,");
  CHECK_THROWS_AS(load_json(path), SchemaError);
  CHECK_THROWS_AS(load_json(td / "absent.json"), SchemaError);
}

TEST_CASE("model round trip is bit exact") {
  SplitMix64 rng(41);
  for (int t = 0; t < 5; ++t) {
    IsingModel m = random_dense_model(6, 1.3, rng);
    ModelMeta meta;
    meta.generator = "dense";
    meta.seed = 41;
    meta.gamma = 1.3;
    TempDir td;
    const std::string path = td / "model.json";
    write_model(path, m, meta);
    ModelMeta back;
    IsingModel r = read_model(path, &back);
    REQUIRE(r.p() == m.p());
    REQUIRE(r.coupling_entries().size() == m.coupling_entries().size());
    for (std::size_t i = 0; i < m.coupling_entries().size(); ++i) {
      CHECK(r.coupling_entries()[i].u == m.coupling_entries()[i].u);
      CHECK(r.coupling_entries()[i].v == m.coupling_entries()[i].v);
      CHECK(r.coupling_entries()[i].value == m.coupling_entries()[i].value);  // exact
    }
    for (int u = 0; u < m.p(); ++u) CHECK(r.fields()[u] == m.fields()[u]);
    CHECK(back.generator == "dense");
    CHECK(back.seed == 41);
    CHECK(back.gamma == 1.3);
  }
}

TEST_CASE("model schema violations") {
  TempDir td;
  const std::string path = td / "m.json";
  auto write_and_read = [&](const json& j) {
    atomic_write_file(path, j.dump());
    return read_model(path);
  };
  CHECK_THROWS_AS(write_and_read(json{{"couplings", json::array()}, {"fields", {0.0}}}),
                  SchemaError);  // missing p
  CHECK_THROWS_AS(write_and_read(json{{"p", 2}, {"couplings", 3}, {"fields", {0.0, 0.0}}}),
                  SchemaError);  // couplings not an array
  CHECK_THROWS_AS(
      write_and_read(json{{"p", 2}, {"couplings", {{0, 1}}}, {"fields", {0.0, 0.0}}}),
      SchemaError);  // triple of length 2
  CHECK_THROWS_AS(
      write_and_read(json{
          {"p", 2}, {"couplings", {{0, 1, 0.5}, {0, 1, 0.2}}}, {"fields", {0.0, 0.0}}}),
      SchemaError);  // duplicate pair
  CHECK_THROWS_AS(
      write_and_read(json{{"p", 3}, {"couplings", json::array()}, {"fields", {0.0}}}),
      SchemaError);  // wrong field count
  CHECK_THROWS_AS(
      write_and_read(json{{"p", 2}, {"couplings", {{1, 0, 0.5}}}, {"fields", {0.0, 0.0}}}),
      SchemaError);  // u >= v
}

TEST_CASE("dataset round trip for both samplers") {
  IsingModel m = testutil::single_edge_model(3, 0, 1, 0.4);
  TempDir td;
  SUBCASE("exact") {
    Dataset d = sample_exact(m, 200, 7);
    const std::string path = td / "data.txt";
    write_dataset(path, d);
    Dataset r = read_dataset(path);
    CHECK(r.n == d.n);
    CHECK(r.p == d.p);
    CHECK(r.seed == d.seed);
    CHECK(r.method == SampleMethod::exact);
    CHECK(r.spins == d.spins);
  }
  SUBCASE("gibbs keeps chain settings") {
    Dataset d = sample_gibbs(m, 50, 7, 100, 2);
    const std::string path = td / "gibbs.txt";
    write_dataset(path, d);
    Dataset r = read_dataset(path);
    CHECK(r.method == SampleMethod::gibbs);
    CHECK(r.burn_in == 100);
    CHECK(r.thinning == 2);
    CHECK(r.spins == d.spins);
  }
}

TEST_CASE("dataset schema violations") {
  TempDir td;
  const std::string path = td / "d.txt";
  auto attempt = [&](const std::string& text) {
    atomic_write_file(path, text);
    return read_dataset(path);
  };
  const std::string header = "{\"n\":2,\"p\":3,\"seed\":1,\"method\":\"exact\"}\n";
  CHECK_NOTHROW(attempt(header + "1,-1,1\n-1,-1,1\n"));
  CHECK_NOTHROW(attempt(header + "+1,-1,+1\n-1,-1,1"));  // signs and no final newline
  CHECK_THROWS_AS(attempt(header + "1,-1\n1,1,1\n"), SchemaError);   // short row
  CHECK_THROWS_AS(attempt(header + "1,-1,2\n1,1,1\n"), SchemaError); // entry not +-1
  CHECK_THROWS_AS(attempt(header + "1,-1,1\n"), SchemaError);        // missing row
  CHECK_THROWS_AS(attempt("not json\n1,1,1\n"), SchemaError);
  CHECK_THROWS_AS(attempt("{\"n\":1,\"p\":3,\"seed\":1}\n1,1,1\n"), SchemaError);  // no method
}

TEST_CASE("moments round trip preserves oracle marking and exact values") {
  IsingModel m = testutil::single_edge_model(4, 1, 3, 0.7);
  TempDir td;
  SUBCASE("oracle table serializes n as null") {
    MomentTable t = exact_table(m, 3);
    const std::string path = td / "mom.json";
    write_moments(path, t, json{{"note", "oracle"}});
    const json j = load_json(path);
    CHECK(j.at("n").is_null());
    MomentTable r = read_moments(path);
    CHECK(r.is_oracle());
    CHECK(r.p() == 4);
    CHECK(r.max_degree() == 3);
    REQUIRE(r.entries().size() == t.entries().size());
    for (std::size_t i = 0; i < t.entries().size(); ++i) {
      CHECK(r.entries()[i].first == t.entries()[i].first);
      CHECK(r.entries()[i].second == t.entries()[i].second);  // exact
    }
  }
  SUBCASE("empirical table keeps n and the key grammar") {
    Dataset data = sample_exact(m, 500, 3);
    MomentTable t = build_moments(data, 2);
    const std::string path = td / "emp.json";
    write_moments(path, t, json());
    const std::string text = read_text_file(path);
    CHECK(text.find("\"1;3\"") != std::string::npos);
    MomentTable r = read_moments(path);
    CHECK(!r.is_oracle());
    CHECK(r.n() == 500);
    CHECK(r.query((1ULL << 1) | (1ULL << 3)) == t.query((1ULL << 1) | (1ULL << 3)));
  }
}

TEST_CASE("moments schema violations") {
  TempDir td;
  const std::string path = td / "m.json";
  auto attempt = [&](const json& j) {
    atomic_write_file(path, j.dump());
    return read_moments(path);
  };
  // json::array everywhere: a brace list of ["key", value] pairs would be
  // interpreted as an object initializer.
  const json entry = json::array({"0;1", 0.25});
  CHECK_NOTHROW(attempt(
      json{{"p", 3}, {"degree", 2}, {"n", nullptr}, {"entries", json::array({entry})}}));
  CHECK_THROWS_AS(attempt(json{{"degree", 2}, {"n", nullptr}, {"entries", json::array()}}),
                  SchemaError);  // missing p
  CHECK_THROWS_AS(
      attempt(json{{"p", 3}, {"degree", 4}, {"n", nullptr}, {"entries", json::array()}}),
      SchemaError);  // degree above p
  CHECK_THROWS_AS(attempt(json{{"p", 3},
                               {"degree", 2},
                               {"n", nullptr},
                               {"entries", json::array({entry, entry})}}),
                  SchemaError);  // duplicate key
  CHECK_THROWS_AS(attempt(json{{"p", 3},
                               {"degree", 2},
                               {"n", nullptr},
                               {"entries", json::array({json::array({"0;1", "x"})})}}),
                  SchemaError);  // non-numeric value
  CHECK_THROWS_AS(
      attempt(
          json{{"p", 3}, {"degree", 1}, {"n", nullptr}, {"entries", json::array({entry})}}),
      SchemaError);  // key above table degree
  CHECK_THROWS_AS(attempt(json{{"p", 3},
                               {"degree", 2},
                               {"n", nullptr},
                               {"entries", json::array({json::array({"0;1", 1.5})})}}),
      SchemaError);  // moment outside [-1, 1]
}

TEST_CASE("schedule round trip") {
  Schedule s = schedule_practical(5, 1.2, 0.4, 1000, 9, 1234, 0.31);
  const json j = schedule_to_json(s);
  Schedule r = schedule_from_json(j);
  CHECK(r.mode == s.mode);
  CHECK(r.gamma == s.gamma);
  CHECK(r.epsilon == s.epsilon);
  CHECK(r.delta == s.delta);
  CHECK(r.d == s.d);
  CHECK(r.T == s.T);
  CHECK(r.eta == s.eta);
  CHECK(r.n == s.n);
  CHECK(j.at("mode") == "practical");
  CHECK_THROWS_AS(schedule_from_json(json{{"mode", "practical"}}), SchemaError);
}

TEST_CASE("estimate round trip keeps the symmetrized view") {
  CouplingEstimate est;
  est.p = 4;
  est.couplings = {{0, 1, 0.25}, {0, 2, -0.125}, {2, 3, 1.0 / 3.0}};
  est.fields = {0.0, 0.5, -0.25, 0.0625};
  est.schedule = schedule_practical(4, 1.0, 0.5, 1000, 6, 500, 0.3);
  NodeDiagnostics diag;
  diag.node = 0;
  diag.iterations = 500;
  diag.loss_trace = {{0, 1.0}, {499, 0.5}};
  est.diagnostics = {diag};

  TempDir td;
  const std::string path = td / "est.json";
  write_estimate(path, est, json{{"source", "unit"}});
  const json j = load_json(path);
  CHECK(j.at("method") == "screening");
  CHECK(j.at("meta").at("source") == "unit");
  CHECK(j.at("diagnostics").at("nodes").size() == 1);

  CouplingEstimate r = read_estimate(path);
  CHECK(r.p == 4);
  REQUIRE(r.couplings.size() == 3);
  CHECK(r.coupling(2, 3) == 1.0 / 3.0);
  CHECK(r.coupling(3, 2) == 1.0 / 3.0);
  CHECK(r.coupling(1, 3) == 0.0);
  CHECK(r.fields == est.fields);
  CHECK(r.schedule.eta == est.schedule.eta);
}

TEST_CASE("estimate schema violations") {
  TempDir td;
  const std::string path = td / "e.json";
  const json sched = schedule_to_json(schedule_practical(3, 1.0, 0.5, 1000, 4, 10, 0.3));
  auto attempt = [&](json j) {
    j["schedule"] = sched;
    atomic_write_file(path, j.dump());
    return read_estimate(path);
  };
  CHECK_NOTHROW(attempt(json{{"p", 3}, {"couplings", {{0, 2, 0.1}}}, {"fields", {0., 0., 0.}}}));
  CHECK_THROWS_AS(attempt(json{{"p", 3}, {"couplings", {{2, 0, 0.1}}}, {"fields", {0., 0., 0.}}}),
                  SchemaError);  // u >= v
  CHECK_THROWS_AS(
      attempt(json{{"p", 3}, {"couplings", {{0, 1, 0.1}, {0, 1, 0.2}}}, {"fields", {0., 0., 0.}}}),
      SchemaError);  // duplicate after sorting
  CHECK_THROWS_AS(attempt(json{{"p", 3}, {"couplings", json::array()}, {"fields", {0., 0.}}}),
                  SchemaError);  // fields shorter than p
}

TEST_CASE("fields stage attaches to an existing estimate file") {
  CouplingEstimate est;
  est.p = 2;
  est.couplings = {{0, 1, 0.4}};
  est.fields = {0.0, 0.0};
  est.schedule = schedule_practical(2, 0.5, 0.25, 1000, 3, 10, 0.2);
  TempDir td;
  const std::string est_path = td / "est.json";
  write_estimate(est_path, est, json());

  FieldEstimate fe;
  fe.p = 2;
  fe.fields = {0.125, -0.25};
  fe.neighborhood_sizes = {1, 1};
  fe.bound_eps_h_term = {0.05, 0.05};
  fe.bound_coupling_term = {0.01, 0.02};
  fe.schedule = schedule_fields_practical(2, 0.5, 1, 4, 10, 0.2);
  const std::string out_path = td / "est_fields.json";
  write_estimate_with_fields(est_path, out_path, fe);

  const json j = load_json(out_path);
  CHECK(j.at("method") == "screening");  // original content preserved
  const json& st = j.at("fields_stage2");
  CHECK(st.at("fields")[0] == 0.125);
  CHECK(st.at("neighborhood_sizes")[1] == 1);
  CHECK(st.at("bounds")[1].at("total") == doctest::Approx(0.07).epsilon(1e-12));
  const FieldsSchedule fs = fields_schedule_from_json(st.at("schedule"));
  CHECK(fs.sched.d == 4);
  CHECK(fs.sched.T == 10);
}

TEST_CASE("edges file round trip normalizes nothing but enforces order") {
  EdgeSet es = make_edge_set(5, {{3, 1}, {0, 4}});
  TempDir td;
  const std::string path = td / "edges.json";
  write_edges(path, es);
  const auto pairs = read_edges(path);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<int, int>(0, 4));
  CHECK(pairs[1] == std::pair<int, int>(1, 3));
  atomic_write_file(path, "[[2,2]]");
  CHECK_THROWS_AS(read_edges(path), SchemaError);
  atomic_write_file(path, "{\"edges\":[]}");
  CHECK_THROWS_AS(read_edges(path), SchemaError);
}

TEST_CASE("verify reports serialize") {
  CheckReport r;
  r.name = "poly_bound";
  r.params = {{"gamma", 1.0}, {"d", 7.0}};
  r.observed = 1e-9;
  r.bound = 2e-9;
  r.pass = true;
  const json j = reports_to_json({r});
  REQUIRE(j.size() == 1);
  CHECK(j[0].at("name") == "poly_bound");
  CHECK(j[0].at("params").at("gamma") == 1.0);
  CHECK(j[0].at("pass") == true);
}

TEST_CASE("manifest records input hashes and the schedule") {
  TempDir td;
  const std::string input = td / "input.json";
  atomic_write_file(input, "payload");
  const std::string out = td / "result.json";
  atomic_write_file(out, "{}");
  write_manifest(out, {input}, json{{"sampler", 9}}, json{{"d", 7}}, 1.5);
  const json j = load_json(out + ".manifest.json");
  CHECK(j.at("output") == out);
  REQUIRE(j.at("inputs").size() == 1);
  CHECK(j.at("inputs")[0].at("path") == input);
  CHECK(j.at("inputs")[0].at("fnv1a64") == fnv1a64_hex("payload"));
  CHECK(j.at("seeds").at("sampler") == 9);
  CHECK(j.at("schedule").at("d") == 7);
  CHECK(j.at("wall_time_s") == 1.5);
}
