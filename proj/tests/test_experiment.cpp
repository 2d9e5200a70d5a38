#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cylint/experiment.hpp"

using namespace cylint;
namespace fs = std::filesystem;

#ifndef CYLINT_REPO_DIR
#define CYLINT_REPO_DIR "."
#endif

namespace {

json minimal_cf_config() {
  return json{
      {"kind", "cf-test"},
      {"seed", 123},
      {"replicas", 1000},
      {"dims", {{"d_U", 4}, {"d_V", 2}}},
      {"model", {{"family", "gaussian"}, {"params", {{"variance", 1.0}}}}},
      {"phi", {{"kind", "random-gaussian"}, {"seed", 5}, {"scale", 1.0}}},
      {"dt", {0.5}},
      {"probes", 2},
  };
}

bool has_error_at(const std::vector<FieldError>& errs, const std::string& path) {
  for (const FieldError& e : errs)
    if (e.path == path) return true;
  return false;
}

}  // namespace

TEST_CASE("every bundled config validates cleanly") {
  fs::path configs = fs::path(CYLINT_REPO_DIR) / "configs";
  REQUIRE(fs::exists(configs));
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(configs)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    std::ifstream in(entry.path());
    json config = json::parse(in);
    auto errs = validate_config(config);
    INFO("config: ", entry.path().filename().string());
    CHECK(errs.empty());
  }
  CHECK(seen >= 16);
}

TEST_CASE("validation errors carry JSON field paths") {
  json c = minimal_cf_config();
  c.erase("model");
  CHECK(has_error_at(validate_config(c), "$.model"));

  c = minimal_cf_config();
  c["model"]["family"] = "canonical-stable";
  c["model"]["params"] = {{"alpha", 2.5}, {"c", 1.0}};
  CHECK(has_error_at(validate_config(c), "$.model.params.alpha"));

  c = minimal_cf_config();
  c["replicas"] = 10;  // statistical kinds require at least 100
  CHECK(has_error_at(validate_config(c), "$.replicas"));

  c = minimal_cf_config();
  c.erase("seed");
  CHECK(has_error_at(validate_config(c), "$.seed"));

  c = minimal_cf_config();
  c["kind"] = "unknown-kind";
  CHECK(has_error_at(validate_config(c), "$.kind"));

  CHECK(validate_config(minimal_cf_config()).empty());
}

TEST_CASE("model and operator builders honor the config blocks") {
  json c = minimal_cf_config();
  LevyModel m = model_from_config(c);
  CHECK(m.dim() == 4);
  CHECK(m.coordinate_representable());

  json stable = c;
  stable["model"]["family"] = "canonical-stable";
  stable["model"]["params"] = {{"alpha", 1.5}, {"c", 0.7}};
  LevyModel sm = model_from_config(stable);
  CHECK_FALSE(sm.coordinate_representable());
  // symbol -c ||u||^alpha at a unit vector
  Vector u = Vector::Zero(4);
  u[0] = 1.0;
  CHECK(sm.symbol(u).real() == doctest::Approx(-0.7));
  CHECK(sm.symbol(u).imag() == 0.0);

  json id_block = {{"kind", "identity"}};
  Matrix id = operator_from_config(id_block, 3, 3);
  CHECK((id - Matrix::Identity(3, 3)).norm() == 0.0);

  json rg = {{"kind", "random-gaussian"}, {"seed", 9}, {"scale", 2.0}};
  Matrix a = operator_from_config(rg, 2, 4);
  Matrix b = operator_from_config(rg, 2, 4);
  CHECK((a - b).norm() == 0.0);  // deterministic in the block seed
  CHECK(a.norm() > 0.0);

  json rule_block = {{"name", "exp-decay"},
                     {"rate", 1.0},
                     {"phi", {{"kind", "identity"}}}};
  IntegrandRule rule = rule_from_config(rule_block, 3, 3);
  NoisePanel panel = generate_noise_panel(LevyModel::gaussian(3, 1.0),
                                          {0.0, 1.0}, 1, 1, 1);
  HistoryView h(&panel, 0, 1.0);
  CHECK((rule.eval(0.0, h) - Matrix::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("tangent row fixtures exist and unknown names throw") {
  for (const char* name : {"iid-gaussian", "two-state-multiplicative",
                           "history-variance", "point-mass"}) {
    TangentRow row = tangent_row_fixture(name, 8);
    CHECK(row.steps == 8);
    CHECK(row.law(0, row.initial_state).probs.size() +
              row.law(0, row.initial_state).values.size() + 1 >
          0);  // law callable
  }
  CHECK_THROWS_AS(tangent_row_fixture("no-such-fixture", 8),
                  std::invalid_argument);
}

TEST_CASE("run_experiment produces a structured report and is deterministic") {
  fs::path out1 = fs::temp_directory_path() / "cylint_exp_t1";
  fs::path out2 = fs::temp_directory_path() / "cylint_exp_t4";
  json c = minimal_cf_config();
  RunOutcome r1 = run_experiment(c, out1.string(), 1, "fixtures");
  RunOutcome r2 = run_experiment(c, out2.string(), 4, "fixtures");
  CHECK(r1.all_passed);
  CHECK(r2.all_passed);

  const ordered_json& rep = r1.report;
  REQUIRE(rep.contains("schema_version"));
  REQUIRE(rep.contains("kind"));
  REQUIRE(rep.contains("config"));
  REQUIRE(rep.contains("seeds"));
  REQUIRE(rep.contains("assertions"));
  REQUIRE(rep.contains("summary"));
  REQUIRE(rep.contains("timestamp"));
  CHECK(rep["kind"] == "cf-test");
  CHECK(rep["summary"]["failed"] == 0);
  for (const auto& a : rep["assertions"]) {
    CHECK(a.contains("name"));
    CHECK(a.contains("pass"));
  }

  // thread count never changes the numerics: identical modulo timestamp
  ordered_json a = r1.report, b = r2.report;
  a.erase("timestamp");
  b.erase("timestamp");
  CHECK(a.dump() == b.dump());

  CHECK(fs::exists(out1 / "report.json"));
  std::ifstream in(out1 / "report.json");
  json on_disk = json::parse(in);
  CHECK(on_disk["kind"] == "cf-test");
}
