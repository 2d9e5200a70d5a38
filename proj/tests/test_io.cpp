#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cylint/io.hpp"

using namespace cylint;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "cylint_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

Matrix awkward_matrix() {
  Matrix m(2, 3);
  m << 0.1, -1.0 / 3.0, 1e-308, 3.0, 1e17 + 1.0, -0.0;
  return m;
}

}  // namespace

TEST_CASE("operator and vector JSON round trips are bit exact") {
  Matrix m = awkward_matrix();
  json j = operator_to_json(m);
  CHECK(j["shape"][0] == 2);
  CHECK(j["shape"][1] == 3);
  Matrix back = operator_from_json(j);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) {
      CHECK(back(r, c) == m(r, c));
      CHECK(std::signbit(back(r, c)) == std::signbit(m(r, c)));
    }
  // survive a serialize/parse cycle as well
  Matrix back2 = operator_from_json(json::parse(j.dump()));
  CHECK((back2.array() == m.array()).all());

  Vector v(4);
  v << -0.1, 2.0 / 7.0, 0.0, 123456.789;
  Vector vb = vector_from_json(json::parse(vector_to_json(v).dump()));
  REQUIRE(vb.size() == 4);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(vb[i] == v[i]);

  json bad = operator_to_json(m);
  bad.erase("shape");
  CHECK_THROWS_AS(operator_from_json(bad), std::invalid_argument);
  json wrong_count = operator_to_json(m);
  wrong_count["entries"].push_back(1.0);
  CHECK_THROWS_AS(operator_from_json(wrong_count), std::invalid_argument);
}

TEST_CASE("noise panel binary round trip and corruption detection") {
  LevyModel m = LevyModel::gaussian(3, 1.0);
  NoisePanel panel =
      generate_noise_panel(m, {0.0, 0.25, 0.5, 1.0}, 7, 991, 1);
  fs::path path = tmp_file("panel.clnp");
  save_noise_panel(panel, path.string());
  NoisePanel back = load_noise_panel(path.string());
  CHECK(back.times == panel.times);
  CHECK(back.replicas == panel.replicas);
  CHECK(back.dim == panel.dim);
  CHECK(back.master_seed == panel.master_seed);
  REQUIRE(back.data.size() == panel.data.size());
  for (std::size_t i = 0; i < panel.data.size(); ++i)
    CHECK(back.data[i] == panel.data[i]);

  // corrupt the magic
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS(load_noise_panel(path.string()));
  CHECK_THROWS(load_noise_panel(tmp_file("missing.clnp").string()));
}

TEST_CASE("integral sample binary round trip preserves provenance") {
  IntegralSample s;
  s.observation_times = {0.0, 0.5, 1.0};
  s.provenance = {"model-a", "rule-b", "dyadic-2", 777};
  for (int r = 0; r < 3; ++r) {
    std::vector<Vector> row;
    for (int k = 0; k < 3; ++k) {
      Vector v(2);
      v << r + 0.5 * k, -static_cast<double>(k) / 3.0;
      row.push_back(v);
    }
    s.values.push_back(row);
  }
  fs::path path = tmp_file("sample.clis");
  save_integral_sample(s, path.string());
  IntegralSample back = load_integral_sample(path.string());
  CHECK(back.observation_times == s.observation_times);
  CHECK(back.provenance.model_id == "model-a");
  CHECK(back.provenance.integrand_id == "rule-b");
  CHECK(back.provenance.partition_id == "dyadic-2");
  CHECK(back.provenance.master_seed == 777);
  REQUIRE(back.values.size() == 3);
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k)
      CHECK((back.values[r][k] - s.values[r][k]).norm() == 0.0);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS(load_integral_sample(path.string()));
}

TEST_CASE("csv writer emits a header and one line per row") {
  fs::path path = tmp_file("table.csv");
  write_csv(path.string(), {"level", "p"}, {{8.0, 0.125}, {16.0, 0.0625}});
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "level,p");
  REQUIRE(std::getline(in, line));
  CHECK(line.substr(0, 2) == "8,");
  REQUIRE(std::getline(in, line));
  CHECK(line.substr(0, 3) == "16,");
  CHECK_FALSE(std::getline(in, line));
}
