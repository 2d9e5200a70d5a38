#include "cylint/io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cylint {

json operator_to_json(const Matrix& phi) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < phi.rows(); ++i)
    for (Eigen::Index k = 0; k < phi.cols(); ++k) entries.push_back(phi(i, k));
  return json{{"shape", {phi.rows(), phi.cols()}}, {"entries", entries}};
}

Matrix operator_from_json(const json& j) {
  if (!j.contains("shape") || !j.contains("entries"))
    throw std::invalid_argument("operator_from_json: missing shape/entries");
  Eigen::Index rows = j["shape"][0].get<Eigen::Index>();
  Eigen::Index cols = j["shape"][1].get<Eigen::Index>();
  const json& entries = j["entries"];
  if (static_cast<Eigen::Index>(entries.size()) != rows * cols)
    throw std::invalid_argument("operator_from_json: entry count mismatch");
  Matrix phi(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k)
      phi(i, k) = entries[idx++].get<double>();
  return phi;
}

json vector_to_json(const Vector& v) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) entries.push_back(v[i]);
  return json{{"shape", {v.size(), 1}}, {"entries", entries}};
}

Vector vector_from_json(const json& j) {
  Matrix m = operator_from_json(j);
  if (m.cols() != 1)
    throw std::invalid_argument("vector_from_json: not a column vector");
  return m.col(0);
}

namespace {

void write_u32(std::ostream& os, std::uint32_t x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof(x));
}
void write_u64(std::ostream& os, std::uint64_t x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof(x));
}
void write_f64(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), n * sizeof(double));
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t x = 0;
  is.read(reinterpret_cast<char*>(&x), sizeof(x));
  return x;
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t x = 0;
  is.read(reinterpret_cast<char*>(&x), sizeof(x));
  return x;
}
void read_f64(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), n * sizeof(double));
}
void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_string(std::istream& is) {
  std::uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}
void check_magic(std::istream& is, const char* magic) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw std::runtime_error("bad container magic");
}

}  // namespace

void save_noise_panel(const NoisePanel& panel, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write("CLNP", 4);
  write_u32(os, 1);
  write_u32(os, static_cast<std::uint32_t>(panel.replicas));
  write_u32(os, static_cast<std::uint32_t>(panel.steps()));
  write_u32(os, static_cast<std::uint32_t>(panel.dim));
  write_u64(os, panel.master_seed);
  write_f64(os, panel.times.data(), panel.times.size());
  write_f64(os, panel.data.data(), panel.data.size());
}

NoisePanel load_noise_panel(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  check_magic(is, "CLNP");
  std::uint32_t version = read_u32(is);
  if (version != 1) throw std::runtime_error("unsupported CLNP version");
  NoisePanel panel;
  panel.replicas = static_cast<int>(read_u32(is));
  std::uint32_t steps = read_u32(is);
  panel.dim = static_cast<Eigen::Index>(read_u32(is));
  panel.master_seed = read_u64(is);
  panel.times.resize(steps + 1);
  read_f64(is, panel.times.data(), panel.times.size());
  panel.data.resize(static_cast<std::size_t>(panel.replicas) * steps *
                    panel.dim);
  read_f64(is, panel.data.data(), panel.data.size());
  if (!is) throw std::runtime_error("truncated CLNP file");
  return panel;
}

void save_integral_sample(const IntegralSample& sample,
                          const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  std::uint32_t replicas = static_cast<std::uint32_t>(sample.values.size());
  std::uint32_t ntimes =
      static_cast<std::uint32_t>(sample.observation_times.size());
  std::uint32_t dim =
      replicas && ntimes ? static_cast<std::uint32_t>(sample.values[0][0].size())
                         : 0;
  os.write("CLIS", 4);
  write_u32(os, 1);
  write_u32(os, replicas);
  write_u32(os, ntimes);
  write_u32(os, dim);
  write_u64(os, sample.provenance.master_seed);
  write_string(os, sample.provenance.model_id);
  write_string(os, sample.provenance.integrand_id);
  write_string(os, sample.provenance.partition_id);
  write_f64(os, sample.observation_times.data(), ntimes);
  for (const auto& row : sample.values)
    for (const Vector& v : row) write_f64(os, v.data(), v.size());
}

IntegralSample load_integral_sample(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  check_magic(is, "CLIS");
  std::uint32_t version = read_u32(is);
  if (version != 1) throw std::runtime_error("unsupported CLIS version");
  std::uint32_t replicas = read_u32(is);
  std::uint32_t ntimes = read_u32(is);
  std::uint32_t dim = read_u32(is);
  IntegralSample sample;
  sample.provenance.master_seed = read_u64(is);
  sample.provenance.model_id = read_string(is);
  sample.provenance.integrand_id = read_string(is);
  sample.provenance.partition_id = read_string(is);
  sample.observation_times.resize(ntimes);
  read_f64(is, sample.observation_times.data(), ntimes);
  sample.values.resize(replicas);
  for (auto& row : sample.values) {
    row.resize(ntimes);
    for (Vector& v : row) {
      v.resize(dim);
      read_f64(is, v.data(), dim);
    }
  }
  if (!is) throw std::runtime_error("truncated CLIS file");
  return sample;
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    os << header[i] << (i + 1 < header.size() ? "," : "\n");
  char buf[40];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      os << buf << (i + 1 < row.size() ? "," : "\n");
    }
  }
}

}  // namespace cylint
