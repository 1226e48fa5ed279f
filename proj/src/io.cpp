#include "sparse_recovery/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace sparse_recovery {

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void write_matrix_csv(std::ostream& out, const Matrix& M) {
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    for (auto field : split_csv_line(line)) row.push_back(parse_double(field));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("ragged CSV: row " + std::to_string(rows.size() + 1) + " has " +
                                  std::to_string(row.size()) + " fields, expected " +
                                  std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("empty matrix CSV");
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return M;
}

void write_vector_csv(std::ostream& out, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

Vector read_vector_csv(std::istream& in) {
  Matrix M = read_matrix_csv(in);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw std::invalid_argument("vector CSV must be a single row or a single column");
}

namespace {

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void save_matrix_csv(const std::filesystem::path& path, const Matrix& M) {
  auto out = open_for_write(path);
  write_matrix_csv(out, M);
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_matrix_csv(in);
}

void save_vector_csv(const std::filesystem::path& path, const Vector& v) {
  auto out = open_for_write(path);
  write_vector_csv(out, v);
}

Vector load_vector_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_vector_csv(in);
}

ProblemDescriptor ProblemDescriptor::describe(const SparseSignal& signal,
                                              const MeasurementEnsemble& ensemble,
                                              std::optional<std::uint64_t> problem_seed,
                                              const Amplitude& amplitude) {
  ProblemDescriptor descriptor;
  descriptor.d = signal.dimension();
  descriptor.s = signal.sparsity();
  descriptor.m = ensemble.rows();
  descriptor.kind = ensemble.kind();
  if (ensemble.kind() != EnsembleKind::explicit_matrix) descriptor.seed = problem_seed;
  descriptor.support = signal.support();
  descriptor.R = signal.norm_bound();
  descriptor.amplitude = amplitude;
  return descriptor;
}

nlohmann::json to_json(const ProblemDescriptor& descriptor) {
  nlohmann::json j;
  j["d"] = descriptor.d;
  j["s"] = descriptor.s;
  j["m"] = descriptor.m;
  j["kind"] = to_string(descriptor.kind);
  j["seed"] = descriptor.seed ? nlohmann::json(*descriptor.seed) : nlohmann::json(nullptr);
  j["support"] = descriptor.support;
  j["R"] = descriptor.R;
  j["amplitude"] = to_string(descriptor.amplitude);
  return j;
}

ProblemDescriptor descriptor_from_json(const nlohmann::json& j) {
  ProblemDescriptor descriptor;
  descriptor.d = j.at("d").get<Index>();
  descriptor.s = j.at("s").get<Index>();
  descriptor.m = j.at("m").get<Index>();
  descriptor.kind = parse_ensemble_kind(j.at("kind").get<std::string>());
  if (j.contains("seed") && !j.at("seed").is_null()) {
    descriptor.seed = j.at("seed").get<std::uint64_t>();
  }
  descriptor.support = j.value("support", Support{});
  descriptor.R = j.at("R").get<double>();
  if (j.contains("amplitude")) {
    descriptor.amplitude = parse_amplitude(j.at("amplitude").get<std::string>());
  }
  return descriptor;
}

void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
}

nlohmann::json load_json(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return nlohmann::json::parse(in);
}

}  // namespace sparse_recovery
