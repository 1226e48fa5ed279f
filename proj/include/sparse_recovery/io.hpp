#pragma once

#include "sparse_recovery/problem.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace sparse_recovery {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

/// One matrix row per line, comma separated.
void write_matrix_csv(std::ostream& out, const Matrix& M);
Matrix read_matrix_csv(std::istream& in);

/// Vectors are written as a single column. Reading accepts a single column or
/// a single row.
void write_vector_csv(std::ostream& out, const Vector& v);
Vector read_vector_csv(std::istream& in);

void save_matrix_csv(const std::filesystem::path& path, const Matrix& M);
Matrix load_matrix_csv(const std::filesystem::path& path);
void save_vector_csv(const std::filesystem::path& path, const Vector& v);
Vector load_vector_csv(const std::filesystem::path& path);

/// Everything needed to regenerate a seeded problem instance.
struct ProblemDescriptor {
  Index d = 0;
  Index s = 0;
  Index m = 0;
  EnsembleKind kind = EnsembleKind::gaussian;
  std::optional<std::uint64_t> seed;
  Support support;
  double R = 0.0;
  Amplitude amplitude;

  static ProblemDescriptor describe(const SparseSignal& signal, const MeasurementEnsemble& ensemble,
                                    std::optional<std::uint64_t> problem_seed,
                                    const Amplitude& amplitude = Amplitude::unit());
};

nlohmann::json to_json(const ProblemDescriptor& descriptor);
ProblemDescriptor descriptor_from_json(const nlohmann::json& j);

void save_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json load_json(const std::filesystem::path& path);

/// Splits one CSV line on commas. No quoting support; none of the formats
/// here need it.
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace sparse_recovery
