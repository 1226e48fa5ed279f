#pragma once

#include "sparse_recovery/checks.hpp"
#include "sparse_recovery/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparse_recovery {

/// Trace CSV: header
///   t,tau_t,err2,err1,support_size,support_union_size,verdicts,x0,...,x{d-1}
/// one row per iterate. tau_t is empty on the final iterate; the error and
/// union columns are empty without ground truth and verdicts is empty
/// without a check report. Iterate entries carry full round-trip precision.
void write_trace_csv(std::ostream& out, const std::vector<IterateRecord>& iterates,
                     const Vector* truth = nullptr, const CheckReport* report = nullptr);
void save_trace_csv(const std::filesystem::path& path, const std::vector<IterateRecord>& iterates,
                    const Vector* truth = nullptr, const CheckReport* report = nullptr);

struct TraceRow {
  IterateRecord record;
  std::optional<std::size_t> support_union_size;
  std::string verdicts;
};

/// Parses a trace CSV. Supports are recomputed from the iterate columns.
std::vector<TraceRow> read_trace_csv(std::istream& in);
std::vector<TraceRow> load_trace_csv(const std::filesystem::path& path);

std::vector<IterateRecord> records_of(const std::vector<TraceRow>& rows);

}  // namespace sparse_recovery
