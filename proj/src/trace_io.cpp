#include "sparse_recovery/trace_io.hpp"

#include "sparse_recovery/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace sparse_recovery {

namespace {

constexpr std::size_t kFixedColumns = 7;

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<IterateRecord>& iterates,
                     const Vector* truth, const CheckReport* report) {
  if (report && report->iterations.size() != iterates.size()) {
    throw std::invalid_argument("write_trace_csv: report does not match the trace length");
  }
  const Index d = iterates.empty() ? 0 : iterates.front().x.size();
  out << "t,tau_t,err2,err1,support_size,support_union_size,verdicts";
  for (Index i = 0; i < d; ++i) out << ",x" << i;
  out << '\n';

  const Support truth_support = truth ? support_of(*truth) : Support{};
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    const auto& record = iterates[k];
    const Support support = support_of(record.x);
    out << record.t << ',';
    if (record.tau) out << format_double(*record.tau);
    out << ',';
    if (truth) {
      const Vector diff = record.x - *truth;
      out << format_double(diff.norm()) << ',' << format_double(diff.lpNorm<1>());
    } else if (record.err2 && record.err1) {
      out << format_double(*record.err2) << ',' << format_double(*record.err1);
    } else {
      out << ',';
    }
    out << ',' << support.size() << ',';
    if (truth) out << union_size(support, truth_support);
    out << ',';
    if (report) out << verdict_token(report->iterations[k]);
    for (Index i = 0; i < record.x.size(); ++i) out << ',' << format_double(record.x[i]);
    out << '\n';
  }
}

void save_trace_csv(const std::filesystem::path& path, const std::vector<IterateRecord>& iterates,
                    const Vector* truth, const CheckReport* report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_trace_csv(out, iterates, truth, report);
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace CSV is empty");
  const auto header = split_csv_line(line);
  if (header.size() < kFixedColumns || header[0] != "t" || header[1] != "tau_t") {
    throw std::invalid_argument("trace CSV header not recognized");
  }
  const auto width = header.size();
  const auto d = static_cast<Index>(width - kFixedColumns);

  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != width) {
      throw std::invalid_argument("trace CSV row " + std::to_string(rows.size() + 1) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(width));
    }
    TraceRow row;
    row.record.t = static_cast<int>(parse_double(fields[0]));
    if (!fields[1].empty()) row.record.tau = parse_double(fields[1]);
    if (!fields[2].empty()) row.record.err2 = parse_double(fields[2]);
    if (!fields[3].empty()) row.record.err1 = parse_double(fields[3]);
    if (!fields[5].empty()) {
      row.support_union_size = static_cast<std::size_t>(parse_double(fields[5]));
    }
    row.verdicts = std::string(fields[6]);
    row.record.x.resize(d);
    for (Index i = 0; i < d; ++i) {
      row.record.x[i] = parse_double(fields[kFixedColumns + static_cast<std::size_t>(i)]);
    }
    row.record.support = support_of(row.record.x);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("trace CSV has no iterates");
  return rows;
}

std::vector<TraceRow> load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return read_trace_csv(in);
}

std::vector<IterateRecord> records_of(const std::vector<TraceRow>& rows) {
  std::vector<IterateRecord> records;
  records.reserve(rows.size());
  for (const auto& row : rows) records.push_back(row.record);
  return records;
}

}  // namespace sparse_recovery
