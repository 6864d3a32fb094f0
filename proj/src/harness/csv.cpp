#include "wprox/harness/csv.hpp"

#include <sstream>
#include <stdexcept>

#include "wprox/harness/format.hpp"
#include "wprox/harness/persistence.hpp"

namespace wprox::harness {
namespace {

std::string field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> optional_value(const std::string& s, int line) {
  if (s.empty()) return std::nullopt;
  const auto v = parse_double(s);
  if (!v) throw std::runtime_error("trace csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols{
      "iter",           "risk",         "entropy",           "total_objective",
      "w2_to_reference", "w2_sq_to_reference", "kl",        "contraction_ratio",
      "beta_norm_sq",   "inner_final_loss",    "wall_time_s"};
  return cols;
}

std::string table_to_csv(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

std::string trace_to_csv(const Trace& trace) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.size());
  for (const TraceRecord& r : trace) {
    std::optional<double> w2_sq;
    if (r.w2_to_reference) w2_sq = *r.w2_to_reference * *r.w2_to_reference;
    rows.push_back({std::to_string(r.iteration), field(r.risk), field(r.entropy),
                    field(r.total_objective), field(r.w2_to_reference), field(w2_sq), field(r.kl),
                    field(r.contraction_ratio), field(r.beta_norm_sq), field(r.inner_final_loss),
                    format_double(r.wall_time_s)});
  }
  return table_to_csv(trace_columns(), rows);
}

void emit_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  write_text_file(path, trace_to_csv(trace));
}

Trace parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split(line) != trace_columns())
    throw std::runtime_error("trace csv: unexpected header");
  Trace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != trace_columns().size())
      throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": wrong field count");
    TraceRecord r;
    const auto iter = parse_integer<int>(f[0]);
    if (!iter) throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": bad iter");
    r.iteration = *iter;
    r.risk = optional_value(f[1], lineno);
    r.entropy = optional_value(f[2], lineno);
    r.total_objective = optional_value(f[3], lineno);
    r.w2_to_reference = optional_value(f[4], lineno);
    r.kl = optional_value(f[6], lineno);
    r.contraction_ratio = optional_value(f[7], lineno);
    r.beta_norm_sq = optional_value(f[8], lineno);
    r.inner_final_loss = optional_value(f[9], lineno);
    r.wall_time_s = optional_value(f[10], lineno).value_or(0.0);
    trace.push_back(r);
  }
  return trace;
}

std::string strip_wall_time(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line, out;
  if (!std::getline(in, line)) return out;
  const std::string suffix = ",wall_time_s";
  if (line.size() < suffix.size() || line.compare(line.size() - suffix.size(), suffix.size(), suffix) != 0)
    return csv_text;
  do {
    const auto comma = line.rfind(',');
    out += (comma == std::string::npos ? line : line.substr(0, comma)) + "\n";
  } while (std::getline(in, line));
  return out;
}

}  // namespace wprox::harness
