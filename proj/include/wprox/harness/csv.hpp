#ifndef WPROX_HARNESS_CSV_HPP_
#define WPROX_HARNESS_CSV_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "wprox/trace.hpp"

namespace wprox::harness {

/// Trace CSV header, in column order.
const std::vector<std::string>& trace_columns();

/// Header plus one row per record. Missing quantities are empty fields;
/// numbers use the shortest round-trip representation.
std::string trace_to_csv(const Trace& trace);
void emit_trace_csv(const Trace& trace, const std::filesystem::path& path);

/// Inverse of trace_to_csv. The derived w2_sq column is checked for
/// presence but not stored.
Trace parse_trace_csv(const std::string& text);

/// Drops the wall-time column, for comparing runs. Other tables pass through.
std::string strip_wall_time(const std::string& csv_text);

/// Plain table writer for summaries.
std::string table_to_csv(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

}  // namespace wprox::harness

#endif  // WPROX_HARNESS_CSV_HPP_
