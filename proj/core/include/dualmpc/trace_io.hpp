#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dualmpc/simulation.hpp"

namespace dualmpc {

/// Fixed trace.csv column order.
const std::vector<std::string>& trace_csv_header();

/// One row per step; doubles use the shortest round-trip representation,
/// absent values (warm-up Grammian levels, p* without the oracle) are "nan".
void write_trace_csv(std::ostream& os, const SimTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace);

/// Parses trace.csv back into rows (x, x0, y, u, u_obs, p_hat, p_star and
/// the scalar columns). Throws std::runtime_error on a header mismatch.
std::vector<TraceRow> read_trace_csv(std::istream& is);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

std::string summary_to_json(const RunSummary& summary);
void write_summary_json(const std::filesystem::path& path, const RunSummary& summary);

/// Keys every summary.json carries.
const std::vector<std::string>& summary_json_keys();

}  // namespace dualmpc
