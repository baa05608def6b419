#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "reachplan/bench.hpp"

namespace reachplan {

enum class ReportFormat { csv, markdown };

ReportFormat parse_report_format(std::string_view text);

/// Columns: scene, method, trials, success_pct, cost_mean, cost_std,
/// time_mean_s, time_std_s. Cost cells are empty when nothing succeeded.
std::string emit_csv(const BenchReport& report);

/// Methods as rows, one column group (Succ. %, Cost, Time s) per scene. The
/// Fixed Goal success rate carries a footnote marker since its grasp is
/// hand-picked.
std::string emit_markdown(const BenchReport& report);

/// Inverse of emit_markdown up to printed precision.
BenchReport parse_markdown(std::string_view text);

std::string emit(const BenchReport& report, ReportFormat format);

/// Throws std::runtime_error when the file cannot be written.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace reachplan
