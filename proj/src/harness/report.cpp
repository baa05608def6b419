#include "reachplan/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace reachplan {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string optional_fixed(const std::optional<double>& v, int digits) {
  return v ? fixed(*v, digits) : std::string();
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string current;
  bool open = false;
  for (const char c : line) {
    if (c == '|') {
      if (open) cells.push_back(current);
      open = true;
      current.clear();
    } else if (open) {
      current += c;
    }
  }
  for (auto& cell : cells) {
    const auto b = cell.find_first_not_of(' ');
    const auto e = cell.find_last_not_of(' ');
    cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
  }
  return cells;
}

/// "mean ± std" cell.
std::pair<double, double> parse_spread(const std::string& cell) {
  const std::string sep = "\xC2\xB1";
  const auto at = cell.find(sep);
  if (at == std::string::npos) throw std::invalid_argument("malformed cell '" + cell + "'");
  return {std::stod(cell.substr(0, at)), std::stod(cell.substr(at + sep.size()))};
}

MethodId method_from_display(const std::string& name) {
  for (const MethodId m : kAllMethods)
    if (display_name(m) == name) return m;
  throw std::invalid_argument("unknown method row '" + name + "'");
}

constexpr std::string_view kCostHeader = " Cost";
constexpr std::string_view kSuccHeader = " Succ. (%)";

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "markdown" || text == "md") return ReportFormat::markdown;
  throw std::invalid_argument("unknown format '" + std::string(text) + "'");
}

std::string emit_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "scene,method,trials,success_pct,cost_mean,cost_std,time_mean_s,time_std_s\n";
  for (const auto& c : report.cells) {
    out << c.scene << ',' << to_string(c.method) << ',' << c.trials << ','
        << fixed(c.success_pct, 2) << ',' << optional_fixed(c.cost_mean, 6) << ','
        << optional_fixed(c.cost_std, 6) << ',' << fixed(c.time_mean, 6) << ','
        << fixed(c.time_std, 6) << '\n';
  }
  return out.str();
}

std::string emit_markdown(const BenchReport& report) {
  const auto scenes = report.scenes();
  const auto methods = report.methods();
  const int trials = report.cells.empty() ? 0 : report.cells.front().trials;
  std::ostringstream out;
  out << "Trials per cell: " << trials << ". Base seed: " << report.base_seed << ".\n\n";
  out << "| Method |";
  for (const auto& s : scenes)
    out << ' ' << s << kSuccHeader << " | " << s << kCostHeader << " | " << s
        << " Time (s) |";
  out << "\n|---|";
  for (std::size_t i = 0; i < scenes.size(); ++i) out << "---:|---:|---:|";
  out << '\n';
  bool flagged = false;
  for (const MethodId m : methods) {
    out << "| " << display_name(m) << " |";
    for (const auto& s : scenes) {
      const CellSummary* c = report.find(s, m);
      if (c == nullptr) {
        out << "  |  |  |";
        continue;
      }
      const bool flag = m == MethodId::fixed_goal;
      flagged |= flag;
      out << ' ' << fixed(c->success_pct, 2) << (flag ? "*" : "") << " | ";
      if (c->cost_mean)
        out << fixed(*c->cost_mean, 4) << " \xC2\xB1 " << fixed(*c->cost_std, 4);
      else
        out << '-';
      out << " | " << fixed(c->time_mean, 4) << " \xC2\xB1 " << fixed(c->time_std, 4) << " |";
    }
    out << '\n';
  }
  if (flagged)
    out << "\n\\* Fixed Goal plans toward a hand-picked grasp; its success rate is not "
           "comparable with the sampled-grasp methods.\n";
  return out.str();
}

BenchReport parse_markdown(std::string_view text) {
  BenchReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  int trials = 0;
  std::vector<std::string> scenes;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("Trials per cell: ", 0) == 0) {
      unsigned long long seed = 0;
      if (std::sscanf(line.c_str(), "Trials per cell: %d. Base seed: %llu.", &trials, &seed) != 2)
        throw std::invalid_argument("malformed preamble '" + line + "'");
      report.base_seed = seed;
      continue;
    }
    if (line.empty() || line.front() != '|') continue;
    const auto cells = split_row(line);
    if (!header_seen) {
      for (std::size_t i = 1; i + 2 < cells.size(); i += 3) {
        const auto& h = cells[i];
        if (h.size() <= kSuccHeader.size())
          throw std::invalid_argument("malformed header cell '" + h + "'");
        scenes.push_back(h.substr(0, h.size() - kSuccHeader.size()));
      }
      header_seen = true;
      continue;
    }
    if (cells.size() > 1 && cells[1].rfind("---", 0) == 0) continue;
    const MethodId method = method_from_display(cells.at(0));
    for (std::size_t k = 0; k < scenes.size(); ++k) {
      std::string succ = cells.at(1 + 3 * k);
      if (succ.empty()) continue;
      if (succ.back() == '*') succ.pop_back();
      CellSummary c;
      c.scene = scenes[k];
      c.method = method;
      c.trials = trials;
      c.success_pct = std::stod(succ);
      c.successes = static_cast<int>(std::lround(c.success_pct * trials / 100.0));
      const std::string& cost = cells.at(2 + 3 * k);
      if (cost != "-") {
        const auto [m, s] = parse_spread(cost);
        c.cost_mean = m;
        c.cost_std = s;
      }
      std::tie(c.time_mean, c.time_std) = parse_spread(cells.at(3 + 3 * k));
      report.cells.push_back(std::move(c));
    }
  }
  // Emission is row-major by method; restore the record order (scene-major).
  std::vector<CellSummary> ordered;
  for (const auto& s : scenes)
    for (const auto& c : report.cells)
      if (c.scene == s) ordered.push_back(c);
  report.cells = std::move(ordered);
  return report;
}

std::string emit(const BenchReport& report, ReportFormat format) {
  return format == ReportFormat::csv ? emit_csv(report) : emit_markdown(report);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace reachplan
