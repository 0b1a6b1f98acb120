#include "dpolymer/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace dpolymer {

namespace {

std::string real_field(double x) {
  if (std::isnan(x)) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_real(double x) {
  if (std::isnan(x)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// NaN first, then ascending.
bool less_nan_first(double a, double b) {
  if (std::isnan(a)) return !std::isnan(b);
  if (std::isnan(b)) return false;
  return a < b;
}

}  // namespace

std::vector<SummaryRecord> sorted_records(std::span<const SummaryRecord> records) {
  std::vector<SummaryRecord> out(records.begin(), records.end());
  std::stable_sort(out.begin(), out.end(), [](const SummaryRecord& a, const SummaryRecord& b) {
    if (a.experiment != b.experiment) return a.experiment < b.experiment;
    if (less_nan_first(a.beta, b.beta)) return true;
    if (less_nan_first(b.beta, a.beta)) return false;
    return less_nan_first(a.t, b.t);
  });
  return out;
}

std::string render_csv(std::span<const SummaryRecord> records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : sorted_records(records)) {
    out += r.experiment;
    out += ',' + real_field(r.beta);
    out += ',' + real_field(r.t);
    out += ',' + real_field(r.estimate);
    out += ',' + real_field(r.std_error);
    out += ',' + (r.bound ? real_field(*r.bound) : std::string());
    out += ',' + (r.target ? real_field(*r.target) : std::string());
    out += ',' + std::string(to_string(r.verdict));
    out += r.heuristic ? ",true" : ",false";
    out += ',' + std::to_string(r.n_envs);
    out += ',' + std::to_string(r.n_paths);
    out += ',' + std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

void emit_csv(std::span<const SummaryRecord> records, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto text = render_csv(records);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void print_summary(std::ostream& os, std::span<const SummaryRecord> records) {
  const auto rows = sorted_records(records);
  std::size_t width = 10;
  for (const auto& r : rows) width = std::max(width, r.experiment.size());
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-*s %8s %8s %14s %12s %14s %12s\n", static_cast<int>(width),
                "experiment", "beta", "t", "estimate", "std_error", "bound/target", "verdict");
  os << buf;
  for (const auto& r : rows) {
    const double ref = r.bound ? *r.bound : r.target ? *r.target : std::nan("");
    std::string verdict(to_string(r.verdict));
    if (r.heuristic) verdict += "*";
    std::snprintf(buf, sizeof buf, "%-*s %8s %8s %14s %12s %14s %12s\n", static_cast<int>(width),
                  r.experiment.c_str(), short_real(r.beta).c_str(), short_real(r.t).c_str(),
                  short_real(r.estimate).c_str(), short_real(r.std_error).c_str(),
                  short_real(ref).c_str(), verdict.c_str());
    os << buf;
  }
  bool any_heuristic = false;
  for (const auto& r : rows) any_heuristic = any_heuristic || r.heuristic;
  if (any_heuristic) os << "* finite-t heuristic, not a certified statement\n";
}

}  // namespace dpolymer
