#include "ceilab/harness/plot_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/core.h>

#include "ceilab/common/error.hpp"

namespace ceilab::harness {

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  out.n = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double n = static_cast<double>(values.size());
  out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

std::string curve_label(const RunRecord& record) {
  if (record.config.is_object() && record.config.contains("teacher")) {
    return record.method + "_" + record.config["teacher"].get<std::string>();
  }
  return record.method.empty() ? "run" : record.method;
}

const RecordRow& nearest_row(const RunRecord& record, std::int64_t request_count) {
  if (record.rows.empty()) throw ConfigError("run record has no rows");
  const RecordRow* best = &record.rows.front();
  for (const auto& row : record.rows) {
    if (std::llabs(row.request_count - request_count) < std::llabs(best->request_count - request_count)) best = &row;
  }
  return *best;
}

std::vector<CurveRow> aggregate(std::span<const RunRecord> records) {
  std::vector<CurveRow> out;
  if (records.empty()) return out;
  for (const auto& ref : records.front().rows) {
    CurveRow row;
    row.request_count = ref.request_count;
    std::vector<double> success;
    std::array<std::vector<double>, 4> groups;
    for (const auto& record : records) {
      const auto& r = nearest_row(record, ref.request_count);
      success.push_back(r.success_rate);
      if (r.histogram_empty) continue;
      for (std::size_t g = 0; g < 4; ++g) groups[g].push_back(r.groups[g]);
    }
    row.success = mean_stderr(success);
    for (std::size_t g = 0; g < 4; ++g) row.groups[g] = mean_stderr(groups[g]);
    out.push_back(row);
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

}  // namespace

std::vector<std::filesystem::path> emit_plot_data(std::span<const RunRecord> records,
                                                  const std::filesystem::path& out_dir) {
  std::map<std::string, std::vector<RunRecord>> curves;
  for (const auto& r : records) curves[curve_label(r)].push_back(r);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [label, group] : curves) {
    const auto rows = aggregate(group);
    std::string success = "request_count,seeds,success_mean,success_stderr\n";
    std::string groups = "request_count,seeds";
    for (const char* g : {"I", "II", "III", "IV"}) groups += fmt::format(",group_{0}_mean,group_{0}_stderr", g);
    groups += '\n';
    for (const auto& row : rows) {
      success += fmt::format("{},{},{:.17g},{:.17g}\n", row.request_count, row.success.n, row.success.mean,
                             row.success.stderr_);
      groups += fmt::format("{},{}", row.request_count, row.groups[0].n);
      for (const auto& g : row.groups) groups += fmt::format(",{:.17g},{:.17g}", g.mean, g.stderr_);
      groups += '\n';
    }
    written.push_back(out_dir / (label + "_success.csv"));
    write_text(written.back(), success);
    written.push_back(out_dir / (label + "_groups.csv"));
    write_text(written.back(), groups);
  }
  return written;
}

std::vector<RunRecord> load_records(std::span<const std::filesystem::path> dirs) {
  std::vector<std::filesystem::path> files;
  for (const auto& dir : dirs) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError(fmt::format("{} is not a directory", dir.string()));
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.starts_with("seed_") && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) out.push_back(read_run_record(f));
  return out;
}

}  // namespace ceilab::harness
