#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ceilab/harness/run_record.hpp"

namespace ceilab::harness {

struct MeanStderr {
  double mean = 0.0;
  /// Sample standard deviation over sqrt(n); 0 for a single value.
  double stderr_ = 0.0;
  int n = 0;
};

MeanStderr mean_stderr(std::span<const double> values);

/// Curve name of a record: the method, plus the teacher when the record
/// carries its config.
std::string curve_label(const RunRecord& record);

/// Row of each record aligned to `request_count`: the one whose request
/// count is nearest, the earlier one on ties.
const RecordRow& nearest_row(const RunRecord& record, std::int64_t request_count);

struct CurveRow {
  std::int64_t request_count = 0;
  MeanStderr success;
  /// Over the seeds whose histogram is non-empty at this point.
  std::array<MeanStderr, 4> groups{};
};

/// Aggregates records of one curve on the request grid of the first record.
std::vector<CurveRow> aggregate(std::span<const RunRecord> records);

/// Writes <label>_success.csv and <label>_groups.csv per curve label and
/// returns the paths written.
std::vector<std::filesystem::path> emit_plot_data(std::span<const RunRecord> records,
                                                  const std::filesystem::path& out_dir);

/// Every seed_<n>.csv directly inside each of `dirs`, sorted by path.
std::vector<RunRecord> load_records(std::span<const std::filesystem::path> dirs);

}  // namespace ceilab::harness
