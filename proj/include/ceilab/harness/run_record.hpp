#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ceilab::harness {

/// Metrics at one evaluation point.
struct RecordRow {
  std::int64_t request_count = 0;
  std::int64_t episodes = 0;
  double success_rate = 0.0;
  std::int64_t correct_instructive = 0;
  std::int64_t incorrect_instructive = 0;
  std::int64_t evaluative = 0;
  double total_cost = 0.0;
  /// Group I..IV fractions of the intentions uttered since the previous row.
  std::array<double, 4> groups{};
  bool histogram_empty = true;

  bool operator==(const RecordRow&) const = default;
};

struct RunRecord {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<RecordRow> rows;
  std::string checkpoint;
  nlohmann::json config;

  /// First request count whose success rate reaches `threshold`.
  std::optional<std::int64_t> requests_to_reach(double threshold) const;
  bool operator==(const RunRecord&) const = default;
};

inline const char* const kRecordHeader =
    "request_count,episodes,success_rate,correct_instructive,incorrect_instructive,evaluative,total_cost,"
    "group_I,group_II,group_III,group_IV,histogram_empty";

std::string to_csv(const std::vector<RecordRow>& rows);
std::vector<RecordRow> rows_from_csv(const std::string& text);

std::filesystem::path record_csv_path(const std::filesystem::path& dir, std::uint64_t seed);
/// Writes seed_<n>.csv with the rows and seed_<n>.json with the rest.
void write_run_record(const std::filesystem::path& dir, const RunRecord& record);
/// Reads a record from its CSV and, when present, the JSON next to it.
RunRecord read_run_record(const std::filesystem::path& csv);

}  // namespace ceilab::harness
