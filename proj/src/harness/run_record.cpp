#include "ceilab/harness/run_record.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "ceilab/common/error.hpp"

namespace ceilab::harness {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

}  // namespace

std::optional<std::int64_t> RunRecord::requests_to_reach(double threshold) const {
  for (const auto& r : rows) {
    if (r.success_rate >= threshold) return r.request_count;
  }
  return std::nullopt;
}

std::string to_csv(const std::vector<RecordRow>& rows) {
  std::string out = kRecordHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.17g},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.request_count,
                       r.episodes, r.success_rate, r.correct_instructive, r.incorrect_instructive, r.evaluative,
                       r.total_cost, r.groups[0], r.groups[1], r.groups[2], r.groups[3], r.histogram_empty ? 1 : 0);
  }
  return out;
}

std::vector<RecordRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRecordHeader) throw ParseError("run record CSV has an unexpected header");
  std::vector<RecordRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 12) throw ParseError(fmt::format("run record line {} has {} fields", line_no, cells.size()));
    try {
      RecordRow r;
      r.request_count = std::stoll(cells[0]);
      r.episodes = std::stoll(cells[1]);
      r.success_rate = std::stod(cells[2]);
      r.correct_instructive = std::stoll(cells[3]);
      r.incorrect_instructive = std::stoll(cells[4]);
      r.evaluative = std::stoll(cells[5]);
      r.total_cost = std::stod(cells[6]);
      for (int g = 0; g < 4; ++g) r.groups[static_cast<std::size_t>(g)] = std::stod(cells[7 + static_cast<std::size_t>(g)]);
      r.histogram_empty = cells[11] == "1";
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(fmt::format("run record line {} has a malformed number", line_no));
    }
  }
  return rows;
}

std::filesystem::path record_csv_path(const std::filesystem::path& dir, std::uint64_t seed) {
  return dir / fmt::format("seed_{}.csv", seed);
}

void write_run_record(const std::filesystem::path& dir, const RunRecord& record) {
  std::filesystem::create_directories(dir);
  const auto csv = record_csv_path(dir, record.seed);
  write_file(csv, to_csv(record.rows));
  nlohmann::json meta = {
      {"method", record.method}, {"seed", record.seed}, {"checkpoint", record.checkpoint}, {"config", record.config}};
  auto json_path = csv;
  write_file(json_path.replace_extension(".json"), meta.dump(2) + "\n");
}

RunRecord read_run_record(const std::filesystem::path& csv) {
  RunRecord r;
  r.rows = rows_from_csv(read_file(csv));
  auto json_path = csv;
  json_path.replace_extension(".json");
  if (std::filesystem::exists(json_path)) {
    try {
      const auto meta = nlohmann::json::parse(read_file(json_path));
      r.method = meta.at("method").get<std::string>();
      r.seed = meta.at("seed").get<std::uint64_t>();
      r.checkpoint = meta.at("checkpoint").get<std::string>();
      r.config = meta.at("config");
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(fmt::format("run record metadata {} is malformed: {}", json_path.string(), ex.what()));
    }
  }
  return r;
}

}  // namespace ceilab::harness
