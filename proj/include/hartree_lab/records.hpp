#pragma once

// Result records (json-lines), plot tables and atomic file output.

#include "hartree_lab/ensemble.hpp"
#include "hartree_lab/finite_n.hpp"
#include "hartree_lab/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hartree_lab {

inline constexpr int schema_version = 1;

struct ResultRecord {
  int schema_version = hartree_lab::schema_version;
  std::string command;
  std::string kind; // payload type: hartree, curve-point, critical, ledger-row, ...
  nlohmann::json config;
  std::string timestamp;
  nlohmann::json payload;
  std::uint64_t seed = 0;
  std::string grid_hash; // 16 hex digits, empty when no grid is involved

  bool operator==(const ResultRecord &) const = default;
};

nlohmann::json to_json(const ResultRecord &record);
ResultRecord record_from_json(const nlohmann::json &j);

/// One compact JSON object per line, keys sorted.
std::string serialize(const ResultRecord &record);
ResultRecord parse_record(std::string_view line);
std::string serialize_lines(const std::vector<ResultRecord> &records);
std::vector<ResultRecord> parse_lines(std::string_view text);

std::string hex_hash(std::uint64_t hash);
/// Current UTC time as 2026-01-31T12:34:56Z.
std::string utc_timestamp();

// Payload projections.
nlohmann::json to_json(const HartreeResult &result);
nlohmann::json to_json(const CurvePoint &point);
CurvePoint curve_point_from_json(const nlohmann::json &j);
nlohmann::json to_json(const CriticalEstimate &estimate);
nlohmann::json to_json(const LedgerRow &row);
LedgerRow ledger_row_from_json(const nlohmann::json &j);
nlohmann::json to_json(const LlnRow &row);
LlnRow lln_row_from_json(const nlohmann::json &j);

/// Plot-ready table for records of one kind: a '#' header naming columns
/// and units, then one row per record in a deterministic order. Mixed
/// kinds throw validation-error; an empty input yields the header only.
std::string emit_plotdata(const std::vector<ResultRecord> &records, std::string_view kind,
                          char separator = ' ');

/// Writes through a temporary file in the target directory and renames it
/// into place; the target never holds partial content.
void write_atomic(const std::string &path, std::string_view content);

} // namespace hartree_lab
