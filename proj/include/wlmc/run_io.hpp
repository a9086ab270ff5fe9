#pragma once

#include <map>
#include <string>
#include <vector>

namespace wlmc::io {

/// Flat key=value configuration (insertion-ordered echo is not needed;
/// lexicographic order keeps sidecars diffable).
using KeyValues = std::map<std::string, std::string>;

/// Parses structured key-value text: one `key = value` per line, '#'
/// comments, blank lines ignored.  Throws std::runtime_error on syntax
/// errors or duplicate keys.
KeyValues parse_config_text(const std::string& text);

/// Reads a config from a file.  JSON files (leading '{') are treated as run
/// sidecars: their "config" object is re-ingested, which reproduces the
/// original run.
KeyValues parse_config_file(const std::string& path);

/// RFC-4180 field quoting ('.' decimal separator comes from the C locale).
std::string csv_field(const std::string& raw);

/// Fixed-width scientific formatting used in all emitted tables.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Serializes to CSV (UTF-8, CRLF-free, RFC-4180 quoting).
std::string to_csv(const CsvTable& table);
/// Same table as a JSON array of objects.
std::string to_json_rows(const CsvTable& table);

void write_file(const std::string& path, const std::string& content);

/// Sidecar: {"config": {...}, "seed": ..., "versions": {...},
/// "wall_seconds": ..., "oracles": {...}} plus any caller extras.
std::string make_sidecar(const KeyValues& effective_config, std::uint64_t seed,
                         double wall_seconds, const std::map<std::string, double>& oracles,
                         const std::map<std::string, std::string>& extras = {});

}  // namespace wlmc::io
