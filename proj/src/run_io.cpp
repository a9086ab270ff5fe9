#include "wlmc/run_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wlmc::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw std::runtime_error("config: duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const auto j = nlohmann::json::parse(text);
    if (!j.contains("config") || !j["config"].is_object())
      throw std::runtime_error("config: JSON sidecar lacks a \"config\" object");
    KeyValues kv;
    for (const auto& [key, value] : j["config"].items()) {
      if (value.is_string()) kv[key] = value.get<std::string>();
      else kv[key] = value.dump();
    }
    return kv;
  }
  return parse_config_text(text);
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << csv_field(table.header[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << '\n';
  }
  return out.str();
}

std::string to_json_rows(const CsvTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj;
    for (std::size_t i = 0; i < row.size() && i < table.header.size(); ++i)
      obj[table.header[i]] = row[i];
    rows.push_back(obj);
  }
  return rows.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string make_sidecar(const KeyValues& effective_config, std::uint64_t seed,
                         double wall_seconds, const std::map<std::string, double>& oracles,
                         const std::map<std::string, std::string>& extras) {
  nlohmann::json j;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : effective_config) cfg[k] = v;
  j["config"] = cfg;
  j["seed"] = seed;
  j["versions"] = {{"wlmc", "1.0.0"}, {"compiler", __VERSION__}};
  j["wall_seconds"] = wall_seconds;
  if (!oracles.empty()) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& [k, v] : oracles) o[k] = format_double(v);
    j["oracles"] = o;
  }
  for (const auto& [k, v] : extras) j[k] = v;
  return j.dump(2) + "\n";
}

}  // namespace wlmc::io
