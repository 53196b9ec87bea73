#include "roadstereo/keyvalue.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "roadstereo/error.hpp"

namespace roadstereo {

namespace {

std::string trim(const std::string& s) {
  const auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c);
  });
  const auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) {
                      return std::isspace(c);
                    }).base();
  return first < last ? std::string(first, last) : std::string();
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw Error(ErrorKind::kConfig,
                "malformed number for " + what + ": '" + text + "'");
  }
  return value;
}

std::vector<double> parse_numbers(const std::string& text,
                                  const std::string& what) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_double(token, what));
  return out;
}

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig, "line " + std::to_string(lineno) +
                                          ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorKind::kConfig,
                  "line " + std::to_string(lineno) + ": empty key");
    }
    kv.entries_.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "unreadable file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  std::optional<std::string> found;
  for (const auto& [k, v] : entries_) {
    if (k == key) found = v;  // last one wins
  }
  return found;
}

std::vector<std::string> KeyValueFile::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

double KeyValueFile::get_double(const std::string& key,
                                double fallback) const {
  const auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const double x = parse_double(*v, key);
  if (x != static_cast<int>(x)) {
    throw Error(ErrorKind::kConfig, key + " must be an integer");
  }
  return static_cast<int>(x);
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw Error(ErrorKind::kConfig, key + " must be a boolean");
}

double KeyValueFile::require_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) throw Error(ErrorKind::kConfig, "missing key: " + key);
  return parse_double(*v, key);
}

}  // namespace roadstereo
