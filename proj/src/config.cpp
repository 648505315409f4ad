#include "qoc/config.hpp"

#include <fstream>
#include <sstream>

namespace qoc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Complex parse_complex(const std::string& raw) {
  // Forms: "1.5", "2i", "1+2i", "1-2i", "-1.5-0.5i".
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError("empty complex literal");
  if (s.back() != 'i') {
    size_t pos = 0;
    const double re = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad numeric literal: " + s);
    return Complex(re, 0.0);
  }
  const std::string body = s.substr(0, s.size() - 1);
  // Split at the last +/- that is not an exponent sign and not leading.
  for (size_t i = body.size(); i-- > 1;) {
    const char c = body[i];
    if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      const std::string re_part = body.substr(0, i);
      std::string im_part = body.substr(i);
      if (im_part == "+") im_part = "1";
      if (im_part == "-") im_part = "-1";
      return Complex(std::stod(re_part), std::stod(im_part));
    }
  }
  std::string im = body;
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  return Complex(0.0, std::stod(im));
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  std::string section = "";
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (config.find(section, key))
      throw ConfigError("config: duplicate key '" + key + "' in section [" + section + "]");
    config.set(section, key, value);
  }
  return config;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

Config::Entry* Config::find(const std::string& section, const std::string& key) {
  for (auto& s : sections_)
    if (s.name == section)
      for (auto& e : s.entries)
        if (e.key == key) return &e;
  return nullptr;
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  return const_cast<Config*>(this)->find(section, key);
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  for (auto& s : sections_) {
    if (s.name == section) {
      for (auto& e : s.entries) {
        if (e.key == key) {
          e.value = value;
          return;
        }
      }
      s.entries.push_back({key, value, false});
      return;
    }
  }
  sections_.push_back({section, {{key, value, false}}});
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) {
  Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  return e->value;
}

std::string Config::require_string(const std::string& section, const std::string& key) {
  Entry* e = find(section, key);
  if (!e) throw ConfigError("missing required config key [" + section + "] " + key);
  e->consumed = true;
  return e->value;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) {
  Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  size_t pos = 0;
  const double v = std::stod(e->value, &pos);
  if (pos != e->value.size())
    throw ConfigError("bad numeric value for [" + section + "] " + key + ": " + e->value);
  return v;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) {
  Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  size_t pos = 0;
  const long v = std::stol(e->value, &pos);
  if (pos != e->value.size())
    throw ConfigError("bad integer value for [" + section + "] " + key + ": " + e->value);
  return static_cast<int>(v);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) {
  Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  throw ConfigError("bad boolean value for [" + section + "] " + key + ": " + e->value);
}

std::vector<double> Config::get_double_list(const std::string& section, const std::string& key) {
  Entry* e = find(section, key);
  if (!e) return {};
  e->consumed = true;
  std::vector<double> out;
  for (const auto& part : split(e->value, ',')) {
    const std::string t = trim(part);
    if (t.empty()) continue;
    out.push_back(std::stod(t));
  }
  return out;
}

void Config::merge_consumed(const Config& other) {
  for (const auto& s : other.sections_)
    for (const auto& e : s.entries)
      if (e.consumed) {
        if (Entry* mine = find(s.name, e.key)) mine->consumed = true;
      }
}

void Config::require_all_consumed() const {
  std::string leftovers;
  for (const auto& s : sections_)
    for (const auto& e : s.entries)
      if (!e.consumed) leftovers += " [" + s.name + "] " + e.key;
  if (!leftovers.empty()) throw ConfigError("unknown config keys:" + leftovers);
}

std::string Config::echo() const {
  std::string out;
  for (const auto& s : sections_) {
    if (!s.name.empty()) out += "[" + s.name + "]\n";
    for (const auto& e : s.entries) out += e.key + " = " + e.value + "\n";
  }
  return out;
}

Matrix parse_matrix_literal(const std::string& text) {
  const auto rows = split(text, ';');
  const int n = static_cast<int>(rows.size());
  Matrix m(n, static_cast<int>(split(rows[0], ',').size()));
  for (int r = 0; r < n; ++r) {
    const auto cols = split(rows[r], ',');
    if (static_cast<int>(cols.size()) != m.cols())
      throw ConfigError("matrix literal: ragged rows");
    for (int c = 0; c < m.cols(); ++c) m(r, c) = parse_complex(cols[c]);
  }
  return m;
}

Vector parse_vector_literal(const std::string& text) {
  const auto parts = split(text, ',');
  Vector v(static_cast<int>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i) v(static_cast<int>(i)) = parse_complex(parts[i]);
  return v;
}

}  // namespace qoc
