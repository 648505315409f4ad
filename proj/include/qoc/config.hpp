#pragma once

#include <string>
#include <vector>

#include "qoc/core.hpp"

namespace qoc {

/// Sectioned key = value configuration. Parsing is strict: every key must be
/// consumed by the run that uses the config, and leftovers are errors.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback);
  std::string require_string(const std::string& section, const std::string& key);
  double get_double(const std::string& section, const std::string& key, double fallback);
  int get_int(const std::string& section, const std::string& key, int fallback);
  bool get_bool(const std::string& section, const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& section, const std::string& key);

  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Marks keys consumed here when the other config consumed them
  /// (compare runs share one [method] section across methods).
  void merge_consumed(const Config& other);

  /// Throws ConfigError naming every key that was never consumed.
  void require_all_consumed() const;

  /// Canonical text form (sections and keys in stored order).
  std::string echo() const;

 private:
  struct Entry {
    std::string key;
    std::string value;
    bool consumed = false;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
  };
  std::vector<Section> sections_;

  Entry* find(const std::string& section, const std::string& key);
  const Entry* find(const std::string& section, const std::string& key) const;
};

Matrix parse_matrix_literal(const std::string& text);
Vector parse_vector_literal(const std::string& text);

}  // namespace qoc
