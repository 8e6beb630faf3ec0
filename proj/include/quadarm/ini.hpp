#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadarm/types.hpp"

namespace quadarm {

// Parse or validation failure in a configuration file; the message is
// prefixed with "origin:line:col:" when a location is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& origin, int line, int col,
              const std::string& message);
  ConfigError(const std::string& origin, const std::string& message);
};

// Line-oriented INI-style file:
//   [section]
//   key = value        # comment
// '#' and ';' start comments, blank lines are ignored, keys are unique
// within their section, sections are unique within the file. Every key
// and section remembers its location so later validation can point at
// the offending text. Readers mark what they touch; after loading, call
// require_all_consumed() to reject unknown sections and keys.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text, std::string origin);

  const std::string& origin() const { return origin_; }

  bool has_section(const std::string& name) const;
  // Section names in file order.
  std::vector<std::string> section_names() const;
  // Keys of one section in file order; marks the section as consumed.
  std::vector<std::string> keys(const std::string& section) const;

  // Typed getters; nullopt when the section or key is absent. Numeric
  // parse failures throw ConfigError at the value's location. Every call
  // marks the key (and its section) as consumed.
  std::optional<std::string> get_string(const std::string& section,
                                        const std::string& key) const;
  std::optional<Scalar> get_scalar(const std::string& section,
                                   const std::string& key) const;
  std::optional<Vec3> get_vec3(const std::string& section,
                               const std::string& key) const;
  Scalar get_scalar_or(const std::string& section, const std::string& key,
                       Scalar fallback) const;

  // Raise a ConfigError pointing at a specific key (or at the section
  // header when the key is absent, or at the whole file as last resort).
  [[noreturn]] void fail_at(const std::string& section, const std::string& key,
                            const std::string& message) const;

  // Error out on the first section or key that no reader consumed.
  void require_all_consumed() const;

 private:
  struct Value {
    std::string text;
    int line = 0;
    int col = 0;
    mutable bool consumed = false;
  };
  struct Section {
    int line = 0;
    std::map<std::string, Value> values;
    std::vector<std::string> key_order;
    mutable bool consumed = false;
  };

  const Value* find(const std::string& section, const std::string& key) const;

  std::string origin_;
  std::map<std::string, Section> sections_;
  std::vector<std::string> section_order_;
};

}  // namespace quadarm
