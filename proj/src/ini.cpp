#include "quadarm/ini.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace quadarm {

namespace {

std::string locate(const std::string& origin, int line, int col) {
  std::ostringstream os;
  os << origin << ':' << line << ':' << col << ": ";
  return os.str();
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
          c == '-')) {
      return false;
    }
  }
  return true;
}

}  // namespace

ConfigError::ConfigError(const std::string& origin, int line, int col,
                         const std::string& message)
    : std::runtime_error(locate(origin, line, col) + message) {}

ConfigError::ConfigError(const std::string& origin, const std::string& message)
    : std::runtime_error(origin + ": " + message) {}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

IniFile IniFile::parse_string(const std::string& text, std::string origin) {
  IniFile ini;
  ini.origin_ = std::move(origin);
  Section* current = nullptr;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::size_t cut = raw.find_first_of("#;");
    std::string line = cut == std::string::npos ? raw : raw.substr(0, cut);

    std::size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t");
    const int col = static_cast<int>(begin) + 1;

    if (line[begin] == '[') {
      if (line[end] != ']') {
        throw ConfigError(ini.origin_, line_no, col, "unterminated section header");
      }
      std::string name = line.substr(begin + 1, end - begin - 1);
      if (!valid_name(name)) {
        throw ConfigError(ini.origin_, line_no, col,
                          "invalid section name '" + name + "'");
      }
      if (ini.sections_.count(name)) {
        throw ConfigError(ini.origin_, line_no, col,
                          "duplicate section '" + name + "'");
      }
      current = &ini.sections_[name];
      current->line = line_no;
      ini.section_order_.push_back(name);
      continue;
    }

    const std::size_t eq = line.find('=', begin);
    if (eq == std::string::npos) {
      throw ConfigError(ini.origin_, line_no, col,
                        "expected 'key = value' or '[section]'");
    }
    if (!current) {
      throw ConfigError(ini.origin_, line_no, col, "key outside any section");
    }
    std::size_t key_end = line.find_last_not_of(" \t", eq == 0 ? 0 : eq - 1);
    if (key_end == std::string::npos || key_end < begin) {
      throw ConfigError(ini.origin_, line_no, col, "missing key before '='");
    }
    std::string key = line.substr(begin, key_end - begin + 1);
    if (!valid_name(key)) {
      throw ConfigError(ini.origin_, line_no, col, "invalid key '" + key + "'");
    }
    if (current->values.count(key)) {
      throw ConfigError(ini.origin_, line_no, col,
                        "duplicate key '" + key + "'");
    }

    std::size_t val_begin = line.find_first_not_of(" \t", eq + 1);
    Value v;
    v.line = line_no;
    if (val_begin == std::string::npos || val_begin > end) {
      v.text.clear();
      v.col = static_cast<int>(eq) + 2;
    } else {
      v.text = line.substr(val_begin, end - val_begin + 1);
      v.col = static_cast<int>(val_begin) + 1;
    }
    current->values.emplace(key, std::move(v));
    current->key_order.push_back(key);
  }
  return ini;
}

bool IniFile::has_section(const std::string& name) const {
  return sections_.count(name) != 0;
}

std::vector<std::string> IniFile::section_names() const {
  return section_order_;
}

std::vector<std::string> IniFile::keys(const std::string& section) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return {};
  it->second.consumed = true;
  return it->second.key_order;
}

const IniFile::Value* IniFile::find(const std::string& section,
                                    const std::string& key) const {
  auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  sit->second.consumed = true;
  auto vit = sit->second.values.find(key);
  if (vit == sit->second.values.end()) return nullptr;
  vit->second.consumed = true;
  return &vit->second;
}

std::optional<std::string> IniFile::get_string(const std::string& section,
                                               const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) return std::nullopt;
  return v->text;
}

std::optional<Scalar> IniFile::get_scalar(const std::string& section,
                                          const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) return std::nullopt;
  const char* begin = v->text.c_str();
  char* parse_end = nullptr;
  const double value = std::strtod(begin, &parse_end);
  if (parse_end == begin || *parse_end != '\0') {
    throw ConfigError(origin_, v->line, v->col,
                      "expected a number, got '" + v->text + "'");
  }
  return value;
}

std::optional<Vec3> IniFile::get_vec3(const std::string& section,
                                      const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) return std::nullopt;
  std::istringstream in(v->text);
  Vec3 out;
  if (!(in >> out.x() >> out.y() >> out.z()) || !(in >> std::ws).eof()) {
    throw ConfigError(origin_, v->line, v->col,
                      "expected three numbers, got '" + v->text + "'");
  }
  return out;
}

Scalar IniFile::get_scalar_or(const std::string& section,
                              const std::string& key, Scalar fallback) const {
  return get_scalar(section, key).value_or(fallback);
}

void IniFile::fail_at(const std::string& section, const std::string& key,
                      const std::string& message) const {
  auto sit = sections_.find(section);
  if (sit != sections_.end()) {
    auto vit = sit->second.values.find(key);
    if (vit != sit->second.values.end()) {
      throw ConfigError(origin_, vit->second.line, vit->second.col, message);
    }
    throw ConfigError(origin_, sit->second.line, 1, message);
  }
  throw ConfigError(origin_, message);
}

void IniFile::require_all_consumed() const {
  for (const std::string& name : section_order_) {
    const Section& sec = sections_.at(name);
    if (!sec.consumed) {
      throw ConfigError(origin_, sec.line, 1, "unknown section '" + name + "'");
    }
    for (const std::string& key : sec.key_order) {
      const Value& v = sec.values.at(key);
      if (!v.consumed) {
        throw ConfigError(origin_, v.line, v.col,
                          "unknown key '" + key + "' in section '" + name + "'");
      }
    }
  }
}

}  // namespace quadarm
