#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppl {

// Raised for malformed files, unknown keys and badly typed values; the
// message always names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat dotted-key configuration. Every key is declared in a registry with a
// default; parsing rejects keys outside the registry. The resolved text form
// (sorted `key = value` lines) re-parses to an identical configuration.
class Config {
 public:
  // all registry keys at their defaults
  static Config defaults();
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text);

  // `key = value` override; the key must be registered
  void set(const std::string& key, const std::string& value);
  // each entry is a `key=value` string (CLI --set form)
  void apply_overrides(const std::vector<std::string>& overrides);

  const std::string& raw(const std::string& key) const;
  bool is_set(const std::string& key) const;  // non-empty value

  int get_int(const std::string& key) const;
  std::int64_t get_int64(const std::string& key) const;
  std::uint64_t get_uint64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::optional<int> get_optional_int(const std::string& key) const;
  std::optional<double> get_optional_double(const std::string& key) const;

  // sorted `key = value` lines with a version comment header
  std::string resolved_text() const;

  static const std::vector<std::string>& registered_keys();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace ppl
