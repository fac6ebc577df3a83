#include "ppl/config.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <fstream>
#include <sstream>

#include "ppl/version.hpp"

namespace ppl {

namespace {

struct KeyDefault {
  const char* key;
  const char* value;
};

// The whole configuration surface. An empty default means "unset"; optional
// keys stay empty unless given.
const KeyDefault kRegistry[] = {
    {"phase.e0", "100"},
    {"phase.e1", "160"},
    {"phase.delta", "1"},
    {"phase.kind", "power"},
    {"phase.rho", "5"},

    {"loss.family", "ce"},
    {"loss.gamma", "1.5"},
    {"loss.s", ""},
    {"loss.max_margin", "0.5"},
    {"loss.t", "1e-6"},
    {"loss.sigma", "linear"},
    {"loss.focus_margin", "true"},

    {"weight.mode", "none"},
    {"weight.delta", ""},

    {"sampler.mode", "none"},
    {"sampler.delta", ""},

    {"mix.mode", "none"},
    {"mix.kappa", "3"},
    {"mix.tau", "0.5"},
    {"mix.beta", "1"},

    {"data.kind", "synth"},
    {"data.c", "10"},
    {"data.dim", "20"},
    {"data.nmax", "500"},
    {"data.if", "100"},
    {"data.profile", "lt"},
    {"data.qr", "1"},
    {"data.sep", "3"},
    {"data.noise", "1"},
    {"data.val_per_class", "100"},
    {"data.seed", "1"},
    {"data.path", ""},
    {"data.header", "false"},

    {"train.epochs", "200"},
    {"train.batch", "64"},
    {"train.lr", "0.1"},
    {"train.milestones", "160,180"},
    {"train.lr_decay", "0.1"},
    {"train.model", "linear"},
    {"train.hidden", "32"},
    {"train.freeze_at", ""},
    {"train.renorm", "true"},
    {"train.anneal_rho", ""},
    {"train.seed", "1"},

    {"metrics.head_frac", "0.24"},
    {"metrics.tail_frac", "0.04"},
};

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Config Config::defaults() {
  Config cfg;
  for (const KeyDefault& kd : kRegistry) {
    cfg.values_[kd.key] = kd.value;
  }
  return cfg;
}

Config Config::from_text(const std::string& text) {
  Config cfg = defaults();
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + stripped + "'");
    }
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  it->second = value;
}

void Config::apply_overrides(const std::vector<std::string>& overrides) {
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + ov + "' is not of the form key=value");
    }
    set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  return it->second;
}

bool Config::is_set(const std::string& key) const { return !raw(key).empty(); }

int Config::get_int(const std::string& key) const {
  const auto v = get_int64(key);
  if (v < INT_MIN || v > INT_MAX) {
    throw ConfigError("config key '" + key + "' is out of range");
  }
  return static_cast<int>(v);
}

std::int64_t Config::get_int64(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t used = 0;
    const std::int64_t out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' needs an integer, got '" + v +
                      "'");
  }
}

std::uint64_t Config::get_uint64(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key +
                      "' needs a nonnegative integer, got '" + v + "'");
  }
}

double Config::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' needs a number, got '" + v +
                      "'");
  }
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config key '" + key + "' needs true or false, got '" + v +
                    "'");
}

const std::string& Config::get_string(const std::string& key) const {
  return raw(key);
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  const std::string& v = raw(key);
  std::vector<int> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      const std::string t = trim(cell);
      out.push_back(std::stoi(t, &used));
      if (used != t.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key +
                        "' needs a comma-separated integer list, got '" + v +
                        "'");
    }
  }
  return out;
}

std::optional<int> Config::get_optional_int(const std::string& key) const {
  if (!is_set(key)) return std::nullopt;
  return get_int(key);
}

std::optional<double> Config::get_optional_double(
    const std::string& key) const {
  if (!is_set(key)) return std::nullopt;
  return get_double(key);
}

std::string Config::resolved_text() const {
  std::string out = "# ppl ";
  out += kVersion;
  out += "\n";
  for (const auto& [key, value] : values_) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  }
  return out;
}

const std::vector<std::string>& Config::registered_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> v;
    for (const KeyDefault& kd : kRegistry) v.emplace_back(kd.key);
    std::sort(v.begin(), v.end());
    return v;
  }();
  return keys;
}

}  // namespace ppl
