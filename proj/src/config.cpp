#include "zsr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "zsr/checksum.hpp"

namespace zsr {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class N>
N parse_number(const std::string& key, const std::string& text) {
  N v{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ConfigError(key, key + ": cannot parse '" + text + "'");
  return v;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class N>
Field number_field(std::string key, N RunConfig::*member) {
  return {key,
          [key, member](RunConfig& c, const std::string& v) { c.*member = parse_number<N>(key, v); },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<N>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

Field string_field(std::string key, std::string RunConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      number_field("lambda_adv", &RunConfig::lambda_adv),
      number_field("lambda_reg", &RunConfig::lambda_reg),
      number_field("lambda_dcy", &RunConfig::lambda_dcy),
      number_field("lambda_rcy", &RunConfig::lambda_rcy),
      number_field("n_alpha", &RunConfig::n_alpha),
      number_field("alpha_scale", &RunConfig::alpha_scale),
      number_field("ddn_iterations", &RunConfig::ddn_iterations),
      number_field("restore_epochs", &RunConfig::restore_epochs),
      number_field("learning_rate", &RunConfig::learning_rate),
      number_field("adam_beta1", &RunConfig::adam_beta1),
      number_field("adam_beta2", &RunConfig::adam_beta2),
      number_field("patch_size", &RunConfig::patch_size),
      number_field("restore_patch_size", &RunConfig::restore_patch_size),
      number_field("seed", &RunConfig::seed),
      number_field("base_width", &RunConfig::base_width),
      number_field("depth", &RunConfig::depth),
      number_field("checkpoint_every", &RunConfig::checkpoint_every),
      string_field("reference", &RunConfig::reference),
      string_field("distorted", &RunConfig::distorted),
      string_field("ground_truth", &RunConfig::ground_truth),
      string_field("output_dir", &RunConfig::output_dir),
  };
  return f;
}

void require(bool ok, const std::string& field, const std::string& constraint) {
  if (!ok) throw ConfigError(field, field + " must be " + constraint);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RunConfig validate_config(const RunConfig& cfg) {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  require(finite_nonneg(cfg.lambda_adv), "lambda_adv", "≥ 0");
  require(finite_nonneg(cfg.lambda_reg), "lambda_reg", "≥ 0");
  require(finite_nonneg(cfg.lambda_dcy), "lambda_dcy", "≥ 0");
  require(finite_nonneg(cfg.lambda_rcy), "lambda_rcy", "≥ 0");
  require(cfg.n_alpha >= 1, "n_alpha", "≥ 1");
  require(std::isfinite(cfg.alpha_scale) && cfg.alpha_scale > 0.0, "alpha_scale", "> 0");
  require(cfg.ddn_iterations >= 0, "ddn_iterations", "≥ 0");
  require(cfg.restore_epochs >= 0, "restore_epochs", "≥ 0");
  require(std::isfinite(cfg.learning_rate) && cfg.learning_rate > 0.0, "learning_rate", "> 0");
  require(open_unit(cfg.adam_beta1), "adam_beta1", "in (0,1)");
  require(open_unit(cfg.adam_beta2), "adam_beta2", "in (0,1)");
  require(cfg.patch_size >= 1, "patch_size", "≥ 1");
  require(cfg.restore_patch_size >= 1, "restore_patch_size", "≥ 1");
  require(cfg.base_width >= 1, "base_width", "≥ 1");
  require(cfg.depth >= 1 && cfg.depth <= 8, "depth", "in [1,8]");
  require(cfg.checkpoint_every >= 1, "checkpoint_every", "≥ 1");
  return cfg;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError(key, "unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "config line " + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_config(cfg);
}

std::string config_hash(const RunConfig& cfg) { return sha256_hex(serialize_config(cfg)); }

}  // namespace zsr
