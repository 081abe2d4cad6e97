#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "cidr/error.hpp"
#include "cidr/refinement.hpp"
#include "cidr/toy_model.hpp"

namespace cidr {

/// Everything the CLI reads from a config file. `seed` is shared by
/// training and refinement.
struct RunConfig {
  CidrConfig cidr;
  TrainConfig train;

  void set_seed(std::uint64_t seed) {
    cidr.seed = seed;
    train.seed = seed;
  }
};

inline constexpr std::string_view kEnvPrefix = "CIDR_";

inline constexpr std::array<std::string_view, 12> kConfigKeys = {
    "batch_size", "beta", "embedding_dim", "epochs", "epsilon", "hidden_dim",
    "learning_rate", "m", "n_iter", "q", "seed", "t"};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("config: invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  }
  return value;
}

}  // namespace detail

/// Apply one key=value setting. Unknown keys are errors.
inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  using detail::parse_number;
  if (key == "beta") cfg.cidr.beta = parse_number<double>(key, value);
  else if (key == "t") cfg.cidr.t = parse_number<double>(key, value);
  else if (key == "epsilon") cfg.cidr.epsilon = parse_number<double>(key, value);
  else if (key == "n_iter") cfg.cidr.n_iter = parse_number<std::size_t>(key, value);
  else if (key == "m") cfg.cidr.m = parse_number<std::size_t>(key, value);
  else if (key == "q") cfg.cidr.q = parse_number<int>(key, value);
  else if (key == "seed") cfg.set_seed(parse_number<std::uint64_t>(key, value));
  else if (key == "learning_rate") cfg.train.learning_rate = parse_number<double>(key, value);
  else if (key == "epochs") cfg.train.epochs = parse_number<std::size_t>(key, value);
  else if (key == "batch_size") cfg.train.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "embedding_dim") cfg.train.embedding_dim = parse_number<std::size_t>(key, value);
  else if (key == "hidden_dim") cfg.train.hidden_dim = parse_number<std::size_t>(key, value);
  else throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

/// Flat `key = value` lines; `#` starts a comment.
inline RunConfig parse_config(std::istream& in, RunConfig cfg = {}, const std::string& source = "config") {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      apply_setting(cfg, detail::trim(view.substr(0, eq)), detail::trim(view.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, {}, path.string());
}

/// Override keys from CIDR_<KEY> environment variables (e.g. CIDR_BETA).
/// `getenv` is injectable for tests.
inline void apply_env_overrides(RunConfig& cfg,
                                const std::function<const char*(const char*)>& getenv = [](const char* name) {
                                  return std::getenv(name);
                                }) {
  for (std::string_view key : kConfigKeys) {
    std::string name(kEnvPrefix);
    for (char ch : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (const char* value = getenv(name.c_str())) {
      try {
        apply_setting(cfg, key, detail::trim(value));
      } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }
  }
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["beta"] = cfg.cidr.beta;
  j["t"] = cfg.cidr.t;
  j["epsilon"] = cfg.cidr.epsilon;
  j["n_iter"] = cfg.cidr.n_iter;
  j["m"] = cfg.cidr.m;
  j["q"] = cfg.cidr.q;
  j["seed"] = cfg.cidr.seed;
  j["learning_rate"] = cfg.train.learning_rate;
  j["epochs"] = cfg.train.epochs;
  j["batch_size"] = cfg.train.batch_size;
  j["embedding_dim"] = cfg.train.embedding_dim;
  j["hidden_dim"] = cfg.train.hidden_dim;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "beta") cfg.cidr.beta = value.get<double>();
      else if (key == "t") cfg.cidr.t = value.get<double>();
      else if (key == "epsilon") cfg.cidr.epsilon = value.get<double>();
      else if (key == "n_iter") cfg.cidr.n_iter = value.get<std::size_t>();
      else if (key == "m") cfg.cidr.m = value.get<std::size_t>();
      else if (key == "q") cfg.cidr.q = value.get<int>();
      else if (key == "seed") cfg.set_seed(value.get<std::uint64_t>());
      else if (key == "learning_rate") cfg.train.learning_rate = value.get<double>();
      else if (key == "epochs") cfg.train.epochs = value.get<std::size_t>();
      else if (key == "batch_size") cfg.train.batch_size = value.get<std::size_t>();
      else if (key == "embedding_dim") cfg.train.embedding_dim = value.get<std::size_t>();
      else if (key == "hidden_dim") cfg.train.hidden_dim = value.get<std::size_t>();
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

}  // namespace cidr
