#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "tlc/compose.hpp"
#include "tlc/environment.hpp"
#include "tlc/learner.hpp"

namespace tlc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnvConfig {
  int width = 10;
  int height = 8;
  double slip = 0.2;
  int horizon = 200;
  std::optional<std::pair<int, int>> fixed_start;  // uniform when absent

  std::string to_json() const;
  static EnvConfig from_json(const std::string& text);
  std::string hash() const;  // provenance key embedded in artifacts
  GridWorld make_grid() const;
};

/* One experiment: environment, formula with macro bindings, training and
 * evaluation settings. */
struct ExperimentConfig {
  EnvConfig env;
  std::map<std::string, std::string> macros;
  std::string formula_text;
  TrainConfig train;
  int eval_episodes = 100;
  int checkpoint_every = 200;
  int checkpoint_episodes = 50;
  std::string output_dir = "out";

  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  std::string to_json() const;
  std::string hash() const;

  std::map<std::string, Formula> parsed_macros() const;
  Formula parse() const;  // macros + formula, grid features x/y
};

std::string qtable_to_json(const QTable& qt);
QTable qtable_from_json(const std::string& text);

std::string buffer_to_json(const ReplayBuffer& buffer, const std::string& env_hash);
ReplayBuffer buffer_from_json(const std::string& text, std::string* env_hash = nullptr);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/* One CSV row per evaluation checkpoint. */
struct MetricsRow {
  long step = 0;
  double success_rate = 0.0;
  double mean_episode_len = 0.0;
  double mean_return = 0.0;
};

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);

}  // namespace tlc
