#include "tlc/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tlc/hash.hpp"

namespace tlc {

using nlohmann::json;

namespace {

json env_to_json_obj(const EnvConfig& c) {
  json j = {{"type", "gridworld"},
            {"width", c.width},
            {"height", c.height},
            {"slip", c.slip},
            {"horizon", c.horizon}};
  if (c.fixed_start)
    j["start"] = {c.fixed_start->first, c.fixed_start->second};
  else
    j["start"] = "uniform";
  return j;
}

EnvConfig env_from_json_obj(const json& j) {
  EnvConfig c;
  try {
    c.width = j.value("width", 10);
    c.height = j.value("height", 8);
    c.slip = j.value("slip", 0.2);
    c.horizon = j.value("horizon", 200);
    if (j.contains("start") && j["start"].is_array()) {
      c.fixed_start = {j["start"][0].get<int>(), j["start"][1].get<int>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad environment config: ") + e.what());
  }
  return c;
}

}  // namespace

std::string EnvConfig::to_json() const { return env_to_json_obj(*this).dump(2); }

EnvConfig EnvConfig::from_json(const std::string& text) {
  return env_from_json_obj(json::parse(text));
}

std::string EnvConfig::hash() const { return fnv1a_hex(env_to_json_obj(*this).dump()); }

GridWorld EnvConfig::make_grid() const {
  return GridWorld(width, height, slip, fixed_start);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("environment")) c.env = env_from_json_obj(j["environment"]);
    if (j.contains("macros"))
      c.macros = j["macros"].get<std::map<std::string, std::string>>();
    c.formula_text = j.value("formula", "");
    if (j.contains("train")) {
      const json& t = j["train"];
      c.train.gamma = t.value("gamma", 0.95);
      c.train.alpha = t.value("alpha", 0.1);
      c.train.update_steps = t.value("update_steps", 2000L);
      c.train.seed = t.value("seed", 0ULL);
    }
    c.train.horizon = c.env.horizon;
    if (j.contains("eval")) {
      const json& e = j["eval"];
      c.eval_episodes = e.value("episodes", 100);
      c.checkpoint_every = e.value("checkpoint_every", 200);
      c.checkpoint_episodes = e.value("checkpoint_episodes", 50);
    }
    c.output_dir = j.value("output_dir", "out");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  if (c.formula_text.empty()) throw ConfigError("config is missing 'formula'");
  try {
    c.train.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad train config: ") + e.what());
  }
  try {
    c.parse();
  } catch (const ParseError& e) {
    throw ConfigError(std::string("bad formula: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["environment"] = env_to_json_obj(env);
  j["macros"] = macros;
  j["formula"] = formula_text;
  j["train"] = {{"gamma", train.gamma},
                {"alpha", train.alpha},
                {"update_steps", train.update_steps},
                {"seed", train.seed}};
  j["eval"] = {{"episodes", eval_episodes},
               {"checkpoint_every", checkpoint_every},
               {"checkpoint_episodes", checkpoint_episodes}};
  j["output_dir"] = output_dir;
  return j.dump(2);
}

std::string ExperimentConfig::hash() const {
  // Seed and output location do not affect what is being computed.
  json j;
  j["environment"] = env_to_json_obj(env);
  j["macros"] = macros;
  j["formula"] = formula_text;
  j["train"] = {{"gamma", train.gamma},
                {"alpha", train.alpha},
                {"update_steps", train.update_steps}};
  return fnv1a_hex(j.dump());
}

std::map<std::string, Formula> ExperimentConfig::parsed_macros() const {
  std::set<std::string> features{"x", "y"};
  std::map<std::string, Formula> out;
  for (const auto& [name, text] : macros) {
    try {
      out[name] = parse_formula(text, features);
    } catch (const ParseError& e) {
      throw ConfigError("macro '" + name + "': " + e.what());
    }
  }
  return out;
}

Formula ExperimentConfig::parse() const {
  std::set<std::string> features{"x", "y"};
  return parse_formula(formula_text, features, parsed_macros());
}

std::string qtable_to_json(const QTable& qt) {
  json j;
  j["dims"] = {{"states", qt.num_states},
               {"automaton_states", qt.num_q},
               {"actions", qt.num_actions}};
  j["index_order"] = "state-major: (s * Q + q) * A + a";
  j["metadata"] = {{"formula", qt.formula},
                   {"fsa_fingerprint", qt.fsa_fingerprint},
                   {"env_hash", qt.env_hash}};
  j["data"] = qt.data;
  return j.dump();
}

QTable qtable_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid Q-table JSON: ") + e.what());
  }
  QTable qt;
  try {
    qt.num_states = j.at("dims").at("states").get<int>();
    qt.num_q = j.at("dims").at("automaton_states").get<int>();
    qt.num_actions = j.at("dims").at("actions").get<int>();
    qt.data = j.at("data").get<std::vector<double>>();
    qt.formula = j.at("metadata").value("formula", "");
    qt.fsa_fingerprint = j.at("metadata").value("fsa_fingerprint", "");
    qt.env_hash = j.at("metadata").value("env_hash", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed Q-table artifact: ") + e.what());
  }
  std::size_t expect = static_cast<std::size_t>(qt.num_states) * qt.num_q * qt.num_actions;
  if (qt.data.size() != expect)
    throw ConfigError("Q-table data length does not match its dimensions");
  return qt;
}

std::string buffer_to_json(const ReplayBuffer& buffer, const std::string& env_hash) {
  json rows = json::array();
  for (const auto& r : buffer)
    rows.push_back({r.s, r.action, r.s_next, r.episode, r.t});
  json j = {{"env_hash", env_hash}, {"transitions", std::move(rows)}};
  return j.dump();
}

ReplayBuffer buffer_from_json(const std::string& text, std::string* env_hash) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid replay buffer JSON: ") + e.what());
  }
  if (env_hash) *env_hash = j.value("env_hash", "");
  ReplayBuffer out;
  for (const auto& row : j.at("transitions")) {
    out.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>(),
                   row[3].get<int>(), row[4].get<int>()});
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "step,success_rate,mean_episode_len,mean_return\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.success_rate << ',' << r.mean_episode_len << ','
        << r.mean_return << '\n';
  }
  return out.str();
}

}  // namespace tlc
