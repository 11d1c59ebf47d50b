// Command line driver: translate formulas, train/evaluate/compose skills,
// render policies, and validate the Q-decomposition identity.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tlc/compose.hpp"
#include "tlc/io.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<tlc::StateSample> grid_samples(const tlc::GridWorld& g) {
  std::vector<tlc::StateSample> out(g.num_states());
  for (int s = 0; s < g.num_states(); ++s) out[s] = g.sample_of(s);
  return out;
}

tlc::ExperimentConfig load_config(const std::string& path) {
  return tlc::ExperimentConfig::from_file(path);
}

/* Rebuilds the automaton recorded in a Q-table artifact and verifies the
 * stored fingerprint. */
tlc::Fsa fsa_of_table(const tlc::QTable& qt) {
  if (qt.formula.empty())
    throw tlc::VerificationError("Q-table artifact has no formula metadata");
  tlc::Formula f;
  try {
    f = tlc::parse_formula(qt.formula, {"x", "y"});
  } catch (const tlc::ParseError& e) {
    throw tlc::VerificationError(std::string("stored formula does not parse: ") +
                                 e.what());
  }
  tlc::Fsa fsa = tlc::translate(f);
  if (!qt.fsa_fingerprint.empty() && fsa.fingerprint() != qt.fsa_fingerprint)
    throw tlc::VerificationError(
        "automaton fingerprint mismatch for formula " + qt.formula);
  return fsa;
}

void require_env_match(const std::string& artifact, const std::string& have,
                       const std::string& want) {
  if (!have.empty() && have != want)
    throw tlc::VerificationError(artifact + " was produced on a different "
                                 "environment (hash " + have + ", expected " +
                                 want + ")");
}

json eval_to_json(const tlc::EvalReport& r) {
  return {{"success_rate", r.success_rate},
          {"mean_steps_to_accept", r.mean_steps_to_accept},
          {"mean_return", r.mean_return},
          {"episodes", r.episodes}};
}

tlc::EvalReport eval_greedy(const tlc::FsaAugmentedMdp& env, const tlc::QTable& qt,
                            int episodes, std::uint64_t seed) {
  tlc::Rng rng(seed);
  return tlc::evaluate_satisfaction(
      env, [&](int s, int q) { return tlc::greedy_action(qt, s, q); }, episodes,
      rng);
}

// ---------------------------------------------------------------------------

int cmd_translate(const std::string& formula_text, const std::string& config_path,
                  const std::string& out_prefix) {
  std::map<std::string, tlc::Formula> macros;
  std::string text = formula_text;
  if (!config_path.empty()) {
    tlc::ExperimentConfig cfg = load_config(config_path);
    macros = cfg.parsed_macros();
    if (text.empty()) text = cfg.formula_text;
  }
  if (text.empty()) throw tlc::ConfigError("no formula given (flag or config)");
  tlc::Formula f = tlc::parse_formula(text, {"x", "y"}, macros);
  tlc::Fsa fsa = tlc::translate(f);

  tlc::write_file(out_prefix + ".json", tlc::fsa_to_json(fsa));
  tlc::write_file(out_prefix + ".dot", tlc::to_dot(fsa));

  int edges = 0, accepting = 0;
  for (int q = 0; q < fsa.num_states(); ++q) {
    edges += static_cast<int>(fsa.edges[q].size());
    accepting += fsa.accepting[q];
  }
  std::cout << "states=" << fsa.num_states() << " edges=" << edges
            << " accepting=" << accepting << " trap="
            << (fsa.trap == -1 ? std::string("none") : std::to_string(fsa.trap))
            << "\nwrote " << out_prefix << ".json and " << out_prefix << ".dot\n";
  return 0;
}

int cmd_train(const std::string& config_path, std::uint64_t seed,
              const std::string& output_dir) {
  tlc::ExperimentConfig cfg = load_config(config_path);
  cfg.train.seed = seed;
  if (!output_dir.empty()) cfg.output_dir = output_dir;

  tlc::Formula f = tlc::canonicalize(cfg.parse());
  tlc::Fsa fsa = tlc::translate(f);
  tlc::GridWorld grid = cfg.env.make_grid();
  tlc::FsaAugmentedMdp env(grid, fsa, cfg.env.horizon);

  std::vector<tlc::MetricsRow> metrics;
  std::uint64_t eval_seed = seed + 1;
  auto checkpoint = [&](long step, const tlc::TrainResult& wip) {
    tlc::EvalReport r = eval_greedy(env, wip.table, cfg.checkpoint_episodes,
                                    eval_seed++);
    double mean_len = r.success_rate > 0.0 ? r.mean_steps_to_accept
                                           : static_cast<double>(cfg.env.horizon);
    metrics.push_back({step, r.success_rate, mean_len, r.mean_return});
    return false;  // run the full budget
  };
  tlc::TrainResult result =
      tlc::q_learning_train(env, cfg.train, checkpoint, cfg.checkpoint_every);

  result.table.formula = tlc::print_formula(f);
  result.table.fsa_fingerprint = fsa.fingerprint();
  result.table.env_hash = cfg.env.hash();

  tlc::EvalReport final_eval = eval_greedy(env, result.table, cfg.eval_episodes,
                                           seed + 104729);

  fs::path out(cfg.output_dir);
  tlc::write_file(out / "qtable.json", tlc::qtable_to_json(result.table));
  tlc::write_file(out / "buffer.json",
                  tlc::buffer_to_json(result.buffer, cfg.env.hash()));
  tlc::write_file(out / "metrics.csv", tlc::metrics_to_csv(metrics));
  tlc::write_file(out / "automaton.json", tlc::fsa_to_json(fsa));
  tlc::write_file(out / "automaton.dot", tlc::to_dot(fsa));
  json manifest = {{"config_hash", cfg.hash()},
                   {"env_hash", cfg.env.hash()},
                   {"fsa_fingerprint", fsa.fingerprint()},
                   {"formula", tlc::print_formula(f)},
                   {"seed", seed},
                   {"update_steps", cfg.train.update_steps},
                   {"final_eval", eval_to_json(final_eval)}};
  tlc::write_file(out / "manifest.json", manifest.dump(2));
  tlc::write_file(out / "config.json", cfg.to_json());

  std::cout << "trained " << cfg.formula_text << ": success_rate="
            << final_eval.success_rate << " over " << final_eval.episodes
            << " episodes\nartifacts in " << out.string() << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& qtable_path,
                 int episodes, std::uint64_t seed) {
  tlc::ExperimentConfig cfg = load_config(config_path);
  tlc::QTable qt = tlc::qtable_from_json(tlc::read_file(qtable_path));
  require_env_match(qtable_path, qt.env_hash, cfg.env.hash());
  tlc::Fsa fsa = fsa_of_table(qt);

  tlc::GridWorld grid = cfg.env.make_grid();
  if (grid.num_states() != qt.num_states || fsa.num_states() != qt.num_q)
    throw tlc::VerificationError("Q-table dimensions do not match the config");
  tlc::FsaAugmentedMdp env(grid, fsa, cfg.env.horizon);
  if (episodes <= 0) episodes = cfg.eval_episodes;
  tlc::EvalReport r = eval_greedy(env, qt, episodes, seed);
  std::cout << eval_to_json(r).dump(2) << "\n";
  return 0;
}

int cmd_compose(const std::string& config_path, const std::string& q1_path,
                const std::string& q2_path,
                const std::vector<std::string>& buffer_paths,
                const std::string& stage_name, long update_steps,
                std::uint64_t seed, const std::string& output_dir) {
  tlc::ExperimentConfig cfg = load_config(config_path);
  tlc::QTable q1 = tlc::qtable_from_json(tlc::read_file(q1_path));
  tlc::QTable q2 = tlc::qtable_from_json(tlc::read_file(q2_path));
  require_env_match(q1_path, q1.env_hash, cfg.env.hash());
  require_env_match(q2_path, q2.env_hash, cfg.env.hash());

  tlc::Fsa f1 = fsa_of_table(q1);
  tlc::Fsa f2 = fsa_of_table(q2);
  tlc::GridWorld grid = cfg.env.make_grid();

  tlc::CompositionJob job;
  job.q1 = std::move(q1);
  job.q2 = std::move(q2);
  job.pf = tlc::product(f1, f2);
  job.state_samples = grid_samples(grid);
  for (const auto& path : buffer_paths) {
    std::string env_hash;
    tlc::ReplayBuffer b = tlc::buffer_from_json(tlc::read_file(path), &env_hash);
    require_env_match(path, env_hash, cfg.env.hash());
    job.buffer.insert(job.buffer.end(), b.begin(), b.end());
  }
  job.stage = tlc::stage_from_string(stage_name);
  job.update_steps = update_steps > 0 ? update_steps : cfg.train.update_steps;
  job.gamma = cfg.train.gamma;
  job.alpha = cfg.train.alpha;
  job.seed = seed;

  tlc::CompositionResult result = tlc::compose_skills(job);
  result.composed.env_hash = cfg.env.hash();
  result.composed.fsa_fingerprint = job.pf.fsa.fingerprint();

  tlc::FsaAugmentedMdp env(grid, job.pf.fsa, cfg.env.horizon);
  tlc::EvalReport r = eval_greedy(env, result.composed, cfg.eval_episodes,
                                  seed + 104729);

  double correction_max = 0.0;
  for (double v : result.correction.data)
    correction_max = std::max(correction_max, std::abs(v));

  std::string out = output_dir.empty() ? cfg.output_dir : output_dir;
  tlc::write_file(fs::path(out) / "composed_qtable.json",
                  tlc::qtable_to_json(result.composed));
  tlc::write_file(fs::path(out) / "correction_qtable.json",
                  tlc::qtable_to_json(result.correction));
  json report = {{"stage", tlc::stage_to_string(job.stage)},
                 {"config_hash", cfg.hash()},
                 {"env_hash", cfg.env.hash()},
                 {"product_states", job.pf.fsa.num_states()},
                 {"correction_max_abs", correction_max},
                 {"eval", eval_to_json(r)}};
  tlc::write_file(fs::path(out) / "composition_report.json", report.dump(2));
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_render(const std::string& config_path, const std::string& qtable_path) {
  tlc::ExperimentConfig cfg = load_config(config_path);
  tlc::QTable qt = tlc::qtable_from_json(tlc::read_file(qtable_path));
  require_env_match(qtable_path, qt.env_hash, cfg.env.hash());
  tlc::GridWorld grid = cfg.env.make_grid();
  if (grid.num_states() != qt.num_states)
    throw tlc::VerificationError("Q-table state count does not match the grid");

  static const char* kArrow[] = {"↑", "↓", "←", "→",
                                 "·"};
  for (int q = 0; q < qt.num_q; ++q) {
    std::cout << "automaton state q" << q << ":\n";
    for (int y = grid.height() - 1; y >= 0; --y) {
      std::cout << "  ";
      for (int x = 0; x < grid.width(); ++x)
        std::cout << kArrow[tlc::greedy_action(qt, grid.index_of(x, y), q)] << ' ';
      std::cout << "\n";
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_check_decomposition(const std::string& config_path,
                            const std::string& f1_text,
                            const std::string& f2_text, int episodes,
                            std::uint64_t seed) {
  tlc::ExperimentConfig cfg = load_config(config_path);
  auto macros = cfg.parsed_macros();
  tlc::Fsa f1 = tlc::translate(tlc::parse_formula(f1_text, {"x", "y"}, macros));
  tlc::Fsa f2 = tlc::translate(tlc::parse_formula(f2_text, {"x", "y"}, macros));
  tlc::ProductFsa pf = tlc::product(f1, f2);

  tlc::GridWorld grid = cfg.env.make_grid();
  tlc::FsaAugmentedMdp env(grid, pf.fsa, cfg.env.horizon);
  tlc::Rng rng(seed);
  std::uniform_int_distribution<int> act(0, grid.num_actions() - 1);
  tlc::DecompositionReport r = tlc::decomposition_check(
      env, pf, [&](int, int) { return act(rng); }, episodes, cfg.train.gamma,
      rng);

  json out = {{"mean_product", r.mean_product},
              {"mean_left", r.mean_left},
              {"mean_right", r.mean_right},
              {"mean_overlap", r.mean_overlap},
              {"residual", r.residual},
              {"residual_se", r.residual_se},
              {"episodes", r.episodes},
              {"identity_holds", r.identity_holds}};
  std::cout << out.dump(2) << "\n";
  if (!r.identity_holds)
    throw tlc::VerificationError("decomposition identity violated beyond 3 SE");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scTLTL task compiler and skill composition toolkit"};
  app.require_subcommand(1);

  // translate
  auto* translate = app.add_subcommand("translate", "compile a formula to an FSA");
  std::string tr_formula, tr_config, tr_out = "automaton";
  translate->add_option("formula", tr_formula, "formula text");
  translate->add_option("--config", tr_config, "config supplying macros/formula");
  translate->add_option("--out", tr_out, "output path prefix");

  // train
  auto* train = app.add_subcommand("train", "train a skill with Q-learning");
  std::string train_config, train_out;
  std::uint64_t train_seed = 0;
  train->add_option("--config", train_config, "experiment config")->required();
  train->add_option("--seed", train_seed, "RNG seed")->required();
  train->add_option("--output-dir", train_out, "override the config output dir");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "greedy evaluation of a table");
  std::string eval_config, eval_qtable;
  int eval_episodes = 0;
  std::uint64_t eval_seed = 0;
  evaluate->add_option("--config", eval_config, "experiment config")->required();
  evaluate->add_option("--qtable", eval_qtable, "Q-table artifact")->required();
  evaluate->add_option("--episodes", eval_episodes, "episode count override");
  evaluate->add_option("--seed", eval_seed, "RNG seed");

  // compose
  auto* compose = app.add_subcommand("compose", "compose two trained skills");
  std::string comp_config, comp_q1, comp_q2, comp_stage = "c1", comp_out;
  std::vector<std::string> comp_buffers;
  long comp_steps = 0;
  std::uint64_t comp_seed = 0;
  compose->add_option("--config", comp_config, "experiment config")->required();
  compose->add_option("--q1", comp_q1, "first Q-table artifact")->required();
  compose->add_option("--q2", comp_q2, "second Q-table artifact")->required();
  compose->add_option("--buffer", comp_buffers, "replay buffer artifact(s)");
  compose->add_option("--stage", comp_stage, "c1 | c2 | c3");
  compose->add_option("--update-steps", comp_steps, "off-policy budget");
  compose->add_option("--seed", comp_seed, "RNG seed")->required();
  compose->add_option("--output-dir", comp_out, "override the config output dir");

  // render
  auto* render = app.add_subcommand("render", "ASCII policy per automaton state");
  std::string ren_config, ren_qtable;
  render->add_option("--config", ren_config, "experiment config")->required();
  render->add_option("--qtable", ren_qtable, "Q-table artifact")->required();

  // check-decomposition
  auto* check = app.add_subcommand("check-decomposition",
                                   "Monte-Carlo check of the Q identity");
  std::string chk_config, chk_f1, chk_f2;
  int chk_episodes = 200;
  std::uint64_t chk_seed = 0;
  check->add_option("--config", chk_config, "experiment config")->required();
  check->add_option("--f1", chk_f1, "first formula")->required();
  check->add_option("--f2", chk_f2, "second formula")->required();
  check->add_option("--episodes", chk_episodes, "rollout count");
  check->add_option("--seed", chk_seed, "RNG seed");

  try {
    app.parse(argc, argv);
    if (*translate) return cmd_translate(tr_formula, tr_config, tr_out);
    if (*train) return cmd_train(train_config, train_seed, train_out);
    if (*evaluate)
      return cmd_evaluate(eval_config, eval_qtable, eval_episodes, eval_seed);
    if (*compose)
      return cmd_compose(comp_config, comp_q1, comp_q2, comp_buffers, comp_stage,
                         comp_steps, comp_seed, comp_out);
    if (*render) return cmd_render(ren_config, ren_qtable);
    if (*check)
      return cmd_check_decomposition(chk_config, chk_f1, chk_f2, chk_episodes,
                                     chk_seed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  } catch (const tlc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tlc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tlc::VerificationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
