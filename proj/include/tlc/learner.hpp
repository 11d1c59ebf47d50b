#pragma once

#include <string>
#include <vector>

#include "tlc/environment.hpp"

namespace tlc {

/* Raw environment transition; automaton states are deliberately not
 * stored so one buffer can be relabeled against any product state. */
struct TransitionRecord {
  int s = 0;
  int action = 0;
  int s_next = 0;
  int episode = 0;
  int t = 0;
};

using ReplayBuffer = std::vector<TransitionRecord>;

struct TrainConfig {
  double gamma = 0.95;
  double alpha = 0.1;
  int horizon = 200;
  long update_steps = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

/* Dense table over (state index, automaton state, action). */
struct QTable {
  int num_states = 0;
  int num_q = 0;
  int num_actions = 0;
  std::vector<double> data;

  // provenance
  std::string formula;
  std::string fsa_fingerprint;
  std::string env_hash;

  QTable() = default;
  QTable(int ns, int nq, int na)
      : num_states(ns), num_q(nq), num_actions(na),
        data(static_cast<std::size_t>(ns) * nq * na, 0.0) {}

  double& at(int s, int q, int a) {
    return data[(static_cast<std::size_t>(s) * num_q + q) * num_actions + a];
  }
  double at(int s, int q, int a) const {
    return data[(static_cast<std::size_t>(s) * num_q + q) * num_actions + a];
  }
  double max_over_actions(int s, int q) const;
  double max_value() const;
};

/* Argmax over actions, ties broken by lowest action index. */
int greedy_action(const QTable& qt, int s, int q);

/* Per-MDP-state greedy action map with the automaton state frozen. */
std::vector<int> extract_subpolicy(const QTable& qt, int q);

struct TrainResult {
  QTable table;
  ReplayBuffer buffer;
};

/* Called every `checkpoint_every` update steps with the steps done so far
 * and the work in progress; returning true stops training early. */
using TrainCheckpoint = std::function<bool(long, const TrainResult&)>;

/* Tabular Q-learning under a uniform-random exploration policy; every
 * environment transition is one update step and one replay record. */
TrainResult q_learning_train(const FsaAugmentedMdp& env, const TrainConfig& cfg,
                             const TrainCheckpoint& checkpoint = nullptr,
                             long checkpoint_every = 0);

/* Bellman-optimal table by sweeping the exact augmented transition model
 * until the sup-norm change drops below 1e-9. Requires the inner MDP to
 * expose its transition matrix. */
QTable value_iteration_oracle(const FsaAugmentedMdp& env, double gamma = 0.95);

/* Divides by the global max (must be > 0); argmax structure unchanged. */
QTable normalize_q(const QTable& qt);

}  // namespace tlc
