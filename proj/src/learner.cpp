#include "tlc/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tlc {

void TrainConfig::validate() const {
  if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("gamma out of (0,1]");
  if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("alpha out of (0,1]");
  if (horizon < 0) throw std::invalid_argument("negative horizon");
  if (update_steps < 0) throw std::invalid_argument("negative update budget");
}

double QTable::max_over_actions(int s, int q) const {
  double best = at(s, q, 0);
  for (int a = 1; a < num_actions; ++a) best = std::max(best, at(s, q, a));
  return best;
}

double QTable::max_value() const {
  double best = data.empty() ? 0.0 : data[0];
  for (double v : data) best = std::max(best, v);
  return best;
}

int greedy_action(const QTable& qt, int s, int q) {
  int best = 0;
  double best_v = qt.at(s, q, 0);
  for (int a = 1; a < qt.num_actions; ++a) {
    double v = qt.at(s, q, a);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

std::vector<int> extract_subpolicy(const QTable& qt, int q) {
  std::vector<int> actions(qt.num_states);
  for (int s = 0; s < qt.num_states; ++s) actions[s] = greedy_action(qt, s, q);
  return actions;
}

TrainResult q_learning_train(const FsaAugmentedMdp& env, const TrainConfig& cfg,
                             const TrainCheckpoint& checkpoint,
                             long checkpoint_every) {
  cfg.validate();
  TrainResult result;
  result.table = QTable(env.mdp().num_states(), env.num_q(), env.mdp().num_actions());
  QTable& qt = result.table;

  Rng rng(cfg.seed);
  std::uniform_int_distribution<int> action_dist(0, env.mdp().num_actions() - 1);

  // A task that is already decided at every start state (e.g. the trivially
  // true one) has no transitions to learn from; resetting would spin forever.
  bool any_live_start = cfg.horizon > 0;
  if (any_live_start) {
    any_live_start = false;
    for (int s0 : env.mdp().reset_support())
      if (!env.terminal_q(env.next_q(env.fsa().initial, s0))) {
        any_live_start = true;
        break;
      }
  }
  if (!any_live_start) return result;

  FsaAugmentedMdp::Episode ep = env.reset(rng);
  int episode_id = 0;
  for (long step = 0; step < cfg.update_steps; ++step) {
    while (ep.done) {
      ep = env.reset(rng);
      ++episode_id;
    }
    int s = ep.s;
    int q = ep.q;
    int a = action_dist(rng);
    auto res = env.step(ep, a, rng);
    result.buffer.push_back({s, a, ep.s, episode_id, ep.t - 1});

    double target = res.reward;
    if (!env.terminal_q(ep.q)) target += cfg.gamma * qt.max_over_actions(ep.s, ep.q);
    double& cell = qt.at(s, q, a);
    cell += cfg.alpha * (target - cell);

    if (checkpoint && checkpoint_every > 0 && (step + 1) % checkpoint_every == 0 &&
        checkpoint(step + 1, result))
      break;
  }
  return result;
}

QTable value_iteration_oracle(const FsaAugmentedMdp& env, double gamma) {
  const DiscreteMdp& mdp = env.mdp();
  if (!mdp.has_transition_matrix())
    throw std::runtime_error("value iteration needs the exact transition matrix");
  const int ns = mdp.num_states();
  const int nq = env.num_q();
  const int na = mdp.num_actions();

  // Sparse successor lists per (s, a).
  std::vector<std::vector<std::pair<int, double>>> trans(
      static_cast<std::size_t>(ns) * na);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      auto& row = trans[static_cast<std::size_t>(s) * na + a];
      for (int s2 = 0; s2 < ns; ++s2) {
        double p = mdp.transition_prob(s, a, s2);
        if (p > 0.0) row.emplace_back(s2, p);
      }
    }
  }

  QTable qt(ns, nq, na);
  const double tol = 1e-9;
  double delta = tol + 1.0;
  while (delta > tol) {
    delta = 0.0;
    for (int q = 0; q < nq; ++q) {
      if (env.terminal_q(q)) continue;  // terminal rows stay zero
      for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) {
          double v = 0.0;
          for (const auto& [s2, p] : trans[static_cast<std::size_t>(s) * na + a]) {
            double r = env.progress_reward(q, s2) ? 1.0 : 0.0;
            int q2 = env.next_q(q, s2);
            double cont = env.terminal_q(q2) ? 0.0 : qt.max_over_actions(s2, q2);
            v += p * (r + gamma * cont);
          }
          double& cell = qt.at(s, q, a);
          delta = std::max(delta, std::abs(v - cell));
          cell = v;
        }
      }
    }
  }
  return qt;
}

QTable normalize_q(const QTable& qt) {
  double m = qt.max_value();
  if (!(m > 0.0)) throw std::runtime_error("cannot normalize an untrained table (max <= 0)");
  QTable out = qt;
  for (double& v : out.data) v /= m;
  return out;
}

}  // namespace tlc
