#pragma once

#include <functional>
#include <optional>
#include <random>

#include "tlc/automaton.hpp"
#include "tlc/logic.hpp"

namespace tlc {

using Rng = std::mt19937_64;

/* Discrete MDP with an enumerable state space. State indices are stable
 * across runs for a fixed configuration. */
class DiscreteMdp {
 public:
  virtual ~DiscreteMdp() = default;
  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual StateSample sample_of(int state) const = 0;
  virtual int reset(Rng& rng) const = 0;
  virtual int step(int state, int action, Rng& rng) const = 0;

  virtual bool has_transition_matrix() const { return false; }
  virtual double transition_prob(int state, int action, int next) const {
    (void)state; (void)action; (void)next;
    throw std::runtime_error("exact transition matrix not available");
  }

  /* States reset() can return. */
  virtual std::vector<int> reset_support() const = 0;
};

enum GridAction { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };

/* 8x10 grid with integer coordinates and slip: the commanded action runs
 * with probability 1 - slip, otherwise a uniformly random action runs.
 * Moves off the grid clamp at the boundary. */
class GridWorld : public DiscreteMdp {
 public:
  GridWorld(int width = 10, int height = 8, double slip = 0.2,
            std::optional<std::pair<int, int>> fixed_start = std::nullopt);

  int num_states() const override { return width_ * height_; }
  int num_actions() const override { return 5; }
  StateSample sample_of(int state) const override;
  int reset(Rng& rng) const override;
  int step(int state, int action, Rng& rng) const override;

  bool has_transition_matrix() const override { return true; }
  double transition_prob(int state, int action, int next) const override;
  std::vector<int> reset_support() const override;

  int index_of(int x, int y) const { return y * width_ + x; }
  std::pair<int, int> coords_of(int state) const {
    return {state % width_, state / width_};
  }
  int width() const { return width_; }
  int height() const { return height_; }
  double slip() const { return slip_; }

 private:
  int apply_move(int state, int action) const;

  int width_, height_;
  double slip_;
  std::optional<std::pair<int, int>> fixed_start_;
};

/* MDP x FSA wrapper. The automaton is driven by the successor state
 * (q' = delta(q, s')) and the intrinsic reward is 1 exactly when the
 * outgoing-edge disjunction D_phi^q is satisfied at s'. */
class FsaAugmentedMdp {
 public:
  FsaAugmentedMdp(const DiscreteMdp& mdp, Fsa fsa, int horizon);

  struct Episode {
    int s = 0;
    int q = 0;
    int t = 0;
    bool done = false;
  };

  struct StepResult {
    double reward = 0.0;
    bool done = false;
  };

  /* Samples s0 and advances the automaton on it (no reward); the episode
   * can be done at reset when s0 already satisfies the whole task or the
   * horizon is zero. */
  Episode reset(Rng& rng) const;

  StepResult step(Episode& ep, int action, Rng& rng) const;

  const DiscreteMdp& mdp() const { return *mdp_; }
  const Fsa& fsa() const { return fsa_; }
  int horizon() const { return horizon_; }
  int num_q() const { return fsa_.num_states(); }
  bool terminal_q(int q) const { return fsa_.is_terminal(q); }

  /* Cached per-state-index automaton transition and reward indicator. */
  int next_q(int q, int s_index) const { return next_q_[q][s_index]; }
  bool progress_reward(int q, int s_index) const { return d_sat_[q][s_index]; }

 private:
  const DiscreteMdp* mdp_;
  Fsa fsa_;
  int horizon_;
  std::vector<std::vector<int>> next_q_;    // [q][s_index]
  std::vector<std::vector<char>> d_sat_;    // [q][s_index]
};

struct EvalReport {
  double success_rate = 0.0;
  double mean_steps_to_accept = 0.0;  // among successful episodes
  double mean_return = 0.0;           // undiscounted
  int episodes = 0;
};

/* Greedy rollouts of `policy(s, q) -> action`. */
EvalReport evaluate_satisfaction(const FsaAugmentedMdp& env,
                                 const std::function<int(int, int)>& policy,
                                 int episodes, Rng& rng);

/* Forward closure of (s, q) pairs under the exact dynamics, starting from
 * the reset support. Pairs with terminal q are excluded. */
std::vector<std::pair<int, int>> reachable_augmented_states(
    const FsaAugmentedMdp& env);

}  // namespace tlc
