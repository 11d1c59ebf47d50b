#pragma once

#include "tlc/learner.hpp"

namespace tlc {

enum class Stage { C1, C2, C3 };

Stage stage_from_string(const std::string& s);
std::string stage_to_string(Stage stage);

/* Everything skill composition needs. Holds state samples instead of an
 * environment handle, so no stage can interact with the environment. */
struct CompositionJob {
  QTable q1, q2;               // trained factor tables
  ProductFsa pf;               // product of the factor automata
  std::vector<StateSample> state_samples;  // MDP state index -> sample
  ReplayBuffer buffer;         // merged raw transitions from both trainings
  Stage stage = Stage::C1;
  long update_steps = 0;       // off-policy budget per learning stage
  double gamma = 0.95;
  double alpha = 0.1;
  std::uint64_t seed = 0;
};

struct RelabeledTransition {
  int s = 0, action = 0, s_next = 0;
  int pq = 0;        // product state the transition is replayed against
  int pq_next = 0;
  double r_and = 0.0;  // indicator product (overlap reward)
  double r_q = 0.0;    // inclusion-exclusion reward for the composed task
};

/* Annotates each raw transition against every non-terminal product state.
 * Valid because guards depend only on the successor MDP state. */
std::vector<RelabeledTransition> relabel(const ReplayBuffer& buffer,
                                         const ProductFsa& pf,
                                         const std::vector<StateSample>& samples);

struct CompositionResult {
  QTable composed;    // over product automaton states
  QTable correction;  // learned Q_{q1 ^ q2}; zero after stage c1
};

/* Algorithm stages:
 *   c1: max-normalize both tables and sum them over product states.
 *   c2: additionally learn the overlap correction off-policy from the
 *       replay buffer and subtract it.
 *   c3: additionally fine-tune the composed table off-policy with the
 *       inclusion-exclusion reward.
 * No stage interacts with the environment. */
CompositionResult compose_skills(const CompositionJob& job);

struct DecompositionReport {
  double mean_product = 0.0;  // E[sum gamma^t 1(D_phi^q)]
  double mean_left = 0.0;     // E[sum gamma^t 1(D_phi1^q1)]
  double mean_right = 0.0;
  double mean_overlap = 0.0;  // E[sum gamma^t 1(D1)1(D2)]
  double residual = 0.0;      // mean_product - (left + right - overlap)
  double residual_se = 0.0;
  int episodes = 0;
  bool identity_holds = false;  // |residual| <= 3 SE (plus epsilon)
};

/* Monte-Carlo validation of the Q-decomposition identity under a fixed
 * policy on the product-augmented environment. */
DecompositionReport decomposition_check(const FsaAugmentedMdp& env,
                                        const ProductFsa& pf,
                                        const std::function<int(int, int)>& policy,
                                        int episodes, double gamma, Rng& rng);

}  // namespace tlc
