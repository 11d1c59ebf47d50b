#include "tlc/environment.hpp"

#include <algorithm>

namespace tlc {

GridWorld::GridWorld(int width, int height, double slip,
                     std::optional<std::pair<int, int>> fixed_start)
    : width_(width), height_(height), slip_(slip), fixed_start_(fixed_start) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("empty grid");
  if (slip < 0.0 || slip > 1.0) throw std::invalid_argument("slip out of [0,1]");
  if (fixed_start_) {
    auto [x, y] = *fixed_start_;
    if (x < 0 || x >= width_ || y < 0 || y >= height_)
      throw std::invalid_argument("fixed start cell off the grid");
  }
}

std::vector<int> GridWorld::reset_support() const {
  if (fixed_start_) return {index_of(fixed_start_->first, fixed_start_->second)};
  std::vector<int> all(num_states());
  for (int s = 0; s < num_states(); ++s) all[s] = s;
  return all;
}

StateSample GridWorld::sample_of(int state) const {
  auto [x, y] = coords_of(state);
  return {{"x", static_cast<double>(x)}, {"y", static_cast<double>(y)}};
}

int GridWorld::reset(Rng& rng) const {
  if (fixed_start_) return index_of(fixed_start_->first, fixed_start_->second);
  return std::uniform_int_distribution<int>(0, num_states() - 1)(rng);
}

int GridWorld::apply_move(int state, int action) const {
  auto [x, y] = coords_of(state);
  switch (action) {
    case kUp:    y = std::min(y + 1, height_ - 1); break;
    case kDown:  y = std::max(y - 1, 0); break;
    case kLeft:  x = std::max(x - 1, 0); break;
    case kRight: x = std::min(x + 1, width_ - 1); break;
    case kStay:  break;
    default: throw std::invalid_argument("invalid action");
  }
  return index_of(x, y);
}

int GridWorld::step(int state, int action, Rng& rng) const {
  if (action < 0 || action >= num_actions()) throw std::invalid_argument("invalid action");
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  int executed = action;
  if (u < slip_) {
    executed = std::uniform_int_distribution<int>(0, num_actions() - 1)(rng);
  }
  return apply_move(state, executed);
}

double GridWorld::transition_prob(int state, int action, int next) const {
  double p = 0.0;
  if (apply_move(state, action) == next) p += 1.0 - slip_;
  for (int a = 0; a < num_actions(); ++a) {
    if (apply_move(state, a) == next) p += slip_ / num_actions();
  }
  return p;
}

FsaAugmentedMdp::FsaAugmentedMdp(const DiscreteMdp& mdp, Fsa fsa, int horizon)
    : mdp_(&mdp), fsa_(std::move(fsa)), horizon_(horizon) {
  if (horizon < 0) throw std::invalid_argument("negative horizon");
  const int ns = mdp_->num_states();
  const int nq = fsa_.num_states();
  std::vector<std::uint32_t> mask(ns);
  for (int s = 0; s < ns; ++s) mask[s] = fsa_.assignment_of(mdp_->sample_of(s));
  next_q_.assign(nq, std::vector<int>(ns));
  d_sat_.assign(nq, std::vector<char>(ns));
  for (int q = 0; q < nq; ++q) {
    Guard d = fsa_.outgoing_disjunction(q);
    for (int s = 0; s < ns; ++s) {
      next_q_[q][s] = fsa_.step_assignment(q, mask[s]);
      d_sat_[q][s] = d.contains(mask[s]) ? 1 : 0;
    }
  }
}

FsaAugmentedMdp::Episode FsaAugmentedMdp::reset(Rng& rng) const {
  Episode ep;
  ep.s = mdp_->reset(rng);
  // A spawn inside a goal region advances the automaton without reward.
  ep.q = next_q_[fsa_.initial][ep.s];
  ep.t = 0;
  ep.done = terminal_q(ep.q) || horizon_ == 0;
  return ep;
}

FsaAugmentedMdp::StepResult FsaAugmentedMdp::step(Episode& ep, int action,
                                                  Rng& rng) const {
  if (ep.done) throw std::logic_error("stepping a finished episode");
  int s_next = mdp_->step(ep.s, action, rng);
  StepResult res;
  res.reward = d_sat_[ep.q][s_next] ? 1.0 : 0.0;
  ep.q = next_q_[ep.q][s_next];
  ep.s = s_next;
  ep.t += 1;
  ep.done = terminal_q(ep.q) || ep.t >= horizon_;
  res.done = ep.done;
  return res;
}

std::vector<std::pair<int, int>> reachable_augmented_states(
    const FsaAugmentedMdp& env) {
  const DiscreteMdp& mdp = env.mdp();
  if (!mdp.has_transition_matrix())
    throw std::runtime_error("reachability needs the exact transition matrix");
  const int ns = mdp.num_states();
  const int nq = env.num_q();
  std::vector<char> seen(static_cast<std::size_t>(ns) * nq, 0);
  std::vector<std::pair<int, int>> frontier;
  auto visit = [&](int s, int q) {
    if (env.terminal_q(q)) return;
    char& flag = seen[static_cast<std::size_t>(s) * nq + q];
    if (!flag) {
      flag = 1;
      frontier.emplace_back(s, q);
    }
  };
  for (int s0 : mdp.reset_support()) visit(s0, env.next_q(env.fsa().initial, s0));
  std::vector<std::pair<int, int>> out;
  while (!frontier.empty()) {
    auto [s, q] = frontier.back();
    frontier.pop_back();
    out.emplace_back(s, q);
    for (int a = 0; a < mdp.num_actions(); ++a) {
      for (int s2 = 0; s2 < ns; ++s2) {
        if (mdp.transition_prob(s, a, s2) > 0.0) visit(s2, env.next_q(q, s2));
      }
    }
  }
  return out;
}

EvalReport evaluate_satisfaction(const FsaAugmentedMdp& env,
                                 const std::function<int(int, int)>& policy,
                                 int episodes, Rng& rng) {
  EvalReport report;
  report.episodes = episodes;
  long successes = 0;
  double steps_sum = 0.0;
  double return_sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    auto ep = env.reset(rng);
    double ep_return = 0.0;
    while (!ep.done) {
      auto res = env.step(ep, policy(ep.s, ep.q), rng);
      ep_return += res.reward;
    }
    if (env.fsa().is_accepting(ep.q)) {
      ++successes;
      steps_sum += ep.t;
    }
    return_sum += ep_return;
  }
  report.success_rate = episodes ? static_cast<double>(successes) / episodes : 0.0;
  report.mean_steps_to_accept = successes ? steps_sum / successes : 0.0;
  report.mean_return = episodes ? return_sum / episodes : 0.0;
  return report;
}

}  // namespace tlc
