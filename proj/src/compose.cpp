#include "tlc/compose.hpp"

#include <cmath>
#include <stdexcept>

namespace tlc {

Stage stage_from_string(const std::string& s) {
  if (s == "c1") return Stage::C1;
  if (s == "c2") return Stage::C2;
  if (s == "c3") return Stage::C3;
  throw std::invalid_argument("unknown composition stage '" + s + "'");
}

std::string stage_to_string(Stage stage) {
  switch (stage) {
    case Stage::C1: return "c1";
    case Stage::C2: return "c2";
    case Stage::C3: return "c3";
  }
  return "?";
}

namespace {

/* Per (product state, MDP state) annotations shared by relabeling and the
 * off-policy update loops. */
struct ProductTables {
  int num_pq = 0;
  std::vector<char> terminal;                 // [pq]
  std::vector<std::vector<int>> next;         // [pq][s]
  std::vector<std::vector<char>> d1, d2;      // [pq][s]
};

ProductTables build_tables(const ProductFsa& pf,
                           const std::vector<StateSample>& samples) {
  ProductTables t;
  const int ns = static_cast<int>(samples.size());
  t.num_pq = pf.fsa.num_states();
  t.terminal.resize(t.num_pq);
  t.next.assign(t.num_pq, std::vector<int>(ns));
  t.d1.assign(t.num_pq, std::vector<char>(ns, 0));
  t.d2.assign(t.num_pq, std::vector<char>(ns, 0));

  std::vector<std::uint32_t> mask(ns);
  for (int s = 0; s < ns; ++s) mask[s] = pf.fsa.assignment_of(samples[s]);

  for (int pq = 0; pq < t.num_pq; ++pq) {
    t.terminal[pq] = pf.fsa.is_terminal(pq) ? 1 : 0;
    auto [q1, q2] = pf.pairs[pq];
    Guard dl, dr;
    if (q1 >= 0) dl = pf.left.outgoing_disjunction(q1);
    if (q2 >= 0) dr = pf.right.outgoing_disjunction(q2);
    for (int s = 0; s < ns; ++s) {
      t.next[pq][s] = pf.fsa.step_assignment(pq, mask[s]);
      if (q1 >= 0) t.d1[pq][s] = dl.contains(pf.project_left(mask[s])) ? 1 : 0;
      if (q2 >= 0) t.d2[pq][s] = dr.contains(pf.project_right(mask[s])) ? 1 : 0;
    }
  }
  return t;
}

}  // namespace

std::vector<RelabeledTransition> relabel(const ReplayBuffer& buffer,
                                         const ProductFsa& pf,
                                         const std::vector<StateSample>& samples) {
  ProductTables t = build_tables(pf, samples);
  std::vector<RelabeledTransition> out;
  out.reserve(buffer.size() * t.num_pq);
  for (const auto& rec : buffer) {
    if (rec.s_next < 0 || rec.s_next >= static_cast<int>(samples.size()))
      throw std::invalid_argument("transition state index out of range");
    for (int pq = 0; pq < t.num_pq; ++pq) {
      if (t.terminal[pq]) continue;
      RelabeledTransition r;
      r.s = rec.s;
      r.action = rec.action;
      r.s_next = rec.s_next;
      r.pq = pq;
      r.pq_next = t.next[pq][rec.s_next];
      double i1 = t.d1[pq][rec.s_next];
      double i2 = t.d2[pq][rec.s_next];
      r.r_and = i1 * i2;
      r.r_q = i1 + i2 - r.r_and;
      out.push_back(r);
    }
  }
  return out;
}

CompositionResult compose_skills(const CompositionJob& job) {
  const int ns = static_cast<int>(job.state_samples.size());
  if (job.q1.num_states != ns || job.q2.num_states != ns)
    throw std::invalid_argument("table dimensions do not match the state samples");
  if (job.q1.num_actions != job.q2.num_actions)
    throw std::invalid_argument("factor tables disagree on the action space");
  if (!job.q1.env_hash.empty() && !job.q2.env_hash.empty() &&
      job.q1.env_hash != job.q2.env_hash)
    throw std::invalid_argument("factor tables come from different environments");
  if (job.stage != Stage::C1 && job.buffer.empty())
    throw std::invalid_argument("stages c2/c3 need a non-empty replay buffer");

  const int num_pq = job.pf.fsa.num_states();
  const int na = job.q1.num_actions;

  // Mandatory pre-step: max-normalize copies of both tables. An all-zero
  // table (a task with no progress edges, e.g. "true") passes through.
  QTable n1 = job.q1.max_value() > 0.0 ? normalize_q(job.q1) : job.q1;
  QTable n2 = job.q2.max_value() > 0.0 ? normalize_q(job.q2) : job.q2;

  CompositionResult result;
  result.composed = QTable(ns, num_pq, na);
  result.correction = QTable(ns, num_pq, na);
  QTable& qc = result.composed;

  for (int pq = 0; pq < num_pq; ++pq) {
    auto [q1, q2] = job.pf.pairs[pq];
    if (q1 < 0 || q2 < 0) continue;  // product trap, stays zero
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < na; ++a)
        qc.at(s, pq, a) = n1.at(s, q1, a) + n2.at(s, q2, a);
  }
  if (job.stage == Stage::C1) return result;

  ProductTables t = build_tables(job.pf, job.state_samples);
  Rng rng(job.seed);
  std::uniform_int_distribution<std::size_t> pick(0, job.buffer.size() - 1);

  // Off-policy stages replay a fixed buffer, so a constant step size would
  // leave stationary noise larger than the greedy action gaps (the composed
  // signal at overlap states is the small difference of three tables). Each
  // cell keeps the full step size for its first visits so values propagate
  // through the bootstrap quickly, then anneals polynomially; the n^-0.6
  // tail satisfies the Robbins-Monro conditions.
  std::vector<long> visits(qc.data.size(), 0);
  auto step_size = [&](int s, int pq, int a) {
    long& n = visits[(static_cast<std::size_t>(s) * num_pq + pq) * na + a];
    long k = n++;
    if (k < 100) return job.alpha;  // propagation phase
    return job.alpha / std::pow(static_cast<double>(k - 99), 0.6);
  };

  // c2: learn the overlap correction from relabeled experience.
  QTable& corr = result.correction;
  for (long step = 0; step < job.update_steps; ++step) {
    const TransitionRecord& rec = job.buffer[pick(rng)];
    for (int pq = 0; pq < num_pq; ++pq) {
      if (t.terminal[pq]) continue;
      double r_and = static_cast<double>(t.d1[pq][rec.s_next]) *
                     static_cast<double>(t.d2[pq][rec.s_next]);
      int pq_next = t.next[pq][rec.s_next];
      double target = r_and;
      if (!t.terminal[pq_next])
        target += job.gamma * corr.max_over_actions(rec.s_next, pq_next);
      double& cell = corr.at(rec.s, pq, rec.action);
      cell += step_size(rec.s, pq, rec.action) * (target - cell);
    }
  }
  for (std::size_t i = 0; i < qc.data.size(); ++i) qc.data[i] -= corr.data[i];
  if (job.stage == Stage::C2) return result;

  // c3: fine-tune with the inclusion-exclusion reward.
  std::fill(visits.begin(), visits.end(), 0);
  for (long step = 0; step < job.update_steps; ++step) {
    const TransitionRecord& rec = job.buffer[pick(rng)];
    for (int pq = 0; pq < num_pq; ++pq) {
      if (t.terminal[pq]) continue;
      double i1 = t.d1[pq][rec.s_next];
      double i2 = t.d2[pq][rec.s_next];
      double r_q = i1 + i2 - i1 * i2;
      int pq_next = t.next[pq][rec.s_next];
      double target = r_q;
      if (!t.terminal[pq_next])
        target += job.gamma * qc.max_over_actions(rec.s_next, pq_next);
      double& cell = qc.at(rec.s, pq, rec.action);
      cell += step_size(rec.s, pq, rec.action) * (target - cell);
    }
  }
  return result;
}

DecompositionReport decomposition_check(const FsaAugmentedMdp& env,
                                        const ProductFsa& pf,
                                        const std::function<int(int, int)>& policy,
                                        int episodes, double gamma, Rng& rng) {
  if (episodes < 2) throw std::invalid_argument("need at least 2 episodes");
  ProductTables t = build_tables(pf, [&] {
    std::vector<StateSample> samples(env.mdp().num_states());
    for (int s = 0; s < env.mdp().num_states(); ++s)
      samples[s] = env.mdp().sample_of(s);
    return samples;
  }());

  DecompositionReport report;
  report.episodes = episodes;
  std::vector<double> residuals;
  residuals.reserve(episodes);
  double sum_p = 0, sum_l = 0, sum_r = 0, sum_o = 0;
  for (int e = 0; e < episodes; ++e) {
    auto ep = env.reset(rng);
    double gp = 0, gl = 0, gr = 0, go = 0, disc = 1.0;
    while (!ep.done) {
      int pq = ep.q;
      auto res = env.step(ep, policy(ep.s, pq), rng);
      double i1 = t.d1[pq][ep.s];
      double i2 = t.d2[pq][ep.s];
      gp += disc * res.reward;
      gl += disc * i1;
      gr += disc * i2;
      go += disc * i1 * i2;
      disc *= gamma;
    }
    sum_p += gp;
    sum_l += gl;
    sum_r += gr;
    sum_o += go;
    residuals.push_back(gp - (gl + gr - go));
  }
  report.mean_product = sum_p / episodes;
  report.mean_left = sum_l / episodes;
  report.mean_right = sum_r / episodes;
  report.mean_overlap = sum_o / episodes;
  double mean_res = (sum_p - sum_l - sum_r + sum_o) / episodes;
  double var = 0.0;
  for (double r : residuals) var += (r - mean_res) * (r - mean_res);
  var /= episodes - 1;
  report.residual = mean_res;
  report.residual_se = std::sqrt(var / episodes);
  report.identity_holds =
      std::abs(mean_res) <= 3.0 * report.residual_se + 1e-9;
  return report;
}

}  // namespace tlc
