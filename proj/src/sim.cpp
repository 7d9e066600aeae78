#include "ensurelab/sim.hpp"

#include <algorithm>

#include "ensurelab/rng.hpp"

namespace pp::sim {

namespace {

// Ordered agent pairs able to fire t in c. Zero when disabled.
std::uint64_t pair_weight(const Config& c, const Transition& t) {
  if (t.q1 == t.q2)
    return c[t.q1] < 2 ? 0 : (std::uint64_t)c[t.q1] * (c[t.q1] - 1);
  return (std::uint64_t)c[t.q1] * c[t.q2];
}

// Picks a transition with probability proportional to its enabled pair
// count; -1 when nothing is enabled.
int pick_step(const Protocol& p, const Config& c, Rng& rng) {
  std::uint64_t total = 0;
  for (const Transition& t : p.transitions) total += pair_weight(c, t);
  if (total == 0) return -1;
  std::uint64_t r = rng.below(total);
  for (int i = 0; i < (int)p.transitions.size(); i++) {
    std::uint64_t w = pair_weight(c, p.transitions[i]);
    if (r < w) return i;
    r -= w;
  }
  return -1;
}

}  // namespace

Trace run(const Protocol& p, const Config& c0, std::uint64_t seed,
          long long maxSteps) {
  p.validate();
  if ((int)c0.size() != p.state_count())
    throw Error("configuration arity does not match the protocol");
  Rng rng(seed);
  Trace tr;
  tr.configs.push_back(c0);
  Config c = c0;
  for (long long k = 0; k < maxSteps; k++) {
    int i = pick_step(p, c, rng);
    if (i < 0) break;
    c = apply_transition(p, c, i);
    tr.steps.push_back(i);
    tr.configs.push_back(c);
  }
  return tr;
}

ConvergenceReport ensure_convergence_stats(const Protocol& p,
                                           const oracle::OutputPredicate& cond,
                                           const std::vector<long long>& sizes,
                                           int runsPerSize, std::uint64_t seed,
                                           long long maxSteps, long long budget) {
  p.validate();
  oracle::EnsureOracle shared(p, cond, budget);
  ConvergenceReport rep;
  for (long long n : sizes) {
    SizeStats st;
    st.size = n;
    st.runs = runsPerSize;
    std::vector<Config> inputs = oracle::input_configs(p, n);
    Rng meta(seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t)n);
    std::vector<long long> times;
    for (int r = 0; r < runsPerSize; r++) {
      Config c = inputs[meta.below(inputs.size())];
      Rng rng(meta.next());
      bool done = false;
      long long k = 0;
      for (;;) {
        if (shared.config_ensures(c)) {
          times.push_back(k);
          done = true;
          break;
        }
        if (k >= maxSteps) break;
        int i = pick_step(p, c, rng);
        if (i < 0) break;  // stuck outside the condition
        c = apply_transition(p, c, i);
        k++;
      }
      if (done) st.converged++;
    }
    if (!times.empty()) {
      std::sort(times.begin(), times.end());
      double sum = 0;
      for (long long v : times) sum += (double)v;
      st.meanSteps = sum / (double)times.size();
      st.p50 = times[(times.size() - 1) * 50 / 100];
      st.p90 = times[(times.size() - 1) * 90 / 100];
      st.maxSteps = times.back();
    }
    rep.perSize.push_back(st);
  }
  return rep;
}

ConvergenceReport ensure_convergence_stats(const Protocol& p,
                                           const sets::CountingSet& cond,
                                           const std::vector<long long>& sizes,
                                           int runsPerSize, std::uint64_t seed,
                                           long long maxSteps, long long budget) {
  return ensure_convergence_stats(p, oracle::output_predicate(cond, p), sizes,
                                  runsPerSize, seed, maxSteps, budget);
}

ConvergenceReport ensure_convergence_stats(const Protocol& p,
                                           const sets::SemilinearSet& cond,
                                           const std::vector<long long>& sizes,
                                           int runsPerSize, std::uint64_t seed,
                                           long long maxSteps, long long budget) {
  return ensure_convergence_stats(p, oracle::output_predicate(cond, p), sizes,
                                  runsPerSize, seed, maxSteps, budget);
}

}  // namespace pp::sim
