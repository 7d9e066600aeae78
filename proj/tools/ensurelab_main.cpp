#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ensurelab/core.hpp"
#include "ensurelab/oracle.hpp"
#include "ensurelab/rng.hpp"
#include "ensurelab/sets.hpp"
#include "ensurelab/sim.hpp"
#include "ensurelab/symbolic.hpp"
#include "ensurelab/synth_io.hpp"
#include "ensurelab/synth_pp.hpp"
#include "ensurelab/text.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 verdict true / success, 1 verdict false / rejected,
// 2 inconclusive or out of budget, 64 usage, 65 unreadable input.
constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;

struct Common {
  std::uint64_t seed = 0;
  std::string format = "text";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed (default 0)");
  cmd->add_option("--format", c.format, "Output format: text or tsv")
      ->check(CLI::IsMember({"text", "tsv"}));
}

void banner(const Common& c) {
  printf("# ensurelab %s seed=%llu\n", kVersion, (unsigned long long)c.seed);
}

// "2,4,6" or "1..8".
std::vector<long long> parse_sizes(const std::string& spec) {
  std::vector<long long> out;
  auto dots = spec.find("..");
  try {
    if (dots != std::string::npos) {
      long long lo = std::stoll(spec.substr(0, dots));
      long long hi = std::stoll(spec.substr(dots + 2));
      for (long long n = lo; n <= hi; n++) out.push_back(n);
    } else {
      size_t pos = 0;
      while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        out.push_back(std::stoll(spec.substr(pos, comma - pos)));
        pos = comma + 1;
      }
    }
  } catch (const std::exception&) {
    throw pp::Error("bad size list '" + spec + "' (use 1..6 or 2,4,6)");
  }
  if (out.empty()) throw pp::Error("empty size list");
  for (long long n : out)
    if (n < 0) throw pp::Error("sizes must be nonnegative");
  return out;
}

pp::Protocol load_protocol(const std::string& path) {
  pp::Protocol p = pp::text::parse_protocol(pp::text::read_file(path));
  p.validate();
  return p;
}

pp::sets::CountingSet load_counting_set(const std::string& path) {
  auto sf = pp::text::parse_set_file(pp::text::read_file(path));
  if (auto* cs = std::get_if<pp::sets::CountingSet>(&sf)) return *cs;
  throw pp::ParseError(path + ": expected a counting set (cube lines)");
}

pp::sets::SemilinearSet load_semilinear_set(const std::string& path) {
  auto sf = pp::text::parse_set_file(pp::text::read_file(path));
  if (auto* ss = std::get_if<pp::sets::SemilinearSet>(&sf)) return *ss;
  throw pp::ParseError(path + ": expected a semilinear set (cone lines)");
}

std::string transition_text(const pp::Protocol& p, int i) {
  const pp::Transition& t = p.transitions[i];
  return p.states[t.q1] + " " + p.states[t.q2] + " -> " + p.states[t.p1] +
         " " + p.states[t.p2];
}

int cmd_synth_pp(const Common& c, const std::string& condPath,
                 const std::string& outPath) {
  banner(c);
  pp::sets::SemilinearSet s = load_semilinear_set(condPath);
  pp::Protocol p = pp::synth_pp::synthesize_pp_ensurer(s, "ensurer");
  printf("condition: %d dims, %d cones\n", s.dim_count(), (int)s.cones.size());
  printf("ensurer: %d states, %d transitions, io=%s\n", p.state_count(),
         (int)p.transitions.size(), p.is_io() ? "yes" : "no");
  std::string header = "# ensurer for semilinear condition in " + condPath + "\n";
  header += "# dims:";
  for (const auto& d : s.dims) header += " " + d;
  header += "\n";
  pp::text::write_file(outPath, header + pp::text::format_protocol(p));
  printf("wrote %s\n", outPath.c_str());
  return kExitTrue;
}

int cmd_synth_io(const Common& c, const std::string& condPath,
                 const std::string& outPath) {
  banner(c);
  pp::sets::CountingSet s = load_counting_set(condPath);
  pp::sets::FlexWitnesses fw = pp::sets::flexible_witnesses(s);
  pp::Protocol p = pp::synth_io::synthesize_io_ensurer(s, "ensurer");
  printf("condition: %d dims, %d cubes\n", s.dim_count(), (int)s.cubes.size());
  long long nd = 0;
  for (int v : fw.D) nd += v;
  printf("ray: |D|=%lld surplus=%s\n", nd, s.dims[fw.x].c_str());
  printf("ensurer: %d states, %d transitions, io=%s\n", p.state_count(),
         (int)p.transitions.size(), p.is_io() ? "yes" : "no");
  std::string header = "# ensurer for counting condition in " + condPath + "\n";
  header += "# ray multiset:";
  for (size_t i = 0; i < fw.D.size(); i++)
    if (fw.D[i] > 0) header += " " + s.dims[i] + ":" + std::to_string(fw.D[i]);
  header += " surplus=" + s.dims[fw.x] + "\n";
  pp::text::write_file(outPath, header + pp::text::format_protocol(p));
  printf("wrote %s\n", outPath.c_str());
  return kExitTrue;
}

int cmd_simulate(const Common& c, const std::string& protoPath,
                 const std::string& configStr, long long maxSteps) {
  banner(c);
  pp::Protocol p = load_protocol(protoPath);
  pp::Config c0 = pp::text::parse_config(p, configStr);
  pp::sim::Trace tr = pp::sim::run(p, c0, c.seed, maxSteps);
  bool stuck = (long long)tr.steps.size() < maxSteps;
  if (c.format == "tsv") {
    printf("step\ttransition\tconfig\n");
    printf("0\t-\t%s\n", pp::text::format_config(p, tr.configs[0]).c_str());
    for (size_t k = 0; k < tr.steps.size(); k++)
      printf("%zu\t%s\t%s\n", k + 1, transition_text(p, tr.steps[k]).c_str(),
             pp::text::format_config(p, tr.configs[k + 1]).c_str());
  } else {
    printf("start %s\n", pp::text::format_config(p, tr.configs[0]).c_str());
    for (size_t k = 0; k < tr.steps.size(); k++)
      printf("step %zu [%s] -> %s\n", k + 1,
             transition_text(p, tr.steps[k]).c_str(),
             pp::text::format_config(p, tr.configs[k + 1]).c_str());
    printf("final %s after %zu steps (%s)\n",
           pp::text::format_config(p, tr.configs.back()).c_str(),
           tr.steps.size(),
           stuck ? "no transition enabled" : "step limit reached");
  }
  return kExitTrue;
}

int cmd_verify_explicit(const Common& c, const std::string& protoPath,
                        const std::string& condPath, const std::string& sizeSpec) {
  banner(c);
  pp::Protocol p = load_protocol(protoPath);
  auto sf = pp::text::parse_set_file(pp::text::read_file(condPath));
  pp::oracle::OutputPredicate pred;
  if (auto* cs = std::get_if<pp::sets::CountingSet>(&sf))
    pred = pp::oracle::output_predicate(*cs, p);
  else
    pred = pp::oracle::output_predicate(std::get<pp::sets::SemilinearSet>(sf), p);
  std::vector<long long> sizes = parse_sizes(sizeSpec);
  pp::oracle::EnsureOracle eng(p, pred);
  bool all = true;
  if (c.format == "tsv") printf("size\tverdict\twitness\tviolator\n");
  for (long long n : sizes) {
    pp::oracle::EnsureVerdict v = eng.check_size(n);
    all = all && v.holds;
    std::string w = v.input ? pp::text::format_config(p, *v.input) : "-";
    std::string x = v.violator ? pp::text::format_config(p, *v.violator) : "-";
    if (c.format == "tsv") {
      printf("%lld\t%s\t%s\t%s\n", n, v.holds ? "true" : "false", w.c_str(),
             x.c_str());
    } else if (v.holds) {
      printf("size=%lld verdict=true\n", n);
    } else {
      printf("size=%lld verdict=false witness=%s violator=%s\n", n, w.c_str(),
             x.c_str());
    }
  }
  printf("overall=%s\n", all ? "true" : "false");
  return all ? kExitTrue : kExitFalse;
}

int cmd_verify_symbolic(const Common& c, const std::string& protoPath,
                        const std::string& condPath, long long budget,
                        long long compareMax) {
  banner(c);
  pp::Protocol p = load_protocol(protoPath);
  pp::sets::CountingSet s = load_counting_set(condPath);
  pp::symbolic::SymbolicReport rep = pp::symbolic::verify_ensures_symbolic(p, s, budget);
  const char* verdict = rep.verdict == pp::symbolic::Verdict::ensures ? "ensures"
                        : rep.verdict == pp::symbolic::Verdict::not_ensures
                            ? "not-ensures"
                            : "inconclusive";
  printf("formula=%s inner-converged=%s inner-iterations=%lld "
         "outer-converged=%s outer-iterations=%lld\n",
         verdict, rep.innerConverged ? "yes" : "no", rep.innerIterations,
         rep.outerConverged ? "yes" : "no", rep.outerIterations);
  long long witnessSize = -1;
  if (rep.witness) {
    witnessSize = pp::config_size(*rep.witness);
    printf("witness=%s\n", pp::text::format_config(p, *rep.witness).c_str());
  } else {
    printf("witness=-\n");
  }

  int divergent = 0;
  if (compareMax >= 0) {
    pp::oracle::EnsureOracle eng(p, pp::oracle::output_predicate(s, p));
    for (long long n = 0; n <= compareMax; n++) {
      pp::oracle::EnsureVerdict v = eng.check_size(n);
      bool div = false;
      if (rep.verdict == pp::symbolic::Verdict::ensures && !v.holds) div = true;
      if (rep.verdict == pp::symbolic::Verdict::not_ensures && n == witnessSize &&
          v.holds)
        div = true;
      if (div) divergent++;
      printf("oracle size=%lld verdict=%s agree=%s\n", n,
             v.holds ? "true" : "false", div ? "DIVERGENT" : "yes");
    }
    printf("divergences=%d\n", divergent);
  }
  if (divergent > 0) return kExitInconclusive;
  if (rep.verdict == pp::symbolic::Verdict::ensures) return kExitTrue;
  if (rep.verdict == pp::symbolic::Verdict::not_ensures) return kExitFalse;
  return kExitInconclusive;
}

int cmd_check_compute(const Common& c, const std::string& protoPath,
                      const std::string& condPath, long long maxSize,
                      std::string trueOut, std::string falseOut) {
  banner(c);
  pp::Protocol p = load_protocol(protoPath);
  pp::sets::CountingSet phiSet = load_counting_set(condPath);
  int ti = p.output_index(trueOut);
  int fi = p.output_index(falseOut);
  if (ti < 0 || fi < 0)
    throw pp::Error("outputs '" + trueOut + "'/'" + falseOut +
                    "' not both present in the protocol");
  std::vector<int> dimState;
  for (const auto& d : phiSet.dims) {
    int q = p.state_index(d);
    if (q < 0) throw pp::Error("condition dimension '" + d + "' is not a state");
    dimState.push_back(q);
  }
  auto phi = [&](const pp::Config& c0) {
    std::vector<int> proj;
    for (int q : dimState) proj.push_back(c0[q]);
    return phiSet.member(proj) ? ti : fi;
  };
  pp::oracle::ComputeVerdict v = pp::oracle::check_computes(p, phi, maxSize);
  if (v.holds) {
    printf("computes=true max-size=%lld\n", maxSize);
    return kExitTrue;
  }
  printf("computes=false input=%s nonconsensus=%s\n",
         pp::text::format_config(p, *v.input).c_str(),
         pp::text::format_config(p, *v.nonConsensus).c_str());
  return kExitFalse;
}

int cmd_prune_demo(const Common& c, const std::string& protoPath, long long size,
                   long long steps, std::string fromName, std::string toName) {
  banner(c);
  pp::Protocol p = load_protocol(protoPath);
  std::vector<pp::Config> inputs = pp::oracle::input_configs(p, size);
  pp::Rng rng(c.seed);
  pp::Config c0 = inputs[rng.below(inputs.size())];
  pp::sim::Trace tr = pp::sim::run(p, c0, c.seed, steps);
  pp::DeanonExecution e = pp::deanonymise(p, c0, tr.steps, c.seed);
  auto classes = pp::oracle::trajectory_classes(p, e);
  printf("agents=%lld steps=%zu start=%s final=%s\n", size, e.steps.size(),
         pp::text::format_config(p, c0).c_str(),
         pp::text::format_config(p, tr.configs.back()).c_str());
  int from = -1, to = -1, best = 0;
  for (int a = 0; a < p.state_count(); a++)
    for (int b = 0; b < p.state_count(); b++) {
      if (classes[a][b] > 0)
        printf("class %s->%s: %d\n", p.states[a].c_str(), p.states[b].c_str(),
               classes[a][b]);
      if (classes[a][b] > best) {
        best = classes[a][b];
        from = a;
        to = b;
      }
    }
  if (!fromName.empty()) {
    from = p.state_index(fromName);
    to = p.state_index(toName);
    if (from < 0 || to < 0) throw pp::Error("unknown --from/--to state");
  } else if (best <= p.state_count()) {
    printf("no class of multiplicity above %d; nothing to prune\n",
           p.state_count());
    return kExitFalse;
  }
  pp::DeanonExecution pruned = pp::oracle::prune_execution(p, e, from, to);
  auto after = pp::oracle::trajectory_classes(p, pruned);
  std::vector<pp::Config> replayed = pp::replay(p, pruned);
  printf("pruned %s->%s: agents=%zu steps=%zu\n", p.states[from].c_str(),
         p.states[to].c_str(), pruned.initial.size(), pruned.steps.size());
  for (int a = 0; a < p.state_count(); a++)
    for (int b = 0; b < p.state_count(); b++)
      if (after[a][b] > 0)
        printf("class %s->%s: %d\n", p.states[a].c_str(), p.states[b].c_str(),
               after[a][b]);
  printf("replay=valid final=%s\n",
         pp::text::format_config(p, replayed.back()).c_str());
  return kExitTrue;
}

int cmd_bottom_closure(const Common& c, const std::string& protoPath,
                       const std::string& sizeSpec, int threshold, int maxExtra) {
  banner(c);
  pp::Protocol p = load_protocol(protoPath);
  if (threshold <= 0) {
    long long q = p.state_count();
    long long t = q * q * q * q;
    threshold = (int)std::min<long long>(t, 1000000);
  }
  std::vector<long long> sizes = parse_sizes(sizeSpec);
  pp::oracle::ClosureReport rep =
      pp::oracle::bottom_closure_check(p, threshold, maxExtra, sizes);
  printf("threshold=%d max-extra=%d sizes=%s\n", threshold, maxExtra,
         sizeSpec.c_str());
  printf("checks=%lld violations=%zu smallest-holding-threshold=%d\n",
         rep.checks, rep.violations.size(), rep.smallestHoldingThreshold);
  for (size_t i = 0; i < rep.violations.size() && i < 10; i++)
    printf("violation: bottom=%s extended=%s\n",
           pp::text::format_config(p, rep.violations[i].first).c_str(),
           pp::text::format_config(p, rep.violations[i].second).c_str());
  return rep.violations.empty() ? kExitTrue : kExitFalse;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ensurelab: synthesis, simulation and verification of "
               "population protocols with ensured output conditions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("ensurelab ") + kVersion);
  app.footer("Environment: ENSURELAB_BUDGET caps explicit exploration nodes "
             "(default 2000000).\nExit codes: 0 true/success, 1 false, "
             "2 inconclusive/out of budget, 64 usage, 65 unreadable input.");

  Common common;
  std::string protoPath, condPath, outPath, configStr, sizeSpec;
  std::string fromName, toName, trueOut = "true", falseOut = "false";
  long long maxSteps = 100000, maxSize = 6, budget = 0, compareMax = -1;
  long long size = 3, steps = 200;
  int threshold = 0, maxExtra = 4;

  CLI::App* sp = app.add_subcommand("synth-pp",
                                    "Synthesize an ensurer for a semilinear condition");
  sp->add_option("--condition", condPath, "Semilinear set file")->required();
  sp->add_option("--out", outPath, "Output protocol file")->required();
  add_common(sp, common);

  CLI::App* si = app.add_subcommand("synth-io",
                                    "Synthesize an observation ensurer for a counting condition");
  si->add_option("--condition", condPath, "Counting set file")->required();
  si->add_option("--out", outPath, "Output protocol file")->required();
  add_common(si, common);

  CLI::App* sim = app.add_subcommand("simulate", "Run the random scheduler");
  sim->add_option("--protocol", protoPath, "Protocol file")->required();
  sim->add_option("--config", configStr, "Start configuration, e.g. q1:3")->required();
  sim->add_option("--max-steps", maxSteps, "Step limit (default 100000)");
  add_common(sim, common);

  CLI::App* ve = app.add_subcommand("verify-explicit",
                                    "Check the ensure property size by size");
  ve->add_option("--protocol", protoPath, "Protocol file")->required();
  ve->add_option("--condition", condPath, "Counting or semilinear set file")->required();
  ve->add_option("--sizes", sizeSpec, "Sizes, e.g. 1..6 or 2,4,6")->required();
  add_common(ve, common);

  CLI::App* vs = app.add_subcommand("verify-symbolic",
                                    "Decide the ensure property with counting-set closures");
  vs->add_option("--protocol", protoPath, "Observation protocol file")->required();
  vs->add_option("--condition", condPath, "Counting set file")->required();
  vs->add_option("--budget", budget, "Iteration budget (default scales with the condition)");
  vs->add_option("--compare-oracle", compareMax,
                 "Also run the explicit oracle for sizes 0..N and report divergences");
  add_common(vs, common);

  CLI::App* cc = app.add_subcommand("check-compute",
                                    "Check stable consensus computation of a predicate");
  cc->add_option("--protocol", protoPath, "Protocol file")->required();
  cc->add_option("--condition", condPath,
                 "Counting set over input states defining the predicate")->required();
  cc->add_option("--max-size", maxSize, "Largest input size to check (default 6)");
  cc->add_option("--true-output", trueOut, "Output name for accepted inputs");
  cc->add_option("--false-output", falseOut, "Output name for rejected inputs");
  add_common(cc, common);

  CLI::App* pd = app.add_subcommand("prune-demo",
                                    "Deanonymise a run and remove one repeated-trajectory agent");
  pd->add_option("--protocol", protoPath, "Observation protocol file")->required();
  pd->add_option("--size", size, "Population size (default 3)");
  pd->add_option("--steps", steps, "Scheduler steps (default 200)");
  pd->add_option("--from", fromName, "Trajectory class start state");
  pd->add_option("--to", toName, "Trajectory class end state");
  add_common(pd, common);

  CLI::App* bc = app.add_subcommand("bottom-closure",
                                    "Check bottom configurations against agent additions");
  bc->add_option("--protocol", protoPath, "Protocol file")->required();
  bc->add_option("--sizes", sizeSpec, "Sizes to inspect, e.g. 16,17")->required();
  bc->add_option("--threshold", threshold,
                 "Count treated as saturated (default state count to the 4th)");
  bc->add_option("--max-extra", maxExtra, "Largest extension size (default 4)");
  add_common(bc, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion")
      return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sp->parsed()) return cmd_synth_pp(common, condPath, outPath);
    if (si->parsed()) return cmd_synth_io(common, condPath, outPath);
    if (sim->parsed()) return cmd_simulate(common, protoPath, configStr, maxSteps);
    if (ve->parsed()) return cmd_verify_explicit(common, protoPath, condPath, sizeSpec);
    if (vs->parsed())
      return cmd_verify_symbolic(common, protoPath, condPath, budget, compareMax);
    if (cc->parsed())
      return cmd_check_compute(common, protoPath, condPath, maxSize, trueOut, falseOut);
    if (pd->parsed())
      return cmd_prune_demo(common, protoPath, size, steps, fromName, toName);
    if (bc->parsed())
      return cmd_bottom_closure(common, protoPath, sizeSpec, threshold, maxExtra);
  } catch (const pp::ParseError& e) {
    fprintf(stderr, "parse error: %s\n", e.what());
    return kExitParse;
  } catch (const pp::BudgetError& e) {
    fprintf(stderr, "out of budget: %s\n", e.what());
    return kExitInconclusive;
  } catch (const pp::Error& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return kExitFalse;
  }
  return kExitUsage;
}
