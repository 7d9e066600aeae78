#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "common.hpp"
#include "doctest.h"
#include "ensurelab/oracle.hpp"
#include "ensurelab/rng.hpp"

using namespace pp;
using namespace pp::oracle;
using pp::sets::CountingSet;

namespace {

long long compositions(long long n, int k) {
  // C(n+k-1, k-1)
  long long r = 1;
  for (int i = 1; i < k; i++) r = r * (n + i) / i;
  return r;
}

std::vector<Config> all_configs(int states, long long n) {
  std::vector<Config> out;
  Config c(states, 0);
  std::function<void(int, long long)> rec = [&](int d, long long left) {
    if (d == states - 1) {
      c[d] = (int)left;
      out.push_back(c);
      return;
    }
    for (long long v = 0; v <= left; v++) {
      c[d] = (int)v;
      rec(d + 1, left - v);
    }
  };
  rec(0, n);
  return out;
}

Protocol random_protocol(Rng& rng, int states) {
  Protocol p;
  p.name = "rand";
  for (int i = 0; i < states; i++) p.states.push_back("s" + std::to_string(i));
  p.outputs = {"false", "true"};
  for (int i = 0; i < states; i++) p.outmap.push_back((int)rng.below(2));
  p.inputs.push_back((int)rng.below(states));
  int nt = 1 + (int)rng.below(5);
  for (int i = 0; i < nt; i++) {
    int q1 = (int)rng.below(states), q2 = (int)rng.below(states);
    p.transitions.push_back({q1, q2, (int)rng.below(states), (int)rng.below(states)});
  }
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("input configurations enumerate input-state supports") {
  Protocol p2 = make_p2();
  for (long long n = 0; n <= 5; n++) {
    std::vector<Config> in = input_configs(p2, n);
    REQUIRE(in.size() == 1);
    CHECK(in[0][1] == n);
  }
  Protocol f = make_flip();
  CHECK(input_configs(f, 4).size() == 5);  // o/a split
  for (const Config& c : input_configs(f, 4)) {
    CHECK(c[2] == 0);
    CHECK(config_size(c) == 4);
  }
}

TEST_CASE("reach graph covers the whole size slice") {
  Protocol p2 = make_p2();
  ReachGraph g = reach_graph(p2, 3);
  CHECK(g.pool.size() == 20);
  CHECK(g.pool.size() == compositions(3, 4));
  CHECK(g.succ.size() == 20);
  CHECK(g.sccCount > 0);

  // Successor lists agree with the direct enumeration.
  for (int id = 0; id < g.pool.size(); id++) {
    Config c = g.config(id, 4);
    std::vector<Config> want = successors(p2, c);
    std::vector<Config> got;
    for (int s : g.succ[id]) got.push_back(g.config(s, 4));
    std::sort(got.begin(), got.end());
    CHECK(got == want);
  }
}

TEST_CASE("reach graph refuses oversized slices with the required count") {
  Protocol p2 = make_p2();
  try {
    reach_graph(p2, 10, 50);
    FAIL("expected a budget error");
  } catch (const BudgetError& e) {
    CHECK(e.required == compositions(10, 4));  // 286
  }
}

TEST_CASE("bottom configurations of the observation protocol are its sinks") {
  Protocol p2 = make_p2();
  for (long long n = 1; n <= 8; n++) {
    std::vector<Config> got = bottom_configs(p2, n);
    // Every move climbs, so bottoms are exactly the stuck configurations:
    // nothing fireable among q1 pairs, q2 pairs, or anyone next to q3.
    std::vector<Config> want;
    for (const Config& c : all_configs(4, n)) {
      bool stuck = c[1] <= 1 && c[2] <= 1 && (c[3] == 0 || c[0] + c[1] + c[2] == 0);
      if (stuck) want.push_back(c);
    }
    std::sort(want.begin(), want.end());
    std::vector<Config> sorted = got;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == want);
  }
}

TEST_CASE("flip never settles, so every configuration is bottom") {
  Protocol f = make_flip();
  for (long long n = 1; n <= 5; n++)
    CHECK((long long)bottom_configs(f, n).size() == compositions(n, 3));
}

TEST_CASE("scc decomposition matches mutual reachability") {
  Rng rng(31);
  for (int trial = 0; trial < 25; trial++) {
    Protocol p = random_protocol(rng, 3);
    long long n = 2 + (long long)rng.below(2);
    ReachGraph g = reach_graph(p, n);
    int nn = g.pool.size();

    std::vector<std::vector<char>> reach(nn, std::vector<char>(nn, 0));
    for (int i = 0; i < nn; i++) {
      // BFS
      std::vector<int> stack = {i};
      reach[i][i] = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : g.succ[u])
          if (!reach[i][v]) {
            reach[i][v] = 1;
            stack.push_back(v);
          }
      }
    }
    for (int i = 0; i < nn; i++)
      for (int j = 0; j < nn; j++) {
        bool same = reach[i][j] && reach[j][i];
        CHECK(same == (g.scc[i] == g.scc[j]));
      }
    for (int i = 0; i < nn; i++) {
      bool bottom = true;
      for (int j = 0; j < nn; j++)
        if (reach[i][j] && !reach[j][i]) bottom = false;
      CHECK(bottom == (bool)g.sccBottom[g.scc[i]]);
    }
  }
}

TEST_CASE("configuration-level ensure queries") {
  Protocol p = make_p2_ls();
  EnsureOracle eng(p, psi_ex_counting());
  // Holds once every still-reachable configuration satisfies the condition;
  // three fresh inputs read small:3, so they are not settled yet.
  CHECK(!eng.config_ensures({0, 3, 0, 0}));
  CHECK(eng.config_ensures({0, 0, 0, 3}));
  CHECK(eng.config_ensures({0, 1, 1, 0}));   // stuck at two smalls
  CHECK(!eng.config_ensures({1, 1, 1, 0}));  // stuck at three smalls
  CHECK(!eng.config_ensures({0, 0, 0, 2}));  // two larges, never three
  long long seen = eng.explored_nodes();
  CHECK(!eng.config_ensures({0, 3, 0, 0}));
  CHECK(eng.config_ensures({0, 0, 0, 3}));
  CHECK(eng.explored_nodes() == seen);  // cached
}

TEST_CASE("ensure verdicts per size on the reference pair") {
  Protocol p = make_p2_ls();
  CountingSet psi = psi_ex_counting();
  EnsureOracle eng(p, psi);
  for (long long n = 1; n <= 6; n++) {
    EnsureVerdict v = eng.check_size(n);
    CHECK(v.holds);
    CHECK(!v.input.has_value());
  }
  // Same through the one-shot helpers, counting and semilinear alike.
  CHECK(check_ensures(p, psi, 4).holds);
  CHECK(check_ensures(p, psi_ex_semilinear(), 4).holds);
}

TEST_CASE("ensure fails with a concrete violator") {
  Protocol f = make_flip();
  CountingSet x1;
  x1.dims = {"x", "y", "z"};
  x1.cubes.push_back({{1, 0, 0}, {sets::kInf, sets::kInf, sets::kInf}});
  EnsureOracle eng(f, x1);
  EnsureVerdict v = eng.check_size(2);
  CHECK(!v.holds);
  REQUIRE(v.input.has_value());
  REQUIRE(v.violator.has_value());
  // The violator is reachable from the input and escapes the condition.
  CHECK(!x1.member(output_multiset(f, *v.violator)));
}

TEST_CASE("predicate adapters reorder named dimensions") {
  Protocol p = make_p2_ls();
  CountingSet swapped;
  swapped.dims = {"large", "small"};  // reversed on purpose
  swapped.cubes.push_back({{0, 0}, {0, 2}});
  swapped.cubes.push_back({{3, 0}, {sets::kInf, 0}});
  OutputPredicate pred = output_predicate(swapped, p);
  CHECK(pred({2, 0}));   // two small, no large
  CHECK(pred({0, 3}));
  CHECK(!pred({3, 0}));
  CHECK(!pred({1, 3}));

  CountingSet bad;
  bad.dims = {"small"};
  bad.cubes.push_back(sets::full_cube(1));
  CHECK_THROWS_AS(output_predicate(bad, p), Error);
}

TEST_CASE("stable computation of the threshold predicate") {
  auto phi = [](const Config& c0) { return c0[1] >= 3 ? 1 : 0; };
  CHECK(check_computes(make_p1(), phi, 8).holds);
  CHECK(check_computes(make_p2(), phi, 8).holds);
}

TEST_CASE("computation breaks when a live state reports the wrong output") {
  auto phi = [](const Config& c0) { return c0[1] >= 3 ? 1 : 0; };
  Protocol p = make_p2();
  p.outmap[1] = 1;  // q1 now answers true
  ComputeVerdict v = check_computes(p, phi, 8);
  CHECK(!v.holds);
  REQUIRE(v.input.has_value());
  CHECK((*v.input)[1] <= 2);  // small inputs settle with q1 agents around

  // q0 is never populated from the inputs, so its label is irrelevant.
  Protocol q = make_p2();
  q.outmap[0] = 1;
  CHECK(check_computes(q, phi, 8).holds);

  // In the pairing variant q0 is live: two inputs strand one agent there.
  Protocol r = make_p1();
  r.outmap[0] = 1;
  ComputeVerdict w = check_computes(r, phi, 8);
  CHECK(!w.holds);
  REQUIRE(w.input.has_value());
  CHECK(config_size(*w.input) == 2);
}

TEST_CASE("pruning removes one agent from a crowded trajectory class") {
  Protocol p = make_p2();
  Config c0 = {0, 6, 0, 0};
  std::vector<int> seq = {0, 0, 1, 3, 3, 3, 3, 4};
  DeanonExecution e = deanonymise(p, c0, seq, 9);
  std::vector<Config> before = replay(p, e);
  REQUIRE(before.back() == cfg({0, 0, 0, 6}));

  auto classes = trajectory_classes(p, e);
  CHECK(classes[1][3] == 6);  // all six ran q1 -> q3

  DeanonExecution pruned = prune_execution(p, e, 1, 3);
  CHECK(pruned.initial.size() == 5);
  std::vector<Config> after = replay(p, pruned);
  CHECK(after.back() == cfg({0, 0, 0, 5}));
  auto classesAfter = trajectory_classes(p, pruned);
  CHECK(classesAfter[1][3] == 5);
  for (int a = 0; a < 4; a++)
    for (int b = 0; b < 4; b++)
      if (a != 1 || b != 3) CHECK(classesAfter[a][b] == classes[a][b]);
}

TEST_CASE("pruning an agent that never moved") {
  Protocol p = make_p2();
  Config c0 = {0, 6, 0, 0};
  std::vector<int> seq = {0};  // one observation; five q1 agents idle
  DeanonExecution e = deanonymise(p, c0, seq, 3);
  auto classes = trajectory_classes(p, e);
  CHECK(classes[1][1] == 5);
  DeanonExecution pruned = prune_execution(p, e, 1, 1);
  CHECK(pruned.initial.size() == 5);
  std::vector<Config> after = replay(p, pruned);
  CHECK(after.back() == cfg({0, 4, 1, 0}));
}

TEST_CASE("pruning needs a class more numerous than the state count") {
  Protocol p = make_p2();
  Config c0 = {0, 4, 0, 0};  // class of 4 = state count, not enough
  std::vector<int> seq = {0};
  DeanonExecution e = deanonymise(p, c0, seq, 3);
  CHECK_THROWS_AS(prune_execution(p, e, 1, 1), Error);
  CHECK_THROWS_AS(prune_execution(p, e, 0, 3), Error);  // empty class
}

TEST_CASE("pruning is for observation protocols only") {
  Protocol p = make_p1();
  DeanonExecution e = deanonymise(p, {0, 6, 0, 0}, {0}, 1);
  CHECK_THROWS_AS(prune_execution(p, e, 1, 1), Error);
}

TEST_CASE("bottom closure of the climb chain") {
  Protocol p = make_chain2();
  ClosureReport rep = bottom_closure_check(p, 16, 4, {16});
  CHECK(rep.violations.empty());
  CHECK(rep.smallestHoldingThreshold == 2);

  // Threshold 1 lets the extension revive the lone climber.
  ClosureReport tight = bottom_closure_check(p, 1, 4, {8});
  CHECK(!tight.violations.empty());
  CHECK(tight.smallestHoldingThreshold == -1);
}

TEST_CASE("bottom closure counts every saturated extension") {
  Protocol f = make_flip();
  ClosureReport rep = bottom_closure_check(f, 2, 2, {4});
  CHECK(rep.violations.empty());
  CHECK(rep.checks > 0);
  CHECK(rep.smallestHoldingThreshold == 1);
}
