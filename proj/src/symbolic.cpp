#include "ensurelab/symbolic.hpp"

#include <algorithm>

namespace pp::symbolic {

using sets::CountingSet;
using sets::Cube;
using sets::kInf;

namespace {

void require_state_dims(const Protocol& p, const CountingSet& s) {
  if (s.dims != p.states)
    throw Error("counting set dimensions must be the protocol states in order");
}

// Occupancy needed to fire (q1, q2): one agent each, two if they coincide.
bool restrict_occupancy(Cube& c, int q1, int q2) {
  int need1 = q1 == q2 ? 2 : 1;
  c.lo[q1] = std::max(c.lo[q1], need1);
  if (q1 != q2) c.lo[q2] = std::max(c.lo[q2], 1);
  return !c.empty();
}

// Shifts one dimension of the cube by delta agents.
bool shift_dim(Cube& c, int dim, int delta) {
  c.lo[dim] = std::max(0, c.lo[dim] + delta);
  c.hi[dim] = sets::add_bound(c.hi[dim], delta);
  if (c.hi[dim] < 0) return false;
  return !c.empty();
}

// Image cubes of `cubes` under every transition. With `widen`, a cube whose
// down-shifted dimension is unbounded above gets an unbounded up-shifted
// dimension too: repeated firings of the same transition slide that bound
// arbitrarily far while everything else stays put, so the widened cube is
// exactly the union of the whole firing chain.
std::vector<Cube> image_cubes(const Protocol& p, const std::vector<Cube>& cubes,
                              Direction dir, bool widen) {
  std::vector<Cube> out;
  for (const Transition& t : p.transitions) {
    for (const Cube& k : cubes) {
      Cube c = k;
      bool ok = true;
      bool slide = false;
      if (dir == Direction::pre) {
        // A predecessor moved one agent q1 -> p1, so on the target cube the
        // q1 count reads one lower and the p1 count one higher.
        if (t.q1 != t.p1) {
          slide = widen && k.hi[t.p1] >= kInf;
          ok = shift_dim(c, t.q1, +1) && shift_dim(c, t.p1, -1);
        }
        // Widen only after the occupancy restriction: the slide argument
        // drains extra agents down into the exact image, which must be
        // nonempty for the final firing to exist.
        ok = ok && restrict_occupancy(c, t.q1, t.q2);
        if (ok && slide) c.hi[t.q1] = kInf;
      } else {
        ok = restrict_occupancy(c, t.q1, t.q2);
        if (ok && t.q1 != t.p1) {
          slide = widen && k.hi[t.q1] >= kInf;
          ok = shift_dim(c, t.q1, -1) && shift_dim(c, t.p1, +1);
          if (ok && slide) c.hi[t.p1] = kInf;
        }
      }
      if (ok) out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace

CountingSet step_image(const Protocol& p, const CountingSet& s, Direction dir) {
  p.validate();
  if (!p.is_io())
    throw Error("symbolic images require an observation protocol");
  require_state_dims(p, s);

  CountingSet out;
  out.dims = s.dims;
  out.cubes = image_cubes(p, s.cubes, dir, false);
  return sets::canonicalize(out);
}

namespace {

long long default_budget(const Protocol& p, const CountingSet& s) {
  long long maxFinite = 0;
  for (const Cube& c : s.cubes) {
    for (int v : c.lo) maxFinite = std::max(maxFinite, (long long)v);
    for (int v : c.hi)
      if (v < kInf / 2) maxFinite = std::max(maxFinite, (long long)v);
  }
  return 10 * (1 + maxFinite) * std::max(1, p.state_count());
}

}  // namespace

StarResult star_image(const Protocol& p, const CountingSet& s, Direction dir,
                      long long budget) {
  p.validate();
  if (!p.is_io())
    throw Error("symbolic images require an observation protocol");
  require_state_dims(p, s);
  if (budget <= 0) budget = default_budget(p, s);

  StarResult r;
  r.set = sets::canonicalize_merged(s);
  // Frontier iteration: only fresh cubes feed the next image. Merging keeps
  // the denotation, and images distribute over unions, so nothing is lost.
  std::vector<Cube> frontier = r.set.cubes;
  // One iteration materializes |frontier| * |transitions| cubes and filters
  // each against the accumulated set. Past these sizes an iteration swamps
  // memory, so stop and report non-convergence.
  const long long kFrontierWork = 100000;
  const long long kSetCubes = 50000;
  while (r.iterations < budget) {
    if ((long long)frontier.size() * (long long)p.transitions.size() >
            kFrontierWork ||
        (long long)r.set.cubes.size() > kSetCubes)
      return r;
    std::vector<Cube> img = image_cubes(p, frontier, dir, true);
    r.iterations++;
    frontier.clear();
    CountingSet one;
    one.dims = r.set.dims;
    for (Cube& c : img) {
      one.cubes = {c};
      if (!sets::is_subset(one, r.set)) frontier.push_back(std::move(c));
    }
    if (frontier.empty()) {
      r.converged = true;
      return r;
    }
    CountingSet grown = r.set;
    grown.cubes.insert(grown.cubes.end(), frontier.begin(), frontier.end());
    r.set = sets::canonicalize_merged(grown);
  }
  return r;
}

SymbolicReport verify_ensures_symbolic(const Protocol& p, const CountingSet& s,
                                       long long budget) {
  p.validate();
  if (!p.is_io())
    throw Error("symbolic verification requires an observation protocol");

  CountingSet lifted = sets::lift_output_condition(s, p);
  if (budget <= 0) budget = default_budget(p, lifted);

  SymbolicReport rep;
  StarResult inner = star_image(p, lifted, Direction::pre, budget);
  rep.innerConverged = inner.converged;
  rep.innerIterations = inner.iterations;
  rep.bad.dims = p.states;
  if (!inner.converged) return rep;  // inconclusive

  // Configurations that can escape the sure-win region, intersected with
  // the inputs.
  StarResult outer =
      star_image(p, sets::complement(inner.set), Direction::pre, budget);
  rep.outerConverged = outer.converged;
  rep.outerIterations = outer.iterations;

  Cube inputs = sets::point_cube(std::vector<int>(p.state_count(), 0));
  for (StateId q : p.inputs) inputs.hi[q] = kInf;
  CountingSet inputSet;
  inputSet.dims = p.states;
  inputSet.cubes = {inputs};
  rep.bad = sets::canonicalize(sets::intersect(inputSet, outer.set));

  bool empty = rep.bad.cubes.empty();
  if (!empty) {
    // Sound even without outer convergence: the iterate underapproximates.
    rep.verdict = Verdict::not_ensures;
    long long scan = (long long)p.state_count();
    for (const Cube& c : rep.bad.cubes) {
      for (int v : c.lo) scan += v;
      for (int v : c.hi)
        if (v < kInf / 2) scan += v;
    }
    rep.witness = sets::first_member_by_size(rep.bad, scan);
  } else {
    rep.verdict = outer.converged ? Verdict::ensures : Verdict::inconclusive;
  }
  return rep;
}

}  // namespace pp::symbolic
