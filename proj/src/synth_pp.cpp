#include "ensurelab/synth_pp.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "ensurelab/sets.hpp"

namespace pp::synth_pp {

bool SizeRecognizerSpec::decide(long long t, long long m) const {
  if (t < threshold)
    return std::binary_search(exceptions.begin(), exceptions.end(), t);
  return std::binary_search(residues.begin(), residues.end(), (int)(m % modulus));
}

bool SizeRecognizerSpec::member(long long n) const {
  return decide(std::min(n, threshold), n % modulus);
}

SizeRecognizerSpec normalize_one_dim(const sets::SemilinearSet& oneDim) {
  if (oneDim.dims.size() != 1)
    throw Error("size normalization expects a one-dimensional set");
  SizeRecognizerSpec spec;
  if (oneDim.cones.empty()) return spec;  // empty set: threshold 1, no residues

  long long maxBase = 0, L = 1;
  for (const auto& cone : oneDim.cones) {
    maxBase = std::max(maxBase, (long long)cone.base[0]);
    for (const auto& v : cone.periods) {
      if (v[0] <= 0) throw Error("size set has a period of size zero");
      L = std::lcm(L, (long long)v[0]);
      if (L > 4096) throw Error("size set periods have too large an lcm");
    }
  }
  // Membership is (T0, L)-periodic from T0 = maxBase + L: any member above
  // T0 keeps all its period steps above maxBase.
  long long T0 = maxBase + L;
  long long W = maxBase + 2 * L;
  std::vector<char> mem(W + 1);
  for (long long n = 0; n <= W; n++) mem[n] = oneDim.member({(int)n}) ? 1 : 0;

  // Minimal eventual period: l works iff membership on the residues past T0
  // is invariant under shifting by l.
  long long Lp = L;
  for (long long l = 1; l < L; l++) {
    bool ok = true;
    for (long long r = 0; r < L && ok; r++)
      ok = mem[T0 + r] == mem[T0 + (r + l) % L];
    if (ok) {
      Lp = l;
      break;
    }
  }
  // Minimal threshold for that period.
  long long Tp = T0;
  while (Tp > 0 && mem[Tp - 1] == mem[Tp - 1 + Lp]) Tp--;
  if (Tp < 1) Tp = 1;

  spec.threshold = Tp;
  spec.modulus = Lp;
  for (long long n = 0; n < Tp; n++)
    if (mem[n]) spec.exceptions.push_back(n);
  for (long long n = Tp; n < Tp + Lp; n++)
    if (mem[n]) spec.residues.push_back((int)(n % Lp));
  std::sort(spec.residues.begin(), spec.residues.end());
  return spec;
}

namespace {

// Protocol whose stable consensus output is verdict(total saturated at T,
// total mod L). Agents aggregate pairwise, draining one of the pair to a
// zero marker; zero markers copy the verdict of settled agents.
Protocol build_verdict_protocol(
    long long T, long long L,
    const std::function<int(long long, long long)>& verdict,
    const std::vector<std::string>& outs, const std::string& name) {
  if ((long long)T * L > 20000) throw Error("size protocol would be too large");

  Protocol p;
  p.name = name;
  p.outputs = outs;
  for (size_t j = 0; j < outs.size(); j++) {
    p.states.push_back("z_" + outs[j]);
    p.outmap.push_back((int)j);
  }
  // Below the threshold an agent has aggregated exactly t inputs, so its
  // residue is forced; at the threshold every residue can occur.
  std::vector<std::pair<int, int>> cells;
  for (int t = 1; t < (int)T; t++) cells.push_back({t, (int)(t % L)});
  for (int m = 0; m < (int)L; m++) cells.push_back({(int)T, m});
  std::vector<int> cellState;
  for (auto [t, m] : cells) {
    cellState.push_back(p.state_count());
    p.states.push_back("t" + std::to_string(t) + "m" + std::to_string(m));
    p.outmap.push_back(verdict(t, m));
  }
  for (size_t a = 0; a < cells.size(); a++)
    for (size_t b = 0; b < cells.size(); b++) {
      auto [t1, m1] = cells[a];
      auto [t2, m2] = cells[b];
      long long t = std::min(T, (long long)t1 + t2);
      long long m = (m1 + m2) % L;
      int d = verdict(t, m);
      auto it = std::find(cells.begin(), cells.end(),
                          std::make_pair((int)t, (int)m));
      if (it == cells.end()) throw Error("aggregation left the cell grid");
      p.transitions.push_back({cellState[a], cellState[b],
                               cellState[it - cells.begin()], d});
    }
  for (size_t c = 0; c < cells.size(); c++) {
    int d = p.outmap[cellState[c]];
    for (size_t j = 0; j < outs.size(); j++)
      if ((int)j != d)
        p.transitions.push_back({(int)j, cellState[c], d, cellState[c]});
  }

  auto it = std::find(cells.begin(), cells.end(),
                      std::make_pair((int)std::min(T, 1LL), (int)(1 % L)));
  p.inputs = {cellState[it - cells.begin()]};
  p.validate();
  return trim_to_reachable(p);
}

}  // namespace

Protocol build_size_recognizer(const sets::SemilinearSet& oneDim,
                               const std::string& name) {
  SizeRecognizerSpec spec = normalize_one_dim(oneDim);
  return build_verdict_protocol(
      spec.threshold, spec.modulus,
      [&spec](long long t, long long m) { return spec.decide(t, m) ? 1 : 0; },
      {"no", "yes"}, name);
}

Protocol build_cone_ensurer(const sets::LinearSet& cone,
                            const std::vector<std::string>& dims,
                            const std::string& name) {
  if (cone.base.size() != dims.size())
    throw Error("cone dimension count does not match output alphabet");
  for (const auto& v : cone.periods)
    if (v.size() != dims.size())
      throw Error("cone period dimension count does not match output alphabet");

  // Flatten base and first period into output-index sequences.
  std::vector<int> bseq, vseq;
  for (size_t i = 0; i < cone.base.size(); i++)
    for (int k = 0; k < cone.base[i]; k++) bseq.push_back((int)i);
  if (!cone.periods.empty())
    for (size_t i = 0; i < cone.periods[0].size(); i++)
      for (int k = 0; k < cone.periods[0][i]; k++) vseq.push_back((int)i);
  int nb = (int)bseq.size();
  int m = (int)vseq.size();
  if (nb == 0 && cone.periods.empty())
    throw Error("cone has neither base elements nor periods");
  if (!cone.periods.empty() && m == 0)
    throw Error("cone period has size zero");

  Protocol p;
  p.name = name;
  p.outputs = dims;
  // Base chain b1..bnb, then recruiters u, departures d (d1 doubles as the
  // unassigned state), group members g.
  auto b = [](int j) { return j - 1; };
  auto u = [&](int i) { return nb + i - 1; };
  auto d = [&](int i) { return nb + m + i - 1; };
  auto g = [&](int i) { return nb + 2 * m + i - 1; };
  for (int j = 1; j <= nb; j++) {
    p.states.push_back("b" + std::to_string(j));
    p.outmap.push_back(bseq[j - 1]);
  }
  if (m > 0) {
    for (int i = 1; i <= m; i++) {
      p.states.push_back("u" + std::to_string(i));
      p.outmap.push_back(vseq[i - 1]);
    }
    for (int i = 1; i <= m; i++) {
      p.states.push_back("d" + std::to_string(i));
      p.outmap.push_back(vseq[i - 1]);
    }
    for (int i = 1; i <= m; i++) {
      p.states.push_back("g" + std::to_string(i));
      p.outmap.push_back(vseq[i - 1]);
    }
  }

  for (int j = 1; j < nb; j++) p.transitions.push_back({b(j), b(j), b(j), b(j + 1)});
  if (m > 0) {
    if (nb > 0) p.transitions.push_back({b(nb), b(nb), b(nb), u(1)});
    for (int i = 1; i <= m; i++)
      for (int j = 1; j <= m; j++)
        p.transitions.push_back({u(i), u(j), u(i), d(j)});
    for (int i = 1; i < m; i++)
      p.transitions.push_back({u(i), d(1), u(i + 1), g(i)});
    p.transitions.push_back({u(m), d(1), u(1), g(m)});
    // A leader demoted at level i holds positions 1..i-1; it releases them
    // top-down until it reaches the unassigned state.
    for (int i = 2; i <= m; i++)
      p.transitions.push_back({d(i), g(i - 1), d(i - 1), d(1)});
  }

  p.inputs = {nb > 0 ? b(1) : u(1)};
  p.validate();
  return p;
}

namespace {

// Output index if every state emits the same value, else -1.
int constant_output(const Protocol& p) {
  for (int v : p.outmap)
    if (v != p.outmap[0]) return -1;
  return p.outmap[0];
}

Protocol constant_protocol(const std::vector<std::string>& outputs, int value,
                           const std::string& name) {
  Protocol p;
  p.name = name;
  p.states = {"q1"};
  p.inputs = {0};
  p.outputs = outputs;
  p.outmap = {value};
  p.validate();
  return p;
}

// The cone ensurer stabilizes on base + k * periods[0], a cone member for
// any choice of lead period. Lead with one that keeps every emitted output
// equal, so the component folds to a constant; otherwise with the shortest.
sets::LinearSet reorder_periods(sets::LinearSet cone) {
  auto size_of = [](const std::vector<int>& v) {
    return std::accumulate(v.begin(), v.end(), 0LL);
  };
  auto uniform = [&cone](const std::vector<int>& v) {
    int dim = -1;
    for (size_t i = 0; i < cone.base.size(); i++) {
      if (cone.base[i] > 0 || v[i] > 0) {
        if (dim >= 0 && dim != (int)i) return false;
        dim = (int)i;
      }
    }
    return true;
  };
  size_t best = 0;
  for (size_t j = 1; j < cone.periods.size(); j++) {
    bool bu = uniform(cone.periods[best]), ju = uniform(cone.periods[j]);
    if (ju != bu) {
      if (ju) best = j;
    } else if (size_of(cone.periods[j]) < size_of(cone.periods[best])) {
      best = j;
    }
  }
  if (best > 0) std::swap(cone.periods[0], cone.periods[best]);
  return cone;
}

}  // namespace

Protocol synthesize_pp_ensurer(const sets::SemilinearSet& s,
                               const std::string& name) {
  if (s.dims.empty()) throw Error("condition has no dimensions");

  std::vector<sets::LinearSet> cones;
  for (const auto& c : s.cones)
    for (auto& e : sets::equalize_periods(c)) cones.push_back(std::move(e));

  // Size flexibility: every population size must have a member. Projection
  // sizes are eventually periodic with period dividing L, so scanning up to
  // maxBase + L decides all sizes.
  sets::SemilinearSet proj;
  proj.dims = {"n"};
  long long maxBase = 0, L = 1;
  for (const auto& c : cones) {
    sets::LinearSet pr = sets::size_projection(c);
    maxBase = std::max(maxBase, (long long)pr.base[0]);
    for (const auto& v : pr.periods) {
      L = std::lcm(L, (long long)v[0]);
      if (L > 4096) throw Error("size projections have too large an lcm");
    }
    proj.cones.push_back(std::move(pr));
  }
  for (long long n = 0; n <= maxBase + L; n++)
    if (!proj.member({(int)n}))
      throw Error("not size-flexible: size " + std::to_string(n) +
                  " has no member");

  // Per cone: an ensurer, selected when the population size falls in the
  // cone's size projection and no earlier cone covers it. All cones share
  // one size classifier whose verdict is that least cone index. Components
  // with constant output fold into the selector.
  int nc = (int)cones.size();
  std::vector<SizeRecognizerSpec> specs;
  long long T = 1, Lc = 1;
  for (int j = 0; j < nc; j++) {
    sets::SemilinearSet pj;
    pj.dims = {"n"};
    pj.cones = {proj.cones[j]};
    specs.push_back(normalize_one_dim(pj));
    T = std::max(T, specs[j].threshold);
    Lc = std::lcm(Lc, specs[j].modulus);
  }
  auto leastCone = [&specs, nc](long long t, long long m) {
    for (int j = 0; j < nc; j++)
      if (specs[j].decide(std::min(t, specs[j].threshold), m)) return j;
    return nc;  // unreachable for size-flexible conditions
  };

  std::vector<int> ensConst(nc, -1), ensLive(nc, -1);
  std::vector<Protocol> live;
  for (int j = 0; j < nc; j++) {
    const auto& cone = cones[j];
    bool zeroBase = std::all_of(cone.base.begin(), cone.base.end(),
                                [](int v) { return v == 0; });
    if (zeroBase && cone.periods.empty()) {
      // Only the empty population lies in this cone; the classifier never
      // selects it at nonzero sizes.
      ensConst[j] = 0;
      continue;
    }
    Protocol e = build_cone_ensurer(reorder_periods(cone), s.dims,
                                    name + "_e" + std::to_string(j + 1));
    int c = constant_output(e);
    if (c >= 0) {
      ensConst[j] = c;
    } else {
      ensLive[j] = (int)live.size();
      live.push_back(std::move(e));
    }
  }

  std::vector<std::string> verdictNames;
  for (int j = 0; j <= nc; j++) verdictNames.push_back("c" + std::to_string(j + 1));
  Protocol classifier = build_verdict_protocol(T, Lc, leastCone, verdictNames,
                                               name + "_size");
  int classConst = constant_output(classifier);
  int classLive = -1;
  if (classConst < 0) {
    classLive = (int)live.size();
    live.push_back(std::move(classifier));
  }

  if (live.empty()) {
    int v = classConst;
    return constant_protocol(s.dims, v < nc ? ensConst[v] : 0, name);
  }

  OutputMux mux;
  mux.outputs = s.dims;
  mux.pick = [ensConst, ensLive, classConst, classLive,
              nc](const std::vector<int>& vals) {
    int v = classConst >= 0 ? classConst : vals[classLive];
    if (v >= nc) return 0;
    return ensConst[v] >= 0 ? ensConst[v] : vals[ensLive[v]];
  };
  return trim_to_reachable(product(live, mux, name));
}

}  // namespace pp::synth_pp
