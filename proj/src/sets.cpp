#include "ensurelab/sets.hpp"

#include <algorithm>
#include <numeric>

namespace pp::sets {

int add_bound(int b, int delta) {
  if (b >= kInf / 2) return kInf;
  return b + delta;
}

bool Cube::empty() const {
  for (size_t i = 0; i < lo.size(); ++i)
    if (hi[i] < kInf / 2 && lo[i] > hi[i]) return true;
  return false;
}

bool Cube::contains(const std::vector<int>& x) const {
  for (size_t i = 0; i < lo.size(); ++i)
    if (x[i] < lo[i] || (hi[i] < kInf / 2 && x[i] > hi[i])) return false;
  return true;
}

long long Cube::min_size() const {
  long long s = 0;
  for (int v : lo) s += v;
  return s;
}

long long Cube::max_size() const {
  long long s = 0;
  for (int v : hi) {
    if (v >= kInf / 2) return kInf;
    s += v;
  }
  return s;
}

bool Cube::subsumes(const Cube& other) const {
  for (size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > other.lo[i]) return false;
    if (hi[i] < kInf / 2 && (other.hi[i] >= kInf / 2 || other.hi[i] > hi[i]))
      return false;
  }
  return true;
}

Cube full_cube(int dims) {
  return {std::vector<int>(dims, 0), std::vector<int>(dims, kInf)};
}

Cube point_cube(const std::vector<int>& x) { return {x, x}; }

bool CountingSet::member(const std::vector<int>& x) const {
  for (const auto& c : cubes)
    if (c.contains(x)) return true;
  return false;
}

static void check_dims(const CountingSet& a, const CountingSet& b) {
  if (a.dims != b.dims) throw Error("counting sets have mismatched dimensions");
}

CountingSet set_union(const CountingSet& a, const CountingSet& b) {
  check_dims(a, b);
  CountingSet r{a.dims, a.cubes};
  r.cubes.insert(r.cubes.end(), b.cubes.begin(), b.cubes.end());
  return canonicalize(r);
}

CountingSet intersect(const CountingSet& a, const CountingSet& b) {
  check_dims(a, b);
  CountingSet r{a.dims, {}};
  int d = a.dim_count();
  for (const auto& ca : a.cubes)
    for (const auto& cb : b.cubes) {
      Cube c{std::vector<int>(d), std::vector<int>(d)};
      bool ok = true;
      for (int i = 0; i < d && ok; ++i) {
        c.lo[i] = std::max(ca.lo[i], cb.lo[i]);
        c.hi[i] = std::min(ca.hi[i], cb.hi[i]);
        if (c.hi[i] < kInf / 2 && c.lo[i] > c.hi[i]) ok = false;
      }
      if (ok) r.cubes.push_back(std::move(c));
    }
  return canonicalize(r);
}

CountingSet complement(const CountingSet& a) {
  int d = a.dim_count();
  CountingSet acc{a.dims, {full_cube(d)}};
  for (const auto& c : a.cubes) {
    // Complement of one cube: union of per-dimension violation slabs.
    CountingSet slabs{a.dims, {}};
    for (int i = 0; i < d; ++i) {
      if (c.lo[i] > 0) {
        Cube s = full_cube(d);
        s.hi[i] = c.lo[i] - 1;
        slabs.cubes.push_back(std::move(s));
      }
      if (c.hi[i] < kInf / 2) {
        Cube s = full_cube(d);
        s.lo[i] = c.hi[i] + 1;
        slabs.cubes.push_back(std::move(s));
      }
    }
    acc = intersect(acc, slabs);
    if (acc.cubes.empty()) break;
  }
  return acc;
}

CountingSet canonicalize(const CountingSet& a) {
  CountingSet r{a.dims, {}};
  for (const auto& c : a.cubes)
    if (!c.empty()) r.cubes.push_back(c);
  std::sort(r.cubes.begin(), r.cubes.end());
  r.cubes.erase(std::unique(r.cubes.begin(), r.cubes.end()), r.cubes.end());
  int m = (int)r.cubes.size();
  std::vector<char> dead(m, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j || dead[i]) continue;
      if (r.cubes[j].subsumes(r.cubes[i]) &&
          (!(r.cubes[i] == r.cubes[j]) || j < i)) {
        dead[i] = 1;
        break;
      }
    }
  }
  CountingSet out{a.dims, {}};
  for (int i = 0; i < m; ++i)
    if (!dead[i]) out.cubes.push_back(std::move(r.cubes[i]));
  return out;
}

static bool try_merge(const Cube& a, const Cube& b, Cube& out) {
  int diff = -1;
  int d = (int)a.lo.size();
  for (int i = 0; i < d; ++i) {
    if (a.lo[i] == b.lo[i] && a.hi[i] == b.hi[i]) continue;
    if (diff >= 0) return false;
    diff = i;
  }
  if (diff < 0) {
    out = a;
    return true;
  }
  int lo1 = a.lo[diff], hi1 = a.hi[diff], lo2 = b.lo[diff], hi2 = b.hi[diff];
  if (lo2 < lo1) {
    std::swap(lo1, lo2);
    std::swap(hi1, hi2);
  }
  if (hi1 < kInf / 2 && lo2 > hi1 + 1) return false;
  out = a;
  out.lo[diff] = lo1;
  out.hi[diff] = std::max(hi1, hi2);
  return true;
}

CountingSet canonicalize_merged(const CountingSet& a) {
  CountingSet r = canonicalize(a);
  bool changed = true;
  while (changed) {
    changed = false;
    int m = (int)r.cubes.size();
    for (int i = 0; i < m && !changed; ++i)
      for (int j = i + 1; j < m && !changed; ++j) {
        Cube merged;
        if (try_merge(r.cubes[i], r.cubes[j], merged)) {
          r.cubes[i] = merged;
          r.cubes.erase(r.cubes.begin() + j);
          changed = true;
        }
      }
    if (changed) r = canonicalize(r);
  }
  return r;
}

std::vector<Cube> subtract_cube(const Cube& r, const Cube& b) {
  int d = (int)r.lo.size();
  // No overlap: r unchanged.
  for (int i = 0; i < d; ++i) {
    int lo = std::max(r.lo[i], b.lo[i]);
    int hi = std::min(r.hi[i], b.hi[i]);
    if (hi < kInf / 2 && lo > hi) return {r};
  }
  std::vector<Cube> out;
  Cube rest = r;
  for (int i = 0; i < d; ++i) {
    if (rest.lo[i] < b.lo[i]) {
      Cube piece = rest;
      piece.hi[i] = b.lo[i] - 1;
      if (!piece.empty()) out.push_back(std::move(piece));
      rest.lo[i] = b.lo[i];
    }
    if (b.hi[i] < kInf / 2 && (rest.hi[i] >= kInf / 2 || rest.hi[i] > b.hi[i])) {
      Cube piece = rest;
      piece.lo[i] = b.hi[i] + 1;
      if (!piece.empty()) out.push_back(std::move(piece));
      rest.hi[i] = b.hi[i];
    }
  }
  return out;
}

bool is_subset(const CountingSet& a, const CountingSet& b) {
  check_dims(a, b);
  for (const auto& k : a.cubes) {
    if (k.empty()) continue;
    std::vector<Cube> residue{k};
    for (const auto& c : b.cubes) {
      std::vector<Cube> next;
      for (const auto& r : residue) {
        auto pieces = subtract_cube(r, c);
        next.insert(next.end(), pieces.begin(), pieces.end());
      }
      residue = std::move(next);
      if (residue.empty()) break;
    }
    if (!residue.empty()) return false;
  }
  return true;
}

bool semantic_equal(const CountingSet& a, const CountingSet& b) {
  return is_subset(a, b) && is_subset(b, a);
}

std::optional<std::vector<int>> first_member_by_size(const CountingSet& s,
                                                     long long maxSize) {
  int d = s.dim_count();
  for (long long n = 0; n <= maxSize; ++n) {
    for (const auto& c : s.cubes) {
      if (c.empty()) continue;
      if (c.min_size() > n || c.max_size() < n) continue;
      std::vector<int> x = c.lo;
      long long rest = n - c.min_size();
      for (int i = 0; i < d && rest > 0; ++i) {
        long long room = c.hi[i] >= kInf / 2 ? rest : c.hi[i] - c.lo[i];
        long long add = std::min(rest, room);
        x[i] += (int)add;
        rest -= add;
      }
      return x;
    }
  }
  return std::nullopt;
}

static long long multiset_size(const std::vector<int>& v) {
  long long s = 0;
  for (int x : v) s += x;
  return s;
}

bool SemilinearSet::member(const std::vector<int>& x) const {
  int d = dim_count();
  for (const auto& cone : cones) {
    std::vector<int> rem(d);
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      rem[i] = x[i] - cone.base[i];
      if (rem[i] < 0) ok = false;
    }
    if (!ok) continue;
    // Depth-first search over period coefficients; coefficients are bounded
    // because every period has a nonzero entry once zero periods are skipped.
    std::vector<const std::vector<int>*> ps;
    for (const auto& v : cone.periods)
      if (multiset_size(v) > 0) ps.push_back(&v);
    std::function<bool(size_t, std::vector<int>&)> dfs =
        [&](size_t j, std::vector<int>& r) -> bool {
      if (j == ps.size()) return multiset_size(r) == 0;
      const auto& v = *ps[j];
      int maxCoef = kInf;
      for (int i = 0; i < d; ++i)
        if (v[i] > 0) maxCoef = std::min(maxCoef, r[i] / v[i]);
      for (int a = 0; a <= maxCoef; ++a) {
        std::vector<int> r2(d);
        bool valid = true;
        for (int i = 0; i < d; ++i) {
          r2[i] = r[i] - a * v[i];
          if (r2[i] < 0) valid = false;
        }
        if (valid && dfs(j + 1, r2)) return true;
      }
      return false;
    };
    if (dfs(0, rem)) return true;
  }
  return false;
}

std::vector<LinearSet> equalize_periods(const LinearSet& c) {
  for (const auto& v : c.periods)
    if (multiset_size(v) == 0) throw Error("malformed period: size 0");
  if (c.periods.empty()) return {c};
  int d = (int)c.base.size();
  long long L = 1;
  for (const auto& v : c.periods) {
    long long s = multiset_size(v);
    L = std::lcm(L, s);
    if (L > 100000) throw Error("period equalization too large");
  }
  int k = (int)c.periods.size();
  std::vector<long long> reps(k);  // r_j < L / |v_j|
  for (int j = 0; j < k; ++j) reps[j] = L / multiset_size(c.periods[j]);

  std::vector<std::vector<int>> newPeriods;
  for (int j = 0; j < k; ++j) {
    std::vector<int> v(d);
    for (int i = 0; i < d; ++i) v[i] = (int)(reps[j] * c.periods[j][i]);
    newPeriods.push_back(std::move(v));
  }
  std::sort(newPeriods.begin(), newPeriods.end());
  newPeriods.erase(std::unique(newPeriods.begin(), newPeriods.end()),
                   newPeriods.end());

  long long coneCount = 1;
  for (int j = 0; j < k; ++j) {
    coneCount *= reps[j];
    if (coneCount > 20000) throw Error("period equalization too large");
  }
  std::vector<LinearSet> out;
  std::vector<long long> r(k, 0);
  while (true) {
    LinearSet cone;
    cone.base = c.base;
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < d; ++i) cone.base[i] += (int)(r[j] * c.periods[j][i]);
    cone.periods = newPeriods;
    out.push_back(std::move(cone));
    int j = k - 1;
    while (j >= 0 && r[j] == reps[j] - 1) r[j--] = 0;
    if (j < 0) break;
    r[j]++;
  }
  std::sort(out.begin(), out.end(), [](const LinearSet& a, const LinearSet& b) {
    return std::tie(a.base, a.periods) < std::tie(b.base, b.periods);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const LinearSet& a, const LinearSet& b) {
                          return a.base == b.base && a.periods == b.periods;
                        }),
            out.end());
  return out;
}

LinearSet size_projection(const LinearSet& c) {
  for (const auto& v : c.periods)
    if (multiset_size(v) == 0) throw Error("malformed period: size 0");
  LinearSet r;
  r.base = {(int)multiset_size(c.base)};
  std::vector<int> sizes;
  for (const auto& v : c.periods) sizes.push_back((int)multiset_size(v));
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  for (int s : sizes) r.periods.push_back({s});
  return r;
}

// Appends, for every composition of `total` into `slots` parts, the cube
// obtained from `base` by writing the parts into `dims[...]` as lower
// (asLower) or upper bounds, intersected with base's own bounds.
static void expand_compositions(const Cube& base, const std::vector<int>& dims,
                                int total, bool asLower,
                                std::vector<Cube>& out) {
  std::vector<int> part(dims.size(), 0);
  std::function<void(size_t, int)> rec = [&](size_t i, int rest) {
    if (i + 1 == part.size()) {
      part[i] = rest;
      Cube c = base;
      for (size_t j = 0; j < dims.size(); ++j) {
        if (asLower)
          c.lo[dims[j]] = std::max(c.lo[dims[j]], part[j]);
        else
          c.hi[dims[j]] = std::min(c.hi[dims[j]], part[j]);
      }
      if (!c.empty()) out.push_back(std::move(c));
      return;
    }
    for (int v = 0; v <= rest; ++v) {
      part[i] = v;
      rec(i + 1, rest - v);
    }
  };
  if (part.empty()) return;
  rec(0, total);
}

CountingSet lift_output_condition(const CountingSet& s, const Protocol& p) {
  if ((int)s.dims.size() != (int)p.outputs.size())
    throw Error("condition dimensions do not match protocol outputs");
  for (const auto& d : s.dims)
    if (p.output_index(d) < 0) throw Error("unknown output dimension '" + d + "'");

  int ns = p.state_count();
  std::vector<std::vector<int>> statesOf(s.dims.size());
  for (int q = 0; q < ns; ++q) {
    int o = p.outmap[q];
    // Map protocol output index to the condition's dimension order.
    int dim = -1;
    for (size_t i = 0; i < s.dims.size(); ++i)
      if (s.dims[i] == p.outputs[o]) dim = (int)i;
    statesOf[dim].push_back(q);
  }

  CountingSet result{p.states, {}};
  for (const auto& cube : s.cubes) {
    std::vector<Cube> acc{full_cube(ns)};
    bool dead = false;
    for (size_t x = 0; x < s.dims.size() && !dead; ++x) {
      int lo = cube.lo[x], hi = cube.hi[x];
      if (statesOf[x].empty()) {
        if (lo > 0) dead = true;  // sum over no states is 0
        continue;
      }
      if (lo > 0) {
        std::vector<Cube> next;
        for (const auto& c : acc) expand_compositions(c, statesOf[x], lo, true, next);
        acc = std::move(next);
      }
      if (hi < kInf / 2) {
        std::vector<Cube> next;
        for (const auto& c : acc) expand_compositions(c, statesOf[x], hi, false, next);
        acc = std::move(next);
      }
      if (acc.size() > 500000) throw Error("lifted condition too large");
    }
    if (!dead)
      result.cubes.insert(result.cubes.end(), acc.begin(), acc.end());
  }
  return canonicalize(result);
}

FlexWitnesses flexible_witnesses(const CountingSet& s) {
  int d = s.dim_count();
  auto uncovered = [&]() -> long long {
    // First size with no member at all; only consulted when s has no
    // unbounded cube, so sizes are capped.
    long long cap = 0;
    for (const auto& c : s.cubes)
      if (!c.empty()) cap = std::max(cap, c.max_size());
    for (long long n = 0; n <= cap + 1; ++n)
      if (!first_member_by_size_at(s, n)) return n;
    return cap + 1;
  };
  const Cube* flex = nullptr;
  for (const auto& c : s.cubes) {
    if (c.empty()) continue;
    for (int i = 0; i < d; ++i)
      if (c.hi[i] >= kInf / 2) {
        flex = &c;
        break;
      }
    if (flex) break;
  }
  if (!flex)
    throw Error("not size-flexible: size " + std::to_string(uncovered()) +
                " has no member");
  FlexWitnesses w;
  w.flexCube = *flex;
  w.x = -1;
  for (int i = 0; i < d && w.x < 0; ++i)
    if (flex->hi[i] >= kInf / 2) w.x = i;
  w.D = flex->lo;
  long long dSize = 0;
  for (int v : w.D) dSize += v;
  for (long long j = 0; j < dSize; ++j) {
    auto m = witness_of_size(s, j);
    if (!m)
      throw Error("not size-flexible: size " + std::to_string(j) +
                  " has no member");
    w.smallWitness.push_back(*m);
  }
  return w;
}

bool first_member_by_size_at(const CountingSet& s, long long n) {
  for (const auto& c : s.cubes)
    if (!c.empty() && c.min_size() <= n && c.max_size() >= n) return true;
  return false;
}

std::optional<std::vector<int>> witness_of_size(const CountingSet& s, long long n) {
  // Lexicographically least count vector of size n that is a member.
  int d = s.dim_count();
  std::vector<int> x(d, 0);
  std::function<bool(int, long long)> rec = [&](int i, long long rest) -> bool {
    if (i == d) return rest == 0 && s.member(x);
    for (long long v = 0; v <= rest; ++v) {
      x[i] = (int)v;
      if (rec(i + 1, rest - v)) return true;
    }
    x[i] = 0;
    return false;
  };
  if (rec(0, n)) return x;
  return std::nullopt;
}

}  // namespace pp::sets
