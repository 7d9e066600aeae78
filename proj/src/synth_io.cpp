#include "ensurelab/synth_io.hpp"

#include <algorithm>
#include <numeric>

namespace pp::synth_io {

namespace {

// Chain of |D| levels, optionally one surplus level emitting x.
Protocol build_chain(const std::vector<int>& D, int extraOut,
                     const std::vector<std::string>& dims,
                     const std::string& name) {
  std::vector<int> seq;
  for (size_t i = 0; i < D.size(); i++) {
    if (D[i] < 0) throw Error("point multiset has a negative count");
    for (int k = 0; k < D[i]; k++) seq.push_back((int)i);
  }
  if (extraOut >= 0) seq.push_back(extraOut);
  if (seq.empty()) throw Error("point multiset is empty");

  Protocol p;
  p.name = name;
  p.outputs = dims;
  for (size_t j = 0; j < seq.size(); j++) {
    p.states.push_back("q" + std::to_string(j + 1));
    p.outmap.push_back(seq[j]);
  }
  // An agent meeting its own level climbs one; levels fill from the bottom
  // with one agent each, surplus collects at the top.
  for (int j = 0; j + 1 < (int)seq.size(); j++)
    p.transitions.push_back({j, j, j + 1, j});
  p.inputs = {0};
  p.validate();
  return p;
}

}  // namespace

Protocol build_point_protocol(const std::vector<int>& D,
                              const std::vector<std::string>& dims,
                              const std::string& name) {
  if (D.size() != dims.size())
    throw Error("point multiset dimension count does not match alphabet");
  return build_chain(D, -1, dims, name);
}

Protocol build_ray_protocol(const std::vector<int>& D, int x,
                            const std::vector<std::string>& dims,
                            const std::string& name) {
  if (D.size() != dims.size())
    throw Error("ray multiset dimension count does not match alphabet");
  if (x < 0 || x >= (int)dims.size()) throw Error("ray surplus dimension out of range");
  return build_chain(D, x, dims, name);
}

Protocol build_size_eq_recognizer(long long j, const std::string& name) {
  if (j < 0) throw Error("size recognizer needs a nonnegative size");
  if (j > 64) throw Error("size recognizer would be too large");
  int top = (int)j + 1;

  Protocol p;
  p.name = name;
  p.outputs = {"no", "yes"};
  // State (level i, highest level seen s); yes exactly when s == j.
  auto idx = [&](int i, int s) { return (i - 1) * top + (s - 1); };
  for (int i = 1; i <= top; i++)
    for (int s = 1; s <= top; s++) {
      p.states.push_back("l" + std::to_string(i) + "s" + std::to_string(s));
      p.outmap.push_back(s == (int)j ? 1 : 0);
    }
  for (int i = 1; i <= top; i++)
    for (int s = 1; s <= top; s++)
      for (int i2 = 1; i2 <= top; i2++)
        for (int s2 = 1; s2 <= top; s2++) {
          int q1 = idx(i, s), q2 = idx(i2, s2);
          if (i2 == i && i < top) {
            // Meeting its own level climbs and counts the new level.
            p.transitions.push_back({q1, q2, idx(i + 1, std::max(s, i + 1)), q2});
          } else {
            int s3 = std::max(s, std::max(s2, i2));
            if (s3 != s) p.transitions.push_back({q1, q2, idx(i, s3), q2});
          }
        }
  p.inputs = {idx(1, 1)};
  p.validate();
  return trim_to_reachable(p);
}

namespace {

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

}  // namespace

Protocol synthesize_io_ensurer(const sets::CountingSet& s,
                               const std::string& name) {
  sets::FlexWitnesses fw = sets::flexible_witnesses(s);
  long long nd = std::accumulate(fw.D.begin(), fw.D.end(), 0LL);
  if (nd == 0) return constant_protocol(s.dims, fw.x, name);

  // Ray covers sizes >= |D|; point protocols cover 1..|D|-1, each guarded
  // by a size recognizer. Constant components fold into the selector.
  int npts = (int)nd - 1;
  std::vector<int> ptConst(npts + 1, -1), recConst(npts + 1, -1);
  std::vector<int> ptLive(npts + 1, -1), recLive(npts + 1, -1);
  std::vector<Protocol> live;

  Protocol ray = build_ray_protocol(fw.D, fw.x, s.dims, name + "_ray");
  int rayConst = constant_output(ray);
  int rayLive = -1;
  if (rayConst < 0) {
    rayLive = (int)live.size();
    live.push_back(std::move(ray));
  }
  for (int j = 1; j <= npts; j++) {
    Protocol pt = build_point_protocol(fw.smallWitness[j], s.dims,
                                       name + "_p" + std::to_string(j));
    int c = constant_output(pt);
    if (c >= 0) {
      ptConst[j] = c;
    } else {
      ptLive[j] = (int)live.size();
      live.push_back(std::move(pt));
    }
    Protocol r = build_size_eq_recognizer(j, name + "_r" + std::to_string(j));
    c = constant_output(r);
    if (c >= 0) {
      recConst[j] = c;
    } else {
      recLive[j] = (int)live.size();
      live.push_back(std::move(r));
    }
  }

  if (live.empty()) {
    int out = rayConst;
    for (int j = 1; j <= npts; j++)
      if (recConst[j] == 1) {
        out = ptConst[j];
        break;
      }
    return constant_protocol(s.dims, out, name);
  }

  OutputMux mux;
  mux.outputs = s.dims;
  mux.pick = [ptConst, recConst, ptLive, recLive, rayConst, rayLive,
              npts](const std::vector<int>& vals) {
    for (int j = 1; j <= npts; j++) {
      int r = recConst[j] >= 0 ? recConst[j] : vals[recLive[j]];
      if (r == 1) return ptConst[j] >= 0 ? ptConst[j] : vals[ptLive[j]];
    }
    return rayConst >= 0 ? rayConst : vals[rayLive];
  };
  Protocol prod = trim_to_reachable(product(live, mux, name));
  if (!prod.is_io())
    throw Error("ensurer product is not an observation protocol");
  return prod;
}

}  // namespace pp::synth_io
