#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "ensurelab/oracle.hpp"
#include "ensurelab/sets.hpp"
#include "ensurelab/synth_io.hpp"
#include "ensurelab/text.hpp"

using namespace pp;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

// Example workload: the ensurer for "at most two small and nothing large,
// or at least three large and nothing small".
Protocol default_workload() {
  sets::CountingSet s;
  s.dims = {"small", "large"};
  s.cubes.push_back({{0, 0}, {2, 0}});
  s.cubes.push_back({{0, 3}, {0, sets::kInf}});
  return synth_io::synthesize_io_ensurer(s, "ensurer");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Breadth-first exploration benchmark: serial reference kernel "
               "against the OpenMP batch kernel, checking identical output"};
  std::string protoPath;
  long long size = 6;
  int rounds = 3;
  app.add_option("--protocol", protoPath,
                 "Protocol file (default: a synthesized 18-state ensurer)");
  app.add_option("--size", size, "Population size to sweep (default 6)");
  app.add_option("--rounds", rounds, "Timed repetitions per level (default 3)");
  CLI11_PARSE(app, argc, argv);

  Protocol p = protoPath.empty()
                   ? default_workload()
                   : text::parse_protocol(text::read_file(protoPath));
  p.validate();
  printf("protocol %s: %d states, %zu transitions\n", p.name.c_str(),
         p.state_count(), p.transitions.size());
#ifdef _OPENMP
  printf("threads: %d\n", omp_get_max_threads());
#else
  printf("threads: 1 (compiled without OpenMP)\n");
#endif

  oracle::Expander ex(p);
  oracle::ConfigPool pool;
  std::vector<int> frontier;
  for (const Config& c : oracle::input_configs(p, size))
    frontier.push_back(pool.intern(c));

  double serialMs = 0, parallelMs = 0;
  long long nodes = 0, edges = 0;
  int level = 0;
  bool identical = true;
  while (!frontier.empty()) {
    nodes += (long long)frontier.size();
    std::vector<std::vector<std::vector<std::uint32_t>>> ser, par;
    for (int r = 0; r < rounds; r++) {
      auto t0 = std::chrono::steady_clock::now();
      ser = ex.batch_serial(pool, frontier);
      serialMs += ms_since(t0);
      t0 = std::chrono::steady_clock::now();
      par = ex.batch_parallel(pool, frontier);
      parallelMs += ms_since(t0);
    }
    if (ser != par) identical = false;

    std::vector<int> next;
    for (const auto& succs : ser)
      for (const auto& key : succs) {
        edges++;
        int before = pool.size();
        int id = pool.intern_key(key.data(), (int)key.size());
        if (id == before) next.push_back(id);
      }
    frontier = std::move(next);
    level++;
  }

  printf("size=%lld levels=%d nodes=%lld edges=%lld\n", size, level, nodes,
         edges);
  printf("serial:   %10.2f ms\n", serialMs / rounds);
  printf("parallel: %10.2f ms\n", parallelMs / rounds);
  printf("speedup:  %.2fx\n", serialMs / std::max(1e-9, parallelMs));
  printf("outputs identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
