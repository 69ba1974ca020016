// Microbenchmarks for the hot paths: resolvent sweeps, loop power iteration,
// and the full criticality solve.
#include <memory>
#include <string>

#include <benchmark/benchmark.h>
#include <json.hpp>

#include "keff/operators.hpp"
#include "keff/problem.hpp"
#include "keff/solver.hpp"

namespace {

using nlohmann::json;

struct System {
  std::unique_ptr<keff::ProblemModel> model;
  std::unique_ptr<keff::PhaseOperators> ops;
};

System make_system(const json& cfg) {
  System s;
  s.model = std::make_unique<keff::ProblemModel>(keff::build_problem(cfg.dump()));
  s.ops = keff::make_operators(*s.model);
  return s;
}

json transport_config(int cells, int per_sign) {
  return json{
      {"kind", "transport"},
      {"geometry", {{"width", 2.0}, {"cells", cells}}},
      {"velocity", {{"v_min", 0.5}, {"v_max", 1.5}, {"nodes_per_sign", per_sign}}},
      {"sigma", 1.0},
      {"sigma_s", 0.05},
      {"sigma_f", 0.4},
      {"p_norm", 2.0},
  };
}

json diffusion_config(int cells, int groups) {
  return json{
      {"kind", "diffusion"},
      {"geometry", {{"width", 3.0}, {"cells", cells}}},
      {"energy", {{"xi_min", 0.5}, {"xi_max", 1.5}, {"groups", groups}}},
      {"sigma", 1.0},
      {"sigma_s", 0.2},
      {"sigma_f", 0.9},
      {"diffusion", {{"d0", 1.0}, {"d1", 1.0}}},
      {"p_norm", 2.0},
  };
}

void BM_TransportResolvent(benchmark::State& state) {
  const System s = make_system(
      transport_config(static_cast<int>(state.range(0)), 4));
  const keff::Field q =
      keff::Field::Ones(s.model->num_cells(), s.model->num_nodes());
  for (auto _ : state) benchmark::DoNotOptimize(s.ops->apply_resolvent(q));
  state.SetItemsProcessed(state.iterations() * q.size());
}
BENCHMARK(BM_TransportResolvent)->Arg(64)->Arg(256)->Arg(1024);

void BM_DiffusionResolvent(benchmark::State& state) {
  const System s = make_system(
      diffusion_config(static_cast<int>(state.range(0)), 4));
  const keff::Field q =
      keff::Field::Ones(s.model->num_cells(), s.model->num_nodes());
  for (auto _ : state) benchmark::DoNotOptimize(s.ops->apply_resolvent(q));
  state.SetItemsProcessed(state.iterations() * q.size());
}
BENCHMARK(BM_DiffusionResolvent)->Arg(128)->Arg(512)->Arg(2048);

void BM_LoopRadius(benchmark::State& state) {
  const System s = make_system(
      transport_config(static_cast<int>(state.range(0)), 4));
  for (auto _ : state)
    benchmark::DoNotOptimize(keff::loop_radius(*s.ops, 1.0).radius);
}
BENCHMARK(BM_LoopRadius)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SolveTransport(benchmark::State& state) {
  const System s = make_system(
      transport_config(static_cast<int>(state.range(0)), 4));
  for (auto _ : state)
    benchmark::DoNotOptimize(keff::solve_keff_rootfind(*s.ops).k_eff);
}
BENCHMARK(BM_SolveTransport)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SolveDiffusion(benchmark::State& state) {
  const System s = make_system(
      diffusion_config(static_cast<int>(state.range(0)), 2));
  for (auto _ : state)
    benchmark::DoNotOptimize(keff::solve_keff_rootfind(*s.ops).k_eff);
}
BENCHMARK(BM_SolveDiffusion)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
