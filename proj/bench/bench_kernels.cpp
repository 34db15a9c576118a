// Serial reference kernels against their OpenMP versions, plus the
// forecasting and update paths at a realistic scale.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hwdmd/evaluation.hpp"
#include "hwdmd/kernels.hpp"
#include "hwdmd/online.hpp"
#include "hwdmd/synthetic.hpp"

using namespace hwdmd;

namespace {

const SnapshotSeries& fixture() {
  static const SnapshotSeries series = [] {
    SyntheticSpec spec;
    spec.stations = 30;
    spec.intervals_per_day = 36;
    spec.days = 16;
    spec.rank = 10;
    spec.noise = 0.5;
    return generate_synthetic(spec).series;
  }();
  return series;
}

HwDmdHyper hyper() {
  HwDmdHyper h;
  h.lags = LagSpec::make({3, 4, 8, 14, 19, 28, 30, 33, 35, 36});
  h.rank_x = 100;
  h.rank_y = 50;
  h.rho = 0.92;
  return h;
}

std::vector<kernels::TripCell> random_cells(Index count, Index rows, Index intervals) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<Index> row(0, rows - 1), interval(0, intervals - 1);
  std::vector<kernels::TripCell> cells(static_cast<std::size_t>(count));
  for (auto& c : cells) c = {interval(rng), row(rng)};
  return cells;
}

template <auto Kernel>
void accumulate(benchmark::State& state) {
  const auto cells = random_cells(state.range(0), 900, 360);
  Matrix od(900, 360);
  for (auto _ : state) {
    od.setZero();
    Kernel(cells, od);
    benchmark::DoNotOptimize(od.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void assemble(benchmark::State& state) {
  const SnapshotSeries& s = fixture();
  const std::vector<Index> lags = hyper().lags.od_lags;
  std::vector<Index> targets;
  for (Index t = 36; t < s.length(); ++t) targets.push_back(t);
  const kernels::AssemblyPlan plan{lags, targets, {}};
  Matrix inputs, y;
  for (auto _ : state) {
    Kernel(s.od, s.boarding, plan, inputs, y);
    benchmark::DoNotOptimize(inputs.data());
  }
}

template <auto Kernel>
void errors(benchmark::State& state) {
  const Matrix a = Matrix::Random(900, 2000);
  const Matrix p = Matrix::Random(900, 2000);
  const std::span<const double> sa(a.data(), static_cast<std::size_t>(a.size()));
  const std::span<const double> sp(p.data(), static_cast<std::size_t>(p.size()));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(sa, sp));
}

void rolling(benchmark::State& state) {
  const SnapshotSeries& s = fixture();
  const Forecaster f(fit(s.days(0, 14), hyper()));
  const Execution mode = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rolling_forecast(f, s, 14 * 36, 16 * 36, 3, mode).od.data());
  }
}

void batch_fit(benchmark::State& state) {
  const SnapshotSeries train = fixture().days(0, 14);
  for (auto _ : state) benchmark::DoNotOptimize(fit(train, hyper()).basis_y.data());
}

void daily_update(benchmark::State& state) {
  const SnapshotSeries& s = fixture();
  const HwDmdModel base = fit(s.days(0, 14), hyper());
  const DailyBatch batch = daily_batch(s, base.hyper.lags, 14);
  for (auto _ : state) {
    HwDmdModel m = base;
    online::daily_update(m, batch);
    benchmark::DoNotOptimize(m.cross.data());
  }
}

}  // namespace

BENCHMARK(accumulate<kernels::serial::accumulate_trips>)->Name("accumulate_trips/serial")->Arg(1 << 20);
BENCHMARK(accumulate<kernels::parallel::accumulate_trips>)->Name("accumulate_trips/parallel")->Arg(1 << 20);
BENCHMARK(assemble<kernels::serial::assemble_regression>)->Name("assemble_regression/serial");
BENCHMARK(assemble<kernels::parallel::assemble_regression>)->Name("assemble_regression/parallel");
BENCHMARK(errors<kernels::serial::error_sums>)->Name("error_sums/serial");
BENCHMARK(errors<kernels::parallel::error_sums>)->Name("error_sums/parallel");
BENCHMARK(rolling)->Name("rolling_forecast")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(batch_fit)->Unit(benchmark::kMillisecond);
BENCHMARK(daily_update)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
