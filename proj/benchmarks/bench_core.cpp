#include <benchmark/benchmark.h>

#include <creach/christoffel.hpp>
#include <creach/conformal.hpp>
#include <creach/evaluation.hpp>
#include <creach/rng.hpp>
#include <creach/systems.hpp>

using namespace creach;

namespace {

Eigen::MatrixXd four_squares_points(Eigen::Index count, std::uint64_t seed) {
  return sample_reach_set(BenchmarkSystem::four_squares(), count, seed).points;
}

void bm_fit(benchmark::State& state) {
  const int degree = static_cast<int>(state.range(0));
  const Eigen::MatrixXd samples = four_squares_points(8000, 1);
  for (auto _ : state) {
    ChristoffelModel model = fit(samples, MonomialBasis(2, degree));
    benchmark::DoNotOptimize(model.moment_matrix().data());
  }
  state.SetLabel("s(d)=" + std::to_string(MonomialBasis::basis_size(2, degree)));
}
BENCHMARK(bm_fit)->Arg(6)->Arg(10)->Arg(15)->Unit(benchmark::kMillisecond);

void bm_score_single(benchmark::State& state) {
  const int degree = static_cast<int>(state.range(0));
  const ChristoffelModel model = fit(four_squares_points(8000, 2), MonomialBasis(2, degree));
  auto eng = rng::make_stream(3, {0});
  Eigen::VectorXd x(2);
  for (auto _ : state) {
    x << rng::uniform(eng, -4.0, 4.0), rng::uniform(eng, -4.0, 4.0);
    benchmark::DoNotOptimize(model.score(x));
  }
}
BENCHMARK(bm_score_single)->Arg(6)->Arg(15);

void bm_score_batch_10k(benchmark::State& state) {
  const int degree = static_cast<int>(state.range(0));
  const ChristoffelModel model = fit(four_squares_points(8000, 4), MonomialBasis(2, degree));
  auto eng = rng::make_stream(5, {0});
  Eigen::MatrixXd queries(10000, 2);
  for (Eigen::Index i = 0; i < queries.size(); ++i)
    queries.data()[i] = rng::uniform(eng, -4.0, 4.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.scores(queries).data());
  }
}
BENCHMARK(bm_score_batch_10k)->Arg(6)->Arg(15)->Unit(benchmark::kMillisecond);

void bm_transductive_query(benchmark::State& state) {
  const int degree = static_cast<int>(state.range(0));
  const Eigen::MatrixXd samples = four_squares_points(1000, 6);
  const TransductiveContext ctx = make_transductive(samples, MonomialBasis(2, degree));
  auto eng = rng::make_stream(7, {0});
  Eigen::VectorXd x(2);
  for (auto _ : state) {
    x << rng::uniform(eng, -4.0, 4.0), rng::uniform(eng, -4.0, 4.0);
    benchmark::DoNotOptimize(transductive_p_value(ctx, x));
  }
}
BENCHMARK(bm_transductive_query)->Arg(6)->Arg(15);

void bm_robust_confidence_large_n(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(robust_confidence(100000, 5000, 0.052));
  }
}
BENCHMARK(bm_robust_confidence_large_n);

} // namespace

BENCHMARK_MAIN();
