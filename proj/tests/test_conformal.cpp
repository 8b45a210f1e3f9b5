#include <doctest.h>

#include <cmath>
#include <set>

#include <creach/conformal.hpp>
#include <creach/errors.hpp>
#include <creach/rng.hpp>
#include <creach/serialization.hpp>
#include <creach/systems.hpp>

using namespace creach;

namespace {

// One-dimensional degree-1 model over {-1, +1} without rescaling: its
// moment matrix is the identity, so score(x) = 1 + x^2 exactly. Chosen
// calibration abscissas then realize any target scores >= 1.
ChristoffelModel unit_model() {
  Eigen::MatrixXd samples(2, 1);
  samples << -1.0, 1.0;
  FitOptions opt;
  opt.rescale = false;
  return fit(samples, MonomialBasis(1, 1), opt);
}

Eigen::MatrixXd points_with_scores(const std::vector<double>& scores) {
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(scores.size()), 1);
  for (std::size_t i = 0; i < scores.size(); ++i) pts(static_cast<Eigen::Index>(i), 0) =
      std::sqrt(scores[i] - 1.0);
  return pts;
}

} // namespace

TEST_CASE("calibrate picks the maximum calibration score") {
  const auto model = unit_model();
  const Eigen::MatrixXd cal = points_with_scores({2.0, 5.5, 3.1});
  const ReachSetEstimate est = calibrate(model, cal, 0.1);
  CHECK(est.threshold == doctest::Approx(5.5).epsilon(1e-14));
  CHECK(est.rank == 1);
  for (Eigen::Index i = 0; i < cal.rows(); ++i) CHECK(est.contains(cal.row(i)));
  CHECK(est.guarantee.mode == BoundMode::split_lower);
  CHECK(est.guarantee.epsilon == doctest::Approx(split_epsilon(3, 0.1)));
  CHECK(est.guarantee.delta == 0.1);
}

TEST_CASE("single calibration point defines the region") {
  const auto model = unit_model();
  const Eigen::MatrixXd cal = points_with_scores({3.0});
  const ReachSetEstimate est = calibrate(model, cal, 0.05);
  CHECK(est.threshold == doctest::Approx(3.0).epsilon(1e-14));
  Eigen::VectorXd inside(1), outside(1);
  inside << 1.0;  // score 2
  outside << 2.0; // score 5
  CHECK(est.contains(inside));
  CHECK(!est.contains(outside));
}

TEST_CASE("empty calibration set is rejected") {
  CHECK_THROWS_AS(calibrate(unit_model(), Eigen::MatrixXd(0, 1), 0.1), validation_error);
}

TEST_CASE("robust calibration selects the (p+1)-th largest score") {
  const auto model = unit_model();
  const Eigen::MatrixXd cal = points_with_scores({9.0, 7.0, 5.0, 3.0, 1.5});
  const ReachSetEstimate est = calibrate_robust(model, cal, 1, 0.2);
  CHECK(est.threshold == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(est.rank == 2);
  CHECK(!est.contains(cal.row(0))); // the score-9 point is excluded
  for (Eigen::Index i = 1; i < cal.rows(); ++i) CHECK(est.contains(cal.row(i)));
  CHECK(est.guarantee.mode == BoundMode::robust);
  CHECK(est.guarantee.delta == doctest::Approx(1.0 - robust_confidence(5, 1, 0.2)));
}

TEST_CASE("robust calibration with p=0 equals plain calibration") {
  const auto model = unit_model();
  const Eigen::MatrixXd cal = points_with_scores({4.0, 2.0, 6.0, 3.0});
  const ReachSetEstimate plain = calibrate(model, cal, 0.1);
  const ReachSetEstimate robust = calibrate_robust(model, cal, 0, 0.3);
  CHECK(plain.threshold == robust.threshold);
  CHECK(robust.rank == 1);
}

TEST_CASE("robust precondition 2p+1 < N") {
  const auto model = unit_model();
  const Eigen::MatrixXd cal = points_with_scores({4.0, 2.0, 6.0, 3.0, 5.0});
  CHECK_THROWS_AS(calibrate_robust(model, cal, 2, 0.2), validation_error);
  CHECK_NOTHROW(calibrate_robust(model, cal, 1, 0.2));
}

TEST_CASE("thresholds are non-increasing in p and regions are nested") {
  auto eng = rng::make_stream(1200, {0});
  const auto system = BenchmarkSystem::four_squares();
  const auto data = sample_reach_set(system, 400, 77);
  const auto part = split_dataset(data.points, 101, 78);
  const ChristoffelModel model = fit(part.training, MonomialBasis(2, 4));

  Eigen::MatrixXd probes(300, 2);
  for (Eigen::Index i = 0; i < probes.size(); ++i)
    probes.data()[i] = rng::uniform(eng, -4.0, 4.0);

  double prev_threshold = std::numeric_limits<double>::infinity();
  std::vector<bool> prev_members(300, true);
  for (std::int64_t p = 0; p <= 10; ++p) {
    const ReachSetEstimate est = calibrate_robust(model, part.calibration, p, 0.2);
    CHECK(est.threshold <= prev_threshold);
    prev_threshold = est.threshold;
    for (Eigen::Index i = 0; i < probes.rows(); ++i) {
      const bool member = est.contains(probes.row(i));
      if (member) CHECK(prev_members[static_cast<std::size_t>(i)]); // nested
      prev_members[static_cast<std::size_t>(i)] = member;
    }
  }
}

TEST_CASE("p_value counts ties with >=") {
  Eigen::VectorXd scores(5);
  scores << 1.0, 2.0, 3.0, 4.0, 5.0;
  CHECK(p_value(scores, 0.5) == 1.0);       // below all
  CHECK(p_value(scores, 9.0) == 0.0);       // above all
  CHECK(p_value(scores, 3.0) == 3.0 / 5.0); // tie at the median counts
  CHECK_THROWS_AS(p_value(scores, std::numeric_limits<double>::quiet_NaN()), validation_error);
}

TEST_CASE("split_dataset shuffles, partitions disjointly and reproducibly") {
  Eigen::MatrixXd data(10, 1);
  for (int i = 0; i < 10; ++i) data(i, 0) = i;
  std::vector<bool> labels(10);
  for (int i = 0; i < 10; ++i) labels[i] = (i % 2) == 0;

  const SamplePartition a = split_dataset(data, 4, 123, labels);
  const SamplePartition b = split_dataset(data, 4, 123, labels);
  CHECK(a.calibration == b.calibration);
  CHECK(a.training == b.training);

  // Disjoint index sets: every source value appears exactly once.
  std::multiset<double> seen;
  for (Eigen::Index i = 0; i < 4; ++i) seen.insert(a.calibration(i, 0));
  for (Eigen::Index i = 0; i < 6; ++i) seen.insert(a.training(i, 0));
  CHECK(seen.size() == 10);
  CHECK(std::set<double>(seen.begin(), seen.end()).size() == 10);

  // Labels ride along with their rows.
  for (Eigen::Index i = 0; i < 4; ++i) {
    const int v = static_cast<int>(a.calibration(i, 0));
    CHECK((*a.calibration_labels)[static_cast<std::size_t>(i)] == ((v % 2) == 0));
  }

  // The seeded shuffle actually reorders a sorted input.
  bool any_moved = false;
  for (Eigen::Index i = 0; i < 4 && !any_moved; ++i) any_moved = a.calibration(i, 0) != i;
  CHECK(any_moved);

  CHECK_THROWS_AS(split_dataset(data, 0, 1), validation_error);
  CHECK_THROWS_AS(split_dataset(data, 10, 1), validation_error);
}

TEST_CASE("membership, p-values and threshold ranks are normalization-invariant") {
  const auto data = sample_reach_set(BenchmarkSystem::four_squares(), 200, 91);
  const auto part = split_dataset(data.points, 50, 92);
  FitOptions norm, raw;
  raw.normalization = Normalization::raw_sum;
  const ChristoffelModel mn = fit(part.training, MonomialBasis(2, 3), norm);
  const ChristoffelModel mr = fit(part.training, MonomialBasis(2, 3), raw);
  const ReachSetEstimate en = calibrate(mn, part.calibration, 0.05);
  const ReachSetEstimate er = calibrate(mr, part.calibration, 0.05);

  auto eng = rng::make_stream(93, {0});
  const Eigen::VectorXd cal_n = mn.scores(part.calibration);
  const Eigen::VectorXd cal_r = mr.scores(part.calibration);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd x(2);
    x << rng::uniform(eng, -4.0, 4.0), rng::uniform(eng, -4.0, 4.0);
    CHECK(en.contains(x) == er.contains(x));
    CHECK(p_value(cal_n, mn.score(x)) == p_value(cal_r, mr.score(x)));
  }
}

TEST_CASE("duplicate calibration scores raise the tie flag") {
  const auto model = unit_model();
  Eigen::MatrixXd cal = points_with_scores({2.0, 3.0, 2.0});
  const ReachSetEstimate est = calibrate(model, cal, 0.1);
  CHECK(est.tied_calibration_scores);
  const ReachSetEstimate clean = calibrate(model, points_with_scores({2.0, 3.0}), 0.1);
  CHECK(!clean.tied_calibration_scores);
}

TEST_CASE("estimate JSON round-trip preserves membership decisions") {
  const auto data = sample_reach_set(BenchmarkSystem::four_squares(), 300, 95);
  const auto part = split_dataset(data.points, 80, 96);
  const ChristoffelModel model = fit(part.training, MonomialBasis(2, 4));
  const ReachSetEstimate est = calibrate_robust(model, part.calibration, 3, 0.1);

  const ReachSetEstimate loaded = estimate_from_json(estimate_to_json(est));
  CHECK(loaded.threshold == est.threshold);
  CHECK(loaded.rank == est.rank);
  CHECK(loaded.guarantee.epsilon == est.guarantee.epsilon);
  CHECK(loaded.guarantee.delta == est.guarantee.delta);

  auto eng = rng::make_stream(97, {0});
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd x(2);
    x << rng::uniform(eng, -4.0, 4.0), rng::uniform(eng, -4.0, 4.0);
    CHECK(loaded.contains(x) == est.contains(x));
  }
}
