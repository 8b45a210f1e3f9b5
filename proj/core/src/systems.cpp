#include "creach/systems.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "creach/errors.hpp"
#include "creach/rng.hpp"

namespace creach {

AxisBox AxisBox::make(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw validation_error("AxisBox: corner dimensions mismatch");
  AxisBox box;
  box.lower = Eigen::Map<const Eigen::VectorXd>(lo.begin(), static_cast<Eigen::Index>(lo.size()));
  box.upper = Eigen::Map<const Eigen::VectorXd>(hi.begin(), static_cast<Eigen::Index>(hi.size()));
  if ((box.upper.array() < box.lower.array()).any())
    throw validation_error("AxisBox: corners must be ordered componentwise");
  return box;
}

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::four_squares: return "four_squares";
    case SystemKind::unit_square: return "unit_square";
    case SystemKind::star_region: return "star_region";
    case SystemKind::duffing: return "duffing";
    case SystemKind::custom_map: return "custom_map";
  }
  throw validation_error("unknown system kind");
}

SystemKind system_kind_from_string(const std::string& name) {
  if (name == "four_squares" || name == "four-squares") return SystemKind::four_squares;
  if (name == "unit_square" || name == "unit-square") return SystemKind::unit_square;
  if (name == "star_region" || name == "star") return SystemKind::star_region;
  if (name == "duffing") return SystemKind::duffing;
  if (name == "custom_map") return SystemKind::custom_map;
  throw validation_error("unknown system: " + name);
}

namespace {

// Per-coordinate four-squares map. sign(0) := 0 would send the coordinate
// to 0; the pinned convention maps it to 1 instead, so even that
// measure-zero draw lands inside the reach set.
double four_squares_coord(double t) {
  if (t == 0.0) return 1.0;
  const double s = t > 0.0 ? 1.0 : -1.0;
  return s * (1.0 + 2.0 * t * t);
}

bool point_on_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
  if (cross != 0.0) return false;
  return px >= std::min(ax, bx) && px <= std::max(ax, bx) && py >= std::min(ay, by) &&
         py <= std::max(ay, by);
}

// Even-odd crossing test; boundary points count as inside.
bool point_in_polygon(double px, double py, const std::vector<std::pair<double, double>>& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if (point_on_segment(px, py, xi, yi, xj, yj)) return true;
    if ((yi > py) != (yj > py)) {
      const double x_cross = xi + (py - yi) / (yj - yi) * (xj - xi);
      if (px < x_cross) inside = !inside;
    }
  }
  return inside;
}

Eigen::Vector2d duffing_rhs(double t, const Eigen::Vector2d& state, const DuffingParams& p) {
  const double x = state[0], v = state[1];
  return {v, -p.damping * v + p.alpha * x - p.beta * x * x * x + p.gamma * std::cos(p.omega * t)};
}

Eigen::Vector2d integrate_duffing(const Eigen::Vector2d& start, const DuffingParams& p) {
  // Classical fixed-step RK4; the step is adjusted to divide the horizon
  // into a whole number of steps.
  const std::int64_t steps = std::max<std::int64_t>(1, std::llround(p.horizon / p.step));
  const double h = p.horizon / static_cast<double>(steps);
  Eigen::Vector2d y = start;
  double t = 0.0;
  for (std::int64_t i = 0; i < steps; ++i) {
    const Eigen::Vector2d k1 = duffing_rhs(t, y, p);
    const Eigen::Vector2d k2 = duffing_rhs(t + 0.5 * h, y + 0.5 * h * k1, p);
    const Eigen::Vector2d k3 = duffing_rhs(t + 0.5 * h, y + 0.5 * h * k2, p);
    const Eigen::Vector2d k4 = duffing_rhs(t + h, y + h * k3, p);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return y;
}

} // namespace

BenchmarkSystem BenchmarkSystem::four_squares() {
  BenchmarkSystem s;
  s.kind_ = SystemKind::four_squares;
  s.name_ = "four_squares";
  s.initial_set_ = AxisBox::make({-1.0, -1.0}, {1.0, 1.0});
  return s;
}

BenchmarkSystem BenchmarkSystem::unit_square() {
  BenchmarkSystem s;
  s.kind_ = SystemKind::unit_square;
  s.name_ = "unit_square";
  s.initial_set_ = AxisBox::make({-1.0, -1.0}, {1.0, 1.0});
  return s;
}

BenchmarkSystem BenchmarkSystem::star_region() {
  BenchmarkSystem s;
  s.kind_ = SystemKind::star_region;
  s.name_ = "star_region";
  s.initial_set_ = AxisBox::make({-1.0, -1.0}, {1.0, 1.0});
  return s;
}

BenchmarkSystem BenchmarkSystem::duffing(const DuffingParams& params) {
  if (params.step <= 0.0 || params.horizon <= 0.0)
    throw validation_error("duffing: step and horizon must be positive");
  BenchmarkSystem s;
  s.kind_ = SystemKind::duffing;
  s.name_ = "duffing";
  // Initial box as printed in the source experiment; the asymmetric first
  // interval is unusual but kept as given and overridable by callers.
  s.initial_set_ = AxisBox::make({-0.95, -0.05}, {1.05, 0.05});
  s.duffing_ = params;
  s.parameters_ = {{"alpha", params.alpha},   {"beta", params.beta}, {"damping", params.damping},
                   {"gamma", params.gamma},   {"omega", params.omega},
                   {"horizon", params.horizon}, {"step", params.step}};
  return s;
}

BenchmarkSystem BenchmarkSystem::custom(std::string name, AxisBox initial_set,
                                        std::function<Eigen::VectorXd(const Eigen::VectorXd&)> map) {
  BenchmarkSystem s;
  s.kind_ = SystemKind::custom_map;
  s.name_ = std::move(name);
  s.initial_set_ = std::move(initial_set);
  s.custom_map_ = std::move(map);
  return s;
}

const std::vector<std::pair<double, double>>& BenchmarkSystem::star_vertices() {
  // Five-pointed star inscribed in the unit circle: outer radius 1 at
  // angles 90 + k*72 degrees, inner radius 1/phi^2. Pinned as explicit
  // literals so the outline is identical everywhere.
  static const std::vector<std::pair<double, double>> vertices = {
      {0.0, 1.0},
      {-0.22451398828979266, 0.30901699437494745},
      {-0.9510565162951535, 0.30901699437494745},
      {-0.36327126400268045, -0.11803398874989483},
      {-0.5877852522924731, -0.8090169943749475},
      {0.0, -0.38196601125010515},
      {0.5877852522924731, -0.8090169943749475},
      {0.36327126400268045, -0.11803398874989483},
      {0.9510565162951535, 0.30901699437494745},
      {0.22451398828979266, 0.30901699437494745},
  };
  return vertices;
}

Eigen::VectorXd BenchmarkSystem::transition(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != initial_set_.dimension())
    throw validation_error("transition: point dimension mismatch");
  switch (kind_) {
    case SystemKind::four_squares: {
      Eigen::VectorXd y(x.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) y[k] = four_squares_coord(x[k]);
      return y;
    }
    case SystemKind::unit_square:
    case SystemKind::star_region:
      return x;
    case SystemKind::duffing:
      return integrate_duffing(Eigen::Vector2d(x[0], x[1]), duffing_);
    case SystemKind::custom_map:
      return custom_map_(x);
  }
  throw validation_error("transition: unknown system kind");
}

bool BenchmarkSystem::has_membership_oracle() const {
  return kind_ == SystemKind::four_squares || kind_ == SystemKind::unit_square ||
         kind_ == SystemKind::star_region;
}

bool BenchmarkSystem::true_membership(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != initial_set_.dimension())
    throw validation_error("true_membership: point dimension mismatch");
  switch (kind_) {
    case SystemKind::four_squares:
      return (x.array().abs() >= 1.0).all() && (x.array().abs() <= 3.0).all();
    case SystemKind::unit_square:
      return (x.array().abs() <= 1.0).all();
    case SystemKind::star_region:
      return point_in_polygon(x[0], x[1], star_vertices());
    default:
      throw validation_error("true_membership: system '" + name_ +
                             "' has no closed-form reach-set oracle");
  }
}

LabeledDataset sample_reach_set(const BenchmarkSystem& system, Eigen::Index count,
                                std::uint64_t seed) {
  if (count < 1) throw validation_error("sample_reach_set: count must be >= 1");
  const int n = system.dimension();
  const AxisBox& box = system.initial_set();
  auto eng = rng::make_stream(seed, {rng::kSample});

  LabeledDataset ds;
  ds.points.resize(count, n);
  ds.labels.assign(static_cast<std::size_t>(count), true);
  ds.seed = seed;
  ds.provenance = system.name();

  Eigen::VectorXd draw(n);
  const bool reject_into_region = system.kind() == SystemKind::star_region;
  for (Eigen::Index i = 0; i < count; ++i) {
    std::int64_t attempts = 0;
    for (;;) {
      for (int k = 0; k < n; ++k) draw[k] = rng::uniform(eng, box.lower[k], box.upper[k]);
      if (!reject_into_region || system.true_membership(draw)) break;
      if (++attempts > 1000000)
        throw numeric_error("sample_reach_set: rejection sampling exceeded 10^6 attempts");
    }
    const Eigen::VectorXd image = system.transition(draw);
    if (!image.allFinite()) {
      std::ostringstream oss;
      oss << "sample_reach_set: transition diverged (non-finite state) from initial point (";
      for (int k = 0; k < n; ++k) oss << (k ? ", " : "") << draw[k];
      oss << ")";
      throw numeric_error(oss.str());
    }
    ds.points.row(i) = image;
  }
  return ds;
}

LabeledDataset inject_outliers(LabeledDataset dataset, const BenchmarkSystem& system,
                               double fraction, const AxisBox& outlier_box, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw validation_error("inject_outliers: fraction must lie in (0,1)");
  if (!system.has_membership_oracle())
    throw validation_error("inject_outliers: system '" + system.name() +
                           "' has no membership oracle to reject against");
  if (outlier_box.dimension() != dataset.points.cols())
    throw validation_error("inject_outliers: outlier box dimension mismatch");

  const Eigen::Index count = dataset.points.rows();
  const auto replaced = static_cast<Eigen::Index>(
      std::floor(fraction * static_cast<double>(count)));
  dataset.provenance += "+outliers(" + std::to_string(replaced) + ")";
  if (replaced == 0) return dataset;

  auto eng = rng::make_stream(seed, {rng::kOutliers});
  // Partial Fisher-Yates: the first `replaced` entries of a shuffle.
  std::vector<Eigen::Index> indices(count);
  for (Eigen::Index i = 0; i < count; ++i) indices[i] = i;
  for (Eigen::Index i = 0; i < replaced; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           rng::uniform_index(eng, static_cast<std::uint64_t>(count - i)));
    std::swap(indices[i], indices[j]);
  }

  const int n = static_cast<int>(dataset.points.cols());
  Eigen::VectorXd draw(n);
  std::int64_t attempts = 0;
  for (Eigen::Index r = 0; r < replaced; ++r) {
    for (;;) {
      if (++attempts > 1000000)
        throw numeric_error("inject_outliers: rejection sampling exceeded 10^6 attempts; the "
                            "outlier box lies mostly inside the reach set");
      for (int k = 0; k < n; ++k) draw[k] = rng::uniform(eng, outlier_box.lower[k], outlier_box.upper[k]);
      if (!system.true_membership(draw)) break;
    }
    dataset.points.row(indices[r]) = draw;
    dataset.labels[static_cast<std::size_t>(indices[r])] = false;
  }
  return dataset;
}

} // namespace creach
