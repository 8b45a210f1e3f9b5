#include "creach/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "creach/errors.hpp"
#include "creach/rng.hpp"

namespace creach {

namespace {

AxisBox default_outlier_box(int dimension) {
  AxisBox box;
  box.lower = Eigen::VectorXd::Constant(dimension, -4.0);
  box.upper = Eigen::VectorXd::Constant(dimension, 4.0);
  return box;
}

TrialRecord run_one_trial(const TrialConfig& cfg, std::uint64_t master_seed, std::int64_t trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  const std::uint64_t data_seed = rng::derive_seed(master_seed, {rng::kTrial, t, 0});
  const std::uint64_t outlier_seed = rng::derive_seed(master_seed, {rng::kTrial, t, 1});
  const std::uint64_t split_seed = rng::derive_seed(master_seed, {rng::kTrial, t, 2});
  const std::uint64_t eval_seed = rng::derive_seed(master_seed, {rng::kTrial, t, 3});

  LabeledDataset data = sample_reach_set(cfg.system, cfg.total_samples, data_seed);
  if (cfg.outlier_fraction > 0.0) {
    const AxisBox box = cfg.outlier_box ? *cfg.outlier_box
                                        : default_outlier_box(cfg.system.dimension());
    data = inject_outliers(std::move(data), cfg.system, cfg.outlier_fraction, box, outlier_seed);
  }

  const SamplePartition part =
      split_dataset(data.points, cfg.calibration_size, split_seed, data.labels);

  FitOptions options;
  options.rescale = cfg.rescale;
  options.ridge = cfg.ridge;
  ChristoffelModel model =
      fit(part.training, MonomialBasis(cfg.system.dimension(), cfg.degree), options);

  const ReachSetEstimate estimate =
      cfg.mode == CalibrationMode::split
          ? calibrate(std::move(model), part.calibration, cfg.delta)
          : calibrate_robust(std::move(model), part.calibration, cfg.outlier_budget, cfg.epsilon);

  const LabeledDataset fresh = sample_reach_set(cfg.system, cfg.evaluation_samples, eval_seed);
  const Eigen::VectorXd scores = estimate.model.scores(fresh.points);
  const auto inside = (scores.array() <= estimate.threshold).count();

  TrialRecord record;
  record.seed = data_seed;
  record.empirical_coverage =
      static_cast<double>(inside) / static_cast<double>(cfg.evaluation_samples);
  record.threshold = estimate.threshold;
  return record;
}

} // namespace

TrialReport coverage_trials(const TrialConfig& cfg, std::int64_t repetitions,
                            std::uint64_t master_seed, int threads) {
  if (repetitions < 1) throw validation_error("coverage_trials: repetitions must be >= 1");
  if (cfg.total_samples <= cfg.calibration_size)
    throw validation_error("coverage_trials: requires M > N");
  if (cfg.mode == CalibrationMode::robust && !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0))
    throw validation_error("coverage_trials: robust mode needs epsilon in (0,1]");
  const std::int64_t s = MonomialBasis::basis_size(cfg.system.dimension(), cfg.degree);
  if (cfg.total_samples - cfg.calibration_size < s)
    throw validation_error("coverage_trials: training size M-N=" +
                           std::to_string(cfg.total_samples - cfg.calibration_size) +
                           " is below s(d)=" + std::to_string(s));

  const double epsilon = cfg.mode == CalibrationMode::split
                             ? split_epsilon(cfg.calibration_size, cfg.delta)
                             : cfg.epsilon;

  TrialReport report;
  report.repetitions = repetitions;
  report.epsilon = epsilon;
  report.master_seed = master_seed;
  report.per_trial.resize(static_cast<std::size_t>(repetitions));

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(repetitions)));

  if (workers == 1) {
    for (std::int64_t r = 0; r < repetitions; ++r)
      report.per_trial[static_cast<std::size_t>(r)] = run_one_trial(cfg, master_seed, r);
  } else {
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const std::int64_t r = next.fetch_add(1);
        if (r >= repetitions) return;
        try {
          report.per_trial[static_cast<std::size_t>(r)] = run_one_trial(cfg, master_seed, r);
        } catch (...) {
          std::scoped_lock lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(repetitions);
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (const TrialRecord& rec : report.per_trial)
    if (rec.empirical_coverage < 1.0 - epsilon) ++report.violations;
  return report;
}

double false_positive_rate(const ReachSetEstimate& estimate, const BenchmarkSystem& system,
                           const AxisBox& box, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw validation_error("false_positive_rate: count must be >= 1");
  if (!system.has_membership_oracle())
    throw validation_error("false_positive_rate: system '" + system.name() +
                           "' has no closed-form reach-set oracle");
  const int n = system.dimension();
  if (box.dimension() != n) throw validation_error("false_positive_rate: box dimension mismatch");

  auto eng = rng::make_stream(seed, {rng::kEval});
  Eigen::MatrixXd draws(count, n);
  for (Eigen::Index i = 0; i < count; ++i)
    for (int k = 0; k < n; ++k) draws(i, k) = rng::uniform(eng, box.lower[k], box.upper[k]);

  const Eigen::VectorXd scores = estimate.model.scores(draws);
  Eigen::Index false_positives = 0;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (scores[i] <= estimate.threshold && !system.true_membership(draws.row(i)))
      ++false_positives;
  }
  return static_cast<double>(false_positives) / static_cast<double>(count);
}

double GridField::node_x(int ix) const {
  return box.lower[0] + (box.upper[0] - box.lower[0]) * ix / (resolution - 1);
}
double GridField::node_y(int iy) const {
  return box.lower[1] + (box.upper[1] - box.lower[1]) * iy / (resolution - 1);
}

namespace {

Eigen::MatrixXd grid_nodes(const AxisBox& box, int resolution) {
  if (box.dimension() != 2)
    throw validation_error("grid export supports 2-dimensional systems only");
  if (resolution < 2) throw validation_error("grid resolution must be >= 2");
  Eigen::MatrixXd nodes(static_cast<Eigen::Index>(resolution) * resolution, 2);
  Eigen::Index row = 0;
  for (int iy = 0; iy < resolution; ++iy) {
    const double y = box.lower[1] + (box.upper[1] - box.lower[1]) * iy / (resolution - 1);
    for (int ix = 0; ix < resolution; ++ix, ++row) {
      nodes(row, 0) = box.lower[0] + (box.upper[0] - box.lower[0]) * ix / (resolution - 1);
      nodes(row, 1) = y;
    }
  }
  return nodes;
}

} // namespace

GridField score_grid(const ChristoffelModel& model, const AxisBox& box, int resolution) {
  GridField field{box, resolution, GridKind::score, {}};
  field.values = model.scores(grid_nodes(box, resolution));
  return field;
}

GridField membership_grid(const ReachSetEstimate& estimate, const AxisBox& box, int resolution) {
  GridField field{box, resolution, GridKind::membership, {}};
  const Eigen::VectorXd scores = estimate.model.scores(grid_nodes(box, resolution));
  field.values = (scores.array() <= estimate.threshold).cast<double>();
  return field;
}

void write_grid_csv(const GridField& field, std::ostream& out) {
  out << "x1,x2,value\n";
  char line[96];
  Eigen::Index idx = 0;
  for (int iy = 0; iy < field.resolution; ++iy) {
    for (int ix = 0; ix < field.resolution; ++ix, ++idx) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", field.node_x(ix),
                    field.node_y(iy), field.values[idx]);
      out << line;
    }
  }
}

namespace {

struct Segment {
  double x0, y0, x1, y1;
};

// Marching squares over one cell; corners c00 (lower-left), c10, c11, c01,
// region = {value <= level}.
void cell_segments(double x0, double y0, double x1, double y1, double v00, double v10, double v11,
                   double v01, double level, std::vector<Segment>& out) {
  const bool b00 = v00 <= level, b10 = v10 <= level, b11 = v11 <= level, b01 = v01 <= level;
  const int idx = (b00 ? 1 : 0) | (b10 ? 2 : 0) | (b11 ? 4 : 0) | (b01 ? 8 : 0);
  if (idx == 0 || idx == 15) return;

  auto lerp = [level](double a, double b, double va, double vb) {
    const double t = va == vb ? 0.5 : (level - va) / (vb - va);
    return a + t * (b - a);
  };
  // Edge crossing points: bottom, right, top, left.
  const double bx = lerp(x0, x1, v00, v10), by = y0;
  const double rx = x1, ry = lerp(y0, y1, v10, v11);
  const double tx = lerp(x0, x1, v01, v11), ty = y1;
  const double lx = x0, ly = lerp(y0, y1, v00, v01);

  auto emit = [&out](double ax, double ay, double cx, double cy) {
    out.push_back({ax, ay, cx, cy});
  };
  switch (idx) {
    case 1: case 14: emit(lx, ly, bx, by); break;
    case 2: case 13: emit(bx, by, rx, ry); break;
    case 3: case 12: emit(lx, ly, rx, ry); break;
    case 4: case 11: emit(rx, ry, tx, ty); break;
    case 6: case 9: emit(bx, by, tx, ty); break;
    case 7: case 8: emit(lx, ly, tx, ty); break;
    case 5: case 10: {
      const bool center_in = 0.25 * (v00 + v10 + v11 + v01) <= level;
      const bool connect_left_bottom = (idx == 5) == center_in;
      if (connect_left_bottom) {
        emit(lx, ly, bx, by);
        emit(rx, ry, tx, ty);
      } else {
        emit(lx, ly, tx, ty);
        emit(bx, by, rx, ry);
      }
      break;
    }
    default: break;
  }
}

} // namespace

void write_contour_svg(const GridField& field, double level, std::ostream& out) {
  if (field.resolution < 2) throw validation_error("write_contour_svg: resolution must be >= 2");
  std::vector<Segment> segments;
  const int r = field.resolution;
  for (int iy = 0; iy + 1 < r; ++iy) {
    for (int ix = 0; ix + 1 < r; ++ix) {
      cell_segments(field.node_x(ix), field.node_y(iy), field.node_x(ix + 1), field.node_y(iy + 1),
                    field.values[static_cast<Eigen::Index>(iy) * r + ix],
                    field.values[static_cast<Eigen::Index>(iy) * r + ix + 1],
                    field.values[static_cast<Eigen::Index>(iy + 1) * r + ix + 1],
                    field.values[static_cast<Eigen::Index>(iy + 1) * r + ix], level, segments);
    }
  }

  constexpr double size = 640.0;
  const double wx = field.box.upper[0] - field.box.lower[0];
  const double wy = field.box.upper[1] - field.box.lower[1];
  auto px = [&](double x) { return (x - field.box.lower[0]) / wx * size; };
  auto py = [&](double y) { return size - (y - field.box.lower[1]) / wy * size; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
         "viewBox=\"0 0 640 640\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"640\" fill=\"white\" stroke=\"black\"/>\n"
      << "<path fill=\"none\" stroke=\"purple\" stroke-width=\"1.2\" d=\"";
  char buf[128];
  for (const Segment& s : segments) {
    std::snprintf(buf, sizeof(buf), "M%.2f %.2f L%.2f %.2f ", px(s.x0), py(s.y0), px(s.x1),
                  py(s.y1));
    out << buf;
  }
  out << "\"/>\n</svg>\n";
}

int connected_components(const GridField& field) {
  const int r = field.resolution;
  std::vector<char> visited(static_cast<std::size_t>(r) * r, 0);
  auto member = [&](int ix, int iy) {
    return field.values[static_cast<Eigen::Index>(iy) * r + ix] != 0.0;
  };
  int components = 0;
  std::deque<std::pair<int, int>> queue;
  for (int iy = 0; iy < r; ++iy) {
    for (int ix = 0; ix < r; ++ix) {
      const std::size_t start = static_cast<std::size_t>(iy) * r + ix;
      if (visited[start] || !member(ix, iy)) continue;
      ++components;
      visited[start] = 1;
      queue.emplace_back(ix, iy);
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        const int nbr[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
        for (const auto& nb : nbr) {
          const int nx = nb[0], ny = nb[1];
          if (nx < 0 || ny < 0 || nx >= r || ny >= r) continue;
          const std::size_t id = static_cast<std::size_t>(ny) * r + nx;
          if (!visited[id] && member(nx, ny)) {
            visited[id] = 1;
            queue.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return components;
}

} // namespace creach
