#ifndef CREACH_EVALUATION_HPP
#define CREACH_EVALUATION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "creach/conformal.hpp"
#include "creach/systems.hpp"

namespace creach {

enum class CalibrationMode { split, robust };

/// Full manifest of one repeated-calibration experiment.
struct TrialConfig {
  BenchmarkSystem system = BenchmarkSystem::four_squares();
  Eigen::Index total_samples = 1000;     ///< M
  Eigen::Index calibration_size = 200;   ///< N
  int degree = 10;
  CalibrationMode mode = CalibrationMode::split;
  double delta = 0.01;          ///< split mode
  double epsilon = 0.0;         ///< robust mode coverage error target
  std::int64_t outlier_budget = 0; ///< robust mode p
  double outlier_fraction = 0.0;   ///< injected contamination, 0 = none
  std::optional<AxisBox> outlier_box; ///< default: [-4,4]^n
  bool rescale = true;
  double ridge = 0.0;
  Eigen::Index evaluation_samples = 10000; ///< fresh reach-set draws per trial
};

struct TrialRecord {
  std::uint64_t seed = 0;
  double empirical_coverage = 0.0;
  double threshold = 0.0;
};

struct TrialReport {
  std::int64_t repetitions = 0;
  std::int64_t violations = 0; ///< trials with empirical coverage < 1 - epsilon
  double epsilon = 0.0;        ///< the bound the violations are counted against
  std::uint64_t master_seed = 0;
  std::vector<TrialRecord> per_trial;
};

/// Run `repetitions` independent end-to-end trials: sample M points,
/// optionally contaminate, split, fit, calibrate, then measure empirical
/// coverage on fresh reach-set samples. Violations are counted against
/// epsilon = 1 - delta^(1/N) (split) or the configured epsilon (robust).
///
/// Per-trial RNG streams derive from (master_seed, trial index), so the
/// report is reproducible bit-for-bit regardless of `threads`. Fit errors
/// abort the run with the offending trial seed in the message.
TrialReport coverage_trials(const TrialConfig& config, std::int64_t repetitions,
                            std::uint64_t master_seed, int threads = 0);

/// Fraction of `count` uniform draws in `box` that the estimate accepts
/// but the system's exact oracle rejects.
double false_positive_rate(const ReachSetEstimate& estimate, const BenchmarkSystem& system,
                           const AxisBox& box, Eigen::Index count, std::uint64_t seed);

enum class GridKind { score, membership };

/// Scalar field on a regular 2-D grid, nodes at box corners included,
/// row-major with the first coordinate varying fastest:
/// values[iy * resolution + ix].
struct GridField {
  AxisBox box;
  int resolution = 0;
  GridKind kind = GridKind::score;
  Eigen::VectorXd values;

  double node_x(int ix) const;
  double node_y(int iy) const;
};

/// Evaluate the model's score on the grid (2-D systems only).
GridField score_grid(const ChristoffelModel& model, const AxisBox& box, int resolution);

/// 0/1 membership of the estimate on the grid.
GridField membership_grid(const ReachSetEstimate& estimate, const AxisBox& box, int resolution);

void write_grid_csv(const GridField& field, std::ostream& out);

/// Marching-squares contour of the score field at `level`, written as an
/// SVG document. Linear edge interpolation, saddle cells disambiguated by
/// the cell-center mean, no smoothing; output bytes are deterministic.
void write_contour_svg(const GridField& score_field, double level, std::ostream& out);

/// Number of 4-connected components of the membership field's 1-region.
int connected_components(const GridField& membership_field);

} // namespace creach

#endif
