#ifndef CREACH_SYSTEMS_HPP
#define CREACH_SYSTEMS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace creach {

/// Axis-aligned box with componentwise-ordered corners.
struct AxisBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dimension() const { return lower.size(); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
  static AxisBox make(std::initializer_list<double> lo, std::initializer_list<double> hi);
};

enum class SystemKind { four_squares, unit_square, star_region, duffing, custom_map };

std::string to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& name);

struct DuffingParams {
  double alpha = 1.0;
  double beta = 1.0;
  double damping = 0.05; ///< velocity damping coefficient
  double gamma = 0.4;    ///< forcing amplitude
  double omega = 1.3;    ///< forcing angular frequency
  double horizon = 10.0; ///< integration horizon T
  double step = 0.01;    ///< nominal RK4 step (adjusted to divide T evenly)
};

/// One benchmark system: an initial box and a one-step transition map.
///
/// four_squares: per-coordinate t=0 -> 1, else sign(t)*(1+2t^2) on
/// I=[-1,1]^2; its reach set is the four squares ([-3,-1] u [1,3])^2 with
/// a hole at the origin. unit_square: identity on [-1,1]^2. star_region:
/// uniform samples on a five-pointed star inscribed in the unit circle
/// (vertex list pinned below). duffing: RK4-integrated trajectory
/// endpoint, no closed-form reach set.
class BenchmarkSystem {
public:
  static BenchmarkSystem four_squares();
  static BenchmarkSystem unit_square();
  static BenchmarkSystem star_region();
  static BenchmarkSystem duffing(const DuffingParams& params = {});
  static BenchmarkSystem custom(std::string name, AxisBox initial_set,
                                std::function<Eigen::VectorXd(const Eigen::VectorXd&)> map);

  SystemKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const AxisBox& initial_set() const { return initial_set_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }
  int dimension() const { return static_cast<int>(initial_set_.dimension()); }

  Eigen::VectorXd transition(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// True for the closed-form benchmarks (four_squares, unit_square,
  /// star_region).
  bool has_membership_oracle() const;

  /// Exact indicator of the reach set S, boundary closed. Throws
  /// validation_error for systems without a closed-form oracle (duffing,
  /// custom maps).
  bool true_membership(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Pinned outline of the star region, 10 vertices, counterclockwise.
  static const std::vector<std::pair<double, double>>& star_vertices();

private:
  BenchmarkSystem() = default;

  SystemKind kind_ = SystemKind::custom_map;
  std::string name_;
  AxisBox initial_set_;
  std::map<std::string, double> parameters_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> custom_map_;
  DuffingParams duffing_;
};

/// Points with inlier labels and sampling provenance.
struct LabeledDataset {
  Eigen::MatrixXd points;
  std::vector<bool> labels; ///< true = genuine reach-set sample
  std::uint64_t seed = 0;
  std::string provenance;
};

/// Draw `count` i.i.d. uniform points in the initial box and map them
/// through the transition (for star_region: uniform on the star by
/// rejection inside its box). All labels are inlier. Deterministic given
/// (system, count, seed). Throws numeric_error naming the initial point
/// if the transition produces non-finite state.
LabeledDataset sample_reach_set(const BenchmarkSystem& system, Eigen::Index count,
                                std::uint64_t seed);

/// Replace floor(fraction*count) randomly chosen points with uniform draws
/// from `outlier_box` rejected against the system's membership oracle, and
/// update labels. Closed-form systems only. Throws numeric_error when
/// rejection sampling exceeds 10^6 attempts (box mostly inside the reach
/// set).
LabeledDataset inject_outliers(LabeledDataset dataset, const BenchmarkSystem& system,
                               double fraction, const AxisBox& outlier_box, std::uint64_t seed);

} // namespace creach

#endif
