#ifndef CREACH_SERIALIZATION_HPP
#define CREACH_SERIALIZATION_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "creach/conformal.hpp"
#include "creach/evaluation.hpp"

namespace creach {

// JSON documents carry every double through a round-trip-exact shortest
// representation, so a saved model reproduces scores to full precision.

std::string model_to_json(const ChristoffelModel& model, int indent = 2);
ChristoffelModel model_from_json(const std::string& text);

std::string estimate_to_json(const ReachSetEstimate& estimate, int indent = 2);
ReachSetEstimate estimate_from_json(const std::string& text);

std::string report_to_json(const TrialReport& report, const std::string& config_manifest,
                           int indent = 2);

/// Dataset CSV: header "x1,...,xn,label", label 1 = inlier.
void save_dataset_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& points,
                      const std::vector<bool>& labels);

struct LoadedDataset {
  Eigen::MatrixXd points;
  std::vector<bool> labels;
};

/// Reads the CSV written by save_dataset_csv; the label column is optional
/// (missing labels default to inlier).
LoadedDataset load_dataset_csv(std::istream& in);

/// FNV-1a 64-bit content hash used to stamp artifacts with their manifest.
std::uint64_t fnv1a64(const std::string& text);
std::string manifest_hash(const std::string& manifest_json);

} // namespace creach

#endif
