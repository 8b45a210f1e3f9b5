#include "creach/serialization.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "creach/errors.hpp"

namespace creach {

using nlohmann::json;

namespace {

constexpr const char* kOrderingTag = "graded_lex_desc";

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

json model_to_json_obj(const ChristoffelModel& model) {
  json j;
  j["format"] = "creach-model";
  j["basis"] = {{"dimension", model.basis().dimension()},
                {"degree", model.basis().degree()},
                {"ordering", kOrderingTag}};
  if (model.rescale()) {
    j["rescale"] = {{"offset", vector_to_json(model.rescale()->offset)},
                    {"scale", vector_to_json(model.rescale()->scale)}};
  } else {
    j["rescale"] = nullptr;
  }
  j["normalization"] =
      model.normalization() == Normalization::normalized ? "normalized" : "raw_sum";
  j["n_train"] = model.n_train();
  j["ridge"] = model.ridge();
  const auto& m = model.moment_matrix();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  j["moment_matrix"] = std::move(flat);
  return j;
}

ChristoffelModel model_from_json_obj(const json& j) {
  if (j.value("format", "") != "creach-model")
    throw validation_error("model_from_json: not a creach-model document");
  const auto& jb = j.at("basis");
  if (jb.value("ordering", "") != kOrderingTag)
    throw validation_error("model_from_json: unsupported basis ordering '" +
                           jb.value("ordering", "") + "'");
  const int n = jb.at("dimension").get<int>();
  const int d = jb.at("degree").get<int>();
  MonomialBasis basis(n, d);
  const Eigen::Index s = basis.size();

  const auto flat = j.at("moment_matrix").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != s * s)
    throw validation_error("model_from_json: moment matrix size mismatch");
  Eigen::MatrixXd moment(s, s);
  for (Eigen::Index r = 0; r < s; ++r)
    for (Eigen::Index c = 0; c < s; ++c)
      moment(r, c) = flat[static_cast<std::size_t>(r * s + c)];

  const std::string norm = j.at("normalization").get<std::string>();
  if (norm != "normalized" && norm != "raw_sum")
    throw validation_error("model_from_json: unknown normalization '" + norm + "'");
  const auto n_train = j.at("n_train").get<Eigen::Index>();
  const double ridge = j.value("ridge", 0.0);

  std::optional<AffineRescale> rescale;
  if (!j.at("rescale").is_null()) {
    AffineRescale map;
    map.offset = vector_from_json(j.at("rescale").at("offset"));
    map.scale = vector_from_json(j.at("rescale").at("scale"));
    if (map.offset.size() != n || map.scale.size() != n)
      throw validation_error("model_from_json: rescale dimension mismatch");
    rescale = std::move(map);
  }

  return ChristoffelModel::restore(
      std::move(basis), std::move(moment), std::move(rescale), n_train,
      norm == "normalized" ? Normalization::normalized : Normalization::raw_sum, ridge);
}

json bound_to_json_obj(const BoundResult& b) {
  json j;
  j["mode"] = to_string(b.mode);
  j["epsilon"] = b.epsilon;
  j["delta"] = b.delta;
  j["N"] = b.calibration_size;
  if (b.mode == BoundMode::robust) j["p"] = b.outlier_budget;
  if (b.mode == BoundMode::baseline_conjecture) {
    j["dimension"] = b.dimension;
    j["degree"] = b.degree;
  }
  return j;
}

BoundResult bound_from_json_obj(const json& j) {
  BoundResult b;
  b.mode = bound_mode_from_string(j.at("mode").get<std::string>());
  b.epsilon = j.at("epsilon").get<double>();
  b.delta = j.at("delta").get<double>();
  b.calibration_size = j.value("N", std::int64_t{0});
  b.outlier_budget = j.value("p", std::int64_t{0});
  b.dimension = j.value("dimension", 0);
  b.degree = j.value("degree", 0);
  return b;
}

} // namespace

std::string model_to_json(const ChristoffelModel& model, int indent) {
  return model_to_json_obj(model).dump(indent);
}

ChristoffelModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("model_from_json: invalid JSON: ") + e.what());
  }
  return model_from_json_obj(j);
}

std::string estimate_to_json(const ReachSetEstimate& estimate, int indent) {
  json j;
  j["format"] = "creach-estimate";
  j["model"] = model_to_json_obj(estimate.model);
  j["threshold"] = estimate.threshold;
  j["rank"] = estimate.rank;
  j["guarantee"] = bound_to_json_obj(estimate.guarantee);
  j["tied_calibration_scores"] = estimate.tied_calibration_scores;
  return j.dump(indent);
}

ReachSetEstimate estimate_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("estimate_from_json: invalid JSON: ") + e.what());
  }
  if (j.value("format", "") != "creach-estimate")
    throw validation_error("estimate_from_json: not a creach-estimate document");
  ReachSetEstimate est{model_from_json_obj(j.at("model"))};
  est.threshold = j.at("threshold").get<double>();
  est.rank = j.at("rank").get<int>();
  est.guarantee = bound_from_json_obj(j.at("guarantee"));
  est.tied_calibration_scores = j.value("tied_calibration_scores", false);
  return est;
}

std::string report_to_json(const TrialReport& report, const std::string& config_manifest,
                           int indent) {
  json j;
  j["format"] = "creach-trial-report";
  j["repetitions"] = report.repetitions;
  j["violations"] = report.violations;
  j["epsilon"] = report.epsilon;
  j["master_seed"] = report.master_seed;
  if (!config_manifest.empty()) {
    j["config"] = json::parse(config_manifest);
    j["config_hash"] = manifest_hash(config_manifest);
  }
  json trials = json::array();
  for (const TrialRecord& rec : report.per_trial) {
    trials.push_back({{"seed", rec.seed},
                      {"empirical_coverage", rec.empirical_coverage},
                      {"threshold", rec.threshold}});
  }
  j["per_trial"] = std::move(trials);
  return j.dump(indent);
}

void save_dataset_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& points,
                      const std::vector<bool>& labels) {
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw validation_error("save_dataset_csv: labels length mismatch");
  for (Eigen::Index k = 0; k < points.cols(); ++k) out << "x" << (k + 1) << ",";
  out << "label\n";
  char buf[40];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", points(i, k));
      out << buf << ",";
    }
    out << (labels.empty() || labels[static_cast<std::size_t>(i)] ? 1 : 0) << "\n";
  }
}

LoadedDataset load_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error("load_dataset_csv: empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty()) throw validation_error("load_dataset_csv: empty header");
  const bool has_label = header.back() == "label";
  const auto n = static_cast<Eigen::Index>(header.size()) - (has_label ? 1 : 0);
  if (n < 1) throw validation_error("load_dataset_csv: no coordinate columns");

  std::vector<double> coords;
  std::vector<bool> labels;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!std::getline(ss, cell, ','))
        throw validation_error("load_dataset_csv: short row " + std::to_string(rows + 1));
      try {
        coords.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw validation_error("load_dataset_csv: bad number '" + cell + "' in row " +
                               std::to_string(rows + 1));
      }
    }
    if (has_label) {
      if (!std::getline(ss, cell, ','))
        throw validation_error("load_dataset_csv: missing label in row " + std::to_string(rows + 1));
      labels.push_back(cell != "0");
    } else {
      labels.push_back(true);
    }
    ++rows;
  }

  LoadedDataset ds;
  ds.points.resize(rows, n);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < n; ++k) ds.points(i, k) = coords[static_cast<std::size_t>(i * n + k)];
  ds.labels = std::move(labels);
  return ds;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string manifest_hash(const std::string& manifest_json) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(manifest_json)));
  return buf;
}

} // namespace creach
