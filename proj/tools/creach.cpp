// creach: data-driven reach-set estimation with Christoffel-function
// conformal prediction. Subcommands cover dataset sampling, model fitting,
// split/robust calibration, transductive p-value queries, guarantee
// calculators, coverage trials, false-positive measurement and grid export.
//
// Exit codes: 0 success, 2 validation failure, 3 numerical failure.
// Validation and numerical errors print a machine-readable JSON object on
// stderr. All randomness flows from --seed; sub-streams are derived with
// the documented (seed, purpose, index) scheme in creach/rng.hpp.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <creach/bounds.hpp>
#include <creach/christoffel.hpp>
#include <creach/conformal.hpp>
#include <creach/errors.hpp>
#include <creach/evaluation.hpp>
#include <creach/rng.hpp>
#include <creach/serialization.hpp>
#include <creach/systems.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

creach::AxisBox parse_box(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw creach::validation_error("box format is lo1,lo2,...:hi1,hi2,... (got '" + text + "')");
  auto parse_list = [&](const std::string& part) {
    std::vector<double> values;
    std::stringstream ss(part);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw creach::validation_error("bad box coordinate '" + cell + "'");
      }
    }
    return values;
  };
  const auto lo = parse_list(text.substr(0, colon));
  const auto hi = parse_list(text.substr(colon + 1));
  if (lo.empty() || lo.size() != hi.size())
    throw creach::validation_error("box corners must have matching dimensions");
  creach::AxisBox box;
  box.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  box.upper = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  if ((box.upper.array() < box.lower.array()).any())
    throw creach::validation_error("box corners must be ordered componentwise");
  return box;
}

json box_to_json(const creach::AxisBox& box) {
  return json{{"lower", std::vector<double>(box.lower.data(), box.lower.data() + box.lower.size())},
              {"upper", std::vector<double>(box.upper.data(), box.upper.data() + box.upper.size())}};
}

struct SystemFlags {
  std::string system = "four_squares";
  std::string init_box;
  creach::DuffingParams duffing;

  void attach(CLI::App* cmd) {
    cmd->add_option("--system", system,
                    "benchmark system: four-squares | unit-square | star | duffing");
    cmd->add_option("--init-box", init_box, "initial set override, lo1,lo2:hi1,hi2");
    cmd->add_option("--alpha", duffing.alpha, "duffing: linear stiffness");
    cmd->add_option("--beta", duffing.beta, "duffing: cubic stiffness");
    cmd->add_option("--damping", duffing.damping, "duffing: velocity damping");
    cmd->add_option("--gamma", duffing.gamma, "duffing: forcing amplitude");
    cmd->add_option("--omega", duffing.omega, "duffing: forcing frequency");
    cmd->add_option("--horizon", duffing.horizon, "duffing: integration horizon T");
    cmd->add_option("--step", duffing.step, "duffing: RK4 step");
  }

  creach::BenchmarkSystem build() const {
    const auto kind = creach::system_kind_from_string(system);
    creach::BenchmarkSystem sys = [&] {
      switch (kind) {
        case creach::SystemKind::four_squares: return creach::BenchmarkSystem::four_squares();
        case creach::SystemKind::unit_square: return creach::BenchmarkSystem::unit_square();
        case creach::SystemKind::star_region: return creach::BenchmarkSystem::star_region();
        case creach::SystemKind::duffing: return creach::BenchmarkSystem::duffing(duffing);
        default:
          throw creach::validation_error("system '" + system + "' is not constructible here");
      }
    }();
    if (!init_box.empty()) {
      const creach::AxisBox box = parse_box(init_box);
      if (box.dimension() != sys.initial_set().dimension())
        throw creach::validation_error("--init-box dimension mismatch");
      return creach::BenchmarkSystem::custom(
          sys.name(), box, [sys](const Eigen::VectorXd& x) { return sys.transition(x); });
    }
    return sys;
  }

  json manifest(const creach::BenchmarkSystem& sys) const {
    json j;
    j["system"] = sys.name();
    j["initial_set"] = box_to_json(sys.initial_set());
    if (!sys.parameters().empty()) j["parameters"] = sys.parameters();
    if (creach::system_kind_from_string(system) == creach::SystemKind::star_region) {
      json verts = json::array();
      for (const auto& [x, y] : creach::BenchmarkSystem::star_vertices()) verts.push_back({x, y});
      j["star_vertices"] = verts;
    }
    return j;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw creach::validation_error("cannot open '" + path.string() + "' for writing");
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw creach::validation_error("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Resolved-config echo next to every --out artifact: data.csv gets
// data.manifest.json.
void write_manifest_echo(const std::string& out_path, const json& manifest) {
  fs::path p(out_path);
  const fs::path echo = p.parent_path() / (p.stem().string() + ".manifest.json");
  json stamped = manifest;
  stamped["manifest_hash"] = creach::manifest_hash(manifest.dump());
  write_file(echo, stamped.dump(2) + "\n");
}

creach::LoadedDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw creach::validation_error("cannot read dataset '" + path + "'");
  return creach::load_dataset_csv(in);
}

// Config precedence: flags > manifest file > built-in defaults. The
// manifest is a flat JSON object keyed by long option names; every key
// missing from the command line is appended as if typed.
std::vector<std::string> apply_manifest_defaults(std::vector<std::string> args) {
  std::string manifest_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--manifest" && i + 1 < args.size()) manifest_path = args[i + 1];
    else if (args[i].rfind("--manifest=", 0) == 0) manifest_path = args[i].substr(11);
  }
  if (manifest_path.empty()) return args;

  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw creach::validation_error("manifest '" + manifest_path + "' is not valid JSON: " +
                                   e.what());
  }
  if (!manifest.is_object())
    throw creach::validation_error("manifest must be a JSON object of option values");

  for (const auto& [key, value] : manifest.items()) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& arg : args)
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) present = true;
    if (present) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else {
      args.push_back(flag);
      args.push_back(value.dump());
    }
  }
  return args;
}

std::string normalization_name(creach::Normalization n) {
  return n == creach::Normalization::normalized ? "normalized" : "raw_sum";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reach-set estimation from samples via Christoffel-function conformal prediction"};
  app.require_subcommand(1);

  std::string manifest_file; // consumed by apply_manifest_defaults
  int subcommand_threads = 0;

  // ---- sample ----------------------------------------------------------
  auto* sample_cmd = app.add_subcommand("sample", "draw reach-set samples to CSV");
  SystemFlags sample_sys;
  sample_sys.attach(sample_cmd);
  std::int64_t sample_count = 1000;
  std::uint64_t sample_seed = 0;
  double sample_outlier_frac = 0.0;
  std::string sample_outlier_box;
  std::string sample_out;
  sample_cmd->add_option("--count", sample_count, "number of samples")->required();
  sample_cmd->add_option("--seed", sample_seed, "master RNG seed")->required();
  sample_cmd->add_option("--outlier-frac", sample_outlier_frac,
                         "replace floor(frac*count) samples with outliers");
  sample_cmd->add_option("--outlier-box", sample_outlier_box,
                         "outlier sampling box (default -4..4 per axis)");
  sample_cmd->add_option("--out", sample_out, "output CSV path")->required();
  sample_cmd->add_option("--manifest", manifest_file, "JSON file with default option values");
  sample_cmd->callback([&] {
    const creach::BenchmarkSystem sys = sample_sys.build();
    creach::LabeledDataset ds = creach::sample_reach_set(sys, sample_count, sample_seed);
    creach::AxisBox obox;
    if (sample_outlier_frac > 0.0) {
      obox = sample_outlier_box.empty()
                 ? creach::AxisBox::make({-4.0, -4.0}, {4.0, 4.0})
                 : parse_box(sample_outlier_box);
      ds = creach::inject_outliers(std::move(ds), sys, sample_outlier_frac, obox,
                                   creach::rng::derive_seed(sample_seed, {creach::rng::kOutliers}));
    }
    std::ofstream out(sample_out, std::ios::binary);
    if (!out) throw creach::validation_error("cannot open '" + sample_out + "' for writing");
    creach::save_dataset_csv(out, ds.points, ds.labels);

    json manifest = sample_sys.manifest(sys);
    manifest["command"] = "sample";
    manifest["count"] = sample_count;
    manifest["seed"] = sample_seed;
    manifest["outlier_fraction"] = sample_outlier_frac;
    if (sample_outlier_frac > 0.0) manifest["outlier_box"] = box_to_json(obox);
    manifest["provenance"] = ds.provenance;
    manifest["out"] = sample_out;
    write_manifest_echo(sample_out, manifest);
  });

  // ---- fit -------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "fit a Christoffel model from a dataset CSV");
  std::string fit_data, fit_out;
  int fit_degree = 0;
  bool fit_no_rescale = false, fit_raw_sum = false;
  double fit_ridge = 0.0;
  fit_cmd->add_option("--data", fit_data, "dataset CSV")->required();
  fit_cmd->add_option("--degree", fit_degree, "polynomial degree d")->required();
  fit_cmd->add_flag("--no-rescale", fit_no_rescale, "disable bounding-box input rescaling");
  fit_cmd->add_flag("--raw-sum", fit_raw_sum, "use the raw-sum moment matrix");
  fit_cmd->add_option("--ridge", fit_ridge, "ridge added before factorization");
  fit_cmd->add_option("--out", fit_out, "output model JSON (stdout when omitted)");
  fit_cmd->add_option("--manifest", manifest_file, "JSON file with default option values");
  fit_cmd->callback([&] {
    const creach::LoadedDataset ds = load_dataset(fit_data);
    creach::FitOptions options;
    options.rescale = !fit_no_rescale;
    options.ridge = fit_ridge;
    options.normalization =
        fit_raw_sum ? creach::Normalization::raw_sum : creach::Normalization::normalized;
    const creach::ChristoffelModel model =
        creach::fit(ds.points, creach::MonomialBasis(static_cast<int>(ds.points.cols()), fit_degree),
                    options);
    const std::string text = creach::model_to_json(model) + "\n";
    if (fit_out.empty()) {
      std::cout << text;
    } else {
      write_file(fit_out, text);
      json manifest{{"command", "fit"},
                    {"data", fit_data},
                    {"degree", fit_degree},
                    {"rescale", !fit_no_rescale},
                    {"ridge", fit_ridge},
                    {"normalization", normalization_name(options.normalization)},
                    {"n_train", model.n_train()},
                    {"out", fit_out}};
      write_manifest_echo(fit_out, manifest);
    }
  });

  // ---- calibrate ---------------------------------------------------------
  auto* cal_cmd = app.add_subcommand(
      "calibrate", "calibrate a reach-set estimate (split or outlier-robust conformal)");
  std::string cal_data, cal_model, cal_out;
  int cal_degree = 0;
  Eigen::Index cal_size = 0;
  std::uint64_t cal_seed = 0;
  double cal_delta = -1.0, cal_eps = -1.0, cal_ridge = 0.0;
  std::int64_t cal_p = -1;
  bool cal_no_rescale = false;
  cal_cmd->add_option("--data", cal_data, "dataset CSV (whole file = calibration when --model)")
      ->required();
  cal_cmd->add_option("--model", cal_model, "prefit model JSON; skips the split+fit");
  cal_cmd->add_option("--degree", cal_degree, "polynomial degree (split+fit path)");
  cal_cmd->add_option("--cal-size", cal_size, "calibration set size N (split+fit path)");
  cal_cmd->add_option("--seed", cal_seed, "seed for the shuffle split");
  cal_cmd->add_option("--delta", cal_delta, "confidence parameter for split calibration");
  cal_cmd->add_option("--p", cal_p, "outlier budget: switches to robust calibration");
  cal_cmd->add_option("--eps", cal_eps, "robust mode coverage error target");
  cal_cmd->add_flag("--no-rescale", cal_no_rescale, "disable bounding-box input rescaling");
  cal_cmd->add_option("--ridge", cal_ridge, "ridge added before factorization");
  cal_cmd->add_option("--out", cal_out, "output estimate JSON (stdout when omitted)");
  cal_cmd->add_option("--manifest", manifest_file, "JSON file with default option values");
  cal_cmd->callback([&] {
    const bool robust = cal_p >= 0;
    if (robust && cal_eps < 0)
      throw creach::validation_error("calibrate: robust mode (--p) requires --eps");
    if (!robust && cal_delta < 0)
      throw creach::validation_error("calibrate: split mode requires --delta");

    const creach::LoadedDataset ds = load_dataset(cal_data);
    std::optional<creach::ChristoffelModel> model;
    Eigen::MatrixXd calibration;
    if (!cal_model.empty()) {
      model = creach::model_from_json(read_file(cal_model));
      calibration = ds.points;
    } else {
      if (cal_degree <= 0 || cal_size <= 0)
        throw creach::validation_error("calibrate: need --degree and --cal-size (or --model)");
      const creach::SamplePartition part = creach::split_dataset(ds.points, cal_size, cal_seed);
      creach::FitOptions options;
      options.rescale = !cal_no_rescale;
      options.ridge = cal_ridge;
      model = creach::fit(part.training,
                          creach::MonomialBasis(static_cast<int>(ds.points.cols()), cal_degree),
                          options);
      calibration = part.calibration;
    }

    const creach::ReachSetEstimate estimate =
        robust ? creach::calibrate_robust(std::move(*model), calibration, cal_p, cal_eps)
               : creach::calibrate(std::move(*model), calibration, cal_delta);
    if (estimate.tied_calibration_scores)
      std::cerr << "{\"warning\":\"duplicate calibration scores detected; the missing-mass "
                   "upper bound assumes a continuous score distribution\"}\n";

    const std::string text = creach::estimate_to_json(estimate) + "\n";
    if (cal_out.empty()) {
      std::cout << text;
    } else {
      write_file(cal_out, text);
      json manifest{{"command", "calibrate"},
                    {"data", cal_data},
                    {"mode", robust ? "robust" : "split"},
                    {"out", cal_out}};
      if (robust) {
        manifest["p"] = cal_p;
        manifest["eps"] = cal_eps;
      } else {
        manifest["delta"] = cal_delta;
      }
      if (!cal_model.empty()) {
        manifest["model"] = cal_model;
      } else {
        manifest["degree"] = cal_degree;
        manifest["cal_size"] = cal_size;
        manifest["seed"] = cal_seed;
        manifest["rescale"] = !cal_no_rescale;
        manifest["ridge"] = cal_ridge;
      }
      write_manifest_echo(cal_out, manifest);
    }
  });

  // ---- transductive ------------------------------------------------------
  auto* trans_cmd = app.add_subcommand(
      "transductive", "calibration-set-free p-values for query points");
  std::string trans_data, trans_queries, trans_out;
  int trans_degree = 0;
  bool trans_no_rescale = false;
  double trans_ridge = 0.0;
  trans_cmd->add_option("--data", trans_data, "training dataset CSV")->required();
  trans_cmd->add_option("--degree", trans_degree, "polynomial degree d")->required();
  trans_cmd->add_option("--queries", trans_queries, "CSV of query points (x1,...,xn header)")
      ->required();
  trans_cmd->add_flag("--no-rescale", trans_no_rescale, "disable bounding-box input rescaling");
  trans_cmd->add_option("--ridge", trans_ridge, "ridge added before factorization");
  trans_cmd->add_option("--out", trans_out, "output JSON (stdout when omitted)");
  trans_cmd->add_option("--manifest", manifest_file, "JSON file with default option values");
  trans_cmd->callback([&] {
    const creach::LoadedDataset ds = load_dataset(trans_data);
    const creach::LoadedDataset qs = load_dataset(trans_queries);
    if (qs.points.cols() != ds.points.cols())
      throw creach::validation_error("transductive: query dimension mismatch");
    creach::FitOptions options;
    options.rescale = !trans_no_rescale;
    options.ridge = trans_ridge;
    const creach::TransductiveContext ctx = creach::make_transductive(
        ds.points, creach::MonomialBasis(static_cast<int>(ds.points.cols()), trans_degree),
        options);

    Eigen::VectorXd query_scores;
    Eigen::VectorXi counts;
    ctx.p_value_counts(qs.points, query_scores, counts);

    json results = json::array();
    for (Eigen::Index i = 0; i < qs.points.rows(); ++i) {
      std::vector<double> coords(qs.points.cols());
      for (Eigen::Index k = 0; k < qs.points.cols(); ++k) coords[static_cast<std::size_t>(k)] =
          qs.points(i, k);
      results.push_back(
          {{"x", coords},
           {"query_score", query_scores[i]},
           {"p_value", static_cast<double>(counts[i]) / static_cast<double>(ctx.n_train())}});
    }
    json doc{{"format", "creach-transductive"},
             {"data", trans_data},
             {"degree", trans_degree},
             {"n_train", ctx.n_train()},
             {"rescale", !trans_no_rescale},
             {"ridge", trans_ridge},
             {"results", std::move(results)}};
    const std::string text = doc.dump(2) + "\n";
    if (trans_out.empty()) {
      std::cout << text;
    } else {
      write_file(trans_out, text);
      json manifest = doc;
      manifest.erase("results");
      manifest["command"] = "transductive";
      manifest["queries"] = trans_queries;
      manifest["out"] = trans_out;
      write_manifest_echo(trans_out, manifest);
    }
  });

  // ---- bounds ------------------------------------------------------------
  auto* bounds_cmd = app.add_subcommand("bounds", "statistical guarantee calculators");
  bounds_cmd->require_subcommand(1);

  auto bound_result_json = [](const creach::BoundResult& b) {
    json j{{"mode", creach::to_string(b.mode)},
           {"epsilon", b.epsilon},
           {"delta", b.delta},
           {"N", b.calibration_size}};
    if (b.mode == creach::BoundMode::robust) {
      j["p"] = b.outlier_budget;
      j["confidence"] = 1.0 - b.delta;
    }
    if (b.mode == creach::BoundMode::baseline_conjecture) {
      j["dimension"] = b.dimension;
      j["degree"] = b.degree;
      j["note"] = "conjectured baseline, for comparison only";
    }
    return j;
  };

  std::int64_t b_n = 0, b_p = 0;
  double b_delta = -1.0, b_eps = -1.0;
  int b_dim = 0, b_deg = 0;

  auto* b_split = bounds_cmd->add_subcommand("split", "coverage error 1 - delta^(1/N)");
  b_split->add_option("--N", b_n, "calibration size")->required();
  b_split->add_option("--delta", b_delta, "failure probability");
  b_split->add_option("--manifest", manifest_file, "JSON file with default option values");
  b_split->callback([&] {
    if (b_delta < 0) throw creach::validation_error("bounds split: --delta required");
    std::cout << bound_result_json(creach::split_bound(b_n, b_delta)).dump(2) << "\n";
  });

  auto* b_upper = bounds_cmd->add_subcommand("upper", "missing-mass floor 1 - (1-delta)^(1/N)");
  b_upper->add_option("--N", b_n, "calibration size")->required();
  b_upper->add_option("--delta", b_delta, "failure probability")->required();
  b_upper->callback([&] {
    std::cout << bound_result_json(creach::split_upper_bound(b_n, b_delta)).dump(2) << "\n";
  });

  auto* b_two = bounds_cmd->add_subcommand("two-sided", "two-sided band at confidence 1-2*delta");
  b_two->add_option("--N", b_n, "calibration size")->required();
  b_two->add_option("--delta", b_delta, "per-side failure probability, < 1/2")->required();
  b_two->callback([&] {
    if (!(b_delta > 0.0 && b_delta < 0.5))
      throw creach::validation_error("bounds two-sided: delta must lie in (0, 1/2)");
    json j{{"mode", "split_two_sided"},
           {"N", b_n},
           {"delta", b_delta},
           {"confidence", 1.0 - 2.0 * b_delta},
           {"epsilon_lower", creach::split_epsilon(b_n, b_delta)},
           {"epsilon_upper", creach::split_upper_epsilon(b_n, b_delta)}};
    std::cout << j.dump(2) << "\n";
  });

  auto* b_robust = bounds_cmd->add_subcommand("robust", "outlier-robust binomial confidence");
  b_robust->add_option("--N", b_n, "calibration size")->required();
  b_robust->add_option("--p", b_p, "outlier budget")->required();
  b_robust->add_option("--eps", b_eps, "coverage error target")->required();
  b_robust->callback([&] {
    std::cout << bound_result_json(creach::robust_bound(b_n, b_p, b_eps)).dump(2) << "\n";
  });

  auto* b_conj = bounds_cmd->add_subcommand(
      "conjecture", "conjectured baseline epsilon for a training-set-only threshold");
  b_conj->add_option("--N", b_n, "sample size")->required();
  b_conj->add_option("--n", b_dim, "state dimension")->required();
  b_conj->add_option("--d", b_deg, "polynomial degree")->required();
  b_conj->add_option("--delta", b_delta, "failure probability")->required();
  b_conj->callback([&] {
    std::cout << bound_result_json(creach::baseline_conjecture_bound(b_n, b_dim, b_deg, b_delta))
                     .dump(2)
              << "\n";
  });

  auto* b_table = bounds_cmd->add_subcommand(
      "robust-table", "confidence grid over calibration sizes and coverage errors");
  double table_frac = 0.05;
  std::vector<std::int64_t> table_sizes{100, 500, 1000, 2000};
  std::vector<double> table_eps{0.04, 0.05, 0.06, 0.10};
  bool table_json = false;
  b_table->add_option("--outlier-frac", table_frac, "outlier budget as a fraction of N");
  b_table->add_option("--sizes", table_sizes, "calibration sizes")->delimiter(',');
  b_table->add_option("--eps", table_eps, "coverage error columns")->delimiter(',');
  b_table->add_flag("--json", table_json, "emit JSON instead of the text table");
  b_table->callback([&] {
    json rows = json::array();
    for (const std::int64_t n : table_sizes) {
      const auto p = static_cast<std::int64_t>(table_frac * static_cast<double>(n));
      json confidences = json::array();
      for (const double eps : table_eps) confidences.push_back(creach::robust_confidence(n, p, eps));
      rows.push_back({{"N", n}, {"p", p}, {"confidence", confidences}});
    }
    if (table_json) {
      std::cout << json{{"outlier_fraction", table_frac}, {"eps", table_eps}, {"rows", rows}}.dump(2)
                << "\n";
      return;
    }
    std::cout << "confidence (%) that coverage >= 1 - eps, outlier budget p = "
              << table_frac * 100 << "% of N\n";
    std::cout << "      N      p";
    char buf[64];
    for (const double eps : table_eps) {
      std::snprintf(buf, sizeof(buf), "  eps=%-6.3g", eps);
      std::cout << buf;
    }
    std::cout << "\n";
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof(buf), "%7lld%7lld",
                    static_cast<long long>(row.at("N").get<std::int64_t>()),
                    static_cast<long long>(row.at("p").get<std::int64_t>()));
      std::cout << buf;
      for (const auto& c : row.at("confidence")) {
        std::snprintf(buf, sizeof(buf), "  %10.4f", 100.0 * c.get<double>());
        std::cout << buf;
      }
      std::cout << "\n";
    }
  });

  // ---- coverage-trials -----------------------------------------------------
  auto* trials_cmd = app.add_subcommand(
      "coverage-trials", "repeated end-to-end calibration trials with fresh evaluation draws");
  SystemFlags trials_sys;
  trials_sys.attach(trials_cmd);
  std::int64_t trials_m = 1000, trials_r = 100;
  Eigen::Index trials_n = 200, trials_eval = 10000;
  int trials_degree = 10;
  std::uint64_t trials_seed = 0;
  std::string trials_mode = "split", trials_outlier_box, trials_out;
  double trials_delta = 0.01, trials_eps = 0.15, trials_outlier_frac = 0.0, trials_ridge = 0.0;
  std::int64_t trials_p = 0;
  bool trials_no_rescale = false;
  trials_cmd->add_option("--M", trials_m, "total samples per trial")->required();
  trials_cmd->add_option("--N", trials_n, "calibration size")->required();
  trials_cmd->add_option("--degree", trials_degree, "polynomial degree")->required();
  trials_cmd->add_option("--R", trials_r, "number of repetitions")->required();
  trials_cmd->add_option("--seed", trials_seed, "master seed")->required();
  trials_cmd->add_option("--mode", trials_mode, "split | robust");
  trials_cmd->add_option("--delta", trials_delta, "split mode failure probability");
  trials_cmd->add_option("--eps", trials_eps, "robust mode coverage error");
  trials_cmd->add_option("--p", trials_p, "robust mode outlier budget");
  trials_cmd->add_option("--outlier-frac", trials_outlier_frac, "injected contamination fraction");
  trials_cmd->add_option("--outlier-box", trials_outlier_box, "outlier box, lo1,lo2:hi1,hi2");
  trials_cmd->add_flag("--no-rescale", trials_no_rescale, "disable input rescaling");
  trials_cmd->add_option("--ridge", trials_ridge, "ridge added before factorization");
  trials_cmd->add_option("--eval-count", trials_eval, "fresh evaluation samples per trial");
  trials_cmd->add_option("--threads", subcommand_threads, "worker threads (0 = hardware)");
  trials_cmd->add_option("--out", trials_out, "report JSON path (stdout when omitted)");
  trials_cmd->add_option("--manifest", manifest_file, "JSON file with default option values");
  trials_cmd->callback([&] {
    creach::TrialConfig cfg;
    cfg.system = trials_sys.build();
    cfg.total_samples = trials_m;
    cfg.calibration_size = trials_n;
    cfg.degree = trials_degree;
    if (trials_mode == "split") cfg.mode = creach::CalibrationMode::split;
    else if (trials_mode == "robust") cfg.mode = creach::CalibrationMode::robust;
    else throw creach::validation_error("coverage-trials: mode must be split or robust");
    cfg.delta = trials_delta;
    cfg.epsilon = trials_eps;
    cfg.outlier_budget = trials_p;
    cfg.outlier_fraction = trials_outlier_frac;
    if (!trials_outlier_box.empty()) cfg.outlier_box = parse_box(trials_outlier_box);
    cfg.rescale = !trials_no_rescale;
    cfg.ridge = trials_ridge;
    cfg.evaluation_samples = trials_eval;

    json manifest = trials_sys.manifest(cfg.system);
    manifest["command"] = "coverage-trials";
    manifest["M"] = trials_m;
    manifest["N"] = trials_n;
    manifest["degree"] = trials_degree;
    manifest["mode"] = trials_mode;
    if (cfg.mode == creach::CalibrationMode::split) {
      manifest["delta"] = trials_delta;
    } else {
      manifest["eps"] = trials_eps;
      manifest["p"] = trials_p;
    }
    manifest["outlier_fraction"] = trials_outlier_frac;
    manifest["rescale"] = cfg.rescale;
    manifest["ridge"] = trials_ridge;
    manifest["eval_count"] = trials_eval;
    manifest["R"] = trials_r;
    manifest["seed"] = trials_seed;

    const creach::TrialReport report =
        creach::coverage_trials(cfg, trials_r, trials_seed, subcommand_threads);
    const std::string text = creach::report_to_json(report, manifest.dump()) + "\n";
    if (trials_out.empty()) {
      std::cout << text;
    } else {
      write_file(trials_out, text);
      write_manifest_echo(trials_out, manifest);
    }
  });

  // ---- fp-rate ---------------------------------------------------------------
  auto* fp_cmd = app.add_subcommand(
      "fp-rate", "false-positive rate of an estimate against the exact reach set");
  SystemFlags fp_sys;
  fp_sys.attach(fp_cmd);
  std::string fp_estimate, fp_box = "-4,-4:4,4";
  std::int64_t fp_count = 10000;
  std::uint64_t fp_seed = 0;
  fp_cmd->add_option("--estimate", fp_estimate, "estimate JSON")->required();
  fp_cmd->add_option("--box", fp_box, "evaluation box, lo1,lo2:hi1,hi2");
  fp_cmd->add_option("--count", fp_count, "uniform evaluation draws")->required();
  fp_cmd->add_option("--seed", fp_seed, "RNG seed")->required();
  fp_cmd->add_option("--manifest", manifest_file, "JSON file with default option values");
  fp_cmd->callback([&] {
    const creach::ReachSetEstimate estimate = creach::estimate_from_json(read_file(fp_estimate));
    const creach::BenchmarkSystem sys = fp_sys.build();
    const creach::AxisBox box = parse_box(fp_box);
    const double rate = creach::false_positive_rate(estimate, sys, box, fp_count, fp_seed);
    json j{{"command", "fp-rate"},        {"estimate", fp_estimate},
           {"system", sys.name()},        {"box", box_to_json(box)},
           {"count", fp_count},           {"seed", fp_seed},
           {"false_positive_rate", rate}, {"threshold", estimate.threshold}};
    std::cout << j.dump(2) << "\n";
  });

  // ---- grid -------------------------------------------------------------------
  auto* grid_cmd = app.add_subcommand("grid", "score/membership grid export (CSV, optional SVG)");
  std::string grid_model, grid_estimate, grid_box = "-4,-4:4,4", grid_kind = "score";
  std::string grid_out, grid_svg;
  int grid_res = 200;
  grid_cmd->add_option("--model", grid_model, "model JSON (score grids)");
  grid_cmd->add_option("--estimate", grid_estimate, "estimate JSON (membership or score grids)");
  grid_cmd->add_option("--box", grid_box, "grid box, lo1,lo2:hi1,hi2");
  grid_cmd->add_option("--resolution", grid_res, "nodes per axis");
  grid_cmd->add_option("--kind", grid_kind, "score | membership");
  grid_cmd->add_option("--out", grid_out, "grid CSV path")->required();
  grid_cmd->add_option("--svg", grid_svg, "contour SVG path (needs --estimate)");
  grid_cmd->add_option("--manifest", manifest_file, "JSON file with default option values");
  grid_cmd->callback([&] {
    if (grid_model.empty() == grid_estimate.empty())
      throw creach::validation_error("grid: pass exactly one of --model / --estimate");
    std::optional<creach::ReachSetEstimate> estimate;
    std::optional<creach::ChristoffelModel> model;
    if (!grid_estimate.empty()) estimate = creach::estimate_from_json(read_file(grid_estimate));
    else model = creach::model_from_json(read_file(grid_model));

    const creach::AxisBox box = parse_box(grid_box);
    const creach::GridField field = [&] {
      if (grid_kind == "membership") {
        if (!estimate)
          throw creach::validation_error("grid: membership kind requires --estimate");
        return creach::membership_grid(*estimate, box, grid_res);
      }
      if (grid_kind != "score")
        throw creach::validation_error("grid: kind must be score or membership");
      return creach::score_grid(estimate ? estimate->model : *model, box, grid_res);
    }();

    std::ofstream out(grid_out, std::ios::binary);
    if (!out) throw creach::validation_error("cannot open '" + grid_out + "' for writing");
    creach::write_grid_csv(field, out);

    if (!grid_svg.empty()) {
      if (!estimate)
        throw creach::validation_error("grid: the contour SVG needs an --estimate threshold");
      const creach::GridField score_field =
          field.kind == creach::GridKind::score
              ? field
              : creach::score_grid(estimate->model, box, grid_res);
      std::ofstream svg(grid_svg, std::ios::binary);
      if (!svg) throw creach::validation_error("cannot open '" + grid_svg + "' for writing");
      creach::write_contour_svg(score_field, estimate->threshold, svg);
    }

    json manifest{{"command", "grid"},
                  {"box", box_to_json(box)},
                  {"resolution", grid_res},
                  {"kind", grid_kind},
                  {"out", grid_out}};
    if (!grid_estimate.empty()) manifest["estimate"] = grid_estimate;
    if (!grid_model.empty()) manifest["model"] = grid_model;
    if (!grid_svg.empty()) manifest["svg"] = grid_svg;
    write_manifest_echo(grid_out, manifest);
  });

  // ---- parse & dispatch --------------------------------------------------------
  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_manifest_defaults(std::move(args));
    std::reverse(args.begin(), args.end()); // CLI11 takes reversed vectors
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const creach::numeric_error& e) {
    std::cerr << json{{"error", {{"type", "numerical"}, {"message", e.what()}}}}.dump() << "\n";
    return 3;
  } catch (const creach::validation_error& e) {
    std::cerr << json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
