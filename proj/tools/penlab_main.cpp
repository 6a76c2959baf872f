#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "penlab/bench.hpp"
#include "penlab/dantzig.hpp"
#include "penlab/errors.hpp"
#include "penlab/model_selection.hpp"
#include "penlab/pipeline.hpp"
#include "penlab/scenarios.hpp"
#include "penlab/screening.hpp"
#include "penlab/solvers.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

using nlohmann::json;

std::string output_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw penlab::IoFailure("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw penlab::IoFailure("short write to '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw penlab::IoFailure("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int default_threads() {
  if (const char* env = std::getenv("PENLAB_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) return parsed;
  }
  return 1;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

struct SimulateOptions {
  std::string scenario;
  int n = 100;
  double rho = 0.0;
  std::string methods = "lasso.min";
  std::string modes = "both";
  int replicates = 50;
  std::uint64_t seed = 1;
  std::string out;
  int threads = default_threads();
  std::string manifest_path;
};

json tune_to_json(const penlab::TuneSettings& t) {
  json doc;
  doc["cv_folds"] = t.cv_folds;
  doc["n_lambda"] = t.n_lambda;
  doc["scad_a"] = t.scad_a;
  doc["adaptive_q"] = t.adaptive_q;
  doc["relax_phis"] = t.relax_phis;
  doc["dcvs_alpha"] = t.dcvs_alpha;
  doc["dcvs_permutations"] = t.dcvs_permutations;
  doc["sqrt_lambda0"] = t.sqrt_lambda0;      // 0 means 1.1*qnorm(1-0.05/(2p))/sqrt(n)
  doc["scaled_lambda0"] = t.scaled_lambda0;  // 0 means sqrt(2 log(p)/n)
  doc["tol"] = t.control.tol;
  doc["max_iter"] = t.control.max_iter;
  // fixed grid conventions, recorded for reproducibility
  doc["l1_grid"] = "lambda_max = max|x_j'y|/n, log-spaced, eps 1e-4 (1e-2 when p >= n)";
  doc["dant_grid"] = "same anchor, floor sqrt(log(p)/n) * lambda_max, 1se rule";
  doc["ridge_grid"] = "anchor 1000 * lambda_max, weights from the CV-min ridge fit";
  return doc;
}

penlab::TuneSettings tune_from_json(const json& doc) {
  penlab::TuneSettings t;
  t.cv_folds = doc.value("cv_folds", t.cv_folds);
  t.n_lambda = doc.value("n_lambda", t.n_lambda);
  t.scad_a = doc.value("scad_a", t.scad_a);
  t.adaptive_q = doc.value("adaptive_q", t.adaptive_q);
  if (doc.contains("relax_phis")) {
    t.relax_phis = doc.at("relax_phis").get<std::vector<double>>();
  }
  t.dcvs_alpha = doc.value("dcvs_alpha", t.dcvs_alpha);
  t.dcvs_permutations = doc.value("dcvs_permutations", t.dcvs_permutations);
  t.sqrt_lambda0 = doc.value("sqrt_lambda0", t.sqrt_lambda0);
  t.scaled_lambda0 = doc.value("scaled_lambda0", t.scaled_lambda0);
  t.control.tol = doc.value("tol", t.control.tol);
  t.control.max_iter = doc.value("max_iter", t.control.max_iter);
  return t;
}

int run_simulate(SimulateOptions opts) {
  penlab::RunConfig config;
  config.tune = penlab::TuneSettings{};

  if (!opts.manifest_path.empty()) {
    const json manifest = json::parse(read_file(opts.manifest_path));
    if (manifest.value("command", "") != "simulate") {
      std::cerr << "error: manifest is not for the simulate command\n";
      return kExitConfigError;
    }
    opts.scenario = manifest.at("scenario").get<std::string>();
    opts.n = manifest.at("n").get<int>();
    opts.rho = manifest.value("rho", 0.0);
    opts.methods = manifest.at("methods").get<std::string>();
    opts.modes = manifest.at("modes").get<std::string>();
    opts.replicates = manifest.at("replicates").get<int>();
    opts.seed = manifest.at("seed").get<std::uint64_t>();
    if (opts.out.empty()) opts.out = manifest.at("out").get<std::string>();
    if (manifest.contains("tune")) config.tune = tune_from_json(manifest.at("tune"));
  }

  const auto scenario = penlab::parse_scenario(opts.scenario);
  if (!scenario) {
    std::cerr << "error: unknown scenario '" << opts.scenario << "'. Valid names:";
    for (penlab::Scenario s : penlab::all_scenarios()) {
      std::cerr << ' ' << penlab::scenario_id(s);
    }
    std::cerr << '\n';
    return kExitConfigError;
  }
  config.spec.name = *scenario;
  config.spec.n = opts.n;
  config.spec.rho = opts.rho;
  if (penlab::scenario_uses_rho(*scenario) && !(std::abs(opts.rho) > 0.0)) {
    std::cerr << "error: scenario " << opts.scenario << " needs --rho\n";
    return kExitConfigError;
  }

  for (const std::string& id : split_list(opts.methods)) {
    const auto method = penlab::parse_method(id);
    if (!method) {
      std::cerr << "error: unknown method '" << id << "'. Valid ids:";
      for (penlab::Method m : penlab::all_methods()) std::cerr << ' ' << penlab::method_id(m);
      std::cerr << '\n';
      return kExitConfigError;
    }
    config.methods.push_back(*method);
  }
  if (config.methods.empty()) {
    std::cerr << "error: --methods is empty\n";
    return kExitConfigError;
  }

  if (opts.modes == "both") {
    config.modes = {penlab::StandardizationMode::kRaw, penlab::StandardizationMode::kUnivariate};
  } else if (opts.modes == "raw") {
    config.modes = {penlab::StandardizationMode::kRaw};
  } else if (opts.modes == "univ") {
    config.modes = {penlab::StandardizationMode::kUnivariate};
  } else {
    std::cerr << "error: --modes must be raw, univ or both\n";
    return kExitConfigError;
  }

  if (opts.replicates < 1 || opts.n < 2) {
    std::cerr << "error: need --replicates >= 1 and --n >= 2\n";
    return kExitConfigError;
  }
  if (opts.out.empty()) {
    std::cerr << "error: --out is required\n";
    return kExitConfigError;
  }
  config.replicates = opts.replicates;
  config.base_seed = opts.seed;
  config.threads = opts.threads;

  const std::vector<penlab::MetricsRecord> records = penlab::run_monte_carlo(config);
  const double sigma_eps = penlab::scenario_truth(config.spec).sigma_eps;
  const std::vector<penlab::AggregateRow> rows = penlab::aggregate(records, sigma_eps);

  const std::string stem = output_stem(opts.out);
  write_file(opts.out, penlab::records_to_csv(records));
  write_file(stem + ".agg.csv", penlab::aggregate_to_csv(rows, config.spec, sigma_eps));
  write_file(stem + ".md", penlab::aggregate_to_markdown(rows, config.spec, sigma_eps));

  json manifest;
  manifest["command"] = "simulate";
  manifest["version"] = kVersion;
  manifest["scenario"] = opts.scenario;
  manifest["n"] = opts.n;
  manifest["rho"] = opts.rho;
  manifest["methods"] = opts.methods;
  manifest["modes"] = opts.modes;
  manifest["replicates"] = opts.replicates;
  manifest["seed"] = opts.seed;
  manifest["out"] = opts.out;
  manifest["tune"] = tune_to_json(config.tune);
  write_file(stem + ".manifest.json", manifest.dump(2) + "\n");

  std::cout << "wrote " << records.size() << " records to " << opts.out << '\n';
  return 0;
}

struct FitOptions {
  std::string data;
  std::string response;
  std::string method = "lasso";
  std::string rule = "default";
  std::string mode = "univ";
  double lambda = -1.0;
  std::uint64_t seed = 1;
};

penlab::FitResult fixed_rule_fit(const std::string& family, const penlab::StandardizedData& data,
                                 const Eigen::MatrixXd& x_raw, double lambda,
                                 penlab::TuneDiagnostics* diag) {
  penlab::FitResult fit;
  if (family == "lasso") {
    fit = penlab::lasso_cd(data.x, data.y, penlab::PenaltySpec::lasso(lambda));
  } else if (family == "scad") {
    fit = penlab::scad_fit(data.x, data.y, lambda);
  } else if (family == "dant") {
    const penlab::DantzigSolution solution = penlab::dantzig_select(data.x, data.y, lambda);
    fit.beta = solution.beta;
    fit.support = solution.support;
    fit.lambda_used = lambda;
    fit.converged = true;
  } else if (family == "relaxl") {
    fit = penlab::relaxed_lasso(data.x, data.y, lambda, 0.5);
  } else if (family == "sqrtl") {
    fit = penlab::sqrt_lasso(data.x, data.y, lambda);
  } else if (family == "scall") {
    const penlab::ScaledLassoResult scaled = penlab::scaled_lasso(data.x, data.y, lambda);
    fit = scaled.fit;
    if (diag != nullptr) diag->sigma_hat = scaled.sigma_hat;
  } else {
    throw penlab::InvalidArgument("method '" + family + "' does not support the fixed rule");
  }
  const Eigen::VectorXd magnitude = fit.beta.cwiseAbs();
  bool dropped = false;
  fit.refit_beta = penlab::ols_refit(x_raw, data.y, fit.support, &magnitude, &dropped);
  fit.dropped_collinear = dropped;
  if (diag != nullptr) {
    diag->lambda = fit.lambda_used;
    diag->rule = "fixed";
  }
  return fit;
}

int run_fit(const FitOptions& opts) {
  const auto rule = penlab::parse_rule(opts.rule);
  if (!rule) {
    std::cerr << "error: unknown rule '" << opts.rule << "' (min, 1se, bic, fixed, default)\n";
    return kExitConfigError;
  }
  std::optional<penlab::Method> method;
  if (*rule != penlab::SelectionRule::kFixed) {
    method = penlab::make_method(opts.method, *rule);
    if (!method) {
      std::cerr << "error: method '" << opts.method << "' does not support rule '" << opts.rule
                << "'\n";
      return kExitConfigError;
    }
  } else if (!(opts.lambda >= 0.0)) {
    std::cerr << "error: --rule fixed needs --lambda >= 0\n";
    return kExitConfigError;
  }
  penlab::StandardizationMode mode;
  if (opts.mode == "raw") {
    mode = penlab::StandardizationMode::kRaw;
  } else if (opts.mode == "univ") {
    mode = penlab::StandardizationMode::kUnivariate;
  } else {
    std::cerr << "error: --mode must be raw or univ\n";
    return kExitConfigError;
  }

  const penlab::TabularDataset table = penlab::load_csv(opts.data, opts.response);
  const Eigen::Index n = table.values.rows();
  const Eigen::Index p = table.values.cols() - 1;
  Eigen::MatrixXd x_raw(n, p);
  std::vector<std::string> covariates;
  Eigen::Index target = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (static_cast<int>(c) == table.response_col) continue;
    covariates.push_back(table.column_names[static_cast<std::size_t>(c)]);
    x_raw.col(target++) = table.values.col(c);
  }
  const Eigen::VectorXd y_raw = table.values.col(table.response_col);

  const penlab::StandardizedData std_data = penlab::center_and_standardize(x_raw, y_raw, mode);
  const penlab::StandardizedData raw_data =
      penlab::center_and_standardize(x_raw, y_raw, penlab::StandardizationMode::kRaw);

  penlab::TuneDiagnostics diag;
  const penlab::FitResult fit =
      *rule == penlab::SelectionRule::kFixed
          ? fixed_rule_fit(opts.method, std_data, raw_data.x, opts.lambda, &diag)
          : penlab::tune_and_refit(*method, std_data, raw_data.x,
                                   penlab::RngStream(opts.seed, 0), penlab::TuneSettings{},
                                   &diag);

  json doc;
  doc["method"] = method ? penlab::method_id(*method) : opts.method;
  doc["mode"] = penlab::to_string(mode);
  doc["rule"] = diag.rule.empty() ? opts.rule : diag.rule;
  doc["lambda"] = diag.lambda;
  doc["converged"] = fit.converged;
  json support = json::array();
  for (int j : fit.support) support.push_back(covariates[static_cast<std::size_t>(j)]);
  doc["support"] = support;
  json coef = json::object();
  const Eigen::VectorXd& refit = fit.refit_beta.value();
  for (int j : fit.support) {
    coef[covariates[static_cast<std::size_t>(j)]] = refit[j];
  }
  doc["coefficients"] = coef;
  if (diag.cv_min_index >= 0) {
    doc["cv"] = {{"min_index", diag.cv_min_index}, {"one_se_index", diag.cv_one_se_index}};
  }
  if (diag.bic_index >= 0) doc["bic_index"] = diag.bic_index;
  if (diag.sigma_hat > 0.0) doc["sigma_hat"] = diag.sigma_hat;
  if (*method == penlab::Method::kRelaxedLasso) doc["phi"] = diag.phi;
  std::cout << doc.dump(2) << '\n';
  return 0;
}

struct ScreenOptions {
  std::string data;
  std::string response;
  std::string method = "r2";
  std::string out;
};

int run_screen(const ScreenOptions& opts) {
  const auto method = penlab::parse_screen_method(opts.method);
  if (!method) {
    std::cerr << "error: unknown screening method '" << opts.method << "' (r2, dc, pls)\n";
    return kExitConfigError;
  }
  const penlab::TabularDataset table = penlab::load_csv(opts.data, opts.response);
  const Eigen::Index n = table.values.rows();
  const Eigen::Index p = table.values.cols() - 1;
  Eigen::MatrixXd x(n, p);
  std::vector<std::string> covariates;
  Eigen::Index target = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (static_cast<int>(c) == table.response_col) continue;
    covariates.push_back(table.column_names[static_cast<std::size_t>(c)]);
    x.col(target++) = table.values.col(c);
  }
  const Eigen::VectorXd y = table.values.col(table.response_col);

  const penlab::ScreenRanking ranking = penlab::screen_rank(x, y, *method);
  std::ostringstream out;
  out << "rank,column,score\n";
  for (std::size_t r = 0; r < ranking.order.size(); ++r) {
    const int j = ranking.order[r];
    out << (r + 1) << ',' << covariates[static_cast<std::size_t>(j)] << ','
        << penlab::format_double(ranking.scores[j]) << '\n';
  }
  if (opts.out.empty()) {
    std::cout << out.str();
  } else {
    write_file(opts.out, out.str());
    std::cout << "wrote " << ranking.order.size() << " rankings to " << opts.out << '\n';
  }
  return 0;
}

struct PipelineOptions {
  std::string data;
  std::string response;
  std::string config_path;
  std::string out;
};

int run_pipeline(const PipelineOptions& opts) {
  penlab::PipelineConfig config;
  if (!opts.config_path.empty()) {
    config = penlab::pipeline_config_from_json(read_file(opts.config_path));
  }
  if (config.methods.empty()) {
    for (penlab::Method m : penlab::all_methods()) config.methods.push_back(m);
  }
  if (opts.out.empty()) {
    std::cerr << "error: --out is required\n";
    return kExitConfigError;
  }

  const penlab::TabularDataset raw = penlab::load_csv(opts.data, opts.response);
  penlab::Provenance provenance;
  const penlab::TabularDataset processed = penlab::preprocess(raw, config, &provenance);
  std::cout << "loaded " << raw.values.rows() << " rows (" << raw.rows_dropped
            << " dropped with gaps); " << provenance.removed_rows.size()
            << " trimmed as outliers; " << processed.values.rows() << " remain\n";

  const std::vector<penlab::EvaluationRow> rows = penlab::real_data_evaluate(processed, config);

  std::vector<std::string> covariates;
  for (std::size_t c = 0; c < processed.column_names.size(); ++c) {
    if (static_cast<int>(c) != processed.response_col) {
      covariates.push_back(processed.column_names[c]);
    }
  }

  const std::string stem = output_stem(opts.out);
  write_file(opts.out, penlab::evaluation_to_csv(rows, covariates));
  write_file(stem + ".provenance.json",
             penlab::provenance_to_json(provenance, raw.column_names) + "\n");

  json manifest;
  manifest["command"] = "pipeline";
  manifest["version"] = kVersion;
  manifest["data"] = opts.data;
  manifest["response"] = opts.response;
  manifest["out"] = opts.out;
  manifest["config"] = json::parse(penlab::pipeline_config_to_json(config));
  write_file(stem + ".manifest.json", manifest.dump(2) + "\n");

  std::cout << "wrote " << rows.size() << " method rows to " << opts.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized covariate-selection laboratory"};
  app.require_subcommand(1);

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo benchmark on a scenario");
  simulate->add_option("--scenario", sim.scenario, "Scenario name (IND, RC.IND, ...)");
  simulate->add_option("--n", sim.n, "Sample size")->capture_default_str();
  simulate->add_option("--rho", sim.rho, "Toeplitz correlation (Toeplitz scenarios)")
      ->capture_default_str();
  simulate->add_option("--methods", sim.methods, "Comma-separated method ids")
      ->capture_default_str();
  simulate->add_option("--modes", sim.modes, "raw, univ or both")->capture_default_str();
  simulate->add_option("--replicates", sim.replicates, "Monte Carlo replicates")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Records CSV path (aggregate/markdown/manifest beside)");
  simulate->add_option("--threads", sim.threads, "Replicate-level threads (PENLAB_THREADS)")
      ->capture_default_str();
  simulate->add_option("--from-manifest", sim.manifest_path, "Replay a previous run's manifest");

  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit one selector on a CSV dataset");
  fit_cmd->add_option("--data", fit.data, "Input CSV")->required();
  fit_cmd->add_option("--response", fit.response, "Response column name")->required();
  fit_cmd->add_option("--method", fit.method,
                      "Family: lasso, adapl, scad, dant, relaxl, sqrtl, scall, dc.vs")
      ->capture_default_str();
  fit_cmd->add_option("--rule", fit.rule, "min, 1se, bic, fixed or default")
      ->capture_default_str();
  fit_cmd->add_option("--mode", fit.mode, "raw or univ")->capture_default_str();
  fit_cmd->add_option("--lambda", fit.lambda, "Penalty for --rule fixed");
  fit_cmd->add_option("--seed", fit.seed, "Seed for CV folds")->capture_default_str();

  ScreenOptions screen;
  CLI::App* screen_cmd = app.add_subcommand("screen", "Rank covariates by marginal relevance");
  screen_cmd->add_option("--data", screen.data, "Input CSV")->required();
  screen_cmd->add_option("--response", screen.response, "Response column name")->required();
  screen_cmd->add_option("--method", screen.method, "r2, dc or pls")->capture_default_str();
  screen_cmd->add_option("--out", screen.out, "Scores CSV (stdout if omitted)");

  PipelineOptions pipe;
  CLI::App* pipe_cmd = app.add_subcommand("pipeline", "Preprocess and evaluate a real dataset");
  pipe_cmd->add_option("--data", pipe.data, "Input CSV")->required();
  pipe_cmd->add_option("--response", pipe.response, "Response column name")->required();
  pipe_cmd->add_option("--config", pipe.config_path, "PipelineConfig JSON");
  pipe_cmd->add_option("--out", pipe.out, "Metrics CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (screen_cmd->parsed()) return run_screen(screen);
    if (pipe_cmd->parsed()) return run_pipeline(pipe);
  } catch (const penlab::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const penlab::UnknownScenario& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitConfigError;
}
