#include "penlab/scenarios.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "penlab/errors.hpp"

namespace penlab {
namespace {

// shared by the equal-scale relevant block: two covariates at each variance
const double kRelevantVariances[10] = {0.5, 0.5, 1.0, 1.0, 3.0, 3.0, 10.0, 10.0, 25.0, 25.0};
// extra unequal-scale noise block
const double kNoisyVariances[12] = {0.5, 0.5, 1.5, 1.5, 3.0,  3.0,
                                    10.0, 10.0, 25.0, 25.0, 50.0, 50.0};

}  // namespace

const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> scenarios = {
      Scenario::kInd,    Scenario::kRcInd,   Scenario::kRncInd,  Scenario::kUtoepB,
      Scenario::kUtoepS, Scenario::kRcToepS, Scenario::kRncToepS};
  return scenarios;
}

std::string scenario_id(Scenario scenario) {
  switch (scenario) {
    case Scenario::kInd: return "IND";
    case Scenario::kRcInd: return "RC.IND";
    case Scenario::kRncInd: return "RNC.IND";
    case Scenario::kUtoepB: return "UTOEP-B";
    case Scenario::kUtoepS: return "UTOEP-S";
    case Scenario::kRcToepS: return "RC.TOEP-S";
    case Scenario::kRncToepS: return "RNC.TOEP-S";
  }
  return "unknown";
}

std::optional<Scenario> parse_scenario(const std::string& id) {
  for (Scenario s : all_scenarios()) {
    if (scenario_id(s) == id) return s;
  }
  return std::nullopt;
}

bool scenario_uses_rho(Scenario scenario) {
  switch (scenario) {
    case Scenario::kUtoepB:
    case Scenario::kUtoepS:
    case Scenario::kRcToepS:
    case Scenario::kRncToepS:
      return true;
    default:
      return false;
  }
}

BetaAndScales beta_and_scales(Scenario name, double rho, int p) {
  if (p < 36) throw UnknownScenario("beta_and_scales: presets need p >= 36");
  if (scenario_uses_rho(name) && !(std::abs(rho) < 1.0)) {
    throw UnknownScenario("beta_and_scales: Toeplitz scenarios need |rho| < 1");
  }

  BetaAndScales out;
  out.beta = Eigen::VectorXd::Zero(p);
  out.scale_diag = Eigen::VectorXd::Ones(p);

  switch (name) {
    case Scenario::kInd:
    case Scenario::kRcInd:
    case Scenario::kRncInd: {
      for (int j = 0; j < 10; ++j) {
        out.beta[j] = 1.25;
        out.support.push_back(j);
      }
      if (name != Scenario::kInd) {
        for (int j = 0; j < 10; ++j) out.scale_diag[j] = kRelevantVariances[j];
      }
      if (name == Scenario::kRncInd) {
        for (int j = 0; j < 12; ++j) out.scale_diag[10 + j] = kNoisyVariances[j];
      }
      break;
    }
    case Scenario::kUtoepB: {
      for (int j = 0; j < 15; ++j) {
        out.beta[j] = 0.5;
        out.support.push_back(j);
      }
      break;
    }
    case Scenario::kUtoepS:
    case Scenario::kRcToepS:
    case Scenario::kRncToepS: {
      // relevant covariates sit every third position: 3, 6, ..., 30 (1-based)
      for (int k = 0; k < 10; ++k) {
        const int j = 3 * (k + 1) - 1;
        out.beta[j] = 0.5;
        out.support.push_back(j);
        if (name != Scenario::kUtoepS) out.scale_diag[j] = kRelevantVariances[k];
      }
      if (name == Scenario::kRncToepS) {
        // noisy neighbours at 2, 5, ..., 35 (1-based)
        for (int k = 0; k < 12; ++k) {
          const int j = 3 * k + 2 - 1;
          out.scale_diag[j] = kNoisyVariances[k];
        }
      }
      break;
    }
  }
  return out;
}

CovarianceSpec covariance_spec(const ScenarioSpec& spec) {
  const BetaAndScales base = beta_and_scales(spec.name, spec.rho, spec.p);
  CovarianceSpec cov;
  cov.base = scenario_uses_rho(spec.name) ? CovarianceSpec::Base::kToeplitz
                                          : CovarianceSpec::Base::kIdentity;
  cov.rho = scenario_uses_rho(spec.name) ? spec.rho : 0.0;
  cov.scale_diag = base.scale_diag;
  return cov;
}

double sigma_eps_calibrate(const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != beta.size() || sigma.cols() != beta.size()) {
    throw DimensionMismatch("sigma_eps_calibrate: beta and Sigma sizes disagree");
  }
  const double signal = beta.dot(sigma * beta);
  if (!(signal > 0.0)) throw ZeroSignal("sigma_eps_calibrate: beta' Sigma beta must be positive");
  return std::sqrt((1.0 - kDevianceTarget) / kDevianceTarget * signal);
}

ScenarioTruth scenario_truth(const ScenarioSpec& spec) {
  const BetaAndScales base = beta_and_scales(spec.name, spec.rho, spec.p);
  const Eigen::MatrixXd sigma = build_covariance(covariance_spec(spec));
  ScenarioTruth truth;
  truth.beta = base.beta;
  truth.support = base.support;
  truth.scale_diag = base.scale_diag;
  truth.sigma_eps = sigma_eps_calibrate(base.beta, sigma);
  return truth;
}

SimulatedDataset generate(const ScenarioSpec& spec, RngStream rng) {
  if (spec.n < 2) throw InvalidArgument("generate: need n >= 2");
  SimulatedDataset data;
  data.truth = scenario_truth(spec);
  data.stream_key = rng.key();

  const Eigen::MatrixXd sigma = build_covariance(covariance_spec(spec));
  Eigen::MatrixXd x = mvn_sample(spec.n, sigma, rng);
  Eigen::VectorXd noise(spec.n);
  for (int i = 0; i < spec.n; ++i) noise[i] = data.truth.sigma_eps * rng.next_gaussian();
  const Eigen::VectorXd y = x * data.truth.beta + noise;

  const StandardizedData centered = center_and_standardize(x, y, StandardizationMode::kRaw);
  data.x = centered.x;
  data.y = centered.y;
  return data;
}

ConditionCheck check_conditions(const ScenarioSpec& spec) {
  const BetaAndScales base = beta_and_scales(spec.name, spec.rho, spec.p);
  const double s = static_cast<double>(base.support.size());
  const double log_p = std::log(static_cast<double>(spec.p));
  ConditionCheck check;
  check.consistency = static_cast<double>(spec.n) > s * log_p;
  double beta_min = std::numeric_limits<double>::infinity();
  for (int j : base.support) beta_min = std::min(beta_min, std::abs(base.beta[j]));
  check.beta_min = beta_min > std::sqrt(s * log_p / static_cast<double>(spec.n));
  return check;
}

std::string scenario_to_json(const ScenarioSpec& spec, std::uint64_t seed) {
  nlohmann::json doc;
  doc["scenario"] = scenario_id(spec.name);
  doc["n"] = spec.n;
  doc["rho"] = spec.rho;
  doc["p"] = spec.p;
  doc["seed"] = seed;
  return doc.dump(2);
}

std::pair<ScenarioSpec, std::uint64_t> scenario_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  ScenarioSpec spec;
  const auto parsed = parse_scenario(doc.at("scenario").get<std::string>());
  if (!parsed) throw UnknownScenario("scenario_from_json: " + doc.at("scenario").dump());
  spec.name = *parsed;
  spec.n = doc.at("n").get<int>();
  spec.rho = doc.value("rho", 0.0);
  spec.p = doc.value("p", kScenarioP);
  return {spec, doc.value("seed", std::uint64_t{0})};
}

}  // namespace penlab
