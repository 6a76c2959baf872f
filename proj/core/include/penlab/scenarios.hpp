#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "penlab/numerics.hpp"
#include "penlab/rng.hpp"

namespace penlab {

/// Largest fraction of deviance the signal may explain; the noise variance
/// is calibrated against it.
inline constexpr double kDevianceTarget = 0.9;
inline constexpr int kScenarioP = 100;

enum class Scenario { kInd, kRcInd, kRncInd, kUtoepB, kUtoepS, kRcToepS, kRncToepS };

const std::vector<Scenario>& all_scenarios();
std::string scenario_id(Scenario scenario);
std::optional<Scenario> parse_scenario(const std::string& id);
bool scenario_uses_rho(Scenario scenario);

struct ScenarioSpec {
  Scenario name = Scenario::kInd;
  int n = 100;
  double rho = 0.0;  // Toeplitz families only
  int p = kScenarioP;
};

struct BetaAndScales {
  Eigen::VectorXd beta;
  std::vector<int> support;     // 0-based indices of nonzero coefficients
  Eigen::VectorXd scale_diag;   // per-covariate variances
};

/// Exact coefficient vector, support and scale diagonal for a scenario.
BetaAndScales beta_and_scales(Scenario name, double rho, int p = kScenarioP);

CovarianceSpec covariance_spec(const ScenarioSpec& spec);

/// sigma_eps = sqrt((1 - target)/target * beta' Sigma beta); the oracle
/// in-sample MSE of the true model is sigma_eps^2.
double sigma_eps_calibrate(const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma);

struct ScenarioTruth {
  Eigen::VectorXd beta;
  std::vector<int> support;
  Eigen::VectorXd scale_diag;
  double sigma_eps = 0.0;
};

ScenarioTruth scenario_truth(const ScenarioSpec& spec);

struct SimulatedDataset {
  Eigen::MatrixXd x;  // centered, original covariate scales
  Eigen::VectorXd y;  // centered
  ScenarioTruth truth;
  std::uint64_t stream_key = 0;
};

/// X ~ N(0, Sigma), y = X beta + eps, both centered at their sample means.
/// The same stream always reproduces the dataset bit for bit.
SimulatedDataset generate(const ScenarioSpec& spec, RngStream rng);

struct ConditionCheck {
  bool consistency = false;  // n > s log(p)
  bool beta_min = false;     // min_j |beta_j| > sqrt(s log(p)/n) over the support
};

ConditionCheck check_conditions(const ScenarioSpec& spec);

/// JSON round-trip for declarative runs: {"scenario","n","rho","seed"}.
std::string scenario_to_json(const ScenarioSpec& spec, std::uint64_t seed);
std::pair<ScenarioSpec, std::uint64_t> scenario_from_json(const std::string& text);

}  // namespace penlab
