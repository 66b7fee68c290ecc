#pragma once

#include <Eigen/Dense>

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace threadnet {

/// Model priors and inference constants. kappa/theta are the K x K Gamma
/// shape/scale priors for the block matrix (mean kappa * theta); alpha is the
/// membership Dirichlet prior; eta_word the word-topic Dirichlet prior.
struct HyperParams {
  Eigen::VectorXd alpha;   // K, > 0
  double eta_word = 0.05;  // > 0
  Eigen::MatrixXd kappa;   // K x K, > 0
  Eigen::MatrixXd theta;   // K x K, > 0
  double omega = 1e-4;     // >= 0, text-to-network balance in the phi update
  double epsilon = 1e-6;   // > 0, smoothing constant of the token coupling
  int k = 1;               // topic / community count
  double zeta = 1024.0;    // SGD schedule offset
  double rho = 0.5;        // SGD schedule exponent, [0.5, 1]
  double rho_nu = 1e-3;    // gradient step for nu, > 0

  /// Symmetric construction: scalar alpha, diag/off-diag kappa and theta.
  static HyperParams symmetric(int k, double alpha_scalar, double eta_word,
                               double kappa_diag, double kappa_off,
                               double theta_diag, double theta_off,
                               double omega = 1e-4);

  /// The tuned Cancer-ThreadStarter preset: alpha 0.05, omega 1e-4,
  /// theta/kappa 2.5 diag ~ 1.5 off-diag, eta 0.05, K 10.
  static HyperParams ts_preset();

  void validate() const;  // throws std::invalid_argument
};

/// Variational global parameters. Rows of gamma normalize to the membership
/// estimates; normalized tau rows estimate the word-topic distributions;
/// q(B_gh) = Gamma(shape nu_gh, scale lambda_gh), so E[B] = nu .* lambda.
struct GlobalState {
  Eigen::MatrixXd gamma;   // U x K, > 0
  Eigen::MatrixXd tau;     // K x V, > 0
  Eigen::MatrixXd nu;      // K x K, > 0
  Eigen::MatrixXd lambda;  // K x K, > 0

  int num_users() const { return static_cast<int>(gamma.rows()); }
  int num_topics() const { return static_cast<int>(gamma.cols()); }
  int vocab_size() const { return static_cast<int>(tau.cols()); }

  void validate() const;  // throws std::invalid_argument on non-positive entries
};

nlohmann::json hyper_to_json(const HyperParams& hyper);
HyperParams hyper_from_json(const nlohmann::json& j);

HyperParams load_hyper(const std::string& path);
void save_hyper(const HyperParams& hyper, const std::string& path);

}  // namespace threadnet
