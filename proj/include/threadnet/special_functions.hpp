#pragma once

#include <Eigen/Dense>

namespace threadnet {

/// Digamma function Psi(x) = d/dx log Gamma(x).
/// Recurrence shift into the asymptotic region followed by the de Moivre
/// expansion; relative error below 1e-12 for x >= 1e-3.
/// Throws std::domain_error for x <= 0.
double digamma(double x);

/// Trigamma function Psi'(x). Same recurrence + asymptotic scheme as digamma.
/// Throws std::domain_error for x <= 0.
double trigamma(double x);

/// log(y!) via lgamma, with a small cached table for the frequent weights.
double log_factorial(long long y);

/// E[log x_k] under Dirichlet(params): Psi(params_k) - Psi(sum params).
/// Throws std::domain_error if any entry is <= 0.
Eigen::VectorXd dirichlet_elog(const Eigen::VectorXd& params);

/// Variational expectation of a Poisson log-pmf:
///   y * E[log rate] - E[rate] - log(y!).
double poisson_logpmf(long long y, double log_rate_expect, double rate_expect);

}  // namespace threadnet
