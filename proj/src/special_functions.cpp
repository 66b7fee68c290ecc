#include "threadnet/special_functions.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace threadnet {

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: argument must be positive");
  }
  double acc = 0.0;
  // Shift up until the asymptotic series is accurate.
  while (x < 8.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // de Moivre expansion: log x - 1/(2x) - sum B_{2k}/(2k x^{2k})
  double series = inv2 * (1.0 / 12.0 -
                  inv2 * (1.0 / 120.0 -
                  inv2 * (1.0 / 252.0 -
                  inv2 * (1.0 / 240.0 -
                  inv2 * (1.0 / 132.0)))));
  return acc + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("trigamma: argument must be positive");
  }
  double acc = 0.0;
  while (x < 8.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum B_{2k} x^{-(2k+1)}
  double series = inv * (1.0 +
                  inv * (0.5 +
                  inv * (1.0 / 6.0 -
                  inv2 * (1.0 / 30.0 -
                  inv2 * (1.0 / 42.0 -
                  inv2 * (1.0 / 30.0 -
                  inv2 * (5.0 / 66.0)))))));
  return acc + series;
}

double log_factorial(long long y) {
  if (y < 0) {
    throw std::domain_error("log_factorial: negative argument");
  }
  // Edge weights repeat heavily, so keep a table for the small ones.
  static constexpr int kTableSize = 256;
  static std::array<double, kTableSize> table;
  static std::once_flag once;
  std::call_once(once, [] {
    table[0] = 0.0;
    for (int i = 1; i < kTableSize; ++i) {
      table[i] = table[i - 1] + std::log(static_cast<double>(i));
    }
  });
  if (y < kTableSize) return table[static_cast<int>(y)];
  return std::lgamma(static_cast<double>(y) + 1.0);
}

Eigen::VectorXd dirichlet_elog(const Eigen::VectorXd& params) {
  if (params.size() == 0 || (params.array() <= 0.0).any()) {
    throw std::domain_error("dirichlet_elog: parameters must be positive");
  }
  const double psi_total = digamma(params.sum());
  Eigen::VectorXd out(params.size());
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    out[k] = digamma(params[k]) - psi_total;
  }
  return out;
}

double poisson_logpmf(long long y, double log_rate_expect, double rate_expect) {
  if (y < 0) {
    throw std::domain_error("poisson_logpmf: negative count");
  }
  return static_cast<double>(y) * log_rate_expect - rate_expect - log_factorial(y);
}

}  // namespace threadnet
