#pragma once

#include <Eigen/Dense>

#include "threadnet/corpus.hpp"
#include "threadnet/local_inference.hpp"
#include "threadnet/model.hpp"

namespace threadnet {

/// E_q[log Dirichlet(x | prior)] where q = Dirichlet(params).
double dirichlet_logprior(const Eigen::VectorXd& prior,
                          const Eigen::VectorXd& params);
/// Entropy of Dirichlet(params).
double dirichlet_entropy(const Eigen::VectorXd& params);
/// E_q[log Gamma(b | shape, scale)] where q = Gamma(nu, lambda) (scale form).
double gamma_logprior(double shape, double scale, double nu, double lambda);
/// Entropy of Gamma(nu, lambda), scale parameterization.
double gamma_entropy(double nu, double lambda);

/// Per-topic expected log weight of the token-topic coupling for a user with
/// out-degree delta and sender-marginal sums s:
///   ln(eps/d) (1 - s_k)/d + (s_k/d) ln(1 + eps/d),
/// which is the affine-in-counts smoothed conditional evaluated at E[counts];
/// log(1/K) per topic when delta = 0.
Eigen::VectorXd coupling_elog(const Eigen::VectorXd& phi_sender_sums, int delta,
                              const HyperParams& hyper);

/// The evidence lower bound over the corpus's train edges and tokens:
/// Poisson edge expectations under phi and q(B), membership terms under the
/// phi marginals, token terms under chi with the z-bar coupling, priors for
/// Pi, beta, B, and the entropies of every q factor. `local` must cover
/// exactly the corpus's edges and tokens (shape mismatch throws).
double elbo(const ThreadCorpus& corpus, const GlobalState& global,
            const LocalState& local, const HyperParams& hyper);

}  // namespace threadnet
