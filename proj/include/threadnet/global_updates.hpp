#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <vector>

#include "threadnet/corpus.hpp"
#include "threadnet/local_inference.hpp"
#include "threadnet/model.hpp"

namespace threadnet {

// --- batch updates -----------------------------------------------------------

/// gamma_{p,k} = alpha_k + sum of sender marginals over p's out-edges plus
/// receiver marginals over p's in-edges, across all threads.
Eigen::MatrixXd gamma_update_batch(const ThreadCorpus& corpus,
                                   const LocalState& local,
                                   const HyperParams& hyper);

/// tau_{k,v} = eta + sum of chi over all tokens equal to v.
Eigen::MatrixXd tau_update_batch(const ThreadCorpus& corpus,
                                 const LocalState& local,
                                 const HyperParams& hyper);

/// lambda_{g,h} = (sum phi y + kappa) / ((sum phi + 1/theta) nu).
Eigen::MatrixXd lambda_update_batch(const ThreadCorpus& corpus,
                                    const LocalState& local,
                                    const GlobalState& global,
                                    const HyperParams& hyper);

/// dL/dnu_{g,h} = sum phi (y Psi'(nu) - lambda) + (kappa - nu) Psi'(nu)
///                + 1 - lambda/theta.
Eigen::MatrixXd nu_gradient(const ThreadCorpus& corpus, const LocalState& local,
                            const GlobalState& global, const HyperParams& hyper);

/// One ascent step nu + rho_nu * dL/dnu, clamped to >= 1e-6.
Eigen::MatrixXd nu_gradient_step(const ThreadCorpus& corpus,
                                 const LocalState& local,
                                 const GlobalState& global,
                                 const HyperParams& hyper);

// --- neighborhood sub-sampling -------------------------------------------------

/// One sampled neighbor pair of user p: thread index, the other endpoint, the
/// observed weight (0 for absent pairs) and the stored edge indices for both
/// orientations (-1 when that direction is not a stored edge).
struct NeighborEntry {
  int thread_idx = -1;
  UserId q = -1;
  long long y = 0;
  int edge_pq = -1;
  int edge_qp = -1;
};
using NeighborSample = std::vector<NeighborEntry>;

/// Up to size/2 of p's stored neighbor pairs uniformly, plus an equal count
/// (truncated to availability) of absent within-thread pairs. Deterministic
/// per seed. thread_subset empty means all threads.
NeighborSample sample_neighborhood(const ThreadCorpus& corpus, UserId p, int size,
                                   std::uint64_t seed,
                                   const std::vector<int>& thread_subset = {});

/// Fills phi for the sample's absent pairs into local.threads[t].aux_phi
/// (one phi_update with y = 0 against the snapshot).
void materialize_zero_phi(const ThreadCorpus& corpus, UserId p,
                          const NeighborSample& sample, const GlobalSnapshot& snap,
                          const HyperParams& hyper, LocalState& local);

// --- stochastic local estimates ------------------------------------------------

/// gamma'_{p,k} = alpha_k + (NT / 2|S_p|) * (sampled sender + receiver
/// marginal sums). Returns alpha when the sample is empty.
Eigen::VectorXd gamma_local_estimate(UserId p, const NeighborSample& sample,
                                     const LocalState& local,
                                     const HyperParams& hyper, long long n_edges,
                                     long long n_threads);

struct StochasticEstimates {
  Eigen::MatrixXd nu;
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd tau;
};

/// nu/lambda/tau counterparts over a set of per-user samples: the batch sums
/// restricted to sampled pairs, each user's contribution scaled by
/// NT / 2|S_p|, pairs seen once (first sampling user wins). tau sums the
/// sampled users' documents within their sampled threads.
StochasticEstimates nu_lambda_tau_local_estimates(
    const std::map<UserId, NeighborSample>& samples, const ThreadCorpus& corpus,
    const LocalState& local, const GlobalState& global, const HyperParams& hyper,
    long long n_edges, long long n_threads);

// --- schedule ---------------------------------------------------------------

/// xi_t = 1 / (t + zeta)^rho.
double learning_rate(long long t, double zeta, double rho);

/// Elementwise (1 - xi) * old + xi * est for every global parameter.
GlobalState mix_global(const GlobalState& old_state, const GlobalState& estimate,
                       double xi);

}  // namespace threadnet
