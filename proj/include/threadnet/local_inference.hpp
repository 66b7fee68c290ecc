#pragma once

#include <Eigen/Dense>

#include <map>
#include <vector>

#include "threadnet/corpus.hpp"
#include "threadnet/model.hpp"

namespace threadnet {

/// Precomputed variational expectations of one immutable global snapshot.
/// Shared read-only by concurrent local sweeps.
struct GlobalSnapshot {
  Eigen::MatrixXd elog_pi;    // U x K: Psi(gamma) - Psi(row sum)
  Eigen::MatrixXd elog_beta;  // K x V: Psi(tau) - Psi(row sum)
  Eigen::MatrixXd elog_b;     // K x K: Psi(nu) + log lambda
  Eigen::MatrixXd e_b;        // K x K: nu .* lambda

  static GlobalSnapshot from(const GlobalState& global);
};

/// Per-thread local variational state. phi[e] is the joint K x K pair
/// distribution of train edge e (rows: sender topic, cols: receiver topic);
/// chi[p][i] is the topic distribution of participant p's i-th token.
struct ThreadLocal {
  std::vector<Eigen::MatrixXd> phi;
  std::map<UserId, std::vector<Eigen::VectorXd>> chi;

  /// phi for sampled absent pairs (y = 0), keyed (p, q). Used by the
  /// stochastic estimators only; never part of the ELBO.
  std::map<std::pair<UserId, UserId>, Eigen::MatrixXd> aux_phi;

  static ThreadLocal uniform(const ThreadRecord& thread, int k);

  /// Sum of chi over p's tokens (zero vector if p has no tokens).
  Eigen::VectorXd chi_sum(UserId p, int k) const;
  /// Sender marginals of phi summed over p's stored out-edges, one entry per
  /// topic ("phi row sums" of the chi coupling).
  Eigen::VectorXd phi_sender_sums(const ThreadRecord& thread, UserId p, int k) const;
};

/// Local state across a whole corpus, aligned with corpus.threads.
struct LocalState {
  std::vector<ThreadLocal> threads;
};

// --- updates ---------------------------------------------------------------

/// Log-domain exponent matrix of the pair update for edge (p -> q, weight y).
/// Entry (g, h) is
///   y (log lambda_gh + Psi(nu_gh)) - nu_gh lambda_gh - log y!
///   + Elog pi_{p,g} + Elog pi_{q,h}
///   + omega * chi_sum_sender_g * [ln(eps/d) - 1/d + ln(1 + eps/d)/d],
/// the text coupling dropping out when the sender has no out-edges (d = 0).
Eigen::MatrixXd phi_exponent(long long y, const GlobalSnapshot& snap, UserId p,
                             UserId q, const Eigen::VectorXd& chi_sum_sender,
                             int delta, const HyperParams& hyper);

/// Normalized pair distribution: softmax of phi_exponent with max-subtraction.
Eigen::MatrixXd phi_update(long long y, const GlobalState& global, UserId p,
                           UserId q, const Eigen::VectorXd& chi_sum_sender,
                           int delta, const HyperParams& hyper);

/// Log-domain exponent of the token update for word w owned by a user with
/// out-degree delta. Entry k is
///   Elog beta_{k,w} + ln(eps/d) (1 - s_k)/d + (s_k/d) ln(1 + eps/d)
/// where s_k = phi_sender_sums_k; the coupling is constant when d = 0.
Eigen::VectorXd chi_exponent(int word, const GlobalSnapshot& snap,
                             const Eigen::VectorXd& phi_sender_sums, int delta,
                             const HyperParams& hyper);

Eigen::VectorXd chi_update(int word, const GlobalState& global,
                           const Eigen::VectorXd& phi_sender_sums, int delta,
                           const HyperParams& hyper);

/// Softmax with max-subtraction over a whole matrix (or vector).
Eigen::MatrixXd normalize_log(const Eigen::MatrixXd& log_weights);

// --- sweeps ------------------------------------------------------------------

/// Alternates phi updates over p's edges (both orientations) and chi updates
/// over p's tokens until the max absolute change drops below tol or max_iters
/// is reached. Mutates `state` in place; returns iterations used.
int local_sweep(const ThreadRecord& thread, UserId p, const GlobalSnapshot& snap,
                const HyperParams& hyper, ThreadLocal& state, double tol = 1e-4,
                int max_iters = 50);

/// Fresh uniform init followed by one sweep per participant (ascending id).
ThreadLocal sweep_thread(const ThreadRecord& thread, const GlobalSnapshot& snap,
                         const HyperParams& hyper, double tol = 1e-4,
                         int max_iters = 50);

/// Converged local state for every thread; `workers` > 1 shards threads over
/// that many std::threads (results identical to the sequential pass).
LocalState full_local_pass(const ThreadCorpus& corpus, const GlobalState& global,
                           const HyperParams& hyper, int workers = 1,
                           double tol = 1e-4, int max_iters = 50);

}  // namespace threadnet
