#include "threadnet/global_updates.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "threadnet/rng.hpp"
#include "threadnet/special_functions.hpp"

namespace threadnet {

namespace {

void check_local(const ThreadCorpus& corpus, const LocalState& local) {
  if (local.threads.size() != corpus.threads.size()) {
    throw std::invalid_argument("local state does not cover the corpus");
  }
}

}  // namespace

Eigen::MatrixXd gamma_update_batch(const ThreadCorpus& corpus,
                                   const LocalState& local,
                                   const HyperParams& hyper) {
  check_local(corpus, local);
  const int k = hyper.k;
  Eigen::MatrixXd gamma(corpus.num_users, k);
  gamma.rowwise() = hyper.alpha.transpose();
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    const auto& thread = corpus.threads[t];
    for (size_t e = 0; e < thread.edges.size(); ++e) {
      const auto& edge = thread.edges[e];
      const Eigen::MatrixXd& phi = local.threads[t].phi[e];
      gamma.row(edge.src) += phi.rowwise().sum().transpose();
      gamma.row(edge.dst) += phi.colwise().sum();
    }
  }
  return gamma;
}

Eigen::MatrixXd tau_update_batch(const ThreadCorpus& corpus,
                                 const LocalState& local,
                                 const HyperParams& hyper) {
  check_local(corpus, local);
  Eigen::MatrixXd tau =
      Eigen::MatrixXd::Constant(hyper.k, corpus.vocab_size, hyper.eta_word);
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    const auto& thread = corpus.threads[t];
    for (const auto& [p, tokens] : thread.docs) {
      const auto it = local.threads[t].chi.find(p);
      if (it == local.threads[t].chi.end()) continue;
      for (size_t i = 0; i < tokens.size(); ++i) {
        tau.col(tokens[i]) += it->second[i];
      }
    }
  }
  return tau;
}

Eigen::MatrixXd lambda_update_batch(const ThreadCorpus& corpus,
                                    const LocalState& local,
                                    const GlobalState& global,
                                    const HyperParams& hyper) {
  check_local(corpus, local);
  if ((global.nu.array() <= 0.0).any()) {
    throw std::invalid_argument("lambda_update_batch: nu must be positive");
  }
  const int k = hyper.k;
  Eigen::MatrixXd phi_sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd phi_y_sum = Eigen::MatrixXd::Zero(k, k);
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    const auto& thread = corpus.threads[t];
    for (size_t e = 0; e < thread.edges.size(); ++e) {
      const Eigen::MatrixXd& phi = local.threads[t].phi[e];
      phi_sum += phi;
      phi_y_sum += static_cast<double>(thread.edges[e].weight) * phi;
    }
  }
  return (phi_y_sum + hyper.kappa).array() /
         ((phi_sum + hyper.theta.cwiseInverse()).array() * global.nu.array());
}

Eigen::MatrixXd nu_gradient(const ThreadCorpus& corpus, const LocalState& local,
                            const GlobalState& global, const HyperParams& hyper) {
  check_local(corpus, local);
  const int k = hyper.k;
  Eigen::MatrixXd phi_sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd phi_y_sum = Eigen::MatrixXd::Zero(k, k);
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    const auto& thread = corpus.threads[t];
    for (size_t e = 0; e < thread.edges.size(); ++e) {
      const Eigen::MatrixXd& phi = local.threads[t].phi[e];
      phi_sum += phi;
      phi_y_sum += static_cast<double>(thread.edges[e].weight) * phi;
    }
  }
  Eigen::MatrixXd psi1(k, k);
  for (int g = 0; g < k; ++g) {
    for (int h = 0; h < k; ++h) psi1(g, h) = trigamma(global.nu(g, h));
  }
  return (phi_y_sum.array() * psi1.array() - phi_sum.array() * global.lambda.array() +
          (hyper.kappa - global.nu).array() * psi1.array() + 1.0 -
          global.lambda.array() / hyper.theta.array())
      .matrix();
}

Eigen::MatrixXd nu_gradient_step(const ThreadCorpus& corpus,
                                 const LocalState& local,
                                 const GlobalState& global,
                                 const HyperParams& hyper) {
  Eigen::MatrixXd next =
      global.nu + hyper.rho_nu * nu_gradient(corpus, local, global, hyper);
  return next.cwiseMax(1e-6);
}

// --- neighborhood sub-sampling -------------------------------------------------

NeighborSample sample_neighborhood(const ThreadCorpus& corpus, UserId p, int size,
                                   std::uint64_t seed,
                                   const std::vector<int>& thread_subset) {
  std::vector<int> threads;
  if (thread_subset.empty()) {
    threads.resize(corpus.threads.size());
    for (size_t t = 0; t < corpus.threads.size(); ++t) threads[t] = static_cast<int>(t);
  } else {
    threads = thread_subset;
    std::sort(threads.begin(), threads.end());
  }

  NeighborSample nonzero;
  NeighborSample zero;
  for (int t : threads) {
    const ThreadRecord& thread = corpus.threads[t];
    if (!thread.is_participant(p)) continue;
    std::set<UserId> adjacent;
    if (auto it = thread.out_edges.find(p); it != thread.out_edges.end()) {
      for (int e : it->second) adjacent.insert(thread.edges[e].dst);
    }
    if (auto it = thread.in_edges.find(p); it != thread.in_edges.end()) {
      for (int e : it->second) adjacent.insert(thread.edges[e].src);
    }
    for (UserId q : adjacent) {
      NeighborEntry entry;
      entry.thread_idx = t;
      entry.q = q;
      if (auto it = thread.out_edges.find(p); it != thread.out_edges.end()) {
        for (int e : it->second) {
          if (thread.edges[e].dst == q) {
            entry.edge_pq = e;
            entry.y = thread.edges[e].weight;
          }
        }
      }
      if (auto it = thread.out_edges.find(q); it != thread.out_edges.end()) {
        for (int e : it->second) {
          if (thread.edges[e].dst == p) entry.edge_qp = e;
        }
      }
      nonzero.push_back(entry);
    }
    for (const auto& [q, tokens] : thread.docs) {
      if (q == p || adjacent.count(q)) continue;
      NeighborEntry entry;
      entry.thread_idx = t;
      entry.q = q;
      zero.push_back(entry);
    }
  }

  auto rng = make_engine(seed, "neighborhood", static_cast<std::uint64_t>(p));
  auto take = [&rng](NeighborSample& pool, size_t count) {
    count = std::min(count, pool.size());
    for (size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
  };
  const size_t half = static_cast<size_t>(std::max(0, size)) / 2;
  take(nonzero, half);
  take(zero, nonzero.size());  // counts stay equal, truncated to availability

  NeighborSample sample = std::move(nonzero);
  sample.insert(sample.end(), zero.begin(), zero.end());
  return sample;
}

void materialize_zero_phi(const ThreadCorpus& corpus, UserId p,
                          const NeighborSample& sample, const GlobalSnapshot& snap,
                          const HyperParams& hyper, LocalState& local) {
  check_local(corpus, local);
  for (const auto& entry : sample) {
    if (entry.edge_pq >= 0) continue;
    ThreadLocal& tl = local.threads[entry.thread_idx];
    const ThreadRecord& thread = corpus.threads[entry.thread_idx];
    const Eigen::VectorXd chi_sum = tl.chi_sum(p, hyper.k);
    tl.aux_phi[{p, entry.q}] = normalize_log(
        phi_exponent(0, snap, p, entry.q, chi_sum, thread.delta(p), hyper));
  }
}

Eigen::VectorXd gamma_local_estimate(UserId p, const NeighborSample& sample,
                                     const LocalState& local,
                                     const HyperParams& hyper, long long n_edges,
                                     long long n_threads) {
  Eigen::VectorXd row = hyper.alpha;
  if (sample.empty()) return row;
  const double scale = static_cast<double>(n_edges) *
                       static_cast<double>(n_threads) /
                       (2.0 * static_cast<double>(sample.size()));
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(hyper.k);
  for (const auto& entry : sample) {
    const ThreadLocal& tl = local.threads[entry.thread_idx];
    if (entry.edge_pq >= 0) {
      acc += tl.phi[entry.edge_pq].rowwise().sum();
    } else if (auto it = tl.aux_phi.find({p, entry.q}); it != tl.aux_phi.end()) {
      acc += it->second.rowwise().sum();
    }
    if (entry.edge_qp >= 0) {
      acc += tl.phi[entry.edge_qp].colwise().sum().transpose();
    }
  }
  row += scale * acc;
  return row;
}

StochasticEstimates nu_lambda_tau_local_estimates(
    const std::map<UserId, NeighborSample>& samples, const ThreadCorpus& corpus,
    const LocalState& local, const GlobalState& global, const HyperParams& hyper,
    long long n_edges, long long n_threads) {
  check_local(corpus, local);
  const int k = hyper.k;
  Eigen::MatrixXd phi_sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd phi_y_sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd tau =
      Eigen::MatrixXd::Constant(k, corpus.vocab_size, hyper.eta_word);

  const double nt = static_cast<double>(n_edges) * static_cast<double>(n_threads);
  std::set<std::pair<int, int>> seen_edges;           // (thread, edge index)
  std::set<std::pair<int, UserId>> seen_docs;         // (thread, user)
  for (const auto& [p, sample] : samples) {
    if (sample.empty()) continue;
    const double scale = nt / (2.0 * static_cast<double>(sample.size()));
    std::set<int> sample_threads;
    for (const auto& entry : sample) {
      sample_threads.insert(entry.thread_idx);
      const ThreadLocal& tl = local.threads[entry.thread_idx];
      if (entry.edge_pq >= 0) {
        if (seen_edges.insert({entry.thread_idx, entry.edge_pq}).second) {
          const Eigen::MatrixXd& phi = tl.phi[entry.edge_pq];
          phi_sum += scale * phi;
          phi_y_sum += scale * static_cast<double>(entry.y) * phi;
        }
      } else if (auto it = tl.aux_phi.find({p, entry.q}); it != tl.aux_phi.end()) {
        phi_sum += scale * it->second;  // y = 0 contributes nothing to phi_y
      }
      if (entry.edge_qp >= 0 &&
          seen_edges.insert({entry.thread_idx, entry.edge_qp}).second) {
        const Eigen::MatrixXd& phi = tl.phi[entry.edge_qp];
        phi_sum += scale * phi;
        phi_y_sum +=
            scale * static_cast<double>(corpus.threads[entry.thread_idx]
                                            .edges[entry.edge_qp]
                                            .weight) *
            phi;
      }
    }
    for (int t : sample_threads) {
      if (!seen_docs.insert({t, p}).second) continue;
      const auto it = local.threads[t].chi.find(p);
      if (it == local.threads[t].chi.end()) continue;
      const auto& tokens = corpus.threads[t].docs.at(p);
      for (size_t i = 0; i < tokens.size(); ++i) {
        tau.col(tokens[i]) += scale * it->second[i];
      }
    }
  }

  StochasticEstimates est;
  est.tau = std::move(tau);
  est.lambda = (phi_y_sum + hyper.kappa).array() /
               ((phi_sum + hyper.theta.cwiseInverse()).array() * global.nu.array());

  Eigen::MatrixXd psi1(k, k);
  for (int g = 0; g < k; ++g) {
    for (int h = 0; h < k; ++h) psi1(g, h) = trigamma(global.nu(g, h));
  }
  const Eigen::MatrixXd grad =
      (phi_y_sum.array() * psi1.array() - phi_sum.array() * global.lambda.array() +
       (hyper.kappa - global.nu).array() * psi1.array() + 1.0 -
       global.lambda.array() / hyper.theta.array())
          .matrix();
  est.nu = (global.nu + hyper.rho_nu * grad).cwiseMax(1e-6);
  return est;
}

double learning_rate(long long t, double zeta, double rho) {
  return 1.0 / std::pow(static_cast<double>(t) + zeta, rho);
}

GlobalState mix_global(const GlobalState& old_state, const GlobalState& estimate,
                       double xi) {
  if (xi < 0.0 || xi > 1.0) {
    throw std::invalid_argument("mix_global: xi must lie in [0, 1]");
  }
  if (old_state.gamma.rows() != estimate.gamma.rows() ||
      old_state.gamma.cols() != estimate.gamma.cols() ||
      old_state.tau.rows() != estimate.tau.rows() ||
      old_state.tau.cols() != estimate.tau.cols() ||
      old_state.nu.rows() != estimate.nu.rows() ||
      old_state.lambda.rows() != estimate.lambda.rows()) {
    throw std::invalid_argument("mix_global: shape mismatch");
  }
  GlobalState next;
  next.gamma = (1.0 - xi) * old_state.gamma + xi * estimate.gamma;
  next.tau = (1.0 - xi) * old_state.tau + xi * estimate.tau;
  next.nu = (1.0 - xi) * old_state.nu + xi * estimate.nu;
  next.lambda = (1.0 - xi) * old_state.lambda + xi * estimate.lambda;
  return next;
}

}  // namespace threadnet
