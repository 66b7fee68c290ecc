#include "threadnet/local_inference.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "threadnet/special_functions.hpp"

namespace threadnet {

GlobalSnapshot GlobalSnapshot::from(const GlobalState& global) {
  global.validate();
  GlobalSnapshot snap;
  const int u = global.num_users();
  const int k = global.num_topics();
  const int v = global.vocab_size();
  snap.elog_pi.resize(u, k);
  for (int p = 0; p < u; ++p) {
    snap.elog_pi.row(p) = dirichlet_elog(global.gamma.row(p).transpose()).transpose();
  }
  snap.elog_beta.resize(k, v);
  for (int t = 0; t < k; ++t) {
    snap.elog_beta.row(t) = dirichlet_elog(global.tau.row(t).transpose()).transpose();
  }
  snap.elog_b.resize(k, k);
  for (int g = 0; g < k; ++g) {
    for (int h = 0; h < k; ++h) {
      snap.elog_b(g, h) = digamma(global.nu(g, h)) + std::log(global.lambda(g, h));
    }
  }
  snap.e_b = global.nu.cwiseProduct(global.lambda);
  return snap;
}

ThreadLocal ThreadLocal::uniform(const ThreadRecord& thread, int k) {
  ThreadLocal state;
  state.phi.assign(thread.edges.size(),
                   Eigen::MatrixXd::Constant(k, k, 1.0 / (k * k)));
  for (const auto& [user, tokens] : thread.docs) {
    if (tokens.empty()) continue;
    state.chi[user].assign(tokens.size(),
                           Eigen::VectorXd::Constant(k, 1.0 / k));
  }
  return state;
}

Eigen::VectorXd ThreadLocal::chi_sum(UserId p, int k) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
  const auto it = chi.find(p);
  if (it == chi.end()) return sum;
  for (const auto& c : it->second) sum += c;
  return sum;
}

Eigen::VectorXd ThreadLocal::phi_sender_sums(const ThreadRecord& thread, UserId p,
                                             int k) const {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(k);
  const auto it = thread.out_edges.find(p);
  if (it == thread.out_edges.end()) return sums;
  for (int e : it->second) sums += phi[e].rowwise().sum();
  return sums;
}

Eigen::MatrixXd normalize_log(const Eigen::MatrixXd& log_weights) {
  const double m = log_weights.maxCoeff();
  Eigen::MatrixXd out = (log_weights.array() - m).exp();
  return out / out.sum();
}

namespace {

// The shared bracket ln(eps/d) - 1/d + ln(1 + eps/d)/d of the phi coupling.
double phi_coupling_bracket(double epsilon, int delta) {
  const double d = static_cast<double>(delta);
  return std::log(epsilon / d) - 1.0 / d + std::log1p(epsilon / d) / d;
}

}  // namespace

Eigen::MatrixXd phi_exponent(long long y, const GlobalSnapshot& snap, UserId p,
                             UserId q, const Eigen::VectorXd& chi_sum_sender,
                             int delta, const HyperParams& hyper) {
  if (y < 0) throw std::invalid_argument("phi_exponent: negative weight");
  const int k = static_cast<int>(snap.elog_b.rows());
  const double logfact = log_factorial(y);
  Eigen::MatrixXd ex =
      static_cast<double>(y) * snap.elog_b - snap.e_b -
      Eigen::MatrixXd::Constant(k, k, logfact);
  ex.colwise() += snap.elog_pi.row(p).transpose();
  ex.rowwise() += snap.elog_pi.row(q);
  if (hyper.omega > 0.0 && delta >= 1 && chi_sum_sender.size() == k) {
    const double bracket = phi_coupling_bracket(hyper.epsilon, delta);
    ex.colwise() += (hyper.omega * bracket) * chi_sum_sender;
  }
  return ex;
}

Eigen::MatrixXd phi_update(long long y, const GlobalState& global, UserId p,
                           UserId q, const Eigen::VectorXd& chi_sum_sender,
                           int delta, const HyperParams& hyper) {
  const GlobalSnapshot snap = GlobalSnapshot::from(global);
  return normalize_log(phi_exponent(y, snap, p, q, chi_sum_sender, delta, hyper));
}

Eigen::VectorXd chi_exponent(int word, const GlobalSnapshot& snap,
                             const Eigen::VectorXd& phi_sender_sums, int delta,
                             const HyperParams& hyper) {
  if (word < 0 || word >= snap.elog_beta.cols()) {
    throw std::invalid_argument("chi_exponent: word id outside vocabulary");
  }
  Eigen::VectorXd ex = snap.elog_beta.col(word);
  if (delta >= 1) {
    const double d = static_cast<double>(delta);
    const double log_eps = std::log(hyper.epsilon / d);
    const double log_one = std::log1p(hyper.epsilon / d);
    ex += (log_eps / d) * (1.0 - phi_sender_sums.array()).matrix() +
          (log_one / d) * phi_sender_sums;
  }
  // delta == 0: the token prior is uniform, a constant the softmax removes.
  return ex;
}

Eigen::VectorXd chi_update(int word, const GlobalState& global,
                           const Eigen::VectorXd& phi_sender_sums, int delta,
                           const HyperParams& hyper) {
  const GlobalSnapshot snap = GlobalSnapshot::from(global);
  return normalize_log(chi_exponent(word, snap, phi_sender_sums, delta, hyper));
}

int local_sweep(const ThreadRecord& thread, UserId p, const GlobalSnapshot& snap,
                const HyperParams& hyper, ThreadLocal& state, double tol,
                int max_iters) {
  if (!thread.is_participant(p)) {
    throw std::invalid_argument("local_sweep: user is not a thread participant");
  }
  if (tol <= 0.0) throw std::invalid_argument("local_sweep: tol must be > 0");
  const int k = hyper.k;

  std::vector<int> edge_ids;
  if (auto it = thread.out_edges.find(p); it != thread.out_edges.end()) {
    edge_ids.insert(edge_ids.end(), it->second.begin(), it->second.end());
  }
  if (auto it = thread.in_edges.find(p); it != thread.in_edges.end()) {
    edge_ids.insert(edge_ids.end(), it->second.begin(), it->second.end());
  }
  auto chi_it = state.chi.find(p);
  const bool has_tokens = chi_it != state.chi.end();
  const auto& tokens = thread.docs.at(p);

  int iter = 0;
  for (; iter < max_iters; ++iter) {
    double max_change = 0.0;
    for (int e : edge_ids) {
      const auto& edge = thread.edges[e];
      const Eigen::VectorXd sender_chi = state.chi_sum(edge.src, k);
      Eigen::MatrixXd next = normalize_log(phi_exponent(
          edge.weight, snap, edge.src, edge.dst, sender_chi,
          thread.delta(edge.src), hyper));
      max_change = std::max(max_change, (next - state.phi[e]).cwiseAbs().maxCoeff());
      state.phi[e] = std::move(next);
    }
    if (has_tokens) {
      const Eigen::VectorXd sums = state.phi_sender_sums(thread, p, k);
      const int delta = thread.delta(p);
      for (size_t i = 0; i < tokens.size(); ++i) {
        Eigen::VectorXd next =
            normalize_log(chi_exponent(tokens[i], snap, sums, delta, hyper));
        max_change = std::max(max_change,
                              (next - chi_it->second[i]).cwiseAbs().maxCoeff());
        chi_it->second[i] = std::move(next);
      }
    }
    if (max_change < tol) {
      ++iter;
      break;
    }
  }
  return iter;
}

ThreadLocal sweep_thread(const ThreadRecord& thread, const GlobalSnapshot& snap,
                         const HyperParams& hyper, double tol, int max_iters) {
  ThreadLocal state = ThreadLocal::uniform(thread, hyper.k);
  for (const auto& [p, tokens] : thread.docs) {
    local_sweep(thread, p, snap, hyper, state, tol, max_iters);
  }
  return state;
}

LocalState full_local_pass(const ThreadCorpus& corpus, const GlobalState& global,
                           const HyperParams& hyper, int workers, double tol,
                           int max_iters) {
  const GlobalSnapshot snap = GlobalSnapshot::from(global);
  LocalState local;
  local.threads.resize(corpus.threads.size());
  const int n = static_cast<int>(corpus.threads.size());
  workers = std::max(1, std::min(workers, n == 0 ? 1 : n));

  auto run_shard = [&](int shard) {
    for (int t = shard; t < n; t += workers) {
      local.threads[t] = sweep_thread(corpus.threads[t], snap, hyper, tol, max_iters);
    }
  };
  if (workers == 1) {
    run_shard(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int s = 0; s < workers; ++s) pool.emplace_back(run_shard, s);
    for (auto& th : pool) th.join();
  }
  return local;
}

}  // namespace threadnet
