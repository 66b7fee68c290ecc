#pragma once

// Shared builders and independent oracles for the test suites. The oracles
// here deliberately re-derive every quantity with plain scalar loops and
// exhaustive enumeration; they never call into the closed-form paths they
// are used to check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "threadnet/corpus.hpp"
#include "threadnet/local_inference.hpp"
#include "threadnet/model.hpp"
#include "threadnet/special_functions.hpp"

namespace tn = threadnet;

struct TinyOptions {
  int users = 3;
  int threads = 2;
  int k = 2;
  int vocab = 4;
  int max_tokens = 3;   // per document; 0 disables text entirely
  int max_weight = 4;
  double edge_prob = 0.7;
  std::uint64_t seed = 1;
};

inline tn::ThreadCorpus make_tiny_corpus(const TinyOptions& opt) {
  std::mt19937_64 rng(opt.seed * 0x9e3779b97f4a7c15ULL + 13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  tn::ThreadCorpus corpus;
  corpus.num_users = opt.users;
  corpus.vocab_size = opt.vocab;
  corpus.threads.resize(opt.threads);
  bool any_edge = false;
  for (int t = 0; t < opt.threads; ++t) {
    auto& rec = corpus.threads[t];
    rec.thread_id = "t" + std::to_string(t);
    for (int p = 0; p < opt.users; ++p) {
      auto& tokens = rec.docs[p];
      if (opt.max_tokens > 0) {
        std::uniform_int_distribution<int> count(0, opt.max_tokens);
        const int n = count(rng);
        std::uniform_int_distribution<int> word(0, opt.vocab - 1);
        for (int i = 0; i < n; ++i) tokens.push_back(word(rng));
      }
    }
    for (int p = 0; p < opt.users; ++p) {
      for (int q = 0; q < opt.users; ++q) {
        if (p == q || unif(rng) > opt.edge_prob) continue;
        std::uniform_int_distribution<long long> weight(1, opt.max_weight);
        rec.edges.push_back({p, q, weight(rng)});
        any_edge = true;
      }
    }
  }
  if (!any_edge) {
    corpus.threads[0].edges.push_back({0, 1, 1});
  }
  corpus.finalize();
  return corpus;
}

inline tn::HyperParams random_hyper(int k, std::mt19937_64& rng,
                                    double omega = 1e-4) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  tn::HyperParams h;
  h.k = k;
  h.alpha.resize(k);
  for (int i = 0; i < k; ++i) h.alpha[i] = 0.2 + unif(rng);
  h.eta_word = 0.2 + 0.5 * unif(rng);
  h.kappa.resize(k, k);
  h.theta.resize(k, k);
  for (int g = 0; g < k; ++g) {
    for (int hh = 0; hh < k; ++hh) {
      h.kappa(g, hh) = 0.5 + unif(rng);
      h.theta(g, hh) = 0.5 + unif(rng);
    }
  }
  h.omega = omega;
  return h;
}

inline tn::GlobalState random_global(const tn::ThreadCorpus& corpus, int k,
                                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  tn::GlobalState state;
  state.gamma.resize(corpus.num_users, k);
  for (Eigen::Index i = 0; i < state.gamma.size(); ++i) {
    state.gamma(i) = 0.3 + 2.0 * unif(rng);
  }
  state.tau.resize(k, corpus.vocab_size);
  for (Eigen::Index i = 0; i < state.tau.size(); ++i) {
    state.tau(i) = 0.2 + unif(rng);
  }
  state.nu.resize(k, k);
  state.lambda.resize(k, k);
  for (Eigen::Index i = 0; i < state.nu.size(); ++i) {
    state.nu(i) = 0.4 + 1.5 * unif(rng);
    state.lambda(i) = 0.4 + 1.5 * unif(rng);
  }
  return state;
}

inline tn::LocalState random_local(const tn::ThreadCorpus& corpus, int k,
                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  tn::LocalState local;
  local.threads.resize(corpus.threads.size());
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    const auto& thread = corpus.threads[t];
    auto& tl = local.threads[t];
    tl.phi.resize(thread.edges.size());
    for (auto& phi : tl.phi) {
      phi.resize(k, k);
      for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = unif(rng);
      phi /= phi.sum();
    }
    for (const auto& [p, tokens] : thread.docs) {
      if (tokens.empty()) continue;
      auto& chi = tl.chi[p];
      chi.resize(tokens.size());
      for (auto& c : chi) {
        c.resize(k);
        for (int i = 0; i < k; ++i) c[i] = unif(rng);
        c /= c.sum();
      }
    }
  }
  return local;
}

// --- independent oracle: exhaustive-enumeration ELBO -------------------------

namespace oracle {

inline double dir_elog(const Eigen::VectorXd& params, int i) {
  return tn::digamma(params[i]) - tn::digamma(params.sum());
}

inline double dir_logprior(const Eigen::VectorXd& prior,
                           const Eigen::VectorXd& params) {
  double out = std::lgamma(prior.sum());
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    out += -std::lgamma(prior[i]) + (prior[i] - 1.0) * dir_elog(params, i);
  }
  return out;
}

inline double dir_entropy(const Eigen::VectorXd& params) {
  const double total = params.sum();
  double out = -std::lgamma(total) +
               (total - static_cast<double>(params.size())) * tn::digamma(total);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    out += std::lgamma(params[i]) - (params[i] - 1.0) * tn::digamma(params[i]);
  }
  return out;
}

// log of the smoothed token-topic conditional for one concrete configuration
// of sender indicators: n_k of the delta out-edges chose topic k.
inline double coupling_logp(int k_topic, const std::vector<int>& sender_topics,
                            int delta, int k, double epsilon) {
  if (delta < 1) return -std::log(static_cast<double>(k));
  int n = 0;
  for (int z : sender_topics) {
    if (z == k_topic) ++n;
  }
  const double d = static_cast<double>(delta);
  return std::log(epsilon / d) * (1.0 - static_cast<double>(n)) / d +
         (static_cast<double>(n) / d) * std::log1p(epsilon / d);
}

/// E_q[log p - log q] by brute force: enumerates every joint assignment of
/// the pair indicators and token topics of each thread.
inline double brute_force_elbo(const tn::ThreadCorpus& corpus,
                               const tn::GlobalState& global,
                               const tn::LocalState& local,
                               const tn::HyperParams& hyper) {
  const int k = hyper.k;
  double bound = 0.0;

  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    const auto& thread = corpus.threads[t];
    const auto& tl = local.threads[t];
    const int n_edges = static_cast<int>(thread.edges.size());

    struct Token {
      tn::UserId owner;
      int word;
      const Eigen::VectorXd* chi;
    };
    std::vector<Token> tokens;
    for (const auto& [p, words] : thread.docs) {
      if (words.empty()) continue;
      const auto& chi = tl.chi.at(p);
      for (size_t i = 0; i < words.size(); ++i) {
        tokens.push_back({p, words[i], &chi[i]});
      }
    }
    const int n_tokens = static_cast<int>(tokens.size());

    // Assignment vector: (g, h) per edge then topic per token.
    std::vector<int> senders(n_edges), receivers(n_edges), topics(n_tokens);
    long long total = 1;
    for (int e = 0; e < n_edges; ++e) total *= k * k;
    for (int i = 0; i < n_tokens; ++i) total *= k;

    double thread_sum = 0.0;
    for (long long code = 0; code < total; ++code) {
      long long rest = code;
      for (int e = 0; e < n_edges; ++e) {
        senders[e] = static_cast<int>(rest % k);
        rest /= k;
        receivers[e] = static_cast<int>(rest % k);
        rest /= k;
      }
      for (int i = 0; i < n_tokens; ++i) {
        topics[i] = static_cast<int>(rest % k);
        rest /= k;
      }

      double weight = 1.0;
      double value = 0.0;
      for (int e = 0; e < n_edges; ++e) {
        const auto& edge = thread.edges[e];
        const int g = senders[e];
        const int h = receivers[e];
        const double q = tl.phi[e](g, h);
        weight *= q;
        const double y = static_cast<double>(edge.weight);
        value += y * (tn::digamma(global.nu(g, h)) + std::log(global.lambda(g, h)));
        value -= global.nu(g, h) * global.lambda(g, h);
        value -= std::lgamma(y + 1.0);
        value += dir_elog(global.gamma.row(edge.src).transpose(), g);
        value += dir_elog(global.gamma.row(edge.dst).transpose(), h);
        value -= std::log(q);
      }
      for (int i = 0; i < n_tokens; ++i) {
        const int z = topics[i];
        const double q = (*tokens[i].chi)[z];
        weight *= q;
        value += dir_elog(global.tau.row(z).transpose(), tokens[i].word);
        std::vector<int> sender_topics;
        if (auto it = thread.out_edges.find(tokens[i].owner);
            it != thread.out_edges.end()) {
          for (int e : it->second) sender_topics.push_back(senders[e]);
        }
        value += coupling_logp(z, sender_topics,
                               thread.delta(tokens[i].owner), k, hyper.epsilon);
        value -= std::log(q);
      }
      thread_sum += weight * value;
    }
    bound += thread_sum;
  }

  for (int p = 0; p < corpus.num_users; ++p) {
    const Eigen::VectorXd row = global.gamma.row(p).transpose();
    bound += dir_logprior(hyper.alpha, row) + dir_entropy(row);
  }
  const Eigen::VectorXd eta_vec =
      Eigen::VectorXd::Constant(corpus.vocab_size, hyper.eta_word);
  for (int topic = 0; topic < k; ++topic) {
    const Eigen::VectorXd row = global.tau.row(topic).transpose();
    bound += dir_logprior(eta_vec, row) + dir_entropy(row);
  }
  for (int g = 0; g < k; ++g) {
    for (int h = 0; h < k; ++h) {
      const double nu = global.nu(g, h);
      const double lambda = global.lambda(g, h);
      const double elog_b = tn::digamma(nu) + std::log(lambda);
      bound += (hyper.kappa(g, h) - 1.0) * elog_b - nu * lambda / hyper.theta(g, h) -
               hyper.kappa(g, h) * std::log(hyper.theta(g, h)) -
               std::lgamma(hyper.kappa(g, h));
      bound += nu + std::log(lambda) + std::lgamma(nu) +
               (1.0 - nu) * tn::digamma(nu);
    }
  }
  return bound;
}

}  // namespace oracle
