#include "threadnet/elbo.hpp"

#include <cmath>
#include <stdexcept>

#include "threadnet/special_functions.hpp"

namespace threadnet {

double dirichlet_logprior(const Eigen::VectorXd& prior,
                          const Eigen::VectorXd& params) {
  if (prior.size() != params.size()) {
    throw std::invalid_argument("dirichlet_logprior: size mismatch");
  }
  const Eigen::VectorXd elog = dirichlet_elog(params);
  double out = std::lgamma(prior.sum());
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    out -= std::lgamma(prior[i]);
    out += (prior[i] - 1.0) * elog[i];
  }
  return out;
}

double dirichlet_entropy(const Eigen::VectorXd& params) {
  const double total = params.sum();
  const Eigen::Index n = params.size();
  double out = -std::lgamma(total) +
               (total - static_cast<double>(n)) * digamma(total);
  for (Eigen::Index i = 0; i < n; ++i) {
    out += std::lgamma(params[i]) - (params[i] - 1.0) * digamma(params[i]);
  }
  return out;
}

double gamma_logprior(double shape, double scale, double nu, double lambda) {
  const double elog_b = digamma(nu) + std::log(lambda);
  const double e_b = nu * lambda;
  return (shape - 1.0) * elog_b - e_b / scale - shape * std::log(scale) -
         std::lgamma(shape);
}

double gamma_entropy(double nu, double lambda) {
  return nu + std::log(lambda) + std::lgamma(nu) + (1.0 - nu) * digamma(nu);
}

Eigen::VectorXd coupling_elog(const Eigen::VectorXd& phi_sender_sums, int delta,
                              const HyperParams& hyper) {
  const int k = hyper.k;
  if (delta < 1) {
    return Eigen::VectorXd::Constant(k, -std::log(static_cast<double>(k)));
  }
  const double d = static_cast<double>(delta);
  const double log_eps = std::log(hyper.epsilon / d);
  const double log_one = std::log1p(hyper.epsilon / d);
  Eigen::VectorXd out(k);
  for (int i = 0; i < k; ++i) {
    out[i] = log_eps * (1.0 - phi_sender_sums[i]) / d +
             (phi_sender_sums[i] / d) * log_one;
  }
  return out;
}

namespace {

double discrete_entropy(const Eigen::MatrixXd& dist) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    const double v = dist(i);
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace

double elbo(const ThreadCorpus& corpus, const GlobalState& global,
            const LocalState& local, const HyperParams& hyper) {
  global.validate();
  const int k = hyper.k;
  if (global.num_topics() != k || global.num_users() != corpus.num_users ||
      global.vocab_size() != corpus.vocab_size) {
    throw std::invalid_argument("elbo: global state does not match corpus");
  }
  if (local.threads.size() != corpus.threads.size()) {
    throw std::invalid_argument("elbo: local state does not cover the corpus");
  }
  const GlobalSnapshot snap = GlobalSnapshot::from(global);

  double bound = 0.0;
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    const ThreadRecord& thread = corpus.threads[t];
    const ThreadLocal& tl = local.threads[t];
    if (tl.phi.size() != thread.edges.size()) {
      throw std::invalid_argument("elbo: phi does not match train edges of thread " +
                                  thread.thread_id);
    }
    for (size_t e = 0; e < thread.edges.size(); ++e) {
      const auto& edge = thread.edges[e];
      const Eigen::MatrixXd& phi = tl.phi[e];
      if (phi.rows() != k || phi.cols() != k) {
        throw std::invalid_argument("elbo: phi shape mismatch");
      }
      const double y = static_cast<double>(edge.weight);
      bound += (phi.array() * (y * snap.elog_b.array() - snap.e_b.array())).sum();
      bound -= log_factorial(edge.weight);
      bound += phi.rowwise().sum().dot(snap.elog_pi.row(edge.src));
      bound += phi.colwise().sum().dot(snap.elog_pi.row(edge.dst));
      bound += discrete_entropy(phi);
    }
    for (const auto& [p, tokens] : thread.docs) {
      if (tokens.empty()) {
        if (tl.chi.count(p)) {
          throw std::invalid_argument("elbo: chi present for empty document");
        }
        continue;
      }
      const auto chi_it = tl.chi.find(p);
      if (chi_it == tl.chi.end() || chi_it->second.size() != tokens.size()) {
        throw std::invalid_argument("elbo: chi does not match tokens of thread " +
                                    thread.thread_id);
      }
      const Eigen::VectorXd coupling =
          coupling_elog(tl.phi_sender_sums(thread, p, k), thread.delta(p), hyper);
      for (size_t i = 0; i < tokens.size(); ++i) {
        const Eigen::VectorXd& chi = chi_it->second[i];
        bound += chi.dot(snap.elog_beta.col(tokens[i]));
        bound += chi.dot(coupling);
        bound += discrete_entropy(chi);
      }
    }
  }

  for (int p = 0; p < corpus.num_users; ++p) {
    const Eigen::VectorXd row = global.gamma.row(p).transpose();
    bound += dirichlet_logprior(hyper.alpha, row) + dirichlet_entropy(row);
  }
  const Eigen::VectorXd eta_vec =
      Eigen::VectorXd::Constant(corpus.vocab_size, hyper.eta_word);
  for (int topic = 0; topic < k; ++topic) {
    const Eigen::VectorXd row = global.tau.row(topic).transpose();
    bound += dirichlet_logprior(eta_vec, row) + dirichlet_entropy(row);
  }
  for (int g = 0; g < k; ++g) {
    for (int h = 0; h < k; ++h) {
      bound += gamma_logprior(hyper.kappa(g, h), hyper.theta(g, h),
                              global.nu(g, h), global.lambda(g, h));
      bound += gamma_entropy(global.nu(g, h), global.lambda(g, h));
    }
  }
  return bound;
}

}  // namespace threadnet
