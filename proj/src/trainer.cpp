#include "threadnet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "threadnet/elbo.hpp"
#include "threadnet/global_updates.hpp"
#include "threadnet/rng.hpp"
#include "threadnet/special_functions.hpp"

namespace threadnet {

std::string to_string(Schedule s) {
  switch (s) {
    case Schedule::V: return "v";
    case Schedule::SV: return "sv";
    case Schedule::SSV: return "ssv";
    case Schedule::PSSV: return "pssv";
  }
  return "?";
}

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::Full: return "full";
    case TrainMode::MmsbOnly: return "mmsb";
    case TrainMode::LdaOnly: return "lda";
  }
  return "?";
}

Schedule schedule_from_string(const std::string& s) {
  if (s == "v") return Schedule::V;
  if (s == "sv") return Schedule::SV;
  if (s == "ssv") return Schedule::SSV;
  if (s == "pssv") return Schedule::PSSV;
  throw std::invalid_argument("unknown schedule: " + s);
}

TrainMode mode_from_string(const std::string& s) {
  if (s == "full") return TrainMode::Full;
  if (s == "mmsb") return TrainMode::MmsbOnly;
  if (s == "lda") return TrainMode::LdaOnly;
  throw std::invalid_argument("unknown mode: " + s);
}

void TrainConfig::validate() const {
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  if (minibatch_threads < 1)
    throw std::invalid_argument("config: minibatch_threads must be >= 1");
  if (elbo_tol <= 0.0) throw std::invalid_argument("config: elbo_tol must be > 0");
  if (max_outer_iters < 1)
    throw std::invalid_argument("config: max_outer_iters must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("config: eval_every must be >= 1");
  if (neighborhood_size < 2)
    throw std::invalid_argument("config: neighborhood_size must be >= 2");
}

GlobalState init_state(const ThreadCorpus& corpus, const HyperParams& hyper,
                       std::uint64_t seed) {
  hyper.validate();
  auto rng = make_engine(seed, "init-state");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GlobalState state;
  state.gamma.resize(corpus.num_users, hyper.k);
  for (int p = 0; p < corpus.num_users; ++p) {
    for (int k = 0; k < hyper.k; ++k) {
      state.gamma(p, k) = hyper.alpha[k] + unif(rng);
    }
  }
  state.tau.resize(hyper.k, corpus.vocab_size);
  for (int k = 0; k < hyper.k; ++k) {
    for (int v = 0; v < corpus.vocab_size; ++v) {
      state.tau(k, v) = hyper.eta_word + 0.01 * unif(rng);
    }
  }
  state.nu = hyper.kappa;
  state.lambda = hyper.theta;
  return state;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool window_converged(const std::vector<double>& evals, double tol) {
  constexpr size_t kWindow = 5;
  if (evals.size() < kWindow) return false;
  for (size_t i = evals.size() - kWindow + 1; i < evals.size(); ++i) {
    const double denom = std::max(std::abs(evals[i - 1]), 1e-12);
    if (std::abs(evals[i] - evals[i - 1]) / denom >= tol) return false;
  }
  return true;
}

void check_finite(const GlobalState& state) {
  if (!state.gamma.allFinite() || !state.tau.allFinite() ||
      !state.nu.allFinite() || !state.lambda.allFinite()) {
    throw NumericalError("training diverged: non-finite global state");
  }
}

// --- network/full-model engine ------------------------------------------------

struct NetworkTrainer {
  const ThreadCorpus& corpus;
  const HyperParams& hyper;
  const TrainConfig& config;
  long long n_edges;
  long long n_threads;

  LocalState sweep_minibatch(const std::vector<int>& batch,
                             const GlobalSnapshot& snap, int workers) const {
    LocalState local;
    local.threads.resize(corpus.threads.size());
    const int n = static_cast<int>(batch.size());
    workers = std::max(1, std::min(workers, std::max(1, n)));
    auto run_shard = [&](int shard) {
      for (int i = shard; i < n; i += workers) {
        const int t = batch[i];
        local.threads[t] = sweep_thread(corpus.threads[t], snap, hyper,
                                        config.local_tol, config.local_max_iters);
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

  /// One stochastic round: sweep the minibatch, sub-sample neighborhoods,
  /// form local estimates and mix them in with rate xi.
  GlobalState stochastic_round(const GlobalState& global,
                               const std::vector<int>& batch, long long round,
                               int workers) const {
    const GlobalSnapshot snap = GlobalSnapshot::from(global);
    LocalState local = sweep_minibatch(batch, snap, workers);

    std::set<UserId> touched;
    for (int t : batch) {
      for (const auto& [p, tokens] : corpus.threads[t].docs) touched.insert(p);
    }

    const std::uint64_t round_seed = derive_seed(config.seed, "round-neigh",
                                                 static_cast<std::uint64_t>(round));
    std::map<UserId, NeighborSample> samples;
    for (UserId p : touched) {
      NeighborSample sample = sample_neighborhood(
          corpus, p, config.neighborhood_size, round_seed, batch);
      materialize_zero_phi(corpus, p, sample, snap, hyper, local);
      samples.emplace(p, std::move(sample));
    }

    GlobalState estimate = global;
    for (const auto& [p, sample] : samples) {
      estimate.gamma.row(p) =
          gamma_local_estimate(p, sample, local, hyper, n_edges, n_threads)
              .transpose();
    }
    StochasticEstimates est = nu_lambda_tau_local_estimates(
        samples, corpus, local, global, hyper, n_edges, n_threads);
    estimate.nu = config.freeze_nu ? global.nu : std::move(est.nu);
    estimate.lambda = std::move(est.lambda);
    estimate.tau = config.mode == TrainMode::MmsbOnly ? global.tau
                                                      : std::move(est.tau);

    const double xi = learning_rate(round, hyper.zeta, hyper.rho);
    return mix_global(global, estimate, xi);
  }

  GlobalState batch_round(const GlobalState& global, const LocalState& local) const {
    GlobalState next;
    next.gamma = gamma_update_batch(corpus, local, hyper);
    next.tau = config.mode == TrainMode::MmsbOnly
                   ? global.tau
                   : tau_update_batch(corpus, local, hyper);
    next.nu = config.freeze_nu ? global.nu
                               : nu_gradient_step(corpus, local, global, hyper);
    GlobalState with_nu = global;
    with_nu.nu = next.nu;
    next.lambda = lambda_update_batch(corpus, local, with_nu, hyper);
    return next;
  }
};

TrainOutcome train_network(const ThreadCorpus& working, const HyperParams& hyper,
                           const TrainConfig& config) {
  if (working.total_edges == 0) {
    throw std::invalid_argument("train: no training edges");
  }
  const int workers = config.schedule == Schedule::PSSV ? config.workers : 1;
  NetworkTrainer engine{working, hyper, config, working.total_edges,
                        working.total_threads()};

  GlobalState global = init_state(working, hyper, config.seed);
  TrainOutcome outcome;
  const auto start = Clock::now();
  std::vector<double> evals;

  std::vector<int> all_threads(working.threads.size());
  std::iota(all_threads.begin(), all_threads.end(), 0);

  auto full_eval = [&](long long iter, const GlobalState& state,
                       const LocalState* ready) {
    LocalState fresh;
    const LocalState* local = ready;
    if (local == nullptr) {
      fresh = full_local_pass(working, state, hyper, workers, config.local_tol,
                              config.local_max_iters);
      local = &fresh;
    }
    const double bound = elbo(working, state, *local, hyper);
    if (!std::isfinite(bound)) {
      throw NumericalError("training diverged: non-finite ELBO at iteration " +
                           std::to_string(iter));
    }
    outcome.report.elbo_trace.push_back({iter, seconds_since(start), bound});
    evals.push_back(bound);
  };

  long long iter = 0;
  for (; iter < config.max_outer_iters; ++iter) {
    if (config.schedule == Schedule::V) {
      const GlobalSnapshot snap = GlobalSnapshot::from(global);
      LocalState local = engine.sweep_minibatch(all_threads, snap, workers);
      full_eval(iter, global, &local);
      global = engine.batch_round(global, local);
    } else {
      const int batch_size = config.schedule == Schedule::SV
                                 ? 1
                                 : std::min<int>(config.minibatch_threads,
                                                 static_cast<int>(all_threads.size()));
      auto rng = make_engine(config.seed, "minibatch",
                             static_cast<std::uint64_t>(iter));
      std::vector<int> batch = all_threads;
      for (int i = 0; i < batch_size; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(batch.size()) - 1);
        std::swap(batch[i], batch[pick(rng)]);
      }
      batch.resize(batch_size);
      std::sort(batch.begin(), batch.end());

      if (iter % config.eval_every == 0) full_eval(iter, global, nullptr);
      global = engine.stochastic_round(global, batch, iter, workers);
    }
    check_finite(global);
    if (window_converged(evals, config.elbo_tol)) {
      outcome.report.converged = true;
      ++iter;
      break;
    }
  }
  outcome.report.iterations = iter;

  outcome.final_local = full_local_pass(working, global, hyper, workers,
                                        config.local_tol, config.local_max_iters);
  const double final_bound = elbo(working, global, outcome.final_local, hyper);
  if (!std::isfinite(final_bound)) {
    throw NumericalError("training diverged: non-finite final ELBO");
  }
  outcome.report.elbo_trace.push_back({iter, seconds_since(start), final_bound});
  outcome.global = std::move(global);
  return outcome;
}

// --- LDA-only engine -----------------------------------------------------------

struct LdaDocRef {
  int thread_idx;
  UserId user;
};

Eigen::VectorXd lda_doc_sweep(const std::vector<int>& tokens,
                              const Eigen::MatrixXd& elog_beta,
                              const HyperParams& hyper,
                              std::vector<Eigen::VectorXd>& chi, double tol,
                              int max_iters) {
  const int k = hyper.k;
  Eigen::VectorXd doc_gamma =
      hyper.alpha + Eigen::VectorXd::Constant(
                        k, static_cast<double>(tokens.size()) / k);
  chi.assign(tokens.size(), Eigen::VectorXd::Constant(k, 1.0 / k));
  for (int iter = 0; iter < max_iters; ++iter) {
    double max_change = 0.0;
    const Eigen::VectorXd elog_theta = dirichlet_elog(doc_gamma);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (size_t i = 0; i < tokens.size(); ++i) {
      Eigen::VectorXd next =
          normalize_log(elog_theta + elog_beta.col(tokens[i]));
      max_change = std::max(max_change, (next - chi[i]).cwiseAbs().maxCoeff());
      chi[i] = std::move(next);
      counts += chi[i];
    }
    doc_gamma = hyper.alpha + counts;
    if (max_change < tol) break;
  }
  return doc_gamma;
}

double lda_elbo(const ThreadCorpus& corpus, const Eigen::MatrixXd& tau,
                const DocGamma& doc_gamma, const LocalState& local,
                const HyperParams& hyper) {
  Eigen::MatrixXd elog_beta(hyper.k, corpus.vocab_size);
  for (int k = 0; k < hyper.k; ++k) {
    elog_beta.row(k) = dirichlet_elog(tau.row(k).transpose()).transpose();
  }
  double bound = 0.0;
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    for (const auto& [p, tokens] : corpus.threads[t].docs) {
      if (tokens.empty()) continue;
      const Eigen::VectorXd& dg = doc_gamma.at({static_cast<int>(t), p});
      const Eigen::VectorXd elog_theta = dirichlet_elog(dg);
      const auto& chi = local.threads[t].chi.at(p);
      for (size_t i = 0; i < tokens.size(); ++i) {
        bound += chi[i].dot(elog_theta + elog_beta.col(tokens[i]));
        for (int k = 0; k < hyper.k; ++k) {
          if (chi[i][k] > 0.0) bound -= chi[i][k] * std::log(chi[i][k]);
        }
      }
      bound += dirichlet_logprior(hyper.alpha, dg) + dirichlet_entropy(dg);
    }
  }
  const Eigen::VectorXd eta_vec =
      Eigen::VectorXd::Constant(corpus.vocab_size, hyper.eta_word);
  for (int k = 0; k < hyper.k; ++k) {
    const Eigen::VectorXd row = tau.row(k).transpose();
    bound += dirichlet_logprior(eta_vec, row) + dirichlet_entropy(row);
  }
  return bound;
}

TrainOutcome train_lda(const ThreadCorpus& working, const HyperParams& hyper,
                       const TrainConfig& config) {
  std::vector<LdaDocRef> docs;
  std::vector<std::vector<int>> docs_by_thread(working.threads.size());
  for (size_t t = 0; t < working.threads.size(); ++t) {
    for (const auto& [p, tokens] : working.threads[t].docs) {
      if (tokens.empty()) continue;
      docs_by_thread[t].push_back(static_cast<int>(docs.size()));
      docs.push_back({static_cast<int>(t), p});
    }
  }
  if (docs.empty()) {
    throw std::invalid_argument("train: lda mode needs documents");
  }

  GlobalState global = init_state(working, hyper, config.seed);
  TrainOutcome outcome;
  const auto start = Clock::now();
  std::vector<double> evals;

  auto full_pass = [&](const Eigen::MatrixXd& tau, DocGamma& dg, LocalState& local) {
    Eigen::MatrixXd elog_beta(hyper.k, working.vocab_size);
    for (int k = 0; k < hyper.k; ++k) {
      elog_beta.row(k) = dirichlet_elog(tau.row(k).transpose()).transpose();
    }
    local.threads.assign(working.threads.size(), ThreadLocal{});
    for (const auto& doc : docs) {
      auto& chi = local.threads[doc.thread_idx].chi[doc.user];
      dg[{doc.thread_idx, doc.user}] = lda_doc_sweep(
          working.threads[doc.thread_idx].docs.at(doc.user), elog_beta, hyper,
          chi, config.local_tol, config.local_max_iters);
    }
  };

  auto full_eval = [&](long long iter) {
    DocGamma dg;
    LocalState local;
    full_pass(global.tau, dg, local);
    const double bound = lda_elbo(working, global.tau, dg, local, hyper);
    if (!std::isfinite(bound)) {
      throw NumericalError("training diverged: non-finite ELBO at iteration " +
                           std::to_string(iter));
    }
    outcome.report.elbo_trace.push_back({iter, seconds_since(start), bound});
    evals.push_back(bound);
  };

  std::vector<int> all_threads(working.threads.size());
  std::iota(all_threads.begin(), all_threads.end(), 0);

  long long iter = 0;
  for (; iter < config.max_outer_iters; ++iter) {
    std::vector<int> batch;
    if (config.schedule == Schedule::V) {
      batch = all_threads;
    } else {
      const int batch_size =
          config.schedule == Schedule::SV
              ? 1
              : std::min<int>(config.minibatch_threads,
                              static_cast<int>(all_threads.size()));
      auto rng = make_engine(config.seed, "minibatch",
                             static_cast<std::uint64_t>(iter));
      batch = all_threads;
      for (int i = 0; i < batch_size; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(batch.size()) - 1);
        std::swap(batch[i], batch[pick(rng)]);
      }
      batch.resize(batch_size);
      std::sort(batch.begin(), batch.end());
    }

    if (config.schedule == Schedule::V || iter % config.eval_every == 0) {
      full_eval(iter);
    }

    Eigen::MatrixXd elog_beta(hyper.k, working.vocab_size);
    for (int k = 0; k < hyper.k; ++k) {
      elog_beta.row(k) = dirichlet_elog(global.tau.row(k).transpose()).transpose();
    }
    Eigen::MatrixXd counts =
        Eigen::MatrixXd::Zero(hyper.k, working.vocab_size);
    long long batch_docs = 0;
    for (int t : batch) {
      for (int d : docs_by_thread[t]) {
        const auto& doc = docs[d];
        const auto& tokens = working.threads[t].docs.at(doc.user);
        std::vector<Eigen::VectorXd> chi;
        lda_doc_sweep(tokens, elog_beta, hyper, chi, config.local_tol,
                      config.local_max_iters);
        for (size_t i = 0; i < tokens.size(); ++i) counts.col(tokens[i]) += chi[i];
        ++batch_docs;
      }
    }
    if (batch_docs > 0) {
      const double scale = config.schedule == Schedule::V
                               ? 1.0
                               : static_cast<double>(docs.size()) /
                                     static_cast<double>(batch_docs);
      Eigen::MatrixXd tau_est =
          Eigen::MatrixXd::Constant(hyper.k, working.vocab_size, hyper.eta_word) +
          scale * counts;
      const double xi = config.schedule == Schedule::V
                            ? 1.0
                            : learning_rate(iter, hyper.zeta, hyper.rho);
      global.tau = (1.0 - xi) * global.tau + xi * tau_est;
    }
    check_finite(global);
    if (window_converged(evals, config.elbo_tol)) {
      outcome.report.converged = true;
      ++iter;
      break;
    }
  }
  outcome.report.iterations = iter;

  full_pass(global.tau, outcome.doc_gamma, outcome.final_local);
  const double final_bound =
      lda_elbo(working, global.tau, outcome.doc_gamma, outcome.final_local, hyper);
  outcome.report.elbo_trace.push_back({iter, seconds_since(start), final_bound});
  outcome.global = std::move(global);
  return outcome;
}

}  // namespace

TrainOutcome train(const ThreadCorpus& corpus, const EvalSplit& split,
                   const HyperParams& hyper, const TrainConfig& config) {
  hyper.validate();
  config.validate();
  ThreadCorpus working = train_view(corpus, split);
  switch (config.mode) {
    case TrainMode::Full:
      return train_network(working, hyper, config);
    case TrainMode::MmsbOnly: {
      HyperParams h = hyper;
      h.omega = 0.0;
      return train_network(without_docs(working), h, config);
    }
    case TrainMode::LdaOnly:
      return train_lda(without_edges(working), hyper, config);
  }
  throw std::logic_error("train: unknown mode");
}

// --- snapshots -------------------------------------------------------------------

namespace {

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << buf << (c + 1 == m.cols() ? "" : ",");
    }
    out << "\n";
  }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path, Eigen::Index rows,
                                Eigen::Index cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Eigen::MatrixXd m(rows, cols);
  std::string line;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated csv: " + path);
    std::stringstream ss(line);
    std::string cell;
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!std::getline(ss, cell, ',')) {
        throw std::runtime_error("short row in " + path);
      }
      m(r, c) = std::stod(cell);
    }
  }
  return m;
}

}  // namespace

void save_snapshot(const TrainOutcome& outcome, const HyperParams& hyper,
                   TrainMode mode, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["u"] = outcome.global.num_users();
  manifest["v"] = outcome.global.vocab_size();
  manifest["k"] = outcome.global.num_topics();
  manifest["iteration"] = outcome.report.iterations;
  manifest["converged"] = outcome.report.converged;
  manifest["mode"] = to_string(mode);
  manifest["hyper"] = hyper_to_json(hyper);
  std::ofstream mout(dir + "/manifest.json");
  if (!mout) throw std::runtime_error("cannot write manifest in " + dir);
  mout << manifest.dump(2) << "\n";

  write_matrix_csv(outcome.global.gamma, dir + "/gamma.csv");
  write_matrix_csv(outcome.global.tau, dir + "/tau.csv");
  write_matrix_csv(outcome.global.nu, dir + "/nu.csv");
  write_matrix_csv(outcome.global.lambda, dir + "/lambda.csv");

  if (mode == TrainMode::LdaOnly) {
    std::ofstream out(dir + "/doc_gamma.csv");
    if (!out) throw std::runtime_error("cannot write doc_gamma in " + dir);
    char buf[32];
    for (const auto& [key, gamma] : outcome.doc_gamma) {
      out << key.first << "," << key.second;
      for (Eigen::Index k = 0; k < gamma.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", gamma[k]);
        out << "," << buf;
      }
      out << "\n";
    }
  }
}

Snapshot load_snapshot(const std::string& dir) {
  std::ifstream min(dir + "/manifest.json");
  if (!min) throw std::runtime_error("cannot open manifest in " + dir);
  nlohmann::json manifest;
  min >> manifest;

  Snapshot snap;
  const int u = manifest.at("u").get<int>();
  const int v = manifest.at("v").get<int>();
  const int k = manifest.at("k").get<int>();
  snap.iteration = manifest.at("iteration").get<long long>();
  snap.converged = manifest.value("converged", false);
  snap.mode = manifest.at("mode").get<std::string>();
  snap.hyper = hyper_from_json(manifest.at("hyper"));
  snap.global.gamma = read_matrix_csv(dir + "/gamma.csv", u, k);
  snap.global.tau = read_matrix_csv(dir + "/tau.csv", k, v);
  snap.global.nu = read_matrix_csv(dir + "/nu.csv", k, k);
  snap.global.lambda = read_matrix_csv(dir + "/lambda.csv", k, k);

  if (snap.mode == "lda") {
    std::ifstream in(dir + "/doc_gamma.csv");
    if (!in) throw std::runtime_error("cannot open doc_gamma in " + dir);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      const int t = std::stoi(cell);
      std::getline(ss, cell, ',');
      const UserId p = std::stoi(cell);
      Eigen::VectorXd g(k);
      for (int i = 0; i < k; ++i) {
        std::getline(ss, cell, ',');
        g[i] = std::stod(cell);
      }
      snap.doc_gamma[{t, p}] = std::move(g);
    }
  }
  return snap;
}

void save_trace_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << "iteration,seconds,elbo\n";
  char buf[32];
  for (const auto& point : report.elbo_trace) {
    std::snprintf(buf, sizeof(buf), "%.17g", point.elbo);
    out << point.iteration << "," << point.seconds << "," << buf << "\n";
  }
}

// --- tuning -----------------------------------------------------------------------

TuneGrids TuneGrids::ts_preset() { return TuneGrids{}; }

namespace {

HyperParams build_hyper(const TuneGrids& grids, double alpha, double omega,
                        std::pair<double, double> theta,
                        std::pair<double, double> kappa, double eta, int k) {
  HyperParams h = HyperParams::symmetric(k, alpha, eta, kappa.first, kappa.second,
                                         theta.first, theta.second, omega);
  h.epsilon = grids.epsilon;
  h.zeta = grids.zeta;
  h.rho = grids.rho;
  h.rho_nu = grids.rho_nu;
  return h;
}

}  // namespace

TuneOutcome tune(const ThreadCorpus& corpus, const EvalSplit& split,
                 const TuneGrids& grids, const TrainConfig& config) {
  if (grids.alpha.empty() || grids.omega.empty() || grids.theta.empty() ||
      grids.kappa.empty() || grids.eta.empty() || grids.k.empty()) {
    throw std::invalid_argument("tune: all grids must be non-empty");
  }
  double alpha = grids.alpha.front();
  double omega = grids.omega.front();
  auto theta = grids.theta.front();
  auto kappa = grids.kappa.front();
  double eta = grids.eta.front();
  int k = grids.k.front();

  TuneOutcome out;
  auto score = [&](const HyperParams& h) {
    TrainOutcome trained = train(corpus, split, h, config);
    return score_model(trained.global, split.heldout);
  };

  auto scan = [&](const std::string& name, auto& slot, const auto& grid,
                  auto format) {
    bool have_best = false;
    double best_score = 0.0;
    auto best_value = slot;
    for (const auto& candidate : grid) {
      slot = candidate;
      TuneRow row{name, format(candidate), 0.0, false};
      try {
        row.heldout_rmse = score(build_hyper(grids, alpha, omega, theta, kappa,
                                             eta, k));
        ++out.trainings;
        if (!have_best || row.heldout_rmse < best_score) {
          have_best = true;
          best_score = row.heldout_rmse;
          best_value = candidate;
        }
      } catch (const std::exception&) {
        row.failed = true;
      }
      out.table.push_back(std::move(row));
    }
    slot = best_value;
  };

  auto fmt_double = [](double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
  };
  auto fmt_pair = [](std::pair<double, double> v) {
    std::ostringstream ss;
    ss << v.first << "~" << v.second;
    return ss.str();
  };
  auto fmt_int = [](int v) { return std::to_string(v); };

  scan("alpha", alpha, grids.alpha, fmt_double);
  scan("omega", omega, grids.omega, fmt_double);
  scan("theta", theta, grids.theta, fmt_pair);
  scan("kappa", kappa, grids.kappa, fmt_pair);
  scan("eta", eta, grids.eta, fmt_double);
  scan("k", k, grids.k, fmt_int);

  out.best = build_hyper(grids, alpha, omega, theta, kappa, eta, k);
  return out;
}

// --- schedule benchmark --------------------------------------------------------------

std::map<Schedule, TrainReport> bench_schedules(const ThreadCorpus& corpus,
                                                const EvalSplit& split,
                                                const HyperParams& hyper,
                                                const TrainConfig& config) {
  std::map<Schedule, TrainReport> traces;
  for (Schedule s : {Schedule::V, Schedule::SV, Schedule::SSV, Schedule::PSSV}) {
    TrainConfig c = config;
    c.schedule = s;
    if (s != Schedule::PSSV) c.workers = 1;
    traces[s] = train(corpus, split, hyper, c).report;
  }
  return traces;
}

}  // namespace threadnet
