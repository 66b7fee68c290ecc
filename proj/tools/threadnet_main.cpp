// threadnet: joint blockmodel + topic model over per-thread sub-networks.
// Subcommands: synth, split, train, eval, tune, analyze, bench.
// Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure.

#include <CLI11.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "threadnet/analysis.hpp"
#include "threadnet/corpus.hpp"
#include "threadnet/elbo.hpp"
#include "threadnet/evaluation.hpp"
#include "threadnet/trainer.hpp"

namespace fs = std::filesystem;
using namespace threadnet;

namespace {

void write_matrix(const Eigen::MatrixXd& m, const std::string& path) {
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

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty()) grid.push_back(std::stod(cell));
  }
  if (grid.empty()) throw CLI::ValidationError("empty grid: " + csv);
  return grid;
}

TuneGrids grids_from_config(const nlohmann::json& j) {
  TuneGrids grids;
  auto doubles = [&j](const char* key, std::vector<double>& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::vector<double>>();
  };
  doubles("alpha_grid", grids.alpha);
  doubles("omega_grid", grids.omega);
  doubles("eta_grid", grids.eta);
  if (j.contains("k_grid")) grids.k = j.at("k_grid").get<std::vector<int>>();
  auto pairs = [&j](const char* key, std::vector<std::pair<double, double>>& slot) {
    if (!j.contains(key)) return;
    slot.clear();
    for (const auto& entry : j.at(key)) {
      slot.push_back({entry.at("diag").get<double>(),
                      entry.at("offdiag").get<double>()});
    }
  };
  pairs("theta_grid", grids.theta);
  pairs("kappa_grid", grids.kappa);
  grids.epsilon = j.value("epsilon", grids.epsilon);
  grids.zeta = j.value("zeta", grids.zeta);
  grids.rho = j.value("rho", grids.rho);
  grids.rho_nu = j.value("rho_nu", grids.rho_nu);
  return grids;
}

struct TrainArgs {
  std::string corpus_path, vocab_path, split_path, config_path, out_dir;
  std::string schedule = "pssv";
  std::string mode = "full";
  int workers = 1;
  int minibatch = 400;
  int neighborhood = 20;
  int max_iters = 100;
  int eval_every = 5;
  double tol = 1e-5;
  std::uint64_t seed = 1;
};

TrainConfig to_config(const TrainArgs& args) {
  TrainConfig config;
  config.schedule = schedule_from_string(args.schedule);
  config.mode = mode_from_string(args.mode);
  config.workers = args.workers;
  config.minibatch_threads = args.minibatch;
  config.neighborhood_size = args.neighborhood;
  config.max_outer_iters = args.max_iters;
  config.eval_every = args.eval_every;
  config.elbo_tol = args.tol;
  config.seed = args.seed;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"active sub-network discovery over threaded forums"};
  app.require_subcommand(1);

  // --- synth ----------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  SyntheticConfig syn;
  double syn_alpha = 0.05, syn_eta = 0.05;
  double syn_kappa_diag = 2.5, syn_kappa_off = 1.5;
  double syn_theta_diag = 2.5, syn_theta_off = 1.5;
  std::string syn_out;
  synth->add_option("--users", syn.users, "number of users")->required();
  synth->add_option("--threads", syn.threads, "number of threads")->required();
  synth->add_option("--k", syn.k, "number of community-topics")->required();
  synth->add_option("--alpha", syn_alpha, "membership Dirichlet prior");
  synth->add_option("--eta", syn_eta, "word Dirichlet prior");
  synth->add_option("--kappa-diag", syn_kappa_diag, "block shape prior, diagonal");
  synth->add_option("--kappa-off", syn_kappa_off, "block shape prior, off-diagonal");
  synth->add_option("--theta-diag", syn_theta_diag, "block scale prior, diagonal");
  synth->add_option("--theta-off", syn_theta_off, "block scale prior, off-diagonal");
  synth->add_option("--participants", syn.avg_participants, "mean thread size");
  synth->add_option("--doc-len", syn.doc_len, "tokens per participant document");
  synth->add_option("--vocab-size", syn.vocab_size, "vocabulary size");
  synth->add_option("--seed", syn.seed, "random seed");
  synth->add_option("--out", syn_out, "output directory")->required();

  // --- split ----------------------------------------------------------------
  auto* split_cmd = app.add_subcommand("split", "80/10/10 edge split");
  std::string sp_corpus, sp_vocab, sp_out;
  std::uint64_t sp_seed = 1;
  bool sp_zero = false;
  split_cmd->add_option("--corpus", sp_corpus)->required();
  split_cmd->add_option("--vocab", sp_vocab)->required();
  split_cmd->add_option("--seed", sp_seed);
  split_cmd->add_flag("--zero-augmented", sp_zero,
                      "add sampled absent pairs to heldout/test");
  split_cmd->add_option("--out", sp_out)->required();

  // --- train ----------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a model");
  TrainArgs ta;
  train_cmd->add_option("--corpus", ta.corpus_path)->required();
  train_cmd->add_option("--vocab", ta.vocab_path)->required();
  train_cmd->add_option("--split", ta.split_path,
                        "split file; omitted trains on every edge");
  train_cmd->add_option("--config", ta.config_path, "hyperparameter JSON")->required();
  train_cmd->add_option("--schedule", ta.schedule, "v|sv|ssv|pssv");
  train_cmd->add_option("--mode", ta.mode, "full|mmsb|lda");
  train_cmd->add_option("--workers", ta.workers);
  train_cmd->add_option("--minibatch", ta.minibatch);
  train_cmd->add_option("--neighborhood", ta.neighborhood);
  train_cmd->add_option("--max-iters", ta.max_iters);
  train_cmd->add_option("--eval-every", ta.eval_every);
  train_cmd->add_option("--tol", ta.tol);
  train_cmd->add_option("--seed", ta.seed);
  train_cmd->add_option("--out", ta.out_dir, "snapshot directory")->required();

  // --- eval -----------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "link-prediction report");
  std::string ev_corpus, ev_vocab, ev_split, ev_model, ev_mmsb, ev_lda, ev_out;
  std::string ev_grid = "0.25,0.5,1,2,4,8";
  bool ev_raw = false;
  eval_cmd->add_option("--corpus", ev_corpus)->required();
  eval_cmd->add_option("--vocab", ev_vocab)->required();
  eval_cmd->add_option("--split", ev_split)->required();
  eval_cmd->add_option("--model", ev_model, "full-model snapshot")->required();
  eval_cmd->add_option("--mmsb", ev_mmsb, "mmsb-only snapshot")->required();
  eval_cmd->add_option("--lda", ev_lda, "lda-only snapshot")->required();
  eval_cmd->add_option("--m-grid", ev_grid, "identity-block weights to tune over");
  eval_cmd->add_flag("--rmse-raw", ev_raw, "unnormalized sqrt-of-sum rmse");
  eval_cmd->add_option("--out", ev_out, "report CSV")->required();

  // --- tune -----------------------------------------------------------------
  auto* tune_cmd = app.add_subcommand("tune", "sequential prior tuning");
  TrainArgs tu;
  std::string tu_out;
  tune_cmd->add_option("--corpus", tu.corpus_path)->required();
  tune_cmd->add_option("--vocab", tu.vocab_path)->required();
  tune_cmd->add_option("--split", tu.split_path)->required();
  tune_cmd->add_option("--config", tu.config_path, "JSON with *_grid arrays")
      ->required();
  tune_cmd->add_option("--schedule", tu.schedule);
  tune_cmd->add_option("--workers", tu.workers);
  tune_cmd->add_option("--minibatch", tu.minibatch);
  tune_cmd->add_option("--max-iters", tu.max_iters);
  tune_cmd->add_option("--seed", tu.seed);
  tune_cmd->add_option("--out", tu_out, "output directory")->required();

  // --- analyze ----------------------------------------------------------------
  auto* analyze_cmd = app.add_subcommand("analyze", "role analytics exports");
  std::string an_corpus, an_vocab, an_model, an_out, an_group;
  int an_bins = 9;
  int an_top = 15;
  analyze_cmd->add_option("--corpus", an_corpus)->required();
  analyze_cmd->add_option("--vocab", an_vocab)->required();
  analyze_cmd->add_option("--model", an_model, "snapshot directory")->required();
  analyze_cmd->add_option("--topic-group", an_group,
                          "five topic ids for the pentagon, e.g. 0,1,2,3,4");
  analyze_cmd->add_option("--bins", an_bins, "variation histogram bins");
  analyze_cmd->add_option("--top-words", an_top, "words per topic");
  analyze_cmd->add_option("--out", an_out, "output directory")->required();

  // --- bench ----------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "schedule speed comparison");
  TrainArgs be;
  std::string be_out;
  bench_cmd->add_option("--corpus", be.corpus_path)->required();
  bench_cmd->add_option("--vocab", be.vocab_path)->required();
  bench_cmd->add_option("--config", be.config_path)->required();
  bench_cmd->add_option("--workers", be.workers);
  bench_cmd->add_option("--minibatch", be.minibatch);
  bench_cmd->add_option("--max-iters", be.max_iters);
  bench_cmd->add_option("--eval-every", be.eval_every);
  bench_cmd->add_option("--seed", be.seed);
  bench_cmd->add_option("--out", be_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      HyperParams hyper = HyperParams::symmetric(
          syn.k, syn_alpha, syn_eta, syn_kappa_diag, syn_kappa_off,
          syn_theta_diag, syn_theta_off);
      auto [corpus, truth] = generate_synthetic(syn, hyper);
      fs::create_directories(syn_out);
      save_corpus(corpus, syn_out + "/corpus.ndjson");
      std::vector<std::string> vocab;
      vocab.reserve(corpus.vocab_size);
      for (int v = 0; v < corpus.vocab_size; ++v) {
        vocab.push_back("w" + std::to_string(v));
      }
      save_vocab(vocab, syn_out + "/vocab.txt");
      write_matrix(truth.pi, syn_out + "/truth_pi.csv");
      write_matrix(truth.b_true, syn_out + "/truth_b.csv");
      write_matrix(truth.beta_true, syn_out + "/truth_beta.csv");
      std::cout << "synthetic corpus: " << corpus.num_users << " users, "
                << corpus.total_threads() << " threads, " << corpus.total_edges
                << " edges, " << corpus.total_tokens() << " tokens\n";
    } else if (*split_cmd) {
      const auto corpus = load_corpus(sp_corpus, sp_vocab);
      const auto split = split_edges(corpus, sp_seed, sp_zero);
      save_split(split, sp_out);
      std::cout << "split: " << split.train.size() << " train, "
                << split.heldout.size() << " heldout, " << split.test.size()
                << " test\n";
    } else if (*train_cmd) {
      const auto corpus = load_corpus(ta.corpus_path, ta.vocab_path);
      const EvalSplit split = ta.split_path.empty()
                                  ? EvalSplit::all_train(corpus)
                                  : load_split(ta.split_path);
      const HyperParams hyper = load_hyper(ta.config_path);
      const TrainConfig config = to_config(ta);
      const TrainOutcome outcome = train(corpus, split, hyper, config);
      save_snapshot(outcome, hyper, config.mode, ta.out_dir);
      save_trace_csv(outcome.report, ta.out_dir + "/trace.csv");
      std::cout << (outcome.report.converged ? "converged" : "max iterations")
                << " after " << outcome.report.iterations << " rounds; final elbo "
                << outcome.report.elbo_trace.back().elbo << "\n";
    } else if (*eval_cmd) {
      const auto corpus = load_corpus(ev_corpus, ev_vocab);
      const auto split = load_split(ev_split);
      const Snapshot model = load_snapshot(ev_model);
      const Snapshot mmsb = load_snapshot(ev_mmsb);
      const Snapshot lda = load_snapshot(ev_lda);
      if (lda.doc_gamma.empty()) {
        throw std::runtime_error("--lda snapshot has no document proportions");
      }
      const RmseReport report = evaluate_all(
          corpus, split, model.global, mmsb.global, lda.doc_gamma,
          parse_grid(ev_grid), ev_raw ? RmseMode::RawSum : RmseMode::Mean);
      save_report_csv(report, ev_out);
      std::cout << report_table(report);
    } else if (*tune_cmd) {
      const auto corpus = load_corpus(tu.corpus_path, tu.vocab_path);
      const auto split = load_split(tu.split_path);
      std::ifstream cfg(tu.config_path);
      if (!cfg) throw std::runtime_error("cannot open " + tu.config_path);
      nlohmann::json j;
      cfg >> j;
      const TuneGrids grids = grids_from_config(j);
      const TrainConfig config = to_config(tu);
      const TuneOutcome outcome = tune(corpus, split, grids, config);
      fs::create_directories(tu_out);
      {
        std::ofstream out(tu_out + "/tune.csv");
        out << "param,value,heldout_rmse,status\n";
        for (const auto& row : outcome.table) {
          out << row.param << "," << row.value << "," << row.heldout_rmse << ","
              << (row.failed ? "failed" : "ok") << "\n";
        }
      }
      save_hyper(outcome.best, tu_out + "/best_config.json");
      std::cout << "tuned over " << outcome.trainings << " trainings\n";
    } else if (*analyze_cmd) {
      const auto corpus = load_corpus(an_corpus, an_vocab);
      const auto vocab = load_vocab(an_vocab);
      const Snapshot snap = load_snapshot(an_model);
      fs::create_directories(an_out);

      const auto roles = dominant_roles(snap.global.gamma);
      save_roles_csv(roles, an_out + "/roles.csv");
      const auto adjacency = sorted_adjacency_export(corpus, roles);
      save_adjacency_csv(adjacency, an_out + "/user_order.csv",
                         an_out + "/adjacency.csv");

      const LocalState local = full_local_pass(corpus, snap.global, snap.hyper);
      const auto histogram =
          local_global_variation(corpus, snap.global.gamma, local, an_bins);
      save_variation_csv(histogram, an_out + "/variation.csv");

      if (snap.global.num_topics() >= 5) {
        std::array<int, 5> group{0, 1, 2, 3, 4};
        if (!an_group.empty()) {
          const auto ids = parse_grid(an_group);
          if (ids.size() != 5) throw std::runtime_error("--topic-group needs 5 ids");
          for (int i = 0; i < 5; ++i) group[i] = static_cast<int>(ids[i]);
        }
        const auto points =
            pentagon_projection(snap.global.gamma, group, node_degrees(corpus));
        save_pentagon_csv(points, an_out + "/pentagon.csv");
        save_pentagon_svg(points, an_out + "/pentagon.svg");
      }
      save_top_words_csv(
          top_words(snap.global.tau, vocab,
                    std::min<int>(an_top, static_cast<int>(vocab.size()))),
          an_out + "/top_words.csv");
      std::cout << "analytics written to " << an_out << "\n";
    } else if (*bench_cmd) {
      const auto corpus = load_corpus(be.corpus_path, be.vocab_path);
      const HyperParams hyper = load_hyper(be.config_path);
      TrainConfig config = to_config(be);
      config.schedule = Schedule::PSSV;  // bench overrides per run
      const auto traces =
          bench_schedules(corpus, EvalSplit::all_train(corpus), hyper, config);
      fs::create_directories(be_out);
      for (const auto& [schedule, report] : traces) {
        save_trace_csv(report, be_out + "/bench_" + to_string(schedule) + ".csv");
        std::cout << to_string(schedule) << ": " << report.iterations
                  << " rounds, final elbo " << report.elbo_trace.back().elbo
                  << " at " << report.elbo_trace.back().seconds << "s\n";
      }
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
