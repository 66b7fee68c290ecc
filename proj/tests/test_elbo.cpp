#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "threadnet/elbo.hpp"

using namespace threadnet;

TEST_CASE("elbo matches exhaustive enumeration on the spec's tiny instance") {
  // 2 users, 1 thread, 1 edge, 2 tokens, K = 2.
  ThreadCorpus corpus;
  corpus.num_users = 2;
  corpus.vocab_size = 3;
  corpus.threads.resize(1);
  auto& t = corpus.threads[0];
  t.thread_id = "tiny";
  t.docs[0] = {1, 2};
  t.docs[1] = {};
  t.edges.push_back({0, 1, 2});
  corpus.finalize();

  std::mt19937_64 rng(4);
  const auto hyper = random_hyper(2, rng);
  const auto global = random_global(corpus, 2, rng);
  const auto local = random_local(corpus, 2, rng);

  const double expected = oracle::brute_force_elbo(corpus, global, local, hyper);
  CHECK(std::abs(elbo(corpus, global, local, hyper) - expected) <= 1e-8);
}

TEST_CASE("elbo matches exhaustive enumeration on random tiny instances") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    TinyOptions opt;
    opt.users = 2 + static_cast<int>(rng() % 2);
    opt.threads = 1 + static_cast<int>(rng() % 2);
    opt.max_tokens = 2;
    opt.edge_prob = 0.5;
    opt.seed = trial + 1;
    const auto corpus = make_tiny_corpus(opt);
    const auto hyper = random_hyper(2, rng);
    const auto global = random_global(corpus, 2, rng);
    const auto local = random_local(corpus, 2, rng);
    const double expected = oracle::brute_force_elbo(corpus, global, local, hyper);
    CHECK(std::abs(elbo(corpus, global, local, hyper) - expected) <= 1e-8);
  }
}

TEST_CASE("K=1 degenerate: indicator entropies vanish") {
  TinyOptions opt;
  opt.users = 3;
  opt.threads = 1;
  opt.k = 1;
  opt.max_tokens = 2;
  opt.seed = 8;
  const auto corpus = make_tiny_corpus(opt);
  std::mt19937_64 rng(12);
  const auto hyper = random_hyper(1, rng);
  const auto global = random_global(corpus, 1, rng);
  const auto local = random_local(corpus, 1, rng);
  // With K = 1 every phi and chi is the point mass 1, so the bound is the
  // closed-form sum of expectation terms; the enumeration oracle computes
  // exactly that.
  const double expected = oracle::brute_force_elbo(corpus, global, local, hyper);
  CHECK(elbo(corpus, global, local, hyper) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("doubling a thread doubles the data terms only") {
  TinyOptions opt;
  opt.users = 3;
  opt.threads = 1;
  opt.max_tokens = 2;
  opt.seed = 21;
  auto corpus = make_tiny_corpus(opt);
  std::mt19937_64 rng(44);
  const auto hyper = random_hyper(2, rng);
  const auto global = random_global(corpus, 2, rng);
  const auto local = random_local(corpus, 2, rng);
  const double single = elbo(corpus, global, local, hyper);

  ThreadCorpus doubled = corpus;
  doubled.threads.push_back(corpus.threads[0]);
  doubled.threads[1].thread_id = "copy";
  doubled.finalize();
  LocalState local2 = local;
  local2.threads.push_back(local.threads[0]);
  const double twice = elbo(doubled, global, local2, hyper);

  // Global prior/entropy terms are unchanged; data terms double.
  LocalState empty_local;
  ThreadCorpus empty = corpus;
  empty.threads.clear();
  empty.finalize();
  empty_local.threads.clear();
  const double globals_only = elbo(empty, global, empty_local, hyper);
  CHECK(twice - globals_only ==
        doctest::Approx(2.0 * (single - globals_only)).epsilon(1e-10));
}

TEST_CASE("elbo permutation symmetry") {
  TinyOptions opt;
  opt.users = 3;
  opt.threads = 2;
  opt.max_tokens = 2;
  opt.seed = 3;
  const auto corpus = make_tiny_corpus(opt);
  std::mt19937_64 rng(5);
  auto hyper = random_hyper(2, rng);
  // Symmetric priors so relabeling is exact.
  hyper.alpha.setConstant(0.4);
  hyper.kappa.setConstant(0.8);
  hyper.theta.setConstant(1.1);
  const auto global = random_global(corpus, 2, rng);
  const auto local = random_local(corpus, 2, rng);
  const double base = elbo(corpus, global, local, hyper);

  GlobalState swapped = global;
  swapped.gamma.col(0).swap(swapped.gamma.col(1));
  swapped.tau.row(0).swap(swapped.tau.row(1));
  auto swap_matrix = [](Eigen::MatrixXd& m) {
    m.row(0).swap(m.row(1));
    m.col(0).swap(m.col(1));
  };
  swap_matrix(swapped.nu);
  swap_matrix(swapped.lambda);
  LocalState swapped_local = local;
  for (auto& tl : swapped_local.threads) {
    for (auto& phi : tl.phi) swap_matrix(phi);
    for (auto& [p, chis] : tl.chi) {
      for (auto& chi : chis) std::swap(chi[0], chi[1]);
    }
  }
  CHECK(elbo(corpus, swapped, swapped_local, hyper) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("elbo finite for positive states and shape mismatch throws") {
  TinyOptions opt;
  opt.users = 3;
  opt.threads = 2;
  opt.max_tokens = 2;
  opt.seed = 61;
  const auto corpus = make_tiny_corpus(opt);
  std::mt19937_64 rng(6);
  const auto hyper = random_hyper(2, rng);
  const auto global = random_global(corpus, 2, rng);
  const auto local = random_local(corpus, 2, rng);
  CHECK(std::isfinite(elbo(corpus, global, local, hyper)));

  LocalState broken = local;
  broken.threads.pop_back();
  CHECK_THROWS_AS(elbo(corpus, global, broken, hyper), std::invalid_argument);
}
