#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "test_support.hpp"
#include "threadnet/corpus.hpp"

using namespace threadnet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "threadnet-corpus-test";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_corpus counts and round trip") {
  const auto dir = temp_dir();
  write_file(dir / "vocab.txt", "alpha\nbeta\ngamma\ndelta\nepsilon\n");
  write_file(dir / "corpus.ndjson",
             R"({"thread":"a","docs":[{"user":0,"tokens":[0,1]},{"user":1,"tokens":[2]}],"edges":[[0,1,3]]})"
             "\n"
             R"({"thread":"b","docs":[{"user":0,"tokens":[]},{"user":2,"tokens":[4,4]}],"edges":[[2,0,1],[0,2,2]]})"
             "\n");
  const auto corpus = load_corpus((dir / "corpus.ndjson").string(),
                                  (dir / "vocab.txt").string());
  CHECK(corpus.total_threads() == 2);
  CHECK(corpus.num_users == 3);
  CHECK(corpus.vocab_size == 5);
  CHECK(corpus.total_edges == 3);
  CHECK(corpus.total_tokens() == 5);
  CHECK(corpus.threads[1].delta(0) == 1);
  CHECK(corpus.threads[1].has_edge(2, 0));

  save_corpus(corpus, (dir / "round.ndjson").string());
  const auto again = load_corpus((dir / "round.ndjson").string(),
                                 (dir / "vocab.txt").string());
  CHECK(again.total_threads() == corpus.total_threads());
  CHECK(again.num_users == corpus.num_users);
  CHECK(again.total_edges == corpus.total_edges);
  CHECK(again.total_tokens() == corpus.total_tokens());
  for (int t = 0; t < corpus.total_threads(); ++t) {
    CHECK(again.threads[t].thread_id == corpus.threads[t].thread_id);
    CHECK(again.threads[t].docs == corpus.threads[t].docs);
    REQUIRE(again.threads[t].edges.size() == corpus.threads[t].edges.size());
    for (size_t e = 0; e < corpus.threads[t].edges.size(); ++e) {
      CHECK(again.threads[t].edges[e].src == corpus.threads[t].edges[e].src);
      CHECK(again.threads[t].edges[e].dst == corpus.threads[t].edges[e].dst);
      CHECK(again.threads[t].edges[e].weight == corpus.threads[t].edges[e].weight);
    }
  }
}

TEST_CASE("load_corpus empty file") {
  const auto dir = temp_dir();
  write_file(dir / "vocab2.txt", "a\n");
  write_file(dir / "empty.ndjson", "");
  const auto corpus =
      load_corpus((dir / "empty.ndjson").string(), (dir / "vocab2.txt").string());
  CHECK(corpus.total_threads() == 0);
  CHECK(corpus.total_edges == 0);
}

TEST_CASE("load_corpus error paths") {
  const auto dir = temp_dir();
  write_file(dir / "v.txt", "a\nb\n");

  write_file(dir / "neg.ndjson",
             R"({"thread":"a","docs":[{"user":0,"tokens":[]},{"user":1,"tokens":[]}],"edges":[[0,1,-1]]})"
             "\n");
  CHECK_THROWS_AS(load_corpus((dir / "neg.ndjson").string(), (dir / "v.txt").string()),
                  ValidationError);

  write_file(dir / "tok.ndjson",
             R"({"thread":"a","docs":[{"user":0,"tokens":[7]}],"edges":[]})" "\n");
  CHECK_THROWS_AS(load_corpus((dir / "tok.ndjson").string(), (dir / "v.txt").string()),
                  ValidationError);

  write_file(dir / "endpoint.ndjson",
             R"({"thread":"a","docs":[{"user":0,"tokens":[]}],"edges":[[0,1,2]]})" "\n");
  CHECK_THROWS_AS(
      load_corpus((dir / "endpoint.ndjson").string(), (dir / "v.txt").string()),
      ValidationError);

  write_file(dir / "garbled.ndjson", "{not json\n");
  try {
    load_corpus((dir / "garbled.ndjson").string(), (dir / "v.txt").string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("split_edges ratios, determinism, disjointness") {
  TinyOptions opt;
  opt.users = 12;
  opt.threads = 6;
  opt.max_tokens = 0;
  opt.edge_prob = 0.6;
  opt.seed = 99;
  auto corpus = make_tiny_corpus(opt);
  REQUIRE(corpus.total_edges >= 10);

  const auto split = split_edges(corpus, 7, false);
  const long long n = corpus.total_edges;
  CHECK(static_cast<long long>(split.heldout.size()) == std::llround(0.1 * n));
  CHECK(static_cast<long long>(split.test.size()) == std::llround(0.1 * n));
  CHECK(static_cast<long long>(split.train.size()) ==
        n - std::llround(0.1 * n) * 2);

  const auto again = split_edges(corpus, 7, false);
  CHECK(again.train.size() == split.train.size());
  for (size_t i = 0; i < split.train.size(); ++i) {
    CHECK(again.train[i].thread_id == split.train[i].thread_id);
    CHECK(again.train[i].p == split.train[i].p);
    CHECK(again.train[i].q == split.train[i].q);
  }

  // Exact partition of the non-zero edge multiset.
  std::multiset<std::tuple<std::string, UserId, UserId, long long>> from_split;
  for (const auto* part : {&split.train, &split.heldout, &split.test}) {
    for (const auto& s : *part) {
      from_split.insert({s.thread_id, s.p, s.q, s.y});
    }
  }
  std::multiset<std::tuple<std::string, UserId, UserId, long long>> from_corpus;
  for (const auto& t : corpus.threads) {
    for (const auto& e : t.edges) {
      from_corpus.insert({t.thread_id, e.src, e.dst, e.weight});
    }
  }
  CHECK(from_split == from_corpus);
}

TEST_CASE("split_edges zero augmentation and degenerate error") {
  TinyOptions opt;
  opt.users = 14;
  opt.threads = 8;
  opt.max_tokens = 0;
  opt.edge_prob = 0.4;
  opt.seed = 5;
  auto corpus = make_tiny_corpus(opt);
  REQUIRE(corpus.total_edges >= 10);
  const auto split = split_edges(corpus, 3, true);
  const long long expected = std::llround(0.1 * corpus.total_edges);
  long long zero_heldout = 0;
  for (const auto& s : split.heldout) {
    if (s.y == 0) ++zero_heldout;
  }
  CHECK(static_cast<long long>(split.heldout.size()) == 2 * expected);
  CHECK(zero_heldout == expected);
  long long zero_train = 0;
  for (const auto& s : split.train) {
    if (s.y == 0) ++zero_train;
  }
  CHECK(zero_train == 0);

  ThreadCorpus small;
  small.num_users = 2;
  small.vocab_size = 1;
  small.threads.resize(1);
  small.threads[0].thread_id = "only";
  small.threads[0].docs[0];
  small.threads[0].docs[1];
  small.threads[0].edges.push_back({0, 1, 1});
  small.finalize();
  CHECK_THROWS_AS(split_edges(small, 1, false), ValidationError);
}

TEST_CASE("split file round trip") {
  const auto dir = temp_dir();
  TinyOptions opt;
  opt.users = 12;
  opt.threads = 6;
  opt.max_tokens = 0;
  opt.seed = 42;
  auto corpus = make_tiny_corpus(opt);
  if (corpus.total_edges < 10) return;
  const auto split = split_edges(corpus, 11, false);
  save_split(split, (dir / "split.ndjson").string());
  const auto loaded = load_split((dir / "split.ndjson").string());
  CHECK(loaded.train.size() == split.train.size());
  CHECK(loaded.heldout.size() == split.heldout.size());
  CHECK(loaded.test.size() == split.test.size());
  CHECK(loaded.zero_augmented == false);
}

TEST_CASE("generate_synthetic basic invariants") {
  SyntheticConfig config;
  config.users = 40;
  config.threads = 12;
  config.k = 3;
  config.avg_participants = 6;
  config.doc_len = 5;
  config.vocab_size = 30;
  config.seed = 17;
  const auto hyper = HyperParams::symmetric(3, 0.1, 0.05, 2.0, 1.0, 2.0, 1.0);
  const auto [corpus, truth] = generate_synthetic(config, hyper);

  CHECK(corpus.num_users == 40);
  CHECK(corpus.total_threads() == 12);
  CHECK(corpus.vocab_size == 30);
  for (int p = 0; p < 40; ++p) {
    CHECK(truth.pi.row(p).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(truth.pi.row(p).minCoeff() >= 0.0);
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(truth.beta_true.row(k).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(truth.b_true.minCoeff() >= 0.0);
  corpus.validate();

  // Thread-starter topology: every edge points at one user per thread.
  for (const auto& t : corpus.threads) {
    std::set<UserId> dsts;
    for (const auto& e : t.edges) dsts.insert(e.dst);
    CHECK(dsts.size() <= 1);
  }
}

TEST_CASE("generate_synthetic determinism") {
  SyntheticConfig config;
  config.users = 25;
  config.threads = 8;
  config.k = 2;
  config.doc_len = 4;
  config.vocab_size = 16;
  config.seed = 5;
  const auto hyper = HyperParams::symmetric(2, 0.2, 0.1, 1.5, 1.0, 1.5, 1.0);
  const auto [c1, t1] = generate_synthetic(config, hyper);
  const auto [c2, t2] = generate_synthetic(config, hyper);
  CHECK(t1.pi == t2.pi);
  CHECK(t1.b_true == t2.b_true);
  CHECK(t1.beta_true == t2.beta_true);
  REQUIRE(c1.total_threads() == c2.total_threads());
  for (int t = 0; t < c1.total_threads(); ++t) {
    CHECK(c1.threads[t].docs == c2.threads[t].docs);
    REQUIRE(c1.threads[t].edges.size() == c2.threads[t].edges.size());
    for (size_t e = 0; e < c1.threads[t].edges.size(); ++e) {
      CHECK(c1.threads[t].edges[e].src == c2.threads[t].edges[e].src);
      CHECK(c1.threads[t].edges[e].weight == c2.threads[t].edges[e].weight);
    }
  }
}

TEST_CASE("generate_synthetic degenerate cases") {
  SyntheticConfig config;
  config.users = 10;
  config.threads = 4;
  config.k = 1;
  config.doc_len = 0;
  config.vocab_size = 3;
  config.seed = 2;
  const auto hyper = HyperParams::symmetric(1, 0.5, 0.1, 2.0, 2.0, 1.0, 1.0);
  const auto [corpus, truth] = generate_synthetic(config, hyper);
  CHECK(truth.pi.col(0).minCoeff() == doctest::Approx(1.0));
  CHECK(corpus.total_tokens() == 0);  // doc_len = 0 keeps participants, no text
  for (const auto& t : corpus.threads) CHECK(t.docs.size() >= 2);

  auto bad = hyper;
  bad.alpha[0] = -1.0;
  CHECK_THROWS(generate_synthetic(config, bad));
}

TEST_CASE("edge_weight_histogram") {
  ThreadCorpus corpus;
  corpus.num_users = 4;
  corpus.vocab_size = 1;
  corpus.threads.resize(1);
  auto& t = corpus.threads[0];
  t.thread_id = "h";
  for (int u = 0; u < 4; ++u) t.docs[u];
  t.edges.push_back({0, 1, 1});
  t.edges.push_back({1, 0, 1});
  t.edges.push_back({2, 1, 2});
  t.edges.push_back({3, 1, 15});
  corpus.finalize();

  const auto hist = edge_weight_histogram(corpus, 11);
  CHECK(hist.at(1) == 2);
  CHECK(hist.at(2) == 1);
  CHECK(hist.at(11) == 1);
  CHECK(hist.count(15) == 0);

  long long total = 0;
  for (const auto& [w, c] : hist) total += c;
  CHECK(total == corpus.total_edges);

  ThreadCorpus empty;
  empty.num_users = 0;
  empty.vocab_size = 0;
  empty.finalize();
  CHECK(edge_weight_histogram(empty, 11).empty());

  ThreadCorpus all_cap = corpus;
  for (auto& e : all_cap.threads[0].edges) e.weight = 5;
  all_cap.finalize();
  const auto capped = edge_weight_histogram(all_cap, 5);
  CHECK(capped.size() == 1);
  CHECK(capped.at(5) == 4);
}

TEST_CASE("views strip the right parts") {
  TinyOptions opt;
  opt.users = 8;
  opt.threads = 4;
  opt.max_tokens = 3;
  opt.seed = 31;
  auto corpus = make_tiny_corpus(opt);
  const auto no_docs = without_docs(corpus);
  CHECK(no_docs.total_tokens() == 0);
  CHECK(no_docs.total_edges == corpus.total_edges);
  const auto no_edges = without_edges(corpus);
  CHECK(no_edges.total_edges == 0);
  CHECK(no_edges.total_tokens() == corpus.total_tokens());

  if (corpus.total_edges >= 10) {
    const auto split = split_edges(corpus, 3, false);
    const auto view = train_view(corpus, split);
    CHECK(view.total_edges == static_cast<long long>(split.train.size()));
    CHECK(view.total_tokens() == corpus.total_tokens());
  }
}
