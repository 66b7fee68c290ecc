#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "threadnet/analysis.hpp"

using namespace threadnet;

TEST_CASE("dominant_roles threshold and rescale invariance") {
  Eigen::MatrixXd gamma(4, 3);
  gamma << 6.0, 4.0, 0.0001,   // 0.6 -> role 0
           5.0, 5.0, 0.0001,   // exactly 0.5 -> unassigned (strict)
           0.1, 0.1, 9.8,      // -> role 2
           1.0, 1.0, 1.0;      // uniform -> unassigned
  const auto roles = dominant_roles(gamma);
  CHECK(roles.at(0) == 0);
  CHECK(roles.at(1) == kUnassignedRole);
  CHECK(roles.at(2) == 2);
  CHECK(roles.at(3) == kUnassignedRole);

  Eigen::MatrixXd scaled = gamma * 37.0;
  const auto roles2 = dominant_roles(scaled);
  CHECK(roles == roles2);
}

TEST_CASE("sorted_adjacency_export groups by role with unassigned last") {
  ThreadCorpus corpus;
  corpus.num_users = 4;
  corpus.vocab_size = 1;
  corpus.threads.resize(2);
  corpus.threads[0].thread_id = "a";
  for (int u = 0; u < 4; ++u) corpus.threads[0].docs[u];
  corpus.threads[0].edges.push_back({3, 0, 2});
  corpus.threads[0].edges.push_back({0, 1, 1});
  corpus.threads[1].thread_id = "b";
  corpus.threads[1].docs[0];
  corpus.threads[1].docs[1];
  corpus.threads[1].edges.push_back({0, 1, 3});
  corpus.finalize();

  std::map<UserId, int> roles{{0, 1}, {1, 0}, {2, 0}, {3, kUnassignedRole}};
  const auto adj = sorted_adjacency_export(corpus, roles);
  REQUIRE(adj.user_order.size() == 4);
  CHECK(adj.user_order[0] == 1);
  CHECK(adj.user_order[1] == 2);
  CHECK(adj.user_order[2] == 0);
  CHECK(adj.user_order[3] == 3);  // unassigned after all assigned groups

  // Edge 0->1 aggregates across threads; ordering by (role(src), role(dst)).
  REQUIRE(adj.edges.size() == 2);
  CHECK(adj.edges[0].src == 0);
  CHECK(adj.edges[0].dst == 1);
  CHECK(adj.edges[0].weight == 4);
  CHECK(adj.edges[1].src == 3);

  std::map<UserId, int> single{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  const auto one_group = sorted_adjacency_export(corpus, single);
  for (int u = 0; u < 4; ++u) CHECK(one_group.user_order[u] == u);
}

TEST_CASE("local_global_variation endpoints") {
  // One thread, user 0 with a single out-edge; phi concentrated on sender
  // topic 1 while gamma points at topic 0 -> 100% variation.
  ThreadCorpus corpus;
  corpus.num_users = 2;
  corpus.vocab_size = 1;
  corpus.threads.resize(1);
  corpus.threads[0].thread_id = "v";
  corpus.threads[0].docs[0];
  corpus.threads[0].docs[1];
  corpus.threads[0].edges.push_back({0, 1, 1});
  corpus.finalize();

  LocalState local;
  local.threads.resize(1);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(2, 2);
  phi(1, 0) = 0.6;
  phi(1, 1) = 0.4;  // sender marginal = e_2
  local.threads[0].phi = {phi};

  Eigen::MatrixXd gamma(2, 2);
  gamma << 1000.0, 0.0001, 1.0, 1.0;

  const auto hist100 = local_global_variation(corpus, gamma, local, 10);
  long long total = 0;
  for (long long c : hist100) total += c;
  CHECK(total == 1);  // only user 0 has edges
  CHECK(hist100.back() == 1);  // ~100% lands in the top bin

  // Matching distributions -> 0%.
  Eigen::MatrixXd gamma_match(2, 2);
  gamma_match << 0.0001, 1000.0, 1.0, 1.0;
  const auto hist0 = local_global_variation(corpus, gamma_match, local, 10);
  CHECK(hist0.front() == 1);

  // pi = (1/2, 1/2) vs thread-level e_2 -> 50%.
  Eigen::MatrixXd gamma_half(2, 2);
  gamma_half << 5.0, 5.0, 1.0, 1.0;
  const auto hist50 = local_global_variation(corpus, gamma_half, local, 4);
  CHECK(hist50[2] == 1);  // [50, 75) bucket
}

TEST_CASE("pentagon_projection basis, centroid and midpoint") {
  std::map<UserId, long long> degrees{{0, 3}, {1, 5}, {2, 2}};
  const std::array<int, 5> group{0, 1, 2, 3, 4};

  Eigen::MatrixXd gamma(3, 5);
  gamma.setConstant(1e-12);
  gamma(0, 0) = 1.0;                      // pure corner 1
  gamma.row(1).setConstant(1.0);          // uniform
  gamma(2, 0) = 0.5;
  gamma(2, 1) = 0.5;                      // midpoint of corners 1-2

  const auto points = pentagon_projection(gamma, group, degrees);
  REQUIRE(points.size() == 3);

  const double angle0 = 90.0 * std::numbers::pi / 180.0;
  CHECK(points[0].x == doctest::Approx(std::cos(angle0)).epsilon(1e-6));
  CHECK(points[0].y == doctest::Approx(std::sin(angle0)).epsilon(1e-6));
  CHECK(points[0].rgb[0] == 0);
  CHECK(points[0].rgb[1] == 0);
  CHECK(points[0].rgb[2] == 255);  // pure blue
  CHECK(points[0].size == 3);

  CHECK(points[1].x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(points[1].y == doctest::Approx(0.0).epsilon(1e-9));

  const double angle1 = (90.0 + 72.0) * std::numbers::pi / 180.0;
  CHECK(points[2].x ==
        doctest::Approx(0.5 * (std::cos(angle0) + std::cos(angle1))).epsilon(1e-6));
  CHECK(points[2].y ==
        doctest::Approx(0.5 * (std::sin(angle0) + std::sin(angle1))).epsilon(1e-6));
}

TEST_CASE("pentagon_projection stays in the hull with colors in range") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  Eigen::MatrixXd gamma(50, 6);
  for (Eigen::Index i = 0; i < gamma.size(); ++i) gamma(i) = unif(rng);
  std::map<UserId, long long> degrees;
  for (int u = 0; u < 50; ++u) degrees[u] = u;
  const auto points = pentagon_projection(gamma, {1, 2, 3, 4, 5}, degrees);
  for (const auto& p : points) {
    CHECK(std::hypot(p.x, p.y) <= 1.0 + 1e-9);  // inside the unit circle hull
    for (int c = 0; c < 3; ++c) {
      CHECK(p.rgb[c] >= 0);
      CHECK(p.rgb[c] <= 255);
    }
  }

  // Zero mass on the group -> centroid with the degenerate flag.
  Eigen::MatrixXd zero_mass(1, 6);
  zero_mass << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  const auto degen = pentagon_projection(zero_mass, {1, 2, 3, 4, 5}, {});
  REQUIRE(degen.size() == 1);
  CHECK(degen[0].degenerate);
  CHECK(degen[0].x == doctest::Approx(0.0));
}

TEST_CASE("top_words ranking and ties") {
  std::vector<std::string> vocab{"v0", "v1", "v2", "v3", "v4"};
  Eigen::MatrixXd tau(2, 5);
  tau << 0.1, 0.1, 9.0, 0.1, 0.2,   // one-hot-ish on v2
         1.0, 1.0, 1.0, 1.0, 1.0;   // uniform: ties by id
  const auto words = top_words(tau, vocab, 3);
  REQUIRE(words.size() == 2);
  CHECK(words[0][0] == "v2");
  CHECK(words[0][1] == "v4");
  CHECK(words[1] == std::vector<std::string>{"v0", "v1", "v2"});

  CHECK_THROWS_AS(top_words(tau, vocab, 6), std::invalid_argument);

  // The paper's table shape: 15 rows per topic.
  std::vector<std::string> big_vocab;
  for (int v = 0; v < 40; ++v) big_vocab.push_back("w" + std::to_string(v));
  Eigen::MatrixXd tau2 = Eigen::MatrixXd::Random(3, 40).cwiseAbs();
  const auto fifteen = top_words(tau2, big_vocab, 15);
  for (const auto& topic : fifteen) CHECK(topic.size() == 15);
}

TEST_CASE("node_degrees counts endpoints") {
  TinyOptions opt;
  opt.users = 4;
  opt.threads = 2;
  opt.max_tokens = 0;
  opt.seed = 15;
  const auto corpus = make_tiny_corpus(opt);
  const auto degrees = node_degrees(corpus);
  long long total = 0;
  for (const auto& [u, d] : degrees) total += d;
  CHECK(total == 2 * corpus.total_edges);
}

TEST_CASE("csv and svg emission") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "threadnet-analysis";
  fs::create_directories(dir);

  std::map<UserId, int> roles{{0, 1}, {1, kUnassignedRole}};
  save_roles_csv(roles, (dir / "roles.csv").string());
  std::ifstream in(dir / "roles.csv");
  std::string header, l0, l1;
  std::getline(in, header);
  std::getline(in, l0);
  std::getline(in, l1);
  CHECK(header == "user,role");
  CHECK(l0 == "0,1");
  CHECK(l1 == "1,unassigned");

  std::vector<PentagonPoint> points(1);
  points[0].user = 0;
  points[0].x = 0.5;
  points[0].y = 0.25;
  points[0].rgb = {10, 20, 30};
  points[0].size = 4;
  save_pentagon_svg(points, (dir / "p.svg").string());
  std::ifstream svg(dir / "p.svg");
  std::string content((std::istreambuf_iterator<char>(svg)),
                      std::istreambuf_iterator<char>());
  CHECK(content.find("<svg") != std::string::npos);
  CHECK(content.find("rgb(10,20,30)") != std::string::npos);
}
