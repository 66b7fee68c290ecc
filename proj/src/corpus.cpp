#include "threadnet/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "threadnet/rng.hpp"

namespace threadnet {

int ThreadRecord::delta(UserId p) const {
  auto it = out_edges.find(p);
  return it == out_edges.end() ? 0 : static_cast<int>(it->second.size());
}

bool ThreadRecord::has_edge(UserId p, UserId q) const {
  auto it = out_edges.find(p);
  if (it == out_edges.end()) return false;
  for (int e : it->second) {
    if (edges[e].dst == q) return true;
  }
  return false;
}

void ThreadRecord::rebuild_index() {
  out_edges.clear();
  in_edges.clear();
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    out_edges[edges[e].src].push_back(e);
    in_edges[edges[e].dst].push_back(e);
  }
}

long long ThreadCorpus::total_tokens() const {
  long long n = 0;
  for (const auto& t : threads) {
    for (const auto& [user, tokens] : t.docs) n += static_cast<long long>(tokens.size());
  }
  return n;
}

void ThreadCorpus::finalize() {
  total_edges = 0;
  max_weight = 0;
  for (auto& t : threads) {
    t.rebuild_index();
    total_edges += static_cast<long long>(t.edges.size());
    for (const auto& e : t.edges) max_weight = std::max(max_weight, e.weight);
  }
  validate();
}

void ThreadCorpus::validate() const {
  if (num_users < 0 || vocab_size < 0) {
    throw ValidationError("corpus: negative counts");
  }
  for (const auto& t : threads) {
    for (const auto& [user, tokens] : t.docs) {
      if (user < 0 || user >= num_users) {
        throw ValidationError("thread " + t.thread_id + ": document owner " +
                              std::to_string(user) + " out of range");
      }
      for (int w : tokens) {
        if (w < 0 || w >= vocab_size) {
          throw ValidationError("thread " + t.thread_id + ": token id " +
                                std::to_string(w) + " outside vocabulary");
        }
      }
    }
    std::set<std::pair<UserId, UserId>> seen;
    for (const auto& e : t.edges) {
      if (e.weight < 1) {
        throw ValidationError("thread " + t.thread_id +
                              ": edge weight must be a positive integer");
      }
      if (!t.is_participant(e.src) || !t.is_participant(e.dst)) {
        throw ValidationError("thread " + t.thread_id + ": edge endpoint " +
                              std::to_string(t.is_participant(e.src) ? e.dst : e.src) +
                              " is not a participant");
      }
      if (e.src == e.dst) {
        throw ValidationError("thread " + t.thread_id + ": self-loop on user " +
                              std::to_string(e.src));
      }
      if (!seen.insert({e.src, e.dst}).second) {
        throw ValidationError("thread " + t.thread_id + ": duplicate edge " +
                              std::to_string(e.src) + "->" + std::to_string(e.dst));
      }
    }
  }
}

EvalSplit EvalSplit::all_train(const ThreadCorpus& corpus) {
  EvalSplit split;
  for (const auto& t : corpus.threads) {
    for (const auto& e : t.edges) {
      split.train.push_back({t.thread_id, e.src, e.dst, e.weight});
    }
  }
  return split;
}

// --- file ingestion -------------------------------------------------------

std::vector<std::string> load_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vocabulary file: " + path);
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  return vocab;
}

void save_vocab(const std::vector<std::string>& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write vocabulary file: " + path);
  for (const auto& w : vocab) out << w << "\n";
}

ThreadCorpus load_corpus(const std::string& corpus_path,
                         const std::string& vocab_path) {
  const auto vocab = load_vocab(vocab_path);
  std::ifstream in(corpus_path);
  if (!in) throw ParseError("cannot open corpus file: " + corpus_path);

  ThreadCorpus corpus;
  corpus.vocab_size = static_cast<int>(vocab.size());
  int max_user = -1;

  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    ThreadRecord rec;
    try {
      rec.thread_id = j.at("thread").get<std::string>();
      for (const auto& d : j.at("docs")) {
        const UserId user = d.at("user").get<UserId>();
        auto tokens = d.at("tokens").get<std::vector<int>>();
        if (!rec.docs.emplace(user, std::move(tokens)).second) {
          throw ParseError("duplicate document for user " + std::to_string(user));
        }
        max_user = std::max(max_user, user);
      }
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3) {
          throw ParseError("edge record must be [src, dst, weight]");
        }
        ThreadRecord::Edge edge{e.at(0).get<UserId>(), e.at(1).get<UserId>(),
                                e.at(2).get<long long>()};
        if (edge.weight < 0) {
          throw ValidationError("corpus line " + std::to_string(line_no) +
                                ": negative edge weight");
        }
        max_user = std::max(max_user, std::max(edge.src, edge.dst));
        rec.edges.push_back(edge);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    corpus.threads.push_back(std::move(rec));
  }
  corpus.num_users = max_user + 1;
  corpus.finalize();
  return corpus;
}

void save_corpus(const ThreadCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write corpus file: " + path);
  for (const auto& t : corpus.threads) {
    nlohmann::json j;
    j["thread"] = t.thread_id;
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& [user, tokens] : t.docs) {
      docs.push_back({{"user", user}, {"tokens", tokens}});
    }
    j["docs"] = std::move(docs);
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : t.edges) {
      edges.push_back({e.src, e.dst, e.weight});
    }
    j["edges"] = std::move(edges);
    out << j.dump() << "\n";
  }
}

void save_split(const EvalSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write split file: " + path);
  auto dump = [&out](const std::vector<SplitEntry>& entries, const char* name) {
    for (const auto& s : entries) {
      nlohmann::json j{{"set", name}, {"t", s.thread_id}, {"p", s.p},
                       {"q", s.q}, {"y", s.y}};
      out << j.dump() << "\n";
    }
  };
  dump(split.train, "train");
  dump(split.heldout, "heldout");
  dump(split.test, "test");
}

EvalSplit load_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open split file: " + path);
  EvalSplit split;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SplitEntry s{j.at("t").get<std::string>(), j.at("p").get<UserId>(),
                   j.at("q").get<UserId>(), j.at("y").get<long long>()};
      const auto set = j.at("set").get<std::string>();
      if (set == "train") split.train.push_back(std::move(s));
      else if (set == "heldout") split.heldout.push_back(std::move(s));
      else if (set == "test") split.test.push_back(std::move(s));
      else throw ParseError("unknown set label '" + set + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("split line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto& s : split.heldout) {
    if (s.y == 0) split.zero_augmented = true;
  }
  for (const auto& s : split.test) {
    if (s.y == 0) split.zero_augmented = true;
  }
  return split;
}

// --- split ------------------------------------------------------------------

EvalSplit split_edges(const ThreadCorpus& corpus, std::uint64_t seed,
                      bool zero_augmented) {
  std::vector<SplitEntry> all;
  all.reserve(static_cast<size_t>(corpus.total_edges));
  for (const auto& t : corpus.threads) {
    for (const auto& e : t.edges) {
      all.push_back({t.thread_id, e.src, e.dst, e.weight});
    }
  }
  const long long n = static_cast<long long>(all.size());
  if (n < 10) {
    throw ValidationError("split_edges: need at least 10 non-zero edges, have " +
                          std::to_string(n));
  }
  auto rng = make_engine(seed, "split-edges");
  std::shuffle(all.begin(), all.end(), rng);

  const long long n_heldout = std::llround(0.1 * static_cast<double>(n));
  const long long n_test = std::llround(0.1 * static_cast<double>(n));
  const long long n_train = n - n_heldout - n_test;

  EvalSplit split;
  split.zero_augmented = zero_augmented;
  split.train.assign(all.begin(), all.begin() + n_train);
  split.heldout.assign(all.begin() + n_train, all.begin() + n_train + n_heldout);
  split.test.assign(all.begin() + n_train + n_heldout, all.end());

  if (zero_augmented) {
    // Zero pairs come from within-thread participant pairs with no stored edge.
    std::vector<SplitEntry> pool;
    for (const auto& t : corpus.threads) {
      for (const auto& [p, ptoks] : t.docs) {
        for (const auto& [q, qtoks] : t.docs) {
          if (p == q || t.has_edge(p, q)) continue;
          pool.push_back({t.thread_id, p, q, 0});
        }
      }
    }
    const long long need = n_heldout + n_test;
    if (static_cast<long long>(pool.size()) < need) {
      throw ValidationError("split_edges: not enough absent pairs to zero-augment");
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    split.heldout.insert(split.heldout.end(), pool.begin(), pool.begin() + n_heldout);
    split.test.insert(split.test.end(), pool.begin() + n_heldout,
                      pool.begin() + need);
  }
  return split;
}

// --- synthetic generator ----------------------------------------------------

namespace {

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha,
                                 std::mt19937_64& rng) {
  Eigen::VectorXd draw(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    std::gamma_distribution<double> g(alpha[i], 1.0);
    draw[i] = g(rng);
  }
  const double total = draw.sum();
  if (total <= 0.0) {
    // All gamma draws underflowed (tiny alpha); fall back to a single spike.
    std::uniform_int_distribution<Eigen::Index> pick(0, alpha.size() - 1);
    draw.setZero();
    draw[pick(rng)] = 1.0;
    return draw;
  }
  return draw / total;
}

}  // namespace

std::pair<ThreadCorpus, SyntheticTruth> generate_synthetic(
    const SyntheticConfig& config, const HyperParams& hyper) {
  hyper.validate();
  if (config.users < 1 || config.threads < 1 || config.k < 1 ||
      config.vocab_size < 1 || config.doc_len < 0 || config.avg_participants < 2) {
    throw std::invalid_argument("generate_synthetic: bad dimensions");
  }
  if (hyper.k != config.k) {
    throw std::invalid_argument("generate_synthetic: hyper.k != config.k");
  }
  const int U = config.users;
  const int T = config.threads;
  const int K = config.k;
  const int V = config.vocab_size;

  SyntheticTruth truth;
  truth.pi.resize(U, K);
  truth.b_true.resize(K, K);
  truth.beta_true.resize(K, V);

  auto master = make_engine(config.seed, "synthetic-globals");
  for (int p = 0; p < U; ++p) {
    truth.pi.row(p) = sample_dirichlet(hyper.alpha, master).transpose();
  }
  for (int g = 0; g < K; ++g) {
    for (int h = 0; h < K; ++h) {
      std::gamma_distribution<double> gd(hyper.kappa(g, h), hyper.theta(g, h));
      truth.b_true(g, h) = gd(master);
    }
  }
  const Eigen::VectorXd eta_vec = Eigen::VectorXd::Constant(V, hyper.eta_word);
  for (int k = 0; k < K; ++k) {
    truth.beta_true.row(k) = sample_dirichlet(eta_vec, master).transpose();
  }

  ThreadCorpus corpus;
  corpus.num_users = U;
  corpus.vocab_size = V;
  corpus.threads.resize(T);

  for (int t = 0; t < T; ++t) {
    auto rng = make_engine(config.seed, "synthetic-thread", static_cast<std::uint64_t>(t));
    ThreadRecord& rec = corpus.threads[t];
    rec.thread_id = "synth-" + std::to_string(t);

    int size = 2;
    if (config.avg_participants > 2 && U > 2) {
      std::poisson_distribution<int> extra(config.avg_participants - 2);
      size = std::min(U, 2 + extra(rng));
      size = std::max(size, 2);
    } else {
      size = std::min(U, 2);
    }

    // Partial Fisher-Yates over user ids; the first drawn user starts the thread.
    std::vector<UserId> ids(U);
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<UserId> participants;
    participants.reserve(size);
    for (int i = 0; i < size; ++i) {
      std::uniform_int_distribution<int> pick(i, U - 1);
      std::swap(ids[i], ids[pick(rng)]);
      participants.push_back(ids[i]);
    }
    const UserId starter = participants[0];

    // Sender indicators of stored edges, for the token-topic coupling.
    std::map<UserId, std::vector<int>> sender_topics;
    for (int i = 1; i < size; ++i) {
      const UserId p = participants[i];
      const int zs = sample_categorical(truth.pi.row(p), rng);
      const int zr = sample_categorical(truth.pi.row(starter), rng);
      const double rate = truth.b_true(zs, zr);
      long long y = 0;
      if (rate > 0.0) {
        std::poisson_distribution<long long> pois(rate);
        y = pois(rng);
      }
      if (y >= 1) {
        rec.edges.push_back({p, starter, y});
        sender_topics[p].push_back(zs);
      }
    }

    for (UserId p : participants) rec.docs[p];  // participant entry, maybe empty
    if (config.doc_len > 0) {
      for (auto& [p, tokens] : rec.docs) {
        tokens.reserve(config.doc_len);
        const auto it = sender_topics.find(p);
        for (int i = 0; i < config.doc_len; ++i) {
          int topic;
          if (it == sender_topics.end() || it->second.empty()) {
            std::uniform_int_distribution<int> unif(0, K - 1);
            topic = unif(rng);
          } else {
            // z-bar: uniform over the user's sender indicators in this thread.
            std::uniform_int_distribution<size_t> pick(0, it->second.size() - 1);
            topic = it->second[pick(rng)];
          }
          tokens.push_back(sample_categorical(truth.beta_true.row(topic), rng));
        }
      }
    }
  }
  corpus.finalize();
  return {std::move(corpus), std::move(truth)};
}

std::map<long long, long long> edge_weight_histogram(const ThreadCorpus& corpus,
                                                     long long cap) {
  if (cap < 1) throw std::invalid_argument("edge_weight_histogram: cap must be >= 1");
  std::map<long long, long long> hist;
  for (const auto& t : corpus.threads) {
    for (const auto& e : t.edges) {
      ++hist[std::min(e.weight, cap)];
    }
  }
  return hist;
}

// --- derived views ----------------------------------------------------------

ThreadCorpus train_view(const ThreadCorpus& corpus, const EvalSplit& split) {
  std::map<std::string, std::set<std::pair<UserId, UserId>>> keep;
  for (const auto& s : split.train) keep[s.thread_id].insert({s.p, s.q});
  ThreadCorpus view = corpus;
  for (auto& t : view.threads) {
    const auto it = keep.find(t.thread_id);
    std::vector<ThreadRecord::Edge> kept;
    if (it != keep.end()) {
      for (const auto& e : t.edges) {
        if (it->second.count({e.src, e.dst})) kept.push_back(e);
      }
    }
    t.edges = std::move(kept);
  }
  view.finalize();
  return view;
}

ThreadCorpus without_docs(const ThreadCorpus& corpus) {
  ThreadCorpus view = corpus;
  for (auto& t : view.threads) {
    for (auto& [user, tokens] : t.docs) tokens.clear();
  }
  view.finalize();
  return view;
}

ThreadCorpus without_edges(const ThreadCorpus& corpus) {
  ThreadCorpus view = corpus;
  for (auto& t : view.threads) t.edges.clear();
  view.finalize();
  return view;
}

}  // namespace threadnet
