#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "threadnet/model.hpp"

namespace threadnet {

using UserId = int;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One discussion thread: the per-user aggregated documents and the weighted
/// directed reply edges among its participants. Participants are exactly the
/// users owning a docs entry (possibly with an empty token list).
struct ThreadRecord {
  struct Edge {
    UserId src = 0;
    UserId dst = 0;
    long long weight = 0;  // >= 1 for stored edges (Poisson support)
  };

  std::string thread_id;
  std::map<UserId, std::vector<int>> docs;  // user -> token ids
  std::vector<Edge> edges;

  // Derived adjacency, rebuilt by ThreadCorpus::finalize().
  std::map<UserId, std::vector<int>> out_edges;  // user -> edge indices, src == user
  std::map<UserId, std::vector<int>> in_edges;   // user -> edge indices, dst == user

  /// |delta_{t,p}|: how many users p has stored edges to in this thread.
  int delta(UserId p) const;
  bool has_edge(UserId p, UserId q) const;
  bool is_participant(UserId p) const { return docs.count(p) > 0; }
  void rebuild_index();
};

struct ThreadCorpus {
  int num_users = 0;   // U
  int vocab_size = 0;  // V
  std::vector<ThreadRecord> threads;
  long long total_edges = 0;  // N: stored directed edges, weight >= 1
  long long max_weight = 0;

  int total_threads() const { return static_cast<int>(threads.size()); }
  long long total_tokens() const;

  /// Rebuilds adjacency indices and counts, then validates invariants.
  void finalize();
  void validate() const;
};

struct SplitEntry {
  std::string thread_id;
  UserId p = 0;
  UserId q = 0;
  long long y = 0;
};

/// Disjoint 80/10/10 partition of the non-zero edges; when zero-augmented,
/// heldout and test additionally carry sampled absent pairs with y = 0.
struct EvalSplit {
  std::vector<SplitEntry> train;
  std::vector<SplitEntry> heldout;
  std::vector<SplitEntry> test;
  bool zero_augmented = false;

  /// Degenerate split placing every stored edge in train (no held data).
  static EvalSplit all_train(const ThreadCorpus& corpus);
};

struct SyntheticTruth {
  Eigen::MatrixXd pi;         // U x K, rows on the simplex
  Eigen::MatrixXd b_true;     // K x K, non-negative
  Eigen::MatrixXd beta_true;  // K x V, rows on the simplex
};

struct SyntheticConfig {
  int users = 100;
  int threads = 20;
  int k = 2;
  int avg_participants = 10;  // mean thread size (thread-starter topology)
  int doc_len = 20;           // tokens per participant document
  int vocab_size = 200;
  std::uint64_t seed = 1;
};

// --- file ingestion -------------------------------------------------------

std::vector<std::string> load_vocab(const std::string& path);
void save_vocab(const std::vector<std::string>& vocab, const std::string& path);

/// Corpus file: newline-delimited JSON, one thread per line:
/// {"thread": str, "docs": [{"user": int, "tokens": [int,..]},..],
///  "edges": [[src, dst, weight],..]}.
ThreadCorpus load_corpus(const std::string& corpus_path,
                         const std::string& vocab_path);
void save_corpus(const ThreadCorpus& corpus, const std::string& path);

/// Split file: newline-delimited JSON records
/// {"set": "train"|"heldout"|"test", "t": str, "p": int, "q": int, "y": int}.
void save_split(const EvalSplit& split, const std::string& path);
EvalSplit load_split(const std::string& path);

// --- operations -----------------------------------------------------------

/// Deterministic 80/10/10 edge partition. Requires N >= 10.
EvalSplit split_edges(const ThreadCorpus& corpus, std::uint64_t seed,
                      bool zero_augmented);

/// Samples a corpus from the generative process: per-user memberships
/// pi ~ Dir(alpha), block rates B ~ Gamma(kappa, theta), thread-starter edge
/// topology with Poisson weights, token topics from the neighborhood-averaged
/// sender indicators. Zero-weight draws are not stored.
std::pair<ThreadCorpus, SyntheticTruth> generate_synthetic(
    const SyntheticConfig& config, const HyperParams& hyper);

/// Counts per weight 1..cap-1; bucket `cap` aggregates cap-and-above.
std::map<long long, long long> edge_weight_histogram(const ThreadCorpus& corpus,
                                                     long long cap);

// --- derived views --------------------------------------------------------

/// Copy containing only the split's train edges (documents kept).
ThreadCorpus train_view(const ThreadCorpus& corpus, const EvalSplit& split);
/// Copy with all documents emptied (network-only training).
ThreadCorpus without_docs(const ThreadCorpus& corpus);
/// Copy with all edges removed (text-only training).
ThreadCorpus without_edges(const ThreadCorpus& corpus);

}  // namespace threadnet
