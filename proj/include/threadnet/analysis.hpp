#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <string>
#include <vector>

#include "threadnet/corpus.hpp"
#include "threadnet/local_inference.hpp"
#include "threadnet/model.hpp"

namespace threadnet {

constexpr int kUnassignedRole = -1;

/// argmax role of the normalized gamma row when its mass exceeds 0.5
/// (strictly); kUnassignedRole otherwise.
std::map<UserId, int> dominant_roles(const Eigen::MatrixXd& gamma);

struct SortedAdjacency {
  std::vector<UserId> user_order;  // grouped by role ascending, unassigned last
  std::map<UserId, int> roles;
  struct Entry {
    UserId src;
    UserId dst;
    long long weight;  // aggregated over threads
  };
  std::vector<Entry> edges;  // ordered by (role(src), role(dst), src, dst)
};

SortedAdjacency sorted_adjacency_export(const ThreadCorpus& corpus,
                                        const std::map<UserId, int>& roles);

/// Histogram of 100 * total-variation distance between each user's global
/// membership and their thread-level proportions (sender marginals of phi
/// summed over the thread neighborhood). `bins` equal-width buckets over
/// [0, 100]; (user, thread) pairs without edges are skipped.
std::vector<long long> local_global_variation(const ThreadCorpus& corpus,
                                              const Eigen::MatrixXd& gamma,
                                              const LocalState& local, int bins);

struct PentagonPoint {
  UserId user;
  double x = 0.0;
  double y = 0.0;
  std::array<int, 3> rgb{0, 0, 0};
  long long size = 0;   // node degree
  bool degenerate = false;  // no mass on the topic group; placed at centroid
};

/// Projects the 5-topic slice of each membership onto the pentagon whose
/// corners sit at angles 90 + 72k degrees on the unit circle, with the
/// palette blue, green, red, cyan, purple.
std::vector<PentagonPoint> pentagon_projection(
    const Eigen::MatrixXd& gamma, const std::array<int, 5>& topic_group,
    const std::map<UserId, long long>& degrees);

/// Per topic, the n words with the largest tau, ties toward the smaller id.
std::vector<std::vector<std::string>> top_words(
    const Eigen::MatrixXd& tau, const std::vector<std::string>& vocab, int n);

/// Total edge endpoints per user across all threads.
std::map<UserId, long long> node_degrees(const ThreadCorpus& corpus);

// --- emission ----------------------------------------------------------------

void save_roles_csv(const std::map<UserId, int>& roles, const std::string& path);
void save_adjacency_csv(const SortedAdjacency& adj, const std::string& ordering_path,
                        const std::string& edges_path);
void save_variation_csv(const std::vector<long long>& histogram,
                        const std::string& path);
void save_pentagon_csv(const std::vector<PentagonPoint>& points,
                       const std::string& path);
void save_pentagon_svg(const std::vector<PentagonPoint>& points,
                       const std::string& path);
void save_top_words_csv(const std::vector<std::vector<std::string>>& words,
                        const std::string& path);

}  // namespace threadnet
