#include "threadnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace threadnet {

std::map<UserId, int> dominant_roles(const Eigen::MatrixXd& gamma) {
  std::map<UserId, int> roles;
  for (Eigen::Index p = 0; p < gamma.rows(); ++p) {
    const Eigen::VectorXd pi = gamma.row(p).transpose() / gamma.row(p).sum();
    Eigen::Index best;
    const double mass = pi.maxCoeff(&best);
    roles[static_cast<UserId>(p)] =
        mass > 0.5 ? static_cast<int>(best) : kUnassignedRole;
  }
  return roles;
}

SortedAdjacency sorted_adjacency_export(const ThreadCorpus& corpus,
                                        const std::map<UserId, int>& roles) {
  SortedAdjacency adj;
  adj.roles = roles;
  for (const auto& [user, role] : roles) adj.user_order.push_back(user);
  auto role_key = [&roles](UserId u) {
    const int r = roles.at(u);
    return r == kUnassignedRole ? std::numeric_limits<int>::max() : r;
  };
  std::stable_sort(adj.user_order.begin(), adj.user_order.end(),
                   [&](UserId a, UserId b) { return role_key(a) < role_key(b); });

  std::map<std::pair<UserId, UserId>, long long> aggregated;
  for (const auto& t : corpus.threads) {
    for (const auto& e : t.edges) aggregated[{e.src, e.dst}] += e.weight;
  }
  for (const auto& [pair, weight] : aggregated) {
    adj.edges.push_back({pair.first, pair.second, weight});
  }
  std::stable_sort(adj.edges.begin(), adj.edges.end(),
                   [&](const SortedAdjacency::Entry& a,
                       const SortedAdjacency::Entry& b) {
                     const auto ka = std::make_tuple(role_key(a.src), role_key(a.dst),
                                                     a.src, a.dst);
                     const auto kb = std::make_tuple(role_key(b.src), role_key(b.dst),
                                                     b.src, b.dst);
                     return ka < kb;
                   });
  return adj;
}

std::vector<long long> local_global_variation(const ThreadCorpus& corpus,
                                              const Eigen::MatrixXd& gamma,
                                              const LocalState& local, int bins) {
  if (bins < 1) throw std::invalid_argument("local_global_variation: bins >= 1");
  if (local.threads.size() != corpus.threads.size()) {
    throw std::invalid_argument("local_global_variation: local state mismatch");
  }
  const int k = static_cast<int>(gamma.cols());
  std::vector<long long> hist(bins, 0);
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    const auto& thread = corpus.threads[t];
    for (const auto& [p, tokens] : thread.docs) {
      const Eigen::VectorXd sums = local.threads[t].phi_sender_sums(thread, p, k);
      const double total = sums.sum();
      if (total <= 0.0) continue;  // no edges for this (user, thread)
      const Eigen::VectorXd thread_pi = sums / total;
      const Eigen::VectorXd global_pi =
          gamma.row(p).transpose() / gamma.row(p).sum();
      const double variation =
          100.0 * 0.5 * (global_pi - thread_pi).cwiseAbs().sum();
      int bin = static_cast<int>(variation / 100.0 * bins);
      bin = std::clamp(bin, 0, bins - 1);
      ++hist[bin];
    }
  }
  return hist;
}

std::vector<PentagonPoint> pentagon_projection(
    const Eigen::MatrixXd& gamma, const std::array<int, 5>& topic_group,
    const std::map<UserId, long long>& degrees) {
  for (int topic : topic_group) {
    if (topic < 0 || topic >= gamma.cols()) {
      throw std::invalid_argument("pentagon_projection: topic id out of range");
    }
  }
  // Corners at 90 + 72k degrees; palette blue, green, red, cyan, purple.
  constexpr std::array<std::array<int, 3>, 5> palette{{
      {0, 0, 255}, {0, 170, 0}, {255, 0, 0}, {0, 200, 200}, {160, 32, 240}}};
  std::array<double, 5> corner_x{};
  std::array<double, 5> corner_y{};
  for (int c = 0; c < 5; ++c) {
    const double angle = (90.0 + 72.0 * c) * std::numbers::pi / 180.0;
    corner_x[c] = std::cos(angle);
    corner_y[c] = std::sin(angle);
  }

  std::vector<PentagonPoint> points;
  points.reserve(gamma.rows());
  for (Eigen::Index p = 0; p < gamma.rows(); ++p) {
    const Eigen::VectorXd pi = gamma.row(p).transpose() / gamma.row(p).sum();
    Eigen::VectorXd slice(5);
    for (int c = 0; c < 5; ++c) slice[c] = pi[topic_group[c]];
    PentagonPoint point;
    point.user = static_cast<UserId>(p);
    const auto deg = degrees.find(point.user);
    point.size = deg == degrees.end() ? 0 : deg->second;
    const double mass = slice.sum();
    if (mass <= 0.0) {
      point.degenerate = true;  // centroid, flagged
      points.push_back(point);
      continue;
    }
    slice /= mass;
    double red = 0.0, green = 0.0, blue = 0.0;
    for (int c = 0; c < 5; ++c) {
      point.x += slice[c] * corner_x[c];
      point.y += slice[c] * corner_y[c];
      red += slice[c] * palette[c][0];
      green += slice[c] * palette[c][1];
      blue += slice[c] * palette[c][2];
    }
    point.rgb = {static_cast<int>(std::lround(red)),
                 static_cast<int>(std::lround(green)),
                 static_cast<int>(std::lround(blue))};
    points.push_back(point);
  }
  return points;
}

std::vector<std::vector<std::string>> top_words(
    const Eigen::MatrixXd& tau, const std::vector<std::string>& vocab, int n) {
  if (n > static_cast<int>(vocab.size()) || n < 0) {
    throw std::invalid_argument("top_words: n must lie in [0, V]");
  }
  if (tau.cols() != static_cast<Eigen::Index>(vocab.size())) {
    throw std::invalid_argument("top_words: tau does not match vocabulary");
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(tau.rows());
  std::vector<int> ids(vocab.size());
  for (Eigen::Index k = 0; k < tau.rows(); ++k) {
    std::iota(ids.begin(), ids.end(), 0);
    std::partial_sort(ids.begin(), ids.begin() + n, ids.end(),
                      [&](int a, int b) {
                        if (tau(k, a) != tau(k, b)) return tau(k, a) > tau(k, b);
                        return a < b;
                      });
    std::vector<std::string> words;
    words.reserve(n);
    for (int i = 0; i < n; ++i) words.push_back(vocab[ids[i]]);
    out.push_back(std::move(words));
  }
  return out;
}

std::map<UserId, long long> node_degrees(const ThreadCorpus& corpus) {
  std::map<UserId, long long> degrees;
  for (const auto& t : corpus.threads) {
    for (const auto& [p, tokens] : t.docs) degrees[p];  // participants show up
    for (const auto& e : t.edges) {
      ++degrees[e.src];
      ++degrees[e.dst];
    }
  }
  return degrees;
}

// --- emission -------------------------------------------------------------------

void save_roles_csv(const std::map<UserId, int>& roles, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "user,role\n";
  for (const auto& [user, role] : roles) {
    out << user << ",";
    if (role == kUnassignedRole) out << "unassigned";
    else out << role;
    out << "\n";
  }
}

void save_adjacency_csv(const SortedAdjacency& adj, const std::string& ordering_path,
                        const std::string& edges_path) {
  {
    std::ofstream out(ordering_path);
    if (!out) throw std::runtime_error("cannot write " + ordering_path);
    out << "position,user,role\n";
    for (size_t i = 0; i < adj.user_order.size(); ++i) {
      const int role = adj.roles.at(adj.user_order[i]);
      out << i << "," << adj.user_order[i] << ",";
      if (role == kUnassignedRole) out << "unassigned";
      else out << role;
      out << "\n";
    }
  }
  std::ofstream out(edges_path);
  if (!out) throw std::runtime_error("cannot write " + edges_path);
  out << "src,dst,weight\n";
  for (const auto& e : adj.edges) {
    out << e.src << "," << e.dst << "," << e.weight << "\n";
  }
}

void save_variation_csv(const std::vector<long long>& histogram,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "bin_low,bin_high,count\n";
  const double width = 100.0 / static_cast<double>(histogram.size());
  for (size_t b = 0; b < histogram.size(); ++b) {
    out << b * width << "," << (b + 1) * width << "," << histogram[b] << "\n";
  }
}

void save_pentagon_csv(const std::vector<PentagonPoint>& points,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "user,x,y,r,g,b,size,degenerate\n";
  for (const auto& p : points) {
    out << p.user << "," << p.x << "," << p.y << "," << p.rgb[0] << ","
        << p.rgb[1] << "," << p.rgb[2] << "," << p.size << ","
        << (p.degenerate ? 1 : 0) << "\n";
  }
}

void save_pentagon_svg(const std::vector<PentagonPoint>& points,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const double scale = 240.0;
  const double center = 256.0;
  long long max_degree = 1;
  for (const auto& p : points) max_degree = std::max(max_degree, p.size);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\">\n";
  out << "<rect width=\"512\" height=\"512\" fill=\"white\"/>\n";
  out << "<polygon points=\"";
  for (int c = 0; c < 5; ++c) {
    const double angle = (90.0 + 72.0 * c) * std::numbers::pi / 180.0;
    out << center + scale * std::cos(angle) << ","
        << center - scale * std::sin(angle) << (c == 4 ? "" : " ");
  }
  out << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& p : points) {
    const double r =
        2.0 + 10.0 * std::sqrt(static_cast<double>(p.size) /
                               static_cast<double>(max_degree));
    out << "<circle cx=\"" << center + scale * p.x << "\" cy=\""
        << center - scale * p.y << "\" r=\"" << r << "\" fill=\"rgb("
        << p.rgb[0] << "," << p.rgb[1] << "," << p.rgb[2]
        << ")\" fill-opacity=\"0.6\"/>\n";
  }
  out << "</svg>\n";
}

void save_top_words_csv(const std::vector<std::vector<std::string>>& words,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "topic,rank,word\n";
  for (size_t k = 0; k < words.size(); ++k) {
    for (size_t r = 0; r < words[k].size(); ++r) {
      out << k << "," << r << "," << words[k][r] << "\n";
    }
  }
}

}  // namespace threadnet
