#include "threadnet/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace threadnet {

Eigen::MatrixXd block_matrix(const GlobalState& global) {
  return global.nu.cwiseProduct(global.lambda);
}

Eigen::MatrixXd membership(const GlobalState& global) {
  Eigen::MatrixXd pi = global.gamma;
  for (Eigen::Index p = 0; p < pi.rows(); ++p) {
    pi.row(p) /= pi.row(p).sum();
  }
  return pi;
}

double predict_edge(const Eigen::VectorXd& pi_u, const Eigen::VectorXd& pi_v,
                    const Eigen::MatrixXd& b) {
  if (pi_u.size() != b.rows() || pi_v.size() != b.cols()) {
    throw std::invalid_argument("predict_edge: shape mismatch");
  }
  if (std::abs(pi_u.sum() - 1.0) > 1e-6 || std::abs(pi_v.sum() - 1.0) > 1e-6) {
    throw std::invalid_argument("predict_edge: memberships must lie on the simplex");
  }
  return pi_u.dot(b * pi_v);
}

double rmse(const std::vector<std::pair<double, double>>& pairs, RmseMode mode) {
  if (pairs.empty()) throw std::invalid_argument("rmse: empty pair list");
  double sum = 0.0;
  for (const auto& [predicted, actual] : pairs) {
    const double d = predicted - actual;
    sum += d * d;
  }
  if (mode == RmseMode::Mean) sum /= static_cast<double>(pairs.size());
  return std::sqrt(sum);
}

double mean_baseline(const std::vector<SplitEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("mean_baseline: empty set");
  double sum = 0.0;
  for (const auto& e : entries) sum += static_cast<double>(e.y);
  return sum / static_cast<double>(entries.size());
}

namespace {

std::map<std::string, int> thread_index(const ThreadCorpus& corpus) {
  std::map<std::string, int> idx;
  for (size_t t = 0; t < corpus.threads.size(); ++t) {
    idx[corpus.threads[t].thread_id] = static_cast<int>(t);
  }
  return idx;
}

struct LdaPredictor {
  const DocGamma* docs;
  std::map<UserId, Eigen::VectorXd> user_average;
  int k = 0;
  mutable long long fallbacks = 0;

  explicit LdaPredictor(const DocGamma& doc_gamma) : docs(&doc_gamma) {
    std::map<UserId, std::pair<Eigen::VectorXd, int>> acc;
    for (const auto& [key, gamma] : doc_gamma) {
      k = static_cast<int>(gamma.size());
      Eigen::VectorXd pi = gamma / gamma.sum();
      auto it = acc.find(key.second);
      if (it == acc.end()) {
        acc.emplace(key.second, std::make_pair(pi, 1));
      } else {
        it->second.first += pi;
        ++it->second.second;
      }
    }
    for (auto& [user, pair] : acc) {
      user_average[user] = pair.first / static_cast<double>(pair.second);
    }
  }

  Eigen::VectorXd proportions(int thread_idx, UserId user) const {
    if (auto it = docs->find({thread_idx, user}); it != docs->end()) {
      return it->second / it->second.sum();
    }
    ++fallbacks;
    if (auto it = user_average.find(user); it != user_average.end()) {
      return it->second;
    }
    return Eigen::VectorXd::Constant(k, 1.0 / k);
  }
};

}  // namespace

LdaBaseline lda_baseline(const ThreadCorpus& corpus, const DocGamma& doc_gamma,
                         const std::vector<double>& m_grid,
                         const std::vector<SplitEntry>& heldout, RmseMode mode) {
  if (m_grid.empty()) throw std::invalid_argument("lda_baseline: empty m grid");
  if (doc_gamma.empty()) {
    throw std::invalid_argument("lda_baseline: no trained document proportions");
  }
  const auto tidx = thread_index(corpus);
  LdaPredictor predictor(doc_gamma);

  std::vector<double> dots;
  std::vector<double> actual;
  dots.reserve(heldout.size());
  for (const auto& e : heldout) {
    const int t = tidx.at(e.thread_id);
    dots.push_back(predictor.proportions(t, e.p).dot(predictor.proportions(t, e.q)));
    actual.push_back(static_cast<double>(e.y));
  }

  LdaBaseline best;
  bool first = true;
  for (double m : m_grid) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(dots.size());
    for (size_t i = 0; i < dots.size(); ++i) {
      pairs.push_back({m * dots[i], actual[i]});
    }
    const double score = rmse(pairs, mode);
    if (first || score < best.heldout_rmse) {
      best.m_star = m;
      best.heldout_rmse = score;
      first = false;
    }
  }
  best.fallbacks = predictor.fallbacks;
  return best;
}

double score_model(const GlobalState& global,
                   const std::vector<SplitEntry>& entries, RmseMode mode) {
  const Eigen::MatrixXd pi = membership(global);
  const Eigen::MatrixXd b = block_matrix(global);
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(entries.size());
  for (const auto& e : entries) {
    pairs.push_back({pi.row(e.p) * b * pi.row(e.q).transpose(),
                     static_cast<double>(e.y)});
  }
  return rmse(pairs, mode);
}

double RmseReport::value(const std::string& method, const std::string& split) const {
  for (const auto& row : rows) {
    if (row.method == method && row.split == split) return row.rmse;
  }
  throw std::out_of_range("report: no row for " + method + "/" + split);
}

RmseReport evaluate_all(const ThreadCorpus& corpus, const EvalSplit& split,
                        const GlobalState& full_model,
                        const GlobalState& mmsb_model, const DocGamma& lda_docs,
                        const std::vector<double>& m_grid, RmseMode mode) {
  RmseReport report;
  const auto tidx = thread_index(corpus);
  const LdaBaseline lda = lda_baseline(corpus, lda_docs, m_grid, split.heldout, mode);
  report.lda_m_star = lda.m_star;
  LdaPredictor predictor(lda_docs);

  const std::vector<std::pair<std::string, const std::vector<SplitEntry>*>> splits = {
      {"heldout", &split.heldout}, {"test", &split.test}};
  for (const auto& [split_name, entries] : splits) {
    report.rows.push_back({"model", split_name,
                           score_model(full_model, *entries, mode),
                           static_cast<long long>(entries->size())});
    report.rows.push_back({"mmsb", split_name,
                           score_model(mmsb_model, *entries, mode),
                           static_cast<long long>(entries->size())});
    std::vector<std::pair<double, double>> lda_pairs;
    std::vector<std::pair<double, double>> mean_pairs;
    const double ybar = mean_baseline(*entries);
    for (const auto& e : *entries) {
      const int t = tidx.at(e.thread_id);
      const double dot =
          predictor.proportions(t, e.p).dot(predictor.proportions(t, e.q));
      lda_pairs.push_back({lda.m_star * dot, static_cast<double>(e.y)});
      mean_pairs.push_back({ybar, static_cast<double>(e.y)});
    }
    report.rows.push_back({"lda", split_name, rmse(lda_pairs, mode),
                           static_cast<long long>(entries->size())});
    report.rows.push_back({"baseline", split_name, rmse(mean_pairs, mode),
                           static_cast<long long>(entries->size())});
  }
  return report;
}

void save_report_csv(const RmseReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "method,split,rmse,n\n";
  out << std::setprecision(17);
  for (const auto& row : report.rows) {
    out << row.method << "," << row.split << "," << row.rmse << "," << row.n << "\n";
  }
}

std::string report_table(const RmseReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "method" << std::setw(10) << "split"
      << std::setw(14) << "rmse" << "n\n";
  for (const auto& row : report.rows) {
    out << std::left << std::setw(10) << row.method << std::setw(10) << row.split
        << std::setw(14) << std::setprecision(6) << row.rmse << row.n << "\n";
  }
  return out.str();
}

}  // namespace threadnet
