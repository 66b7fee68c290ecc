#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "threadnet/corpus.hpp"
#include "threadnet/model.hpp"

namespace threadnet {

/// Per-document topic proportions from text-only training, keyed by
/// (thread index, user).
using DocKey = std::pair<int, UserId>;
using DocGamma = std::map<DocKey, Eigen::VectorXd>;

/// B = nu .* lambda, the expected block rate matrix.
Eigen::MatrixXd block_matrix(const GlobalState& global);

/// Normalized gamma rows: the U x K global membership estimates.
Eigen::MatrixXd membership(const GlobalState& global);

/// Bilinear prediction pi_u^T B pi_v.
double predict_edge(const Eigen::VectorXd& pi_u, const Eigen::VectorXd& pi_v,
                    const Eigen::MatrixXd& b);

/// Root mean square error over (predicted, actual) pairs. RawSum keeps the
/// unnormalized sqrt-of-sum variant.
enum class RmseMode { Mean, RawSum };
double rmse(const std::vector<std::pair<double, double>>& pairs,
            RmseMode mode = RmseMode::Mean);

/// Constant predictor: the average weight of the given entries.
double mean_baseline(const std::vector<SplitEntry>& entries);

struct LdaBaseline {
  double m_star = 0.0;
  double heldout_rmse = 0.0;
  long long fallbacks = 0;  // edges scored via a user's corpus-average doc
};

/// Tunes the identity-block weight m over the heldout entries: predictions are
/// m * (pihat_{t,u} . pihat_{t,v}) from per-thread document proportions, with
/// a fallback to the user's corpus-average proportions when the thread
/// document is missing.
LdaBaseline lda_baseline(const ThreadCorpus& corpus, const DocGamma& doc_gamma,
                         const std::vector<double>& m_grid,
                         const std::vector<SplitEntry>& heldout,
                         RmseMode mode = RmseMode::Mean);

/// rmse over a split for a (gamma, B) model.
double score_model(const GlobalState& global,
                   const std::vector<SplitEntry>& entries,
                   RmseMode mode = RmseMode::Mean);

struct RmseReport {
  struct Row {
    std::string method;  // model | mmsb | lda | baseline
    std::string split;   // heldout | test
    double rmse = 0.0;
    long long n = 0;
  };
  std::vector<Row> rows;
  double lda_m_star = 0.0;

  double value(const std::string& method, const std::string& split) const;
};

/// The Table-3 style report: model and mmsb rows score normalized-gamma
/// memberships against B = nu .* lambda; the lda row uses the tuned identity
/// block; the baseline row the per-set mean weight.
RmseReport evaluate_all(const ThreadCorpus& corpus, const EvalSplit& split,
                        const GlobalState& full_model,
                        const GlobalState& mmsb_model, const DocGamma& lda_docs,
                        const std::vector<double>& m_grid,
                        RmseMode mode = RmseMode::Mean);

void save_report_csv(const RmseReport& report, const std::string& path);
std::string report_table(const RmseReport& report);

}  // namespace threadnet
