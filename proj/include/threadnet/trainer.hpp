#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "threadnet/corpus.hpp"
#include "threadnet/evaluation.hpp"
#include "threadnet/local_inference.hpp"
#include "threadnet/model.hpp"

namespace threadnet {

/// Thrown when training produces a non-finite objective or state.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Schedule { V, SV, SSV, PSSV };
enum class TrainMode { Full, MmsbOnly, LdaOnly };

std::string to_string(Schedule s);
std::string to_string(TrainMode m);
Schedule schedule_from_string(const std::string& s);
TrainMode mode_from_string(const std::string& s);

struct TrainConfig {
  Schedule schedule = Schedule::PSSV;
  int workers = 1;              // parallel shards; forced to 1 except for PSSV
  int minibatch_threads = 400;  // threads per round for SSV/PSSV
  int neighborhood_size = 20;   // per-user sub-sample size (half non-zero)
  int max_outer_iters = 100;
  double elbo_tol = 1e-5;       // relative, over a 5-evaluation window
  int eval_every = 5;           // full-corpus ELBO cadence for stochastic runs
  TrainMode mode = TrainMode::Full;
  std::uint64_t seed = 1;
  double local_tol = 1e-4;
  int local_max_iters = 50;
  bool freeze_nu = false;  // keep nu at its prior (diagnostic runs)

  void validate() const;
};

struct TracePoint {
  long long iteration = 0;
  double seconds = 0.0;
  double elbo = 0.0;
};

struct TrainReport {
  std::vector<TracePoint> elbo_trace;
  bool converged = false;
  long long iterations = 0;
};

struct TrainOutcome {
  GlobalState global;
  TrainReport report;
  LocalState final_local;  // converged locals at the final global state
  DocGamma doc_gamma;      // per-document proportions (LdaOnly mode)
};

/// gamma = alpha + U(0,1); tau = eta + U(0, 0.01); nu = kappa; lambda = theta.
GlobalState init_state(const ThreadCorpus& corpus, const HyperParams& hyper,
                       std::uint64_t seed);

/// Trains on the split's train edges. Schedule V sweeps every thread and
/// applies batch updates (xi = 1); SV samples one thread per round; SSV a
/// minibatch; PSSV additionally shards the local phase over config.workers.
/// MmsbOnly forces omega = 0 and drops documents; LdaOnly drops edges and
/// trains per-document proportions with standard Dirichlet-multinomial
/// updates. Throws NumericalError on a non-finite objective.
TrainOutcome train(const ThreadCorpus& corpus, const EvalSplit& split,
                   const HyperParams& hyper, const TrainConfig& config);

// --- snapshots ----------------------------------------------------------------

struct Snapshot {
  GlobalState global;
  HyperParams hyper;
  std::string mode;
  long long iteration = 0;
  bool converged = false;
  DocGamma doc_gamma;
};

/// Directory layout: manifest.json plus gamma/tau/nu/lambda.csv (row-major,
/// full-precision decimal); doc_gamma.csv for LdaOnly snapshots.
void save_snapshot(const TrainOutcome& outcome, const HyperParams& hyper,
                   TrainMode mode, const std::string& dir);
Snapshot load_snapshot(const std::string& dir);

void save_trace_csv(const TrainReport& report, const std::string& path);

// --- tuning --------------------------------------------------------------------

/// Candidate grids, each evaluated in the given order; the first entry of each
/// grid is the default used while later parameters are still untuned.
struct TuneGrids {
  std::vector<double> alpha{0.05};
  std::vector<double> omega{1e-4};
  std::vector<std::pair<double, double>> theta{{2.5, 1.5}};  // (diag, off-diag)
  std::vector<std::pair<double, double>> kappa{{2.5, 1.5}};
  std::vector<double> eta{0.05};
  std::vector<int> k{10};
  double epsilon = 1e-6;
  double zeta = 1024.0;
  double rho = 0.5;
  double rho_nu = 1e-3;

  /// Singleton grids holding the Cancer-ThreadStarter tuned values.
  static TuneGrids ts_preset();
};

struct TuneRow {
  std::string param;
  std::string value;
  double heldout_rmse = 0.0;
  bool failed = false;
};

struct TuneOutcome {
  HyperParams best;
  std::vector<TuneRow> table;
  long long trainings = 0;
};

/// Sequential coordinate tuning in the order alpha, omega, theta, kappa, eta,
/// K: each grid is scanned with the other parameters fixed, scored by heldout
/// rmse of the trained full model, and the winner locked in. Ties keep the
/// earlier candidate, so pass grids in ascending order.
TuneOutcome tune(const ThreadCorpus& corpus, const EvalSplit& split,
                 const TuneGrids& grids, const TrainConfig& config);

// --- schedule benchmark -----------------------------------------------------------

/// Runs V, SV, SSV and PSSV from the same initial state and records objective
/// against wall clock.
std::map<Schedule, TrainReport> bench_schedules(const ThreadCorpus& corpus,
                                                const EvalSplit& split,
                                                const HyperParams& hyper,
                                                const TrainConfig& config);

}  // namespace threadnet
