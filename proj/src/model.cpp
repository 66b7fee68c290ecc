#include "threadnet/model.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace threadnet {

HyperParams HyperParams::symmetric(int k, double alpha_scalar, double eta_word,
                                   double kappa_diag, double kappa_off,
                                   double theta_diag, double theta_off,
                                   double omega) {
  HyperParams h;
  h.k = k;
  h.alpha = Eigen::VectorXd::Constant(k, alpha_scalar);
  h.eta_word = eta_word;
  h.kappa = Eigen::MatrixXd::Constant(k, k, kappa_off);
  h.kappa.diagonal().setConstant(kappa_diag);
  h.theta = Eigen::MatrixXd::Constant(k, k, theta_off);
  h.theta.diagonal().setConstant(theta_diag);
  h.omega = omega;
  return h;
}

HyperParams HyperParams::ts_preset() {
  return symmetric(10, 0.05, 0.05, 2.5, 1.5, 2.5, 1.5, 1e-4);
}

void HyperParams::validate() const {
  if (k < 1) throw std::invalid_argument("hyper: K must be >= 1");
  if (alpha.size() != k || (alpha.array() <= 0.0).any())
    throw std::invalid_argument("hyper: alpha must be a positive K-vector");
  if (eta_word <= 0.0) throw std::invalid_argument("hyper: eta must be > 0");
  if (kappa.rows() != k || kappa.cols() != k || (kappa.array() <= 0.0).any())
    throw std::invalid_argument("hyper: kappa must be a positive K x K matrix");
  if (theta.rows() != k || theta.cols() != k || (theta.array() <= 0.0).any())
    throw std::invalid_argument("hyper: theta must be a positive K x K matrix");
  if (omega < 0.0) throw std::invalid_argument("hyper: omega must be >= 0");
  if (epsilon <= 0.0) throw std::invalid_argument("hyper: epsilon must be > 0");
  if (rho < 0.5 || rho > 1.0)
    throw std::invalid_argument("hyper: rho must lie in [0.5, 1]");
  if (zeta <= 0.0) throw std::invalid_argument("hyper: zeta must be > 0");
  if (rho_nu <= 0.0) throw std::invalid_argument("hyper: rho_nu must be > 0");
}

void GlobalState::validate() const {
  const int k = num_topics();
  if (k < 1 || gamma.rows() < 1)
    throw std::invalid_argument("global state: empty gamma");
  if (nu.rows() != k || nu.cols() != k || lambda.rows() != k ||
      lambda.cols() != k || tau.rows() != k)
    throw std::invalid_argument("global state: inconsistent shapes");
  if ((gamma.array() <= 0.0).any() || (tau.array() <= 0.0).any() ||
      (nu.array() <= 0.0).any() || (lambda.array() <= 0.0).any())
    throw std::invalid_argument("global state: entries must be positive");
}

namespace {

// kappa/theta accept either {"diag": a, "offdiag": b} or a full K x K array.
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int k,
                                 const char* name) {
  Eigen::MatrixXd m(k, k);
  if (j.is_object()) {
    const double diag = j.at("diag").get<double>();
    const double off = j.at("offdiag").get<double>();
    m.setConstant(off);
    m.diagonal().setConstant(diag);
    return m;
  }
  if (j.is_number()) {
    m.setConstant(j.get<double>());
    return m;
  }
  if (j.is_array() && static_cast<int>(j.size()) == k) {
    for (int g = 0; g < k; ++g) {
      const auto& row = j.at(g);
      if (static_cast<int>(row.size()) != k)
        throw std::invalid_argument(std::string("config: bad row length in ") + name);
      for (int h = 0; h < k; ++h) m(g, h) = row.at(h).get<double>();
    }
    return m;
  }
  throw std::invalid_argument(std::string("config: cannot parse ") + name);
}

}  // namespace

nlohmann::json hyper_to_json(const HyperParams& hyper) {
  nlohmann::json j;
  j["k"] = hyper.k;
  j["alpha"] = std::vector<double>(hyper.alpha.data(),
                                   hyper.alpha.data() + hyper.alpha.size());
  j["eta"] = hyper.eta_word;
  auto mat = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index g = 0; g < m.rows(); ++g) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index h = 0; h < m.cols(); ++h) row.push_back(m(g, h));
      rows.push_back(row);
    }
    return rows;
  };
  j["kappa"] = mat(hyper.kappa);
  j["theta"] = mat(hyper.theta);
  j["omega"] = hyper.omega;
  j["epsilon"] = hyper.epsilon;
  j["zeta"] = hyper.zeta;
  j["rho"] = hyper.rho;
  j["rho_nu"] = hyper.rho_nu;
  return j;
}

HyperParams hyper_from_json(const nlohmann::json& j) {
  HyperParams h;
  h.k = j.at("k").get<int>();
  if (h.k < 1) throw std::invalid_argument("config: k must be >= 1");
  const auto& a = j.at("alpha");
  if (a.is_number()) {
    h.alpha = Eigen::VectorXd::Constant(h.k, a.get<double>());
  } else {
    if (static_cast<int>(a.size()) != h.k)
      throw std::invalid_argument("config: alpha length != k");
    h.alpha.resize(h.k);
    for (int i = 0; i < h.k; ++i) h.alpha[i] = a.at(i).get<double>();
  }
  h.eta_word = j.at("eta").get<double>();
  h.kappa = matrix_from_json(j.at("kappa"), h.k, "kappa");
  h.theta = matrix_from_json(j.at("theta"), h.k, "theta");
  h.omega = j.value("omega", h.omega);
  h.epsilon = j.value("epsilon", h.epsilon);
  h.zeta = j.value("zeta", h.zeta);
  h.rho = j.value("rho", h.rho);
  h.rho_nu = j.value("rho_nu", h.rho_nu);
  h.validate();
  return h;
}

HyperParams load_hyper(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return hyper_from_json(j);
}

void save_hyper(const HyperParams& hyper, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << hyper_to_json(hyper).dump(2) << "\n";
}

}  // namespace threadnet
