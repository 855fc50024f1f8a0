#pragma once

#include <string>
#include <vector>

#include "mdcert/certify.hpp"
#include "mdcert/mdlab.hpp"

namespace mdcert {

/// Minimal RFC-4180 CSV document with a mandatory header row; numbers are
/// rendered at full precision so reruns are byte-identical.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);

  static std::string num(double v);
  void row(const std::vector<std::string>& cells);

  const std::string& text() const { return buf_; }
  void write_file(const std::string& path) const;

 private:
  std::string buf_;
  size_t cols_ = 0;
};

/// Class constants used by the kappa sweeps of each mode:
/// ct: eta = mu_f = mu_pb = 1, L_f = L_pb = sqrt(kappa);
/// dt: mu's = 1, L's = sqrt(kappa), eta from Proposition 2;
/// proj: L's = 1, mu_f = mu_pb = 1/sqrt(kappa).
ProblemSpec spec_from_kappa(Mode mode, double kappa);

struct CertifyConfig {
  Mode mode = Mode::Discrete;
  std::vector<double> kappas;
  bool explicit_classes = false;
  FunctionClass f, phi;
  double eta = -1.0;  // < 0 means the mode default (ct: 1, dt/proj: prop2)
  MultiplierMode multipliers = MultiplierMode::SectorPlusPopov;
  double tol = 1e-7;
  uint64_t seed = 0;
  bool parallel = true;
};

struct CertifyPoint {
  double kappa = 0.0;
  RateCertificate cert;
};

/// Runs the certification sweep; grid points evaluate concurrently and the
/// results keep grid order. Throws on solver failure.
std::vector<CertifyPoint> run_certify(const CertifyConfig& cfg);

Csv certify_csv(const std::vector<CertifyPoint>& pts, MultiplierMode multipliers);

Csv figure2_csv();
Csv figure3_csv();
Csv figure4_csv();
Csv figure5_csv();
Csv figure_csv(int n);

/// Simulation instances known to the command line driver.
struct SimInstance {
  std::string name;
  SmoothFunction f;
  DgfPair dgf;
  double eta = 0.0;
  Eigen::VectorXd x0;
  Mode mode = Mode::Discrete;
};

SimInstance sim_instance(const std::string& name);
std::vector<std::string> sim_instance_names();

struct SimSummary {
  Trajectory traj;
  EmpiricalRate rate;
  double final_error = 0.0;  // |f(x_N) - f_opt|
  double f_opt = 0.0;
};

SimSummary run_sim(const SimInstance& inst, int steps);

Csv trajectory_csv(const Trajectory& traj, const SmoothFunction& f);

}  // namespace mdcert
