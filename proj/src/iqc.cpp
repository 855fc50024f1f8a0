#include "mdcert/iqc.hpp"

namespace mdcert {

namespace {

Eigen::Matrix2d swap_matrix() {
  Eigen::Matrix2d M;
  M << 0.0, 1.0, 1.0, 0.0;
  return M;
}

}  // namespace

Eigen::Vector2d IqcFilter::step(Eigen::VectorXd& state, double y, double u) const {
  Eigen::Vector2d out = Dy * y + Du * u;
  if (state_dim() > 0) {
    out += C * state;
    state = A * state + By * y + Bu * u;
  }
  return out;
}

Eigen::Matrix4cd FrequencyMultiplier::eval(double omega) const {
  const std::complex<double> jw(0.0, omega);
  return S.cast<std::complex<double>>() + jw * T.cast<std::complex<double>>();
}

Eigen::Matrix2d sector_qc_matrix(double mu, double L) {
  if (mu < 0.0 || mu > L) throw std::invalid_argument("sector_qc_matrix: need 0 <= mu <= L");
  Eigen::Matrix2d Q;
  Q << -2.0 * mu * L, L + mu, L + mu, -2.0;
  return Q;
}

FrequencyMultiplier sector_multiplier_ct(double alpha1, double alpha2, const ProblemSpec& spec) {
  if (alpha1 < 0.0 || alpha2 < 0.0)
    throw std::invalid_argument("sector_multiplier_ct: coefficients must be >= 0");
  const double k1 = spec.f.L - spec.f.mu;
  const ConjugateClass pb = spec.phibar();
  const double k2 = pb.L_bar - pb.mu_bar;
  FrequencyMultiplier pi;
  pi.S(0, 2) = pi.S(2, 0) = alpha1 * k1;
  pi.S(1, 3) = pi.S(3, 1) = alpha2 * k2;
  pi.S(2, 2) = -2.0 * alpha1;
  pi.S(3, 3) = -2.0 * alpha2;
  return pi;
}

FrequencyMultiplier popov_multiplier(double beta1, double beta2) {
  FrequencyMultiplier pi;
  pi.T(0, 2) = -beta1;
  pi.T(2, 0) = beta1;
  pi.T(1, 3) = -beta2;
  pi.T(3, 1) = beta2;
  return pi;
}

IqcFilter off_by_one_filter(double K, double rho_bar) {
  if (K < 0.0) throw std::invalid_argument("off_by_one_filter: K must be >= 0");
  if (rho_bar < 0.0) throw std::invalid_argument("off_by_one_filter: rho_bar must be >= 0");
  IqcFilter f;
  f.A = Eigen::MatrixXd::Zero(1, 1);
  f.By = Eigen::MatrixXd::Constant(1, 1, -K);
  f.Bu = Eigen::MatrixXd::Constant(1, 1, 1.0);
  f.C = (Eigen::MatrixXd(2, 1) << rho_bar * rho_bar, 0.0).finished();
  f.Dy = (Eigen::MatrixXd(2, 1) << K, 0.0).finished();
  f.Du = (Eigen::MatrixXd(2, 1) << -1.0, 1.0).finished();
  f.M = swap_matrix();
  f.rho_bar = rho_bar;
  return f;
}

IqcFilter sector_filter(double K) {
  if (K < 0.0) throw std::invalid_argument("sector_filter: K must be >= 0");
  IqcFilter f;
  f.A = Eigen::MatrixXd::Zero(0, 0);
  f.By = Eigen::MatrixXd::Zero(0, 1);
  f.Bu = Eigen::MatrixXd::Zero(0, 1);
  f.C = Eigen::MatrixXd::Zero(2, 0);
  f.Dy = (Eigen::MatrixXd(2, 1) << K, 0.0).finished();
  f.Du = (Eigen::MatrixXd(2, 1) << -1.0, 1.0).finished();
  f.M = swap_matrix();
  return f;
}

std::pair<IqcFilter, IqcFilter> projection_filters(double rho_bar) {
  if (rho_bar < 0.0) throw std::invalid_argument("projection_filters: rho_bar must be >= 0");
  // The infinite upper sector drops the K-scaled row; the pairing is
  // out1 = u against out2 = (filtered) y.
  IqcFilter s;
  s.A = Eigen::MatrixXd::Zero(0, 0);
  s.By = Eigen::MatrixXd::Zero(0, 1);
  s.Bu = Eigen::MatrixXd::Zero(0, 1);
  s.C = Eigen::MatrixXd::Zero(2, 0);
  s.Dy = (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished();
  s.Du = (Eigen::MatrixXd(2, 1) << 1.0, 0.0).finished();
  s.M = swap_matrix();

  IqcFilter w;
  w.A = Eigen::MatrixXd::Zero(1, 1);
  w.By = Eigen::MatrixXd::Constant(1, 1, -1.0);
  w.Bu = Eigen::MatrixXd::Zero(1, 1);
  w.C = (Eigen::MatrixXd(2, 1) << 0.0, rho_bar * rho_bar).finished();
  w.Dy = (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished();
  w.Du = (Eigen::MatrixXd(2, 1) << 1.0, 0.0).finished();
  w.M = swap_matrix();
  w.rho_bar = rho_bar;
  return {s, w};
}

ChannelSelectors repeated_difference_channels(const KronSystem& system) {
  if (system.mode != Mode::Projected)
    throw std::invalid_argument("repeated_difference_channels: system is not projected-mode");
  ChannelSelectors sel;
  sel.Sy = Eigen::MatrixXd::Zero(1, system.outputs());
  sel.Su = Eigen::MatrixXd::Zero(1, system.inputs());
  sel.Sy(0, 1) = 1.0;
  sel.Sy(0, 3) = -1.0;
  sel.Su(0, 1) = 1.0;
  sel.Su(0, 3) = -1.0;
  return sel;
}

}  // namespace mdcert
