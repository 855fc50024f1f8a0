#include "mdcert/reform.hpp"

namespace mdcert {

namespace {

void require_mode(const ProblemSpec& spec, Mode m, const char* op) {
  if (spec.mode != m)
    throw std::invalid_argument(std::string(op) + ": wrong spec mode " + to_string(spec.mode));
}

}  // namespace

KronSystem build_ct_lure(const ProblemSpec& spec) {
  require_mode(spec, Mode::Continuous, "build_ct_lure");
  const double eta = spec.eta;
  const double muf = spec.f.mu;
  const ConjugateClass pb = spec.phibar();
  const double mupb = pb.mu_bar;

  KronSystem sys;
  sys.mode = Mode::Continuous;
  sys.d = spec.dim;
  sys.A0 = Eigen::MatrixXd::Constant(1, 1, -eta * muf * mupb);
  sys.B0 = (Eigen::MatrixXd(1, 2) << -eta, -eta * muf).finished();
  sys.C0 = (Eigen::MatrixXd(2, 1) << mupb, 1.0).finished();
  sys.D0 = (Eigen::MatrixXd(2, 2) << 0.0, 1.0, 0.0, 0.0).finished();
  sys.channel_sectors = {{0.0, spec.f.L - muf}, {0.0, pb.L_bar - mupb}};
  return sys;
}

KronSystem build_dt_lure(const ProblemSpec& spec) {
  require_mode(spec, Mode::Discrete, "build_dt_lure");
  const double eta = spec.eta;
  const double muf = spec.f.mu;
  const ConjugateClass pb = spec.phibar();
  const double mupb = pb.mu_bar;

  KronSystem sys;
  sys.mode = Mode::Discrete;
  sys.d = spec.dim;
  sys.A0 = Eigen::MatrixXd::Constant(1, 1, 1.0 - eta * muf * mupb);
  sys.B0 = (Eigen::MatrixXd(1, 2) << -eta, -eta * muf).finished();
  sys.C0 = (Eigen::MatrixXd(2, 1) << mupb, 1.0).finished();
  sys.D0 = (Eigen::MatrixXd(2, 2) << 0.0, 1.0, 0.0, 0.0).finished();
  sys.channel_sectors = {{0.0, spec.f.L - muf}, {0.0, pb.L_bar - mupb}};
  return sys;
}

KronSystem build_proj_lure(const ProblemSpec& spec) {
  require_mode(spec, Mode::Projected, "build_proj_lure");
  const double eta = spec.eta;
  const double muf = spec.f.mu;
  const ConjugateClass pb = spec.phibar();
  const double mupb = pb.mu_bar;
  const double a = 1.0 - eta * muf * mupb;

  // One extra output pair accommodates the algebraic loop through the
  // projection channel: y3 = x_{k+1}, y4 = z_{k+1}.
  KronSystem sys;
  sys.mode = Mode::Projected;
  sys.d = spec.dim;
  sys.A0 = Eigen::MatrixXd::Constant(1, 1, a);
  sys.B0 = (Eigen::MatrixXd(1, 4) << -eta, -eta * muf, -1.0, 0.0).finished();
  sys.C0 = (Eigen::MatrixXd(4, 1) << mupb, 1.0, mupb * a, a).finished();
  sys.D0 = (Eigen::MatrixXd(4, 4) <<
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
            -eta * mupb, -eta * mupb * muf, -mupb, 1.0,
            -eta, -eta * muf, -1.0, 0.0).finished();
  const double k2 = pb.L_bar - mupb;
  sys.channel_sectors = {{0.0, spec.f.L - muf}, {0.0, k2}, {0.0, kInf}, {0.0, k2},
                         // repeated-difference channel (y2 - y4, u2 - u4)
                         {0.0, k2}};
  return sys;
}

Eigen::MatrixXcd ct_transfer(const KronSystem& sys, std::complex<double> s) {
  const auto n = sys.A0.rows();
  Eigen::MatrixXcd sIA = s * Eigen::MatrixXcd::Identity(n, n) - sys.A0.cast<std::complex<double>>();
  return sys.C0.cast<std::complex<double>>() * sIA.inverse() * sys.B0.cast<std::complex<double>>() +
         sys.D0.cast<std::complex<double>>();
}

Eigen::MatrixXcd ct_transfer_closed_form(const ProblemSpec& spec, std::complex<double> s) {
  const double eta = spec.eta;
  const double muf = spec.f.mu;
  const double mupb = spec.phibar().mu_bar;
  Eigen::MatrixXcd G(2, 2);
  G << -eta * mupb, s, -eta, -eta * muf;
  return G / (s + eta * muf * mupb);
}

ResidualChannels residual_nonlinearity(const VectorFn& grad_f, const VectorFn& grad_phibar,
                                       const ProblemSpec& spec, const Eigen::VectorXd& y1_opt,
                                       const Eigen::VectorXd& y2_opt) {
  if (y1_opt.size() == 0 || y2_opt.size() == 0)
    throw std::invalid_argument("residual_nonlinearity: reference point not supplied");
  const double muf = spec.f.mu;
  const double mupb = spec.phibar().mu_bar;
  const Eigen::VectorXd r1 = grad_f(y1_opt) - muf * y1_opt;
  const Eigen::VectorXd r2 = grad_phibar(y2_opt) - mupb * y2_opt;
  ResidualChannels ch;
  ch.delta1 = [grad_f, muf, y1_opt, r1](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return grad_f(x + y1_opt) - muf * (x + y1_opt) - r1;
  };
  ch.delta2 = [grad_phibar, mupb, y2_opt, r2](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return grad_phibar(x + y2_opt) - mupb * (x + y2_opt) - r2;
  };
  return ch;
}

}  // namespace mdcert
