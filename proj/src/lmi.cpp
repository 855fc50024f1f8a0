#include "mdcert/lmi.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace mdcert {

namespace {

void check_symmetric(const Eigen::MatrixXd& M, const char* what) {
  if (M.rows() != M.cols() || (M - M.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + M.cwiseAbs().maxCoeff()))
    throw std::invalid_argument(std::string("AffineMatrixInequality: ") + what + " not symmetric");
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int AffineMatrixInequality::index_of(const std::string& name) const {
  for (int i = 0; i < coords(); ++i)
    if (names[i] == name) return i;
  return -1;
}

Eigen::MatrixXd AffineMatrixInequality::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != coords())
    throw std::invalid_argument("AffineMatrixInequality::evaluate: coordinate count mismatch");
  Eigen::MatrixXd M = F0;
  for (int i = 0; i < coords(); ++i) M += x[i] * basis[i];
  return M;
}

Eigen::MatrixXd AffineMatrixInequality::evaluate_p(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd P = P0;
  for (int i = 0; i < coords(); ++i)
    if (pbasis[i].rows() > 0) P += x[i] * pbasis[i];
  return P;
}

Eigen::VectorXd AffineMatrixInequality::pack(const Witness& w) const {
  Eigen::VectorXd x(coords());
  for (int i = 0; i < coords(); ++i) x[i] = w.at(names[i]);
  return x;
}

std::string AffineMatrixInequality::dump() const {
  std::ostringstream os;
  auto put = [&](const char* tag, const Eigen::MatrixXd& M) {
    os << tag << " " << M.rows() << "x" << M.cols() << "\n";
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      for (Eigen::Index c = 0; c < M.cols(); ++c) os << (c ? " " : "") << fmt_full(M(r, c));
      os << "\n";
    }
  };
  put("F0", F0);
  for (int i = 0; i < coords(); ++i) {
    os << "coord " << names[i] << (nonneg[i] ? " >=0" : " free") << "\n";
    put("F", basis[i]);
    if (pbasis[i].rows() > 0) put("P", pbasis[i]);
  }
  if (has_pblock()) put("P0", P0);
  return os.str();
}

void AffineMatrixInequality::validate() const {
  check_symmetric(F0, "F0");
  if (names.size() != basis.size() || nonneg.size() != basis.size() || pbasis.size() != basis.size())
    throw std::invalid_argument("AffineMatrixInequality: field lengths disagree");
  for (const auto& F : basis) {
    check_symmetric(F, "basis");
    if (F.rows() != F0.rows()) throw std::invalid_argument("AffineMatrixInequality: basis size mismatch");
  }
  for (size_t i = 0; i < names.size(); ++i)
    for (size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j]) throw std::invalid_argument("AffineMatrixInequality: duplicate name " + names[i]);
}

double verify_witness(const AffineMatrixInequality& lmi, const Witness& w) {
  const Eigen::VectorXd x = lmi.pack(w);  // throws on missing coordinates
  for (int i = 0; i < lmi.coords(); ++i)
    if (lmi.nonneg[i] && x[i] < 0.0)
      throw std::invalid_argument("verify_witness: sign violation on " + lmi.names[i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmi.evaluate(x), Eigen::EigenvaluesOnly);
  double margin = es.eigenvalues().maxCoeff();
  if (lmi.has_pblock()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(lmi.evaluate_p(x), Eigen::EigenvaluesOnly);
    margin = std::max(margin, -ep.eigenvalues().minCoeff());
  }
  return margin;
}

// ---------------------------------------------------------------------------
// Continuous time (Theorem 3)

namespace {

// Active channels: sector width 0 means the residual nonlinearity is
// identically zero, so the channel input and its multiplier terms drop.
struct CtChannels {
  std::vector<int> active;  // indices into {0, 1}
  double k1 = 0.0, k2 = 0.0;
};

CtChannels ct_channels(const KronSystem& sys) {
  CtChannels ch;
  ch.k1 = sys.channel_sectors.at(0).width();
  ch.k2 = sys.channel_sectors.at(1).width();
  if (ch.k1 > 0.0) ch.active.push_back(0);
  if (ch.k2 > 0.0) ch.active.push_back(1);
  return ch;
}

Eigen::MatrixXd ct_matrix(const KronSystem& sys, double rho, double p, double q1, double q2,
                          double gamma, const CtChannels& ch) {
  const double A = sys.A0(0, 0);
  const Eigen::RowVector2d B = sys.B0.row(0);
  const Eigen::Vector2d C = sys.C0.col(0);
  const Eigen::Matrix2d D = sys.D0;
  const Eigen::Vector2d q(q1, q2);
  const Eigen::Vector2d g(0.0, gamma);

  const double Atil = A + rho;
  const Eigen::RowVector2d Btil = -B;
  // Ctil = (Q + 2 rho Gamma) C + Gamma C A
  const Eigen::Vector2d Ctil = (q.array() + 2.0 * rho * g.array()).matrix().cwiseProduct(C) +
                               g.cwiseProduct(C) * A;
  // Dtil = -Q D + Q K^{-1} - Gamma C B
  Eigen::Matrix2d Dtil = -(q.asDiagonal() * D) - g.cwiseProduct(C) * B;
  const double kinv1 = ch.k1 > 0.0 ? 1.0 / ch.k1 : 0.0;
  const double kinv2 = ch.k2 > 0.0 ? 1.0 / ch.k2 : 0.0;
  Dtil(0, 0) += q1 * kinv1;
  Dtil(1, 1) += q2 * kinv2;

  const int m = static_cast<int>(ch.active.size());
  Eigen::MatrixXd M(1 + m, 1 + m);
  M(0, 0) = 2.0 * p * Atil;
  for (int a = 0; a < m; ++a) {
    const int i = ch.active[a];
    M(0, 1 + a) = M(1 + a, 0) = p * Btil(i) - Ctil(i);
    for (int b = 0; b < m; ++b) {
      const int j = ch.active[b];
      M(1 + a, 1 + b) = -(Dtil(i, j) + Dtil(j, i));
    }
  }
  return M;
}

AffineMatrixInequality extract_affine(
    const std::vector<std::string>& names, const std::vector<bool>& nonneg,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& eval, int pdim,
    const std::vector<Eigen::MatrixXd>& pbasis) {
  AffineMatrixInequality lmi;
  lmi.names = names;
  lmi.nonneg = nonneg;
  const int n = static_cast<int>(names.size());
  lmi.F0 = eval(Eigen::VectorXd::Zero(n));
  lmi.F0 = 0.5 * (lmi.F0 + lmi.F0.transpose().eval());
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd Fi = eval(Eigen::VectorXd::Unit(n, i)) - lmi.F0;
    lmi.basis.push_back(0.5 * (Fi + Fi.transpose().eval()));
  }
  if (pdim > 0) {
    lmi.P0 = Eigen::MatrixXd::Zero(pdim, pdim);
    lmi.pbasis = pbasis;
  } else {
    lmi.P0 = Eigen::MatrixXd::Zero(0, 0);
    lmi.pbasis.assign(n, Eigen::MatrixXd());
  }
  lmi.validate();
  return lmi;
}

}  // namespace

AffineMatrixInequality assemble_ct_lmi(const KronSystem& system, double rho, bool pin_gamma_zero) {
  if (system.mode != Mode::Continuous)
    throw std::invalid_argument("assemble_ct_lmi: system is not continuous-mode");
  if (rho < 0.0) throw std::invalid_argument("assemble_ct_lmi: rho must be >= 0");
  const CtChannels ch = ct_channels(system);

  std::vector<std::string> names = {"p"};
  std::vector<bool> nonneg = {false};
  for (int i : ch.active) {
    names.push_back(i == 0 ? "q1" : "q2");
    nonneg.push_back(true);
  }
  if (!pin_gamma_zero) {
    names.push_back("gamma");
    nonneg.push_back(true);
  }

  auto eval = [&, names](const Eigen::VectorXd& x) {
    double p = x[0], q1 = 0.0, q2 = 0.0, gamma = 0.0;
    for (size_t i = 1; i < names.size(); ++i) {
      if (names[i] == "q1") q1 = x[i];
      else if (names[i] == "q2") q2 = x[i];
      else if (names[i] == "gamma") gamma = x[i];
    }
    return ct_matrix(system, rho, p, q1, q2, gamma, ch);
  };

  std::vector<Eigen::MatrixXd> pbasis(names.size(), Eigen::MatrixXd());
  pbasis[0] = Eigen::MatrixXd::Identity(1, 1);
  return extract_affine(names, nonneg, eval, 1, pbasis);
}

AffineMatrixInequality assemble_ct_scalar_lmi(const ProblemSpec& spec, double rho,
                                              bool pin_gamma_zero) {
  if (spec.mode != Mode::Continuous)
    throw std::invalid_argument("assemble_ct_scalar_lmi: spec is not continuous-mode");
  const double eta = spec.eta;
  const double muf = spec.f.mu;
  const ConjugateClass pb = spec.phibar();
  const double mupb = pb.mu_bar;
  const double k1 = spec.f.L - muf;
  const double k2 = pb.L_bar - mupb;

  std::vector<int> active;
  if (k1 > 0.0) active.push_back(0);
  if (k2 > 0.0) active.push_back(1);

  std::vector<std::string> names = {"p"};
  std::vector<bool> nonneg = {false};
  for (int i : active) {
    names.push_back(i == 0 ? "q1" : "q2");
    nonneg.push_back(true);
  }
  if (!pin_gamma_zero) {
    names.push_back("gamma");
    nonneg.push_back(true);
  }

  // Entries typed from the expanded 3x3 display; rows/cols of inactive
  // channels are removed.
  auto eval = [=](const Eigen::VectorXd& x) {
    double p = x[0], q1 = 0.0, q2 = 0.0, gamma = 0.0;
    for (size_t i = 1; i < names.size(); ++i) {
      if (names[i] == "q1") q1 = x[i];
      else if (names[i] == "q2") q2 = x[i];
      else if (names[i] == "gamma") gamma = x[i];
    }
    Eigen::Matrix3d M;
    M(0, 0) = 2.0 * (rho - eta * muf * mupb) * p;
    M(0, 1) = M(1, 0) = eta * p - q1 * mupb;
    M(0, 2) = M(2, 0) = eta * muf * p - q2 - 2.0 * rho * gamma + eta * gamma * muf * mupb;
    M(1, 1) = k1 > 0.0 ? -2.0 * q1 / k1 : 0.0;
    M(1, 2) = M(2, 1) = q1 - eta * gamma;
    M(2, 2) = -2.0 * ((k2 > 0.0 ? q2 / k2 : 0.0) + eta * gamma * muf);
    Eigen::MatrixXd out(1 + active.size(), 1 + active.size());
    out(0, 0) = M(0, 0);
    for (size_t a = 0; a < active.size(); ++a) {
      out(0, 1 + a) = out(1 + a, 0) = M(0, 1 + active[a]);
      for (size_t b = 0; b < active.size(); ++b)
        out(1 + a, 1 + b) = M(1 + active[a], 1 + active[b]);
    }
    return out;
  };

  std::vector<Eigen::MatrixXd> pbasis(names.size(), Eigen::MatrixXd());
  pbasis[0] = Eigen::MatrixXd::Identity(1, 1);
  return extract_affine(names, nonneg, eval, 1, pbasis);
}

// ---------------------------------------------------------------------------
// Discrete time (Theorem 4) and projected (Theorem 5)

HattedSystem stack_filters(const KronSystem& plant, const std::vector<IqcApplication>& apps) {
  const int np = plant.states();
  const int m = plant.inputs();
  int n = np;
  std::vector<int> offs;
  for (const auto& app : apps) {
    offs.push_back(n);
    n += app.filter.state_dim();
  }

  HattedSystem hs;
  hs.plant_states = np;
  hs.iqc_count = static_cast<int>(apps.size());
  hs.A = Eigen::MatrixXd::Zero(n, n);
  hs.B = Eigen::MatrixXd::Zero(n, m);
  hs.A.topLeftCorner(np, np) = plant.A0;
  hs.B.topRows(np) = plant.B0;
  hs.C = Eigen::MatrixXd::Zero(2 * hs.iqc_count, n);
  hs.D = Eigen::MatrixXd::Zero(2 * hs.iqc_count, m);

  for (size_t j = 0; j < apps.size(); ++j) {
    const auto& f = apps[j].filter;
    const Eigen::MatrixXd yC = apps[j].Sy * plant.C0;  // 1 x np
    const Eigen::MatrixXd yD = apps[j].Sy * plant.D0;  // 1 x m
    const Eigen::MatrixXd& Su = apps[j].Su;            // 1 x m
    const int o = offs[j];
    const int ns = f.state_dim();
    if (ns > 0) {
      hs.A.block(o, 0, ns, np) = f.By * yC;
      hs.A.block(o, o, ns, ns) = f.A;
      hs.B.block(o, 0, ns, m) = f.By * yD + f.Bu * Su;
    }
    hs.C.block(2 * j, 0, 2, np) = f.Dy * yC;
    if (ns > 0) hs.C.block(2 * j, o, 2, ns) = f.C;
    hs.D.block(2 * j, 0, 2, m) = f.Dy * yD + f.Du * Su;
  }
  return hs;
}

namespace {

// LMI of Theorem 4 / Theorem 5 for a hatted system: quadratic in the shared
// state-input vector, affine in (P, alpha).
AffineMatrixInequality hatted_lmi(const HattedSystem& hs, double rho) {
  const int n = static_cast<int>(hs.A.rows());
  const int m = static_cast<int>(hs.B.cols());
  const int nI = hs.iqc_count;

  std::vector<std::string> names;
  std::vector<bool> nonneg;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      names.push_back("p" + std::to_string(i + 1) + std::to_string(j + 1));
      nonneg.push_back(false);
    }
  for (int k = 0; k < nI; ++k) {
    names.push_back("alpha" + std::to_string(k + 1));
    nonneg.push_back(true);
  }
  const int nP = n * (n + 1) / 2;

  Eigen::MatrixXd AB(n, n + m), IB(n, n + m), CD(2 * nI, n + m);
  AB << hs.A, hs.B;
  IB << Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Zero(n, m);
  CD << hs.C, hs.D;

  auto unpackP = [n, nP](const Eigen::VectorXd& x) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j, ++k) P(i, j) = P(j, i) = x[k];
    (void)nP;
    return P;
  };

  auto eval = [=](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd P = unpackP(x);
    Eigen::MatrixXd M = AB.transpose() * P * AB - rho * rho * IB.transpose() * P * IB;
    for (int k = 0; k < nI; ++k) {
      const Eigen::MatrixXd blk = CD.middleRows(2 * k, 2);
      // alpha_k * blk^T M2 blk with M2 = [[0,1],[1,0]]
      const Eigen::MatrixXd cross = blk.row(0).transpose() * blk.row(1);
      M += x[nP + k] * (cross + cross.transpose());
    }
    return M;
  };

  std::vector<Eigen::MatrixXd> pbasis(names.size(), Eigen::MatrixXd());
  {
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j, ++k) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
        E(i, j) = E(j, i) = 1.0;
        pbasis[k] = E;
      }
  }
  return extract_affine(names, nonneg, eval, n, pbasis);
}

}  // namespace

AffineMatrixInequality assemble_dt_lmi(const KronSystem& system, double rho) {
  if (system.mode != Mode::Discrete)
    throw std::invalid_argument("assemble_dt_lmi: system is not discrete-mode");
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("assemble_dt_lmi: rho must be in (0, 1]");
  const double k1 = system.channel_sectors.at(0).width();
  const double k2 = system.channel_sectors.at(1).width();
  Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(1, 2), e2 = Eigen::MatrixXd::Zero(1, 2);
  e1(0, 0) = 1.0;
  e2(0, 1) = 1.0;
  std::vector<IqcApplication> apps = {
      {sector_filter(k1), e1, e1},
      {off_by_one_filter(k1, rho), e1, e1},
      {sector_filter(k2), e2, e2},
      {off_by_one_filter(k2, rho), e2, e2},
  };
  return hatted_lmi(stack_filters(system, apps), rho);
}

AffineMatrixInequality assemble_proj_lmi(const KronSystem& system, double rho) {
  if (system.mode != Mode::Projected)
    throw std::invalid_argument("assemble_proj_lmi: system is not projected-mode");
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("assemble_proj_lmi: rho must be in (0, 1]");
  const double k1 = system.channel_sectors.at(0).width();
  const double k2 = system.channel_sectors.at(1).width();
  auto e = [&](int i) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(1, 4);
    s(0, i) = 1.0;
    return s;
  };
  const ChannelSelectors diff = repeated_difference_channels(system);
  const auto [sT, wT] = projection_filters(rho);
  std::vector<IqcApplication> apps = {
      {sector_filter(k1), e(0), e(0)},
      {off_by_one_filter(k1, rho), e(0), e(0)},
      {sector_filter(k2), e(1), e(1)},
      {off_by_one_filter(k2, rho), e(1), e(1)},
      {sT, e(2), e(2)},
      {wT, e(2), e(2)},
      {sector_filter(k2), e(3), e(3)},
      {off_by_one_filter(k2, rho), e(3), e(3)},
      {sector_filter(k2), diff.Sy, diff.Su},
      {off_by_one_filter(k2, rho), diff.Sy, diff.Su},
  };
  return hatted_lmi(stack_filters(system, apps), rho);
}

}  // namespace mdcert
