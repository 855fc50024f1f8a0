#include "mdcert/sdp.hpp"

#include <algorithm>
#include <cmath>

namespace mdcert {

namespace {

struct Scaled {
  std::vector<Eigen::MatrixXd> F;   // normalized main basis
  std::vector<Eigen::MatrixXd> Pb;  // normalized P basis (may be empty matrices)
  Eigen::VectorXd s;                // coordinate scales
};

Scaled normalize(const AffineMatrixInequality& prob) {
  Scaled sc;
  const int n = prob.coords();
  sc.s.resize(n);
  sc.F.resize(n);
  sc.Pb.resize(n);
  for (int i = 0; i < n; ++i) {
    double nf = prob.basis[i].norm();
    double np = prob.pbasis[i].rows() > 0 ? prob.pbasis[i].norm() : 0.0;
    sc.s[i] = std::max(std::max(nf, np), 1e-300);
    sc.F[i] = prob.basis[i] / sc.s[i];
    if (prob.pbasis[i].rows() > 0) sc.Pb[i] = prob.pbasis[i] / sc.s[i];
  }
  return sc;
}

// Least-squares coordinates with P(x) ~= target * I, used to initialize
// the positivity block strictly inside the anchored cone.
Eigen::VectorXd p_block_init(const AffineMatrixInequality& prob, const Scaled& sc, double target) {
  const int n = prob.coords();
  const int p = prob.pdim();
  const int nv = p * p;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nv, n);
  for (int i = 0; i < n; ++i)
    if (sc.Pb[i].rows() > 0) A.col(i) = Eigen::Map<const Eigen::VectorXd>(sc.Pb[i].data(), nv);
  Eigen::MatrixXd rhs = target * Eigen::MatrixXd::Identity(p, p) - prob.P0;
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), nv);
  return A.colPivHouseholderQr().solve(b);
}

bool spd(const Eigen::MatrixXd& M) {
  if (!M.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  return llt.info() == Eigen::Success;
}

double trace_prod(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  return (X.array() * Y.transpose().array()).sum();
}

struct Barrier {
  const AffineMatrixInequality& prob;
  const Scaled& sc;
  double anchor;   // P >= anchor * I
  double tb;       // |t| < tb
  Eigen::VectorXd lo, hi;

  int n() const { return prob.coords(); }
  int m() const { return prob.dim(); }

  Eigen::MatrixXd mainS(const Eigen::VectorXd& x, double t) const {
    Eigen::MatrixXd G = prob.F0;
    for (int i = 0; i < n(); ++i) G += x[i] * sc.F[i];
    G.diagonal().array() += t;
    return -G;
  }

  Eigen::MatrixXd pblock(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd P = prob.P0;
    for (int i = 0; i < n(); ++i)
      if (sc.Pb[i].rows() > 0) P += x[i] * sc.Pb[i];
    P.diagonal().array() -= anchor;
    return P;
  }

  bool interior(const Eigen::VectorXd& x, double t) const {
    for (int i = 0; i < n(); ++i)
      if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
    if (!(t > -tb && t < tb)) return false;
    if (!spd(mainS(x, t))) return false;
    if (prob.has_pblock() && !spd(pblock(x))) return false;
    return true;
  }

  double value(const Eigen::VectorXd& x, double t, double tau) const {
    double v = -tau * t;
    {
      Eigen::LLT<Eigen::MatrixXd> llt(mainS(x, t));
      if (llt.info() != Eigen::Success) return kInf;
      v -= 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    }
    if (prob.has_pblock()) {
      Eigen::LLT<Eigen::MatrixXd> llt(pblock(x));
      if (llt.info() != Eigen::Success) return kInf;
      v -= 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    }
    for (int i = 0; i < n(); ++i) {
      if (!(x[i] > lo[i] && x[i] < hi[i])) return kInf;
      v -= std::log(hi[i] - x[i]) + std::log(x[i] - lo[i]);
    }
    if (!(t > -tb && t < tb)) return kInf;
    v -= std::log(tb - t) + std::log(t + tb);
    return v;
  }

  // Gradient and Hessian of value() in (x, t).
  void derivatives(const Eigen::VectorXd& x, double t, double tau, Eigen::VectorXd& g,
                   Eigen::MatrixXd& H) const {
    const int N = n() + 1;
    g = Eigen::VectorXd::Zero(N);
    H = Eigen::MatrixXd::Zero(N, N);
    g[n()] = -tau;

    const Eigen::MatrixXd S = mainS(x, t);
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    const Eigen::MatrixXd Sinv = llt.solve(Eigen::MatrixXd::Identity(m(), m()));
    std::vector<Eigen::MatrixXd> Y(n());
    for (int i = 0; i < n(); ++i) Y[i] = Sinv * sc.F[i];
    for (int i = 0; i < n(); ++i) {
      g[i] += Y[i].trace();
      for (int j = 0; j <= i; ++j) {
        const double hij = trace_prod(Y[i], Y[j]);
        H(i, j) += hij;
        if (j != i) H(j, i) += hij;
      }
      const double hit = trace_prod(Y[i], Sinv);
      H(i, n()) += hit;
      H(n(), i) += hit;
    }
    g[n()] += Sinv.trace();
    H(n(), n()) += trace_prod(Sinv, Sinv);

    if (prob.has_pblock()) {
      const Eigen::MatrixXd P = pblock(x);
      Eigen::LLT<Eigen::MatrixXd> lltp(P);
      const Eigen::MatrixXd Pinv = lltp.solve(Eigen::MatrixXd::Identity(prob.pdim(), prob.pdim()));
      std::vector<int> idx;
      std::vector<Eigen::MatrixXd> Z;
      for (int i = 0; i < n(); ++i)
        if (sc.Pb[i].rows() > 0) {
          idx.push_back(i);
          Z.push_back(Pinv * sc.Pb[i]);
        }
      for (size_t a = 0; a < idx.size(); ++a) {
        g[idx[a]] -= Z[a].trace();
        for (size_t b = 0; b <= a; ++b) {
          const double h = trace_prod(Z[a], Z[b]);
          H(idx[a], idx[b]) += h;
          if (a != b) H(idx[b], idx[a]) += h;
        }
      }
    }

    for (int i = 0; i < n(); ++i) {
      const double du = hi[i] - x[i], dl = x[i] - lo[i];
      g[i] += 1.0 / du - 1.0 / dl;
      H(i, i) += 1.0 / (du * du) + 1.0 / (dl * dl);
    }
    const double dtu = tb - t, dtl = t + tb;
    g[n()] += 1.0 / dtu - 1.0 / dtl;
    H(n(), n()) += 1.0 / (dtu * dtu) + 1.0 / (dtl * dtl);
  }
};

}  // namespace

std::pair<double, Witness> max_min_eig(const AffineMatrixInequality& problem,
                                       const SolveOptions& opts) {
  problem.validate();
  const int n = problem.coords();
  const int m = problem.dim();
  const Scaled sc = normalize(problem);

  auto to_witness = [&](const Eigen::VectorXd& x) {
    Witness w;
    for (int i = 0; i < n; ++i) w.set(problem.names[i], x[i] / sc.s[i]);
    return w;
  };

  if (n == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(problem.F0, Eigen::EigenvaluesOnly);
    return {-es.eigenvalues().maxCoeff(), Witness{}};
  }

  Barrier bar{problem, sc, 1.0, 0.0, Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    bar.lo[i] = problem.nonneg[i] ? 0.0 : -opts.coord_bound;
    bar.hi[i] = opts.coord_bound;
  }

  // Strictly interior start: positivity block at 2*anchor, remaining
  // coordinates nudged off their bounds.
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  if (problem.has_pblock()) x0 = p_block_init(problem, sc, 2.0 * bar.anchor);
  for (int i = 0; i < n; ++i) {
    if (problem.nonneg[i] && x0[i] < 1e-3) x0[i] = 1.0;
    x0[i] = std::min(std::max(x0[i], bar.lo[i] + 1e-3), bar.hi[i] - 1e-3);
  }
  if (problem.has_pblock() && !spd(bar.pblock(x0)))
    return {-kInf, to_witness(x0)};  // caller reports Failed

  Eigen::MatrixXd G0 = problem.F0;
  for (int i = 0; i < n; ++i) G0 += x0[i] * sc.F[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(G0, Eigen::EigenvaluesOnly);
  double t = -es0.eigenvalues().maxCoeff() - std::max(1.0, 0.1 * G0.norm());
  bar.tb = std::max(1e8, 10.0 * std::abs(t));

  Eigen::VectorXd x = x0;
  if (!bar.interior(x, t)) return {-kInf, to_witness(x)};

  const double nu = m + problem.pdim() + 2.0 * n + 2.0;  // barrier complexity
  double tau = 1.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  int stalled_stages = 0;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    int moves = 0;
    bool breakdown = false;
    for (int it = 0; it < opts.max_newton; ++it) {
      bar.derivatives(x, t, tau, g, H);
      Eigen::VectorXd step;
      double ridge = 0.0;
      for (;;) {
        Eigen::MatrixXd Hr = H;
        if (ridge > 0.0) Hr.diagonal().array() += ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Hr);
        step = ldlt.solve(-g);
        if (ldlt.info() == Eigen::Success && step.allFinite()) break;
        ridge = ridge == 0.0 ? 1e-12 * (1.0 + H.diagonal().maxCoeff()) : ridge * 100.0;
        if (ridge > 1e10 * (1.0 + H.diagonal().maxCoeff())) {
          breakdown = true;  // keep the current iterate, stop refining
          break;
        }
      }
      if (breakdown) break;
      const double dec2 = -g.dot(step);  // lambda^2
      if (!(dec2 > 0.0)) break;
      if (dec2 * 0.5 <= std::min(1e-10, 1e-3 * nu / tau)) break;

      const double f0 = bar.value(x, t, tau);
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd xn = x + alpha * step.head(n);
        const double tn = t + alpha * step[n];
        if (bar.interior(xn, tn)) {
          const double fn = bar.value(xn, tn, tau);
          if (fn <= f0 - 1e-4 * alpha * dec2) {
            x = xn;
            t = tn;
            moved = true;
            ++moves;
            break;
          }
        }
        alpha *= 0.6;
      }
      if (!moved) break;
    }
    if (nu / tau <= opts.tol * std::max(1.0, std::abs(t))) break;
    stalled_stages = (moves == 0 || breakdown) ? stalled_stages + 1 : 0;
    if (stalled_stages >= 2) break;  // no further progress at higher tau
    tau *= 8.0;
    if (tau > 1e16) break;
  }

  return {t, to_witness(x)};
}

FeasibilityOutcome solve_feasibility(const AffineMatrixInequality& problem,
                                     const SolveOptions& opts) {
  FeasibilityOutcome out;
  double tstar;
  Witness w;
  try {
    std::tie(tstar, w) = max_min_eig(problem, opts);
  } catch (const std::exception& e) {
    out.verdict = FeasibilityOutcome::Verdict::Failed;
    out.reason = e.what();
    return out;
  }
  if (!std::isfinite(tstar)) {
    out.verdict = FeasibilityOutcome::Verdict::Failed;
    out.reason = "barrier initialization or Newton breakdown";
    return out;
  }

  // Homogeneous problems (zero constant parts) admit witness rescaling;
  // shrinking the positivity block back to its anchor keeps the verdict
  // scale-free when the barrier wandered to a large multiple.
  if (problem.has_pblock() && problem.coords() > 0 && problem.F0.norm() == 0.0 &&
      problem.P0.norm() == 0.0) {
    const Eigen::VectorXd x = problem.pack(w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(problem.evaluate_p(x),
                                                      Eigen::EigenvaluesOnly);
    const double lmin = ep.eigenvalues().minCoeff();
    if (lmin > 1.0) {
      for (auto& [name, v] : w.values) v /= lmin;
    }
  }

  double margin;
  try {
    margin = verify_witness(problem, w);
  } catch (const std::exception& e) {
    out.verdict = FeasibilityOutcome::Verdict::Failed;
    out.reason = std::string("verification: ") + e.what();
    return out;
  }

  // Backward-error scale of the assembled inequality at this witness.
  double scale = problem.F0.norm();
  for (int i = 0; i < problem.coords(); ++i)
    scale = std::max(scale, std::abs(w.at(problem.names[i])) * problem.basis[i].norm());
  const double feas_tol = std::min(std::max(1e-12, 1e-9 * scale), 1e-7);

  out.witness = w;
  out.margin = margin;
  if (margin <= feas_tol) {
    out.verdict = FeasibilityOutcome::Verdict::Feasible;
  } else {
    out.verdict = FeasibilityOutcome::Verdict::Infeasible;
  }
  return out;
}

}  // namespace mdcert
