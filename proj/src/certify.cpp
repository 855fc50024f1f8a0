#include "mdcert/certify.hpp"

#include <cmath>

#include "mdcert/reform.hpp"

namespace mdcert {

std::string to_string(MultiplierMode m) {
  switch (m) {
    case MultiplierMode::SectorOnly: return "sector-only";
    case MultiplierMode::SectorPlusPopov: return "sector+popov";
    case MultiplierMode::SectorPlusOffByOne: return "sector+offbyone";
    case MultiplierMode::FullProjected: return "full-projected";
  }
  return "?";
}

namespace {

void require_decided(const FeasibilityOutcome& o) {
  if (o.verdict == FeasibilityOutcome::Verdict::Failed)
    throw std::runtime_error("sdp solver failure: " + o.reason);
}

FeasibilityOutcome probe_ct(const KronSystem& sys, double rho, bool sector_only,
                            const SolveOptions& opts) {
  FeasibilityOutcome o = solve_feasibility(assemble_ct_lmi(sys, rho, sector_only), opts);
  require_decided(o);
  return o;
}

}  // namespace

RateCertificate ct_certified_rate(const RateQuery& q) {
  if (q.spec.mode != Mode::Continuous)
    throw std::invalid_argument("ct_certified_rate: spec mode must be continuous");
  const bool sector_only = q.multipliers == MultiplierMode::SectorOnly;
  const KronSystem sys = build_ct_lure(q.spec);
  const double rho_star = q.spec.eta * q.spec.f.mu * q.spec.phibar().mu_bar;

  RateCertificate cert;
  cert.mode = Mode::Continuous;
  cert.eta = q.spec.eta;
  cert.meta = "theorem3 " + to_string(q.multipliers);

  double lo = q.lo >= 0.0 ? q.lo : 0.0;
  double hi = q.hi >= 0.0 ? q.hi : 2.0 * rho_star;

  FeasibilityOutcome at_lo = probe_ct(sys, lo, sector_only, q.sdp);
  if (!at_lo.feasible()) {
    cert.rho = 0.0;
    cert.certified = false;
    cert.meta += " uncertified";
    cert.margin = at_lo.margin;
    return cert;
  }
  FeasibilityOutcome best = at_lo;
  FeasibilityOutcome at_hi = probe_ct(sys, hi, sector_only, q.sdp);
  if (at_hi.feasible()) {
    cert.rho = hi;
    cert.certified = true;
    cert.witness = at_hi.witness;
    cert.margin = at_hi.margin;
    cert.meta += " bracket-top";
    return cert;
  }
  for (int it = 0; it < q.max_bisect && (hi - lo) > q.tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    FeasibilityOutcome o = probe_ct(sys, mid, sector_only, q.sdp);
    if (o.feasible()) {
      lo = mid;
      best = o;
    } else {
      hi = mid;
    }
  }
  cert.rho = lo;
  cert.certified = true;
  cert.witness = best.witness;
  cert.margin = best.margin;
  return cert;
}

namespace {

RateCertificate bisect_dt_style(const std::function<FeasibilityOutcome(double)>& probe,
                                const RateQuery& q, Mode mode, const char* meta) {
  RateCertificate cert;
  cert.mode = mode;
  cert.eta = q.spec.eta;
  cert.meta = meta;

  double lo = q.lo > 0.0 ? q.lo : 1e-4;
  double hi = q.hi > 0.0 ? q.hi : 1.0;

  FeasibilityOutcome at_hi = probe(hi);
  if (!at_hi.feasible()) {
    cert.rho = hi;
    cert.certified = false;
    cert.meta += " uncertified";
    cert.margin = at_hi.margin;
    return cert;
  }
  FeasibilityOutcome best = at_hi;
  FeasibilityOutcome at_lo = probe(lo);
  if (at_lo.feasible()) {
    cert.rho = lo;
    cert.certified = true;
    cert.witness = at_lo.witness;
    cert.margin = at_lo.margin;
    cert.meta += " bracket-bottom";
    return cert;
  }
  for (int it = 0; it < q.max_bisect && (hi - lo) > q.tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    FeasibilityOutcome o = probe(mid);
    if (o.feasible()) {
      hi = mid;
      best = o;
    } else {
      lo = mid;
    }
  }
  cert.rho = hi;
  cert.certified = true;
  cert.witness = best.witness;
  cert.margin = best.margin;
  return cert;
}

}  // namespace

RateCertificate dt_certified_rate(const RateQuery& q) {
  if (q.spec.mode != Mode::Discrete)
    throw std::invalid_argument("dt_certified_rate: spec mode must be discrete");
  const KronSystem sys = build_dt_lure(q.spec);
  auto probe = [&](double rho) {
    FeasibilityOutcome o = solve_feasibility(assemble_dt_lmi(sys, rho), q.sdp);
    require_decided(o);
    return o;
  };
  return bisect_dt_style(probe, q, Mode::Discrete, "theorem4 sector+offbyone");
}

RateCertificate proj_certified_rate(const RateQuery& q) {
  if (q.spec.mode != Mode::Projected)
    throw std::invalid_argument("proj_certified_rate: spec mode must be projected");
  ProblemSpec spec = q.spec;
  const double eta_p2 = quadratic_rate([&] {
    ProblemSpec s = spec;
    s.mode = Mode::Discrete;
    return s;
  }()).first;

  auto feasible_at = [&](double eta, double rho) {
    ProblemSpec s = spec;
    s.eta = eta;
    FeasibilityOutcome o = solve_feasibility(assemble_proj_lmi(build_proj_lure(s), rho), q.sdp);
    require_decided(o);
    return o;
  };

  // Stepsize phase: largest stepsize <= eta_p2 keeping rho = 1 feasible,
  // located on a geometric grid and tightened by bisection toward eta_p2.
  double eta = eta_p2;
  std::string eta_note = " eta=prop2";
  if (!feasible_at(eta_p2, 1.0).feasible()) {
    const int grid_n = 20;
    double eta_feas = -1.0;
    double eta_infeas = eta_p2;
    for (int i = 1; i < grid_n; ++i) {
      const double scale = std::pow(0.01, static_cast<double>(i) / (grid_n - 1));
      const double cand = scale * eta_p2;
      if (feasible_at(cand, 1.0).feasible()) {
        eta_feas = cand;
        break;
      }
      eta_infeas = cand;
    }
    if (eta_feas < 0.0) {
      RateCertificate cert;
      cert.mode = Mode::Projected;
      cert.rho = 1.0;
      cert.certified = false;
      cert.eta = eta_p2;
      cert.meta = "theorem5 uncertified (no feasible stepsize at rho=1)";
      return cert;
    }
    for (int it = 0; it < 30; ++it) {
      const double mid = 0.5 * (eta_feas + eta_infeas);
      if (feasible_at(mid, 1.0).feasible())
        eta_feas = mid;
      else
        eta_infeas = mid;
    }
    eta = eta_feas;
    eta_note = " eta=grid+bisect";
  }

  spec.eta = eta;
  RateQuery q2 = q;
  q2.spec = spec;
  const KronSystem sys = build_proj_lure(spec);
  auto probe = [&](double rho) {
    FeasibilityOutcome o = solve_feasibility(assemble_proj_lmi(sys, rho), q.sdp);
    require_decided(o);
    return o;
  };
  RateCertificate cert =
      bisect_dt_style(probe, q2, Mode::Projected, "theorem5 full-projected");
  cert.eta = eta;
  cert.meta += eta_note;
  return cert;
}

std::pair<double, double> quadratic_rate(const ProblemSpec& spec) {
  const ConjugateClass pb = spec.phibar();
  const double eta = 2.0 / (spec.f.L * pb.L_bar + spec.f.mu * pb.mu_bar);
  const double kappa = composite_kappa(spec);
  const double rho = (kappa - 1.0) / (kappa + 1.0);
  return {eta, rho};
}

SpectrumBound spectrum_bound(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Phi_bar) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ef(F);
  if (ef.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("spectrum_bound: F is not positive definite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(Phi_bar, Eigen::EigenvaluesOnly);
  if (ep.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("spectrum_bound: Phi_bar is not positive definite");
  const Eigen::MatrixXd Fsqrt =
      ef.eigenvectors() * ef.eigenvalues().cwiseSqrt().asDiagonal() * ef.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Fsqrt * Phi_bar * Fsqrt, Eigen::EigenvaluesOnly);
  SpectrumBound out;
  out.lambda_min = es.eigenvalues().minCoeff();
  out.lambda_max = es.eigenvalues().maxCoeff();
  const double r = out.lambda_max / out.lambda_min;
  out.rho_refined = (r - 1.0) / (r + 1.0);
  return out;
}

FreqCheckResult ct_frequency_check(const ProblemSpec& spec, double alpha1, double alpha2,
                                   double beta1, double beta2) {
  const double eta = spec.eta;
  const double muf = spec.f.mu, Lf = spec.f.L;
  const ConjugateClass pb = spec.phibar();
  const double mupb = pb.mu_bar, Lpb = pb.L_bar;

  const double c4 = -beta1 * beta1;
  const double c2 = -eta * eta * beta2 * beta2 + 2.0 * alpha1 * eta * (Lf + muf) * beta2 +
                    4.0 * alpha1 * alpha2 - alpha1 * alpha1 * (Lf - muf) * (Lf - muf) +
                    2.0 * alpha2 * beta1 * eta * Lpb + 2.0 * alpha2 * beta1 * eta * mupb;
  const double c0 = eta * eta * (4.0 * alpha1 * alpha2 * Lf * muf * Lpb * mupb -
                                 alpha2 * alpha2 * (Lpb - mupb) * (Lpb - mupb));

  // Scale from the individual terms, so exact cancellations normalize to 0.
  double scale = std::abs(beta1 * beta1);
  for (double term : {eta * eta * beta2 * beta2, 2.0 * alpha1 * eta * (Lf + muf) * beta2,
                      4.0 * alpha1 * alpha2, alpha1 * alpha1 * (Lf - muf) * (Lf - muf),
                      2.0 * alpha2 * beta1 * eta * (Lpb + mupb),
                      eta * eta * 4.0 * alpha1 * alpha2 * Lf * muf * Lpb * mupb,
                      eta * eta * alpha2 * alpha2 * (Lpb - mupb) * (Lpb - mupb)})
    scale = std::max(scale, std::abs(term));
  if (scale <= 0.0) scale = 1.0;

  FreqCheckResult res;
  double vmin = kInf;
  const int grid_n = 241;
  for (int i = 0; i < grid_n; ++i) {
    const double w = std::pow(10.0, -3.0 + 6.0 * i / (grid_n - 1));
    const double w2 = w * w;
    const double p = (c4 * w2 + c2) * w2 + c0;
    vmin = std::min(vmin, p / (scale * (1.0 + w2 * w2)));
  }
  res.min_normalized = vmin;

  const double tolc = 1e-9;
  const double h4 = c4 / scale, h2 = c2 / scale, h0 = c0 / scale;
  if (h4 < -tolc || h2 < -tolc || h0 < -tolc) {
    res.verdict = FreqVerdict::Fails;
  } else if (h0 > tolc) {
    // c4 ~ 0 here (it is never positive), so positivity at omega = 0 decides.
    res.verdict = FreqVerdict::Holds;
  } else {
    res.verdict = FreqVerdict::Boundary;
  }
  return res;
}

std::pair<double, double> feasible_multipliers_ct(const ProblemSpec& spec) {
  const double eta = spec.eta;
  const double muf = spec.f.mu, Lf = spec.f.L;
  const ConjugateClass pb = spec.phibar();
  const double w = pb.L_bar - pb.mu_bar;
  const double a1 = w * w / (4.0 * Lf * pb.L_bar * muf * pb.mu_bar);
  const double b2 = (a1 * (Lf + muf) + 2.0 * std::sqrt(a1 * a1 * Lf * muf + a1)) / eta;
  return {a1, b2};
}

Witness bregman_lyapunov_coeffs(const ProblemSpec& spec) {
  if (spec.mode != Mode::Continuous)
    throw std::invalid_argument("bregman_lyapunov_coeffs: spec mode must be continuous");
  const double eta = spec.eta;
  const double muf = spec.f.mu;
  const double mupb = spec.phibar().mu_bar;
  Witness w;
  const double gamma = 1.0;
  w.set("p", gamma * mupb);
  w.set("q1", eta * gamma);
  w.set("q2", 2.0 * eta * gamma * muf * mupb);
  w.set("gamma", gamma);

  const KronSystem sys = build_ct_lure(spec);
  Witness reduced;  // degenerate channels drop their q coordinate
  const AffineMatrixInequality lmi = assemble_ct_lmi(sys, 0.0, false);
  for (const auto& name : lmi.names) reduced.set(name, w.at(name));
  const double margin = verify_witness(lmi, reduced);
  if (!(margin < 0.0))
    throw std::runtime_error("bregman_lyapunov_coeffs: witness failed to verify strictly");
  return w;
}

}  // namespace mdcert
