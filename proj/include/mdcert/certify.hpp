#pragma once

#include <utility>

#include "mdcert/lmi.hpp"
#include "mdcert/sdp.hpp"

namespace mdcert {

enum class MultiplierMode { SectorOnly, SectorPlusPopov, SectorPlusOffByOne, FullProjected };

std::string to_string(MultiplierMode m);

struct RateQuery {
  ProblemSpec spec;
  MultiplierMode multipliers = MultiplierMode::SectorPlusPopov;
  double tol = 1e-7;   // bisection bracket width target
  double lo = -1.0;    // bracket; negative means mode default
  double hi = -1.0;
  int max_bisect = 60;
  SolveOptions sdp;
};

/// Largest certified exponential rate of the continuous-time method,
/// found by bisection with the feasible side kept. Uncertified queries
/// return rho = 0 with certified = false.
RateCertificate ct_certified_rate(const RateQuery& q);

/// Smallest certified contraction factor in (0, 1] for the discrete-time
/// method. Infeasible at rho = 1 reports rho = 1 with certified = false.
RateCertificate dt_certified_rate(const RateQuery& q);

/// Projected certification: a stepsize phase keeps rho = 1 feasible while
/// moving the stepsize toward the Proposition-2 value, then a rate phase
/// bisects at the stepsize found. The certificate records the stepsize.
RateCertificate proj_certified_rate(const RateQuery& q);

/// Optimal stepsize and tight rate for quadratic instances:
/// eta = 2 / (L_f L_pb + mu_f mu_pb), rho = (k - 1) / (k + 1).
std::pair<double, double> quadratic_rate(const ProblemSpec& spec);

/// Exact spectrum range of F * Phibar (similar to an SPD matrix) and the
/// refined rate (r - 1)/(r + 1) with r = lambda_max / lambda_min.
struct SpectrumBound {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double rho_refined = 0.0;
};

SpectrumBound spectrum_bound(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Phi_bar);

/// Positivity check of the frequency-domain polynomial in omega^2 for a
/// conic sector + Popov multiplier combination.
enum class FreqVerdict { Holds, Fails, Boundary };

struct FreqCheckResult {
  FreqVerdict verdict = FreqVerdict::Boundary;
  double min_normalized = 0.0;  // min over the omega grid, scale-normalized
};

FreqCheckResult ct_frequency_check(const ProblemSpec& spec, double alpha1, double alpha2,
                                   double beta1, double beta2);

/// Closed-form boundary multipliers (alpha1*, beta2*) at alpha2 = 1.
std::pair<double, double> feasible_multipliers_ct(const ProblemSpec& spec);

/// The Bregman-divergence Lyapunov witness (gamma = 1) for the rho = 0
/// continuous-time LMI; throws if it fails to verify strictly.
Witness bregman_lyapunov_coeffs(const ProblemSpec& spec);

}  // namespace mdcert
