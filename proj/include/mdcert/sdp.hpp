#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "mdcert/lmi.hpp"

namespace mdcert {

struct SolveOptions {
  int max_outer = 48;       // barrier parameter updates
  int max_newton = 80;      // inner Newton steps per barrier stage
  double tol = 1e-11;       // target barrier duality gap (relative to |t|)
  double coord_bound = 1e6; // trust bound on normalized coordinates
  uint64_t seed = 0;        // reserved; the solve itself is deterministic
  int verbosity = 0;
};

struct FeasibilityOutcome {
  enum class Verdict { Feasible, Infeasible, Failed };
  Verdict verdict = Verdict::Failed;
  Witness witness;
  double margin = std::numeric_limits<double>::quiet_NaN();
  std::string reason;

  bool feasible() const { return verdict == Verdict::Feasible; }
};

/// Maximizes t subject to F0 + sum_i x_i F_i <= -t I, the sign constraints,
/// the positivity block (normalized to P >= I), and |x_i| <= coord_bound
/// after per-coordinate normalization. Returns the achieved (t, witness).
std::pair<double, Witness> max_min_eig(const AffineMatrixInequality& problem,
                                       const SolveOptions& opts = {});

/// Decides feasibility of the inequality and returns an independently
/// re-verified witness on the Feasible branch. Margins at or numerically
/// indistinguishable from zero count as feasible, matching the non-strict
/// inequalities the assemblies encode.
FeasibilityOutcome solve_feasibility(const AffineMatrixInequality& problem,
                                     const SolveOptions& opts = {});

}  // namespace mdcert
