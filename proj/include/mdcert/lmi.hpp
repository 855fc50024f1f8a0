#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "mdcert/iqc.hpp"
#include "mdcert/model.hpp"

namespace mdcert {

/// Symmetric-matrix-valued affine constraint in named scalar coordinates:
/// sought is x with F0 + sum_i x_i F_i <= -eps I (and sign constraints).
/// When a positivity block is attached, P(x) = P0 + sum_i x_i Pb_i must in
/// addition be positive definite; the solver normalizes it to P >= I,
/// which loses nothing because every assembled LMI here is homogeneous
/// in its coordinates.
struct AffineMatrixInequality {
  Eigen::MatrixXd F0;
  std::vector<Eigen::MatrixXd> basis;
  std::vector<std::string> names;
  std::vector<bool> nonneg;
  double epsilon = 0.0;

  Eigen::MatrixXd P0;                    // 0x0 when absent
  std::vector<Eigen::MatrixXd> pbasis;   // aligned with names; empty matrices allowed

  int dim() const { return static_cast<int>(F0.rows()); }
  int coords() const { return static_cast<int>(basis.size()); }
  bool has_pblock() const { return P0.rows() > 0; }
  int pdim() const { return static_cast<int>(P0.rows()); }

  int index_of(const std::string& name) const;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd evaluate_p(const Eigen::VectorXd& x) const;
  Eigen::VectorXd pack(const Witness& w) const;

  /// Plain-text listing (row-major, full precision) for debugging.
  std::string dump() const;

  void validate() const;
};

/// Most-positive eigenvalue of the assembled left-hand side; when a
/// positivity block is present the result is max(lam_max(F(x)), lam_max(-P(x)))
/// so a nonpositive margin certifies both the inequality and P > 0.
/// Throws on missing coordinates or sign violations.
double verify_witness(const AffineMatrixInequality& lmi, const Witness& w);

/// Theorem-3 LMI of the continuous-time system in coordinates
/// {p, q1, q2, gamma}; gamma is dropped when pin_gamma_zero is set
/// (sector-only certification). Degenerate channels (sector width 0)
/// are removed together with their q coordinate.
AffineMatrixInequality assemble_ct_lmi(const KronSystem& system, double rho,
                                       bool pin_gamma_zero = false);

/// The expanded scalar 3x3 form of the same LMI, assembled independently
/// entry by entry; used as a cross-oracle for assemble_ct_lmi.
AffineMatrixInequality assemble_ct_scalar_lmi(const ProblemSpec& spec, double rho,
                                              bool pin_gamma_zero = false);

/// Theorem-4 LMI of the discrete-time system: coordinates are the entries
/// of the 3x3 block-diagonal-free P plus alpha1..alpha4 >= 0. The filter
/// weight is bound to the candidate rate (rho_bar = rho).
AffineMatrixInequality assemble_dt_lmi(const KronSystem& system, double rho);

/// Theorem-5 LMI of the projected system: P is 6x6 and alpha1..alpha10 >= 0.
AffineMatrixInequality assemble_proj_lmi(const KronSystem& system, double rho);

/// Hatted matrices obtained by attaching IQC filter factors to a plant.
struct HattedSystem {
  Eigen::MatrixXd A, B, C, D;
  int plant_states = 0;
  int iqc_count = 0;  // each IQC contributes one stacked output pair
};

/// One IQC application: a filter acting on (Sy * y, Su * u).
struct IqcApplication {
  IqcFilter filter;
  Eigen::MatrixXd Sy;
  Eigen::MatrixXd Su;
};

HattedSystem stack_filters(const KronSystem& plant, const std::vector<IqcApplication>& apps);

}  // namespace mdcert
