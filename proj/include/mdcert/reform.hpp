#pragma once

#include <Eigen/Dense>

#include <functional>

#include "mdcert/model.hpp"

namespace mdcert {

// Lur'e reformulations of the MD dynamics. The base blocks carry the
// scalar coefficients; every realized matrix is (base entry) x I_d.

KronSystem build_ct_lure(const ProblemSpec& spec);
KronSystem build_dt_lure(const ProblemSpec& spec);
KronSystem build_proj_lure(const ProblemSpec& spec);

/// Transfer function C0 (sI - A0)^{-1} B0 + D0 of the base blocks,
/// evaluated at a complex frequency point.
Eigen::MatrixXcd ct_transfer(const KronSystem& sys, std::complex<double> s);

/// Closed form of the continuous-time transfer function,
/// (1/(s + eta mu_f mu_pb)) [[-eta mu_pb, s], [-eta, -eta mu_f]].
Eigen::MatrixXcd ct_transfer_closed_form(const ProblemSpec& spec, std::complex<double> s);

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Shifted, sector-normalized residual channels anchored at the optimum:
/// each map vanishes at 0 and has difference quotients in [0, L - mu].
struct ResidualChannels {
  VectorFn delta1;  // residual of grad f around y1_opt
  VectorFn delta2;  // residual of grad phibar around y2_opt
};

ResidualChannels residual_nonlinearity(const VectorFn& grad_f, const VectorFn& grad_phibar,
                                       const ProblemSpec& spec, const Eigen::VectorXd& y1_opt,
                                       const Eigen::VectorXd& y2_opt);

}  // namespace mdcert
