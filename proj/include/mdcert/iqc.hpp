#pragma once

#include <Eigen/Dense>

#include <utility>

#include "mdcert/model.hpp"

namespace mdcert {

/// State-space factor Psi of a time-domain IQC, at base scale. The two
/// stacked output rows feed the middle matrix M = [[0,1],[1,0]], so the
/// per-step quadratic form is 2 * out1 * out2. Filters with memory carry
/// one base state; memoryless filters carry none.
struct IqcFilter {
  Eigen::MatrixXd A;        // ns x ns, ns in {0, 1} at base scale
  Eigen::MatrixXd By, Bu;   // ns x 1
  Eigen::MatrixXd C;        // 2 x ns
  Eigen::MatrixXd Dy, Du;   // 2 x 1
  Eigen::Matrix2d M;
  double rho_bar = 0.0;

  int state_dim() const { return static_cast<int>(A.rows()); }

  /// One simulation step: returns the two outputs and advances the state.
  Eigen::Vector2d step(Eigen::VectorXd& state, double y, double u) const;
};

/// Frequency-domain multiplier Pi(jw) = S + jw * T with S symmetric and
/// T skew, which keeps Pi Hermitian at every real frequency.
struct FrequencyMultiplier {
  Eigen::Matrix4d S = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d T = Eigen::Matrix4d::Zero();

  Eigen::Matrix4cd eval(double omega) const;
  FrequencyMultiplier operator+(const FrequencyMultiplier& o) const { return {S + o.S, T + o.T}; }
};

/// Base block of the sector quadratic constraint for S(mu, L):
/// [[-2 mu L, L + mu], [L + mu, -2]].
Eigen::Matrix2d sector_qc_matrix(double mu, double L);

/// Conic sector multiplier Pi_s with channel weights alpha1, alpha2 >= 0.
FrequencyMultiplier sector_multiplier_ct(double alpha1, double alpha2, const ProblemSpec& spec);

/// Popov multiplier Pi_p(jw), skew in jw.
FrequencyMultiplier popov_multiplier(double beta1, double beta2);

/// Weighted off-by-one filter for a slope-restricted channel of width K.
IqcFilter off_by_one_filter(double K, double rho_bar);

/// Memoryless sector filter for a slope-restricted channel of width K.
IqcFilter sector_filter(double K);

/// Filters for the normal-cone channel (sector bounds m = 0, L = inf):
/// first the memoryless sector factor, then the weighted off-by-one factor.
std::pair<IqcFilter, IqcFilter> projection_filters(double rho_bar);

/// Output/input selectors of the repeated-nonlinearity difference channel
/// (y2 - y4, u2 - u4) of a projected-mode system.
struct ChannelSelectors {
  Eigen::MatrixXd Sy;  // 1 x outputs
  Eigen::MatrixXd Su;  // 1 x inputs
};

ChannelSelectors repeated_difference_channels(const KronSystem& system);

}  // namespace mdcert
