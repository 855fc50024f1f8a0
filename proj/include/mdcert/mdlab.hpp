#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdcert/model.hpp"
#include "mdcert/reform.hpp"

namespace mdcert {

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

/// A differentiable objective with its declared curvature class.
struct SmoothFunction {
  std::string name;
  int dim = 0;
  ScalarFn value;
  VectorFn grad;
  FunctionClass cls;
  std::optional<Eigen::VectorXd> minimizer;
};

/// Distance generating function together with its conjugate gradient and
/// Bregman divergence. All registered DGFs are quadratic, phi = x' Phi x / 2,
/// so the conjugate gradient is exact.
struct DgfPair {
  std::string name;
  SmoothFunction phi;
  VectorFn grad_bar;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> bregman;
  Eigen::MatrixXd Phi;
  bool identity = false;

  ConjugateClass conj() const { return conjugate_class(phi.cls); }
};

struct ConstraintSet {
  enum class Kind { Box, Simplex };
  Kind kind = Kind::Box;
  Eigen::VectorXd lo, hi;  // box bounds
  int dim = 0;

  static ConstraintSet box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  static ConstraintSet simplex(int dim);

  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;

  /// argmin_{x in X} (x - v)' diag(w) (x - v) / 2, the Bregman projection
  /// of a quadratic DGF with diagonal weight matrix.
  Eigen::VectorXd project_weighted(const Eigen::VectorXd& w, const Eigen::VectorXd& v) const;

  /// Sample points used by the inclusion-residual test: vertices for a box,
  /// vertices plus deterministic interior points for the simplex.
  std::vector<Eigen::VectorXd> witness_points() const;
};

struct Trajectory {
  std::vector<Eigen::VectorXd> z;
  std::vector<Eigen::VectorXd> x;
  double dt = 1.0;
  int diverged_at = -1;

  int steps() const { return static_cast<int>(x.size()); }
  std::vector<double> distances_to(const Eigen::VectorXd& ref, bool in_x = true) const;
};

Trajectory run_dt_md(const SmoothFunction& f, const DgfPair& dgf, const Eigen::VectorXd& z0,
                     double eta, int N);

Trajectory run_ct_md(const SmoothFunction& f, const DgfPair& dgf, const Eigen::VectorXd& z0,
                     double eta, double T, double h);

/// Stable integrator step for the continuous-time runs.
double ct_default_step(double eta, const FunctionClass& f_cls, const ConjugateClass& pb);

Trajectory run_proj_md(const SmoothFunction& f, const DgfPair& dgf, const ConstraintSet& X,
                       const Eigen::VectorXd& x0, double eta, int N);

/// Max over sampled y in X of <r, y - x_next> for the inclusion residual
/// r = -grad phi(x_next) + grad phi(x_prev) - eta grad f(x_prev); at most
/// ~1e-8 along valid projected-MD steps.
double inclusion_residual(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& x_next,
                          const SmoothFunction& f, const DgfPair& dgf, const ConstraintSet& X,
                          double eta);

struct EmpiricalRate {
  double rho = 1.0;     // DT: contraction factor; CT: decay exponent
  bool stalled = false;
  int window_lo = 0;
  int window_hi = 0;
};

EmpiricalRate empirical_rate(const std::vector<double>& distances, double dt, Mode mode);

// Registered instances ------------------------------------------------------

SmoothFunction quadratic_function(const Eigen::MatrixXd& F, const Eigen::VectorXd& p,
                                  const std::string& name = "quadratic");
DgfPair quadratic_dgf(const Eigen::MatrixXd& Phi, const std::string& name = "quadratic-dgf");
DgfPair identity_dgf(int dim);

SmoothFunction quad_6_3();
DgfPair dgf_6_3();

SmoothFunction random_quadratic(int dim, const FunctionClass& cls, uint64_t seed);
DgfPair random_quadratic_dgf(int dim, const FunctionClass& cls, uint64_t seed);

/// Nonquadratic family in S(mu, L): (mu/2)|x|^2 + (L-mu) sum_i s(x_i - c_i)
/// with s a softplus scaled so s'' ranges over (0, 1].
SmoothFunction softplus_function(int dim, const FunctionClass& cls, uint64_t seed);

}  // namespace mdcert
