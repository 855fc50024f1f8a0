#pragma once

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdcert {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Curvature interval (mu, L) defining membership in S(mu, L).
struct FunctionClass {
  double mu = 1.0;
  double L = 1.0;

  double kappa() const { return L / mu; }

  void validate() const {
    if (!(mu > 0.0) || !(L >= mu) || !std::isfinite(L))
      throw std::invalid_argument("FunctionClass: need 0 < mu <= L < inf");
  }
};

/// Class of the convex conjugate: mu_bar = 1/L, L_bar = 1/mu.
struct ConjugateClass {
  double mu_bar = 1.0;
  double L_bar = 1.0;

  double kappa() const { return L_bar / mu_bar; }
  FunctionClass as_class() const { return {mu_bar, L_bar}; }
};

ConjugateClass conjugate_class(const FunctionClass& phi);

enum class Mode { Continuous, Discrete, Projected };

std::string to_string(Mode m);

/// Problem data for one certification or simulation run. Certification
/// operates on the base-scale blocks; `dim` is only used by simulations.
struct ProblemSpec {
  FunctionClass f;
  FunctionClass phi;
  double eta = 1.0;
  Mode mode = Mode::Discrete;
  int dim = 1;

  ConjugateClass phibar() const { return conjugate_class(phi); }

  void validate() const {
    f.validate();
    phi.validate();
    if (!(eta > 0.0)) throw std::invalid_argument("ProblemSpec: eta must be > 0");
    if (dim < 1) throw std::invalid_argument("ProblemSpec: dim must be >= 1");
  }
};

double composite_kappa(const ProblemSpec& spec);

/// Sector bound [lo, hi] of one nonlinearity channel; hi may be +inf.
struct Sector {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
};

/// Lur'e state-space stored as small base blocks; the realized system at
/// dimension d is each base entry times the d-by-d identity, blockwise.
struct KronSystem {
  Eigen::MatrixXd A0, B0, C0, D0;
  int d = 1;
  std::vector<Sector> channel_sectors;
  Mode mode = Mode::Discrete;

  int states() const { return static_cast<int>(A0.rows()); }
  int inputs() const { return static_cast<int>(B0.cols()); }
  int outputs() const { return static_cast<int>(C0.rows()); }

  struct Realized {
    Eigen::MatrixXd A, B, C, D;
  };
  Realized realize(int dim) const;

  void validate() const;
};

/// Concrete assignment of LMI decision variables, keyed by name.
struct Witness {
  std::map<std::string, double> values;

  bool has(const std::string& name) const { return values.count(name) != 0; }
  double at(const std::string& name) const;
  void set(const std::string& name, double v) { values[name] = v; }
};

/// Certified rate plus the witness that proves it. `rho` follows the
/// paper's conventions: CT rates are exponents (rho >= 0), DT/projected
/// rates are contraction factors in (0, 1].
struct RateCertificate {
  double rho = 0.0;
  bool certified = false;
  Witness witness;
  double margin = std::numeric_limits<double>::quiet_NaN();
  std::string meta;
  Mode mode = Mode::Discrete;
  double eta = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace mdcert
