#include "mdcert/mdlab.hpp"

#include <cmath>
#include <random>

namespace mdcert {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd diag_of(const Eigen::MatrixXd& Phi) {
  const double off = (Phi - Eigen::MatrixXd(Phi.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
  if (off > 1e-12 * (1.0 + Phi.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("projected MD requires a diagonal quadratic DGF");
  return Phi.diagonal();
}

}  // namespace

ConstraintSet ConstraintSet::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size() || ((hi - lo).array() <= 0.0).any())
    throw std::invalid_argument("ConstraintSet::box: need lo < hi componentwise");
  ConstraintSet X;
  X.kind = Kind::Box;
  X.lo = lo;
  X.hi = hi;
  X.dim = static_cast<int>(lo.size());
  return X;
}

ConstraintSet ConstraintSet::simplex(int dim) {
  if (dim < 1) throw std::invalid_argument("ConstraintSet::simplex: dim must be >= 1");
  ConstraintSet X;
  X.kind = Kind::Simplex;
  X.dim = dim;
  return X;
}

bool ConstraintSet::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim) return false;
  if (kind == Kind::Box)
    return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
  return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
}

Eigen::VectorXd ConstraintSet::project_weighted(const Eigen::VectorXd& w,
                                                const Eigen::VectorXd& v) const {
  if (w.size() != dim || v.size() != dim)
    throw std::invalid_argument("project_weighted: dimension mismatch");
  if ((w.array() <= 0.0).any())
    throw std::invalid_argument("project_weighted: weights must be positive");
  if (kind == Kind::Box) return v.cwiseMax(lo).cwiseMin(hi);

  // Simplex: x_i = max(0, v_i - lambda / w_i) with sum x = 1; the dual
  // function is piecewise linear and decreasing in lambda.
  auto primal_sum = [&](double lam) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += std::max(0.0, v[i] - lam / w[i]);
    return s;
  };
  double lam_hi = (w.array() * v.array()).maxCoeff();          // all coordinates inactive
  double lam_lo = (w.array() * (v.array() - 1.0)).minCoeff();  // at least one coordinate >= 1
  if (primal_sum(lam_lo) < 1.0) lam_lo -= 1.0 + std::abs(lam_lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    if (mid == lam_lo || mid == lam_hi) break;
    (primal_sum(mid) >= 1.0 ? lam_lo : lam_hi) = mid;
  }
  const double lam = 0.5 * (lam_lo + lam_hi);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x[i] = std::max(0.0, v[i] - lam / w[i]);
  return x;
}

std::vector<Eigen::VectorXd> ConstraintSet::witness_points() const {
  std::vector<Eigen::VectorXd> pts;
  if (kind == Kind::Box) {
    if (dim > 16) throw std::invalid_argument("witness_points: box dimension too large");
    for (int mask = 0; mask < (1 << dim); ++mask) {
      Eigen::VectorXd y(dim);
      for (int i = 0; i < dim; ++i) y[i] = (mask >> i) & 1 ? hi[i] : lo[i];
      pts.push_back(y);
    }
    return pts;
  }
  for (int i = 0; i < dim; ++i) pts.push_back(Eigen::VectorXd::Unit(dim, i));
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 32; ++k) {
    Eigen::VectorXd y(dim);
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      y[i] = -std::log(1.0 - u(rng));
      s += y[i];
    }
    pts.push_back(y / s);
  }
  return pts;
}

std::vector<double> Trajectory::distances_to(const Eigen::VectorXd& ref, bool in_x) const {
  const auto& seq = in_x ? x : z;
  std::vector<double> d;
  d.reserve(seq.size());
  for (const auto& v : seq) d.push_back((v - ref).norm());
  return d;
}

Trajectory run_dt_md(const SmoothFunction& f, const DgfPair& dgf, const Eigen::VectorXd& z0,
                     double eta, int N) {
  if (N < 1) throw std::invalid_argument("run_dt_md: N must be >= 1");
  Trajectory tr;
  tr.dt = 1.0;
  Eigen::VectorXd z = z0;
  for (int k = 0; k <= N; ++k) {
    const Eigen::VectorXd xk = dgf.identity ? z : dgf.grad_bar(z);
    tr.z.push_back(z);
    tr.x.push_back(xk);
    if (!finite(xk) || !finite(z)) {
      tr.diverged_at = k;
      break;
    }
    if (k < N) z = z - eta * f.grad(xk);
  }
  return tr;
}

double ct_default_step(double eta, const FunctionClass& f_cls, const ConjugateClass& pb) {
  return 0.1 / (eta * f_cls.L * pb.L_bar);
}

Trajectory run_ct_md(const SmoothFunction& f, const DgfPair& dgf, const Eigen::VectorXd& z0,
                     double eta, double T, double h) {
  if (!(h > 0.0) || !(T > 0.0)) throw std::invalid_argument("run_ct_md: need h > 0 and T > 0");
  auto field = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return -eta * f.grad(dgf.identity ? z : dgf.grad_bar(z));
  };
  Trajectory tr;
  tr.dt = h;
  Eigen::VectorXd z = z0;
  const int N = static_cast<int>(std::ceil(T / h));
  for (int k = 0; k <= N; ++k) {
    tr.z.push_back(z);
    tr.x.push_back(dgf.identity ? z : dgf.grad_bar(z));
    if (!finite(z)) {
      tr.diverged_at = k;
      break;
    }
    if (k < N) {
      const Eigen::VectorXd k1 = field(z);
      const Eigen::VectorXd k2 = field(z + 0.5 * h * k1);
      const Eigen::VectorXd k3 = field(z + 0.5 * h * k2);
      const Eigen::VectorXd k4 = field(z + h * k3);
      z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return tr;
}

Trajectory run_proj_md(const SmoothFunction& f, const DgfPair& dgf, const ConstraintSet& X,
                       const Eigen::VectorXd& x0, double eta, int N) {
  if (N < 1) throw std::invalid_argument("run_proj_md: N must be >= 1");
  if (!X.contains(x0)) throw std::invalid_argument("run_proj_md: x0 not in the constraint set");
  const Eigen::VectorXd w = diag_of(dgf.Phi);
  Trajectory tr;
  tr.dt = 1.0;
  Eigen::VectorXd x = x0;
  for (int k = 0; k <= N; ++k) {
    tr.x.push_back(x);
    tr.z.push_back(dgf.phi.grad(x));
    if (!finite(x)) {
      tr.diverged_at = k;
      break;
    }
    if (k < N) {
      const Eigen::VectorXd g = f.grad(x);
      const Eigen::VectorXd v = x - eta * g.cwiseQuotient(w);
      x = X.project_weighted(w, v);
    }
  }
  return tr;
}

double inclusion_residual(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& x_next,
                          const SmoothFunction& f, const DgfPair& dgf, const ConstraintSet& X,
                          double eta) {
  const Eigen::VectorXd r = -dgf.phi.grad(x_next) + dgf.phi.grad(x_prev) - eta * f.grad(x_prev);
  double worst = -kInf;
  for (const auto& y : X.witness_points()) worst = std::max(worst, r.dot(y - x_next));
  return worst;
}

EmpiricalRate empirical_rate(const std::vector<double>& distances, double dt, Mode mode) {
  const int n = static_cast<int>(distances.size());
  if (n < 50) throw std::invalid_argument("empirical_rate: need at least 50 samples");
  const double d0 = std::max(distances[0], 1e-300);

  // Usable prefix: stop once the trajectory reaches rounding noise.
  int n_use = n;
  for (int i = 0; i < n; ++i) {
    if (!(distances[i] > 1e-11 * d0) || !std::isfinite(distances[i])) {
      n_use = i;
      break;
    }
  }
  EmpiricalRate out;
  double dmin = kInf;
  for (int i = 0; i < n_use; ++i) dmin = std::min(dmin, distances[i]);
  if (n_use < 10 || !(dmin <= 1e-2 * d0)) {
    // Not enough decay to fit a rate.
    if (!(dmin <= 1e-2 * d0)) {
      out.stalled = true;
      out.rho = mode == Mode::Continuous ? 0.0 : 1.0;
      out.window_lo = 0;
      out.window_hi = n_use;
      return out;
    }
  }

  const int lo = n_use / 2;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int m = 0;
  for (int i = lo; i < n_use; ++i) {
    const double t = i * dt;
    const double y = std::log(distances[i]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("empirical_rate: fit window too short");
  const double slope = (m * sty - st * sy) / (m * stt - st * st);
  out.window_lo = lo;
  out.window_hi = n_use;
  out.stalled = !(slope < 0.0);
  out.rho = mode == Mode::Continuous ? -slope : std::exp(slope * dt);
  return out;
}

// Registered instances ------------------------------------------------------

SmoothFunction quadratic_function(const Eigen::MatrixXd& F, const Eigen::VectorXd& p,
                                  const std::string& name) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F, Eigen::EigenvaluesOnly);
  SmoothFunction f;
  f.name = name;
  f.dim = static_cast<int>(F.rows());
  f.cls = {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  f.value = [F, p](const Eigen::VectorXd& x) { return 0.5 * x.dot(F * x) + p.dot(x); };
  f.grad = [F, p](const Eigen::VectorXd& x) -> Eigen::VectorXd { return F * x + p; };
  f.minimizer = Eigen::VectorXd(-F.ldlt().solve(p));
  return f;
}

DgfPair quadratic_dgf(const Eigen::MatrixXd& Phi, const std::string& name) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Phi, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("quadratic_dgf: Phi must be positive definite");
  DgfPair dgf;
  dgf.name = name;
  dgf.Phi = Phi;
  dgf.phi.name = name;
  dgf.phi.dim = static_cast<int>(Phi.rows());
  dgf.phi.cls = {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  dgf.phi.value = [Phi](const Eigen::VectorXd& x) { return 0.5 * x.dot(Phi * x); };
  dgf.phi.grad = [Phi](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Phi * x; };
  dgf.phi.minimizer = Eigen::VectorXd(Eigen::VectorXd::Zero(Phi.rows()));
  const Eigen::MatrixXd Phib = Phi.ldlt().solve(Eigen::MatrixXd::Identity(Phi.rows(), Phi.cols()));
  dgf.grad_bar = [Phib](const Eigen::VectorXd& z) -> Eigen::VectorXd { return Phib * z; };
  dgf.bregman = [Phi](const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = y - x;
    return 0.5 * d.dot(Phi * d);
  };
  return dgf;
}

DgfPair identity_dgf(int dim) {
  DgfPair dgf = quadratic_dgf(Eigen::MatrixXd::Identity(dim, dim), "identity-dgf");
  dgf.identity = true;
  dgf.grad_bar = [](const Eigen::VectorXd& z) { return z; };
  dgf.phi.grad = [](const Eigen::VectorXd& x) { return x; };
  return dgf;
}

SmoothFunction quad_6_3() {
  Eigen::MatrixXd F(2, 2);
  F << 100.0, -1.0, -1.0, 1.0;
  Eigen::VectorXd p(2);
  p << 1.0, 10.0;
  return quadratic_function(F, p, "quad_6_3");
}

DgfPair dgf_6_3() {
  Eigen::MatrixXd Phi(2, 2);
  Phi << 10.0, 1.0, 1.0, 1.0;
  return quadratic_dgf(Phi, "dgf_6_3");
}

namespace {

Eigen::MatrixXd random_spd_with_class(int dim, const FunctionClass& cls, uint64_t seed) {
  cls.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd G(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) G(i, j) = gauss(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd eig(dim);
  if (dim == 1) {
    eig[0] = cls.L;
  } else {
    for (int i = 0; i < dim; ++i)
      eig[i] = cls.mu + (cls.L - cls.mu) * static_cast<double>(i) / (dim - 1);
  }
  return Q * eig.asDiagonal() * Q.transpose();
}

}  // namespace

SmoothFunction random_quadratic(int dim, const FunctionClass& cls, uint64_t seed) {
  const Eigen::MatrixXd F = random_spd_with_class(dim, cls, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd p(dim);
  for (int i = 0; i < dim; ++i) p[i] = gauss(rng);
  SmoothFunction f = quadratic_function(F, p, "random-quadratic");
  f.cls = cls;  // declared class; actual spectrum spans exactly [mu, L]
  return f;
}

DgfPair random_quadratic_dgf(int dim, const FunctionClass& cls, uint64_t seed) {
  DgfPair dgf = quadratic_dgf(random_spd_with_class(dim, cls, seed), "random-dgf");
  dgf.phi.cls = cls;
  return dgf;
}

SmoothFunction softplus_function(int dim, const FunctionClass& cls, uint64_t seed) {
  cls.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  Eigen::VectorXd c(dim);
  for (int i = 0; i < dim; ++i) c[i] = shift(rng);
  const double mu = cls.mu, gap = cls.L - cls.mu;

  // s(y) = softplus(4y)/4 has s'' = 4 sigma(4y)(1 - sigma(4y)) in (0, 1].
  auto s = [](double y) { return std::max(y, 0.0) + 0.25 * std::log1p(std::exp(-4.0 * std::abs(y))); };
  auto sp = [](double y) { return 1.0 / (1.0 + std::exp(-4.0 * y)); };

  SmoothFunction f;
  f.name = "softplus";
  f.dim = dim;
  f.cls = cls;
  f.value = [mu, gap, c, s](const Eigen::VectorXd& x) {
    double v = 0.5 * mu * x.squaredNorm();
    for (int i = 0; i < x.size(); ++i) v += gap * s(x[i] - c[i]);
    return v;
  };
  f.grad = [mu, gap, c, sp](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd g = mu * x;
    for (int i = 0; i < x.size(); ++i) g[i] += gap * sp(x[i] - c[i]);
    return g;
  };

  Eigen::VectorXd xopt(dim);
  for (int i = 0; i < dim; ++i) {
    double lo = -(gap / mu) - 1.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double g = mu * mid + gap * sp(mid - c[i]);
      (g < 0.0 ? lo : hi) = mid;
    }
    xopt[i] = 0.5 * (lo + hi);
  }
  f.minimizer = xopt;
  return f;
}

}  // namespace mdcert
