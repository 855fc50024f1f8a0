#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "mdcert/reform.hpp"
#include "mdcert/sdp.hpp"

using namespace mdcert;

namespace {

AffineMatrixInequality simple(const Eigen::MatrixXd& F0,
                              const std::vector<Eigen::MatrixXd>& basis,
                              const std::vector<bool>& nonneg) {
  AffineMatrixInequality lmi;
  lmi.F0 = F0;
  lmi.basis = basis;
  lmi.nonneg = nonneg;
  for (size_t i = 0; i < basis.size(); ++i) lmi.names.push_back("x" + std::to_string(i + 1));
  lmi.P0 = Eigen::MatrixXd::Zero(0, 0);
  lmi.pbasis.assign(basis.size(), Eigen::MatrixXd());
  return lmi;
}

// Exhaustive 2-coordinate oracle: coarse grid followed by nested
// golden-section refinement of the concave map x -> -lam_max(F(x)).
double oracle_two_coords(const AffineMatrixInequality& lmi, double lo1, double hi1, double lo2,
                         double hi2) {
  auto neg_lmax = [&](double a, double b) {
    Eigen::Vector2d x(a, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmi.evaluate(x), Eigen::EigenvaluesOnly);
    return -es.eigenvalues().maxCoeff();
  };
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  auto golden1d = [&](const std::function<double(double)>& f, double lo, double hi) {
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 90; ++i) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = f(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = f(x1);
      }
    }
    return std::max(f1, f2);
  };
  double best = -kInf;
  for (int i = 0; i <= 24; ++i) {
    const double a = lo1 + (hi1 - lo1) * i / 24.0;
    best = std::max(best, golden1d([&](double b) { return neg_lmax(a, b); }, lo2, hi2));
  }
  auto inner = [&](double a) {
    return golden1d([&](double b) { return neg_lmax(a, b); }, lo2, hi2);
  };
  best = std::max(best, golden1d(inner, lo1, hi1));
  return best;
}

std::string witness_bits(const Witness& w) {
  std::ostringstream os;
  for (const auto& [k, v] : w.values) {
    os << k << ":";
    static_assert(sizeof(double) == sizeof(uint64_t));
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    os << bits << ";";
  }
  return os.str();
}

}  // namespace

TEST_CASE("hand-solvable single-coordinate problem with a tight trust bound") {
  // F(x) = diag(1 - x, -1), x >= 0: t* = 1 from x >= 2 onward.
  const AffineMatrixInequality lmi =
      simple(Eigen::Vector2d(1, -1).asDiagonal(),
             {Eigen::Vector2d(-1, 0).asDiagonal().toDenseMatrix()}, {true});
  SolveOptions opts;
  opts.coord_bound = 10.0;
  const auto [t, w] = max_min_eig(lmi, opts);
  CHECK(t == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(w.at("x1") >= 2.0 - 1e-3);
  CHECK(solve_feasibility(lmi, opts).feasible());
}

TEST_CASE("constant positive definite problem is infeasible immediately") {
  const AffineMatrixInequality lmi = simple(Eigen::MatrixXd::Identity(4, 4), {}, {});
  const FeasibilityOutcome o = solve_feasibility(lmi);
  CHECK(o.verdict == FeasibilityOutcome::Verdict::Infeasible);
  CHECK(o.margin == doctest::Approx(1.0));
}

TEST_CASE("randomized 5x5 two-coordinate problems match the exhaustive oracle") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g(0.0, 1.0);
  auto rand_sym = [&]() {
    Eigen::MatrixXd M(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) M(i, j) = g(rng);
    return Eigen::MatrixXd(0.5 * (M + M.transpose()));
  };
  for (int trial = 0; trial < 8; ++trial) {
    const AffineMatrixInequality lmi =
        simple(rand_sym(), {rand_sym(), rand_sym()}, {false, false});
    SolveOptions opts;
    opts.coord_bound = 4.0;
    const auto [t, w] = max_min_eig(lmi, opts);
    const double ref = oracle_two_coords(lmi, -4.0, 4.0, -4.0, 4.0);
    CHECK(t == doctest::Approx(ref).epsilon(2e-4));
  }
}

TEST_CASE("scaling every matrix by 10 scales the optimum by 10") {
  std::mt19937_64 rng(102);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd F0(3, 3), F1(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      F0(i, j) = g(rng);
      F1(i, j) = g(rng);
    }
  F0 = 0.5 * (F0 + F0.transpose()).eval();
  F1 = 0.5 * (F1 + F1.transpose()).eval();
  SolveOptions opts;
  opts.coord_bound = 5.0;
  const AffineMatrixInequality a = simple(F0, {F1}, {false});
  const AffineMatrixInequality b = simple(10.0 * F0, {10.0 * F1}, {false});
  const double ta = max_min_eig(a, opts).first;
  const double tb = max_min_eig(b, opts).first;
  CHECK(tb == doctest::Approx(10.0 * ta).epsilon(1e-6));
}

TEST_CASE("identical inputs produce bit-identical outcomes") {
  ProblemSpec spec;
  spec.mode = Mode::Continuous;
  spec.eta = 0.8;
  spec.f = {0.9, 7.2};
  spec.phi = {0.31, 1.4};
  const AffineMatrixInequality lmi = assemble_ct_lmi(build_ct_lure(spec), 0.1);
  const FeasibilityOutcome o1 = solve_feasibility(lmi);
  const FeasibilityOutcome o2 = solve_feasibility(lmi);
  CHECK(o1.verdict == o2.verdict);
  CHECK(std::memcmp(&o1.margin, &o2.margin, sizeof(double)) == 0);
  CHECK(witness_bits(o1.witness) == witness_bits(o2.witness));
}

TEST_CASE("adding a coordinate can only improve the optimum") {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> g(0.0, 1.0);
  auto rand_sym = [&](int n) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = g(rng);
    return Eigen::MatrixXd(0.5 * (M + M.transpose()));
  };
  for (int trial = 0; trial < 6; ++trial) {
    const Eigen::MatrixXd F0 = rand_sym(4), F1 = rand_sym(4), F2 = rand_sym(4);
    SolveOptions opts;
    opts.coord_bound = 3.0;
    const double t1 = max_min_eig(simple(F0, {F1}, {false}), opts).first;
    const double t2 = max_min_eig(simple(F0, {F1, F2}, {false, false}), opts).first;
    CHECK(t2 >= t1 - 1e-6);
  }
}

TEST_CASE("appendix-b boundary problem counts as feasible") {
  // At rho = eta mu_f mu_pb the CT LMI is feasible only non-strictly; the
  // verdict must still be Feasible with a witness that re-verifies.
  ProblemSpec spec;
  spec.mode = Mode::Continuous;
  spec.eta = 1.0;
  spec.f = {1.0, 7.0};
  spec.phi = {1.0 / 7.0, 1.0};
  const double rho_star = spec.eta * spec.f.mu * spec.phibar().mu_bar;
  const AffineMatrixInequality lmi = assemble_ct_lmi(build_ct_lure(spec), rho_star);
  const FeasibilityOutcome o = solve_feasibility(lmi);
  CHECK(o.feasible());
  CHECK(verify_witness(lmi, o.witness) <= 1e-7);
}

TEST_CASE("sector-only problem at kappa 50 is infeasible at any rate") {
  const double r = std::sqrt(50.0);
  ProblemSpec spec;
  spec.mode = Mode::Continuous;
  spec.eta = 1.0;
  spec.f = {1.0, r};
  spec.phi = {1.0 / r, 1.0};
  const KronSystem sys = build_ct_lure(spec);
  for (double rho : {1e-6, 1e-3, 0.05, 0.3, 1.0}) {
    const FeasibilityOutcome o = solve_feasibility(assemble_ct_lmi(sys, rho, true));
    CHECK(o.verdict == FeasibilityOutcome::Verdict::Infeasible);
  }
}
