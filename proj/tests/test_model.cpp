#include <doctest.h>

#include <random>

#include "mdcert/mdlab.hpp"
#include "mdcert/model.hpp"
#include "mdcert/reform.hpp"

using namespace mdcert;

TEST_CASE("conjugate class maps (mu, L) to (1/L, 1/mu)") {
  const ConjugateClass id = conjugate_class({1.0, 1.0});
  CHECK(id.mu_bar == 1.0);
  CHECK(id.L_bar == 1.0);

  const ConjugateClass sym = conjugate_class({0.5, 2.0});
  CHECK(sym.mu_bar == doctest::Approx(0.5));
  CHECK(sym.L_bar == doctest::Approx(2.0));

  // Section-6.3 DGF: eigenvalues of [[10,1],[1,1]] give the conjugate pair.
  const ConjugateClass pb = conjugate_class(dgf_6_3().phi.cls);
  CHECK(pb.mu_bar == doctest::Approx(0.09891).epsilon(1e-4));
  CHECK(pb.L_bar == doctest::Approx(1.1233).epsilon(1e-4));
}

TEST_CASE("conjugate class is an involution") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int i = 0; i < 200; ++i) {
    double mu = u(rng);
    double L = mu * (1.0 + u(rng));
    const ConjugateClass c = conjugate_class({mu, L});
    CHECK(c.mu_bar * L == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.L_bar * mu == doctest::Approx(1.0).epsilon(1e-15));
    const ConjugateClass back = conjugate_class(c.as_class());
    CHECK(back.mu_bar == doctest::Approx(mu).epsilon(1e-15));
    CHECK(back.L_bar == doctest::Approx(L).epsilon(1e-15));
  }
}

TEST_CASE("composite condition number") {
  ProblemSpec unit;
  unit.f = {1.0, 1.0};
  unit.phi = {1.0, 1.0};
  CHECK(composite_kappa(unit) == doctest::Approx(1.0));

  ProblemSpec p63;
  p63.f = quad_6_3().cls;
  p63.phi = dgf_6_3().phi.cls;
  CHECK(composite_kappa(p63) == doctest::Approx(1147.3).epsilon(1e-3));

  const double r = std::sqrt(34.0);
  ProblemSpec fig2;
  fig2.f = {1.0, r};
  fig2.phi = {1.0 / r, 1.0};
  CHECK(composite_kappa(fig2) == doctest::Approx(34.0).epsilon(1e-12));
}

TEST_CASE("problem spec validation") {
  ProblemSpec s;
  s.f = {1.0, 2.0};
  s.phi = {1.0, 1.0};
  s.eta = 0.5;
  CHECK_NOTHROW(s.validate());
  s.eta = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.eta = 1.0;
  s.f = {0.0, 1.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.f = {2.0, 1.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("kron system realization equals base blocks times identity") {
  ProblemSpec spec;
  spec.f = {0.7, 2.3};
  spec.phi = {0.4, 1.9};
  spec.eta = 0.37;
  spec.mode = Mode::Discrete;
  const KronSystem sys = build_dt_lure(spec);
  sys.validate();

  for (int d : {1, 2, 3}) {
    const auto R = sys.realize(d);
    REQUIRE(R.A.rows() == sys.A0.rows() * d);
    for (Eigen::Index bi = 0; bi < sys.D0.rows(); ++bi)
      for (Eigen::Index bj = 0; bj < sys.D0.cols(); ++bj)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            CHECK(R.D(bi * d + i, bj * d + j) == (i == j ? sys.D0(bi, bj) : 0.0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        CHECK(R.A(i, j) == (i == j ? sys.A0(0, 0) : 0.0));
        CHECK(R.B(i, j) == (i == j ? sys.B0(0, 0) : 0.0));
        CHECK(R.C(i, j) == (i == j ? sys.C0(0, 0) : 0.0));
      }
  }
}

TEST_CASE("witness lookup errors on missing coordinates") {
  Witness w;
  w.set("p", 1.0);
  CHECK(w.at("p") == 1.0);
  CHECK_THROWS_AS(w.at("q1"), std::invalid_argument);
}
