#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pdyn/sphere.hpp"

using namespace pdyn;

namespace {

PunctureSet origin_set() { return PunctureSet({cplx(0.0, 0.0)}); }

double rel_err(double a, double b) {
  if (a == b) return 0.0;
  return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

}  // namespace

TEST_CASE("sphere points normalize overflow and tag infinity explicitly") {
  CHECK(SpherePoint::finite(1e308 * 10, 0).is_infinity());
  CHECK(SpherePoint::finite(0, std::nan("")).is_infinity());
  CHECK(SpherePoint::finite(3, 4).is_finite());
  CHECK(SpherePoint::finite(3, 4) == SpherePoint::finite(3, 4));
  CHECK(SpherePoint::finite(3, 4) != SpherePoint::finite(3, 5));
  CHECK(SpherePoint::infinity() == SpherePoint::infinity());
  CHECK(SpherePoint::infinity() != SpherePoint::finite(0, 0));
}

TEST_CASE("generalized modulus") {
  PunctureSet S = origin_set();
  CHECK(generalized_modulus(SpherePoint::finite(3, 4), 0, S) == doctest::Approx(5.0));
  CHECK(generalized_modulus(SpherePoint::finite(0.5, 0), 1, S) == doctest::Approx(2.0));
  CHECK(generalized_modulus(SpherePoint::infinity(), 1, S) == 0.0);
  CHECK(std::isinf(generalized_modulus(SpherePoint::infinity(), 0, S)));
  CHECK(std::isinf(generalized_modulus(SpherePoint::finite(0, 0), 1, S)));
}

TEST_CASE("chart maps") {
  PunctureSet S = origin_set();
  SUBCASE("chart 0 is the identity") {
    SpherePoint x = SpherePoint::finite(7, -2);
    CHECK(chart_map(x, 0, S) == x);
  }
  SUBCASE("real axis inversion with reflection") {
    SpherePoint y = chart_map(SpherePoint::finite(0.5, 0), 1, S);
    CHECK(y.value().real() == doctest::Approx(-2.0));
    CHECK(y.value().imag() == doctest::Approx(0.0));
  }
  SUBCASE("i is fixed by the chart at the origin") {
    SpherePoint y = chart_map(SpherePoint::finite(0, 1), 1, S);
    CHECK(y.value().real() == doctest::Approx(0.0));
    CHECK(y.value().imag() == doctest::Approx(1.0));
    CHECK(std::abs(y.value()) ==
          doctest::Approx(generalized_modulus(SpherePoint::finite(0, 1), 1, S)));
  }
  SUBCASE("punctures and infinity swap") {
    CHECK(chart_map(SpherePoint::finite(0, 0), 1, S).is_infinity());
    CHECK(chart_map(SpherePoint::infinity(), 1, S) == SpherePoint::finite(0, 0));
  }
}

TEST_CASE("chart identity |x|_j = |phi_j(x)| on random points") {
  PunctureSet S({cplx(0.0, 0.0), cplx(1.0, -0.5)});
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int j = 0; j <= S.nu(); ++j) {
    for (int i = 0; i < 10000; ++i) {
      SpherePoint x = SpherePoint::finite(u(rng), u(rng));
      if (S.is_puncture(x)) continue;
      double lhs = generalized_modulus(x, j, S);
      SpherePoint w = chart_map(x, j, S);
      REQUIRE(w.is_finite());
      CHECK(rel_err(lhs, std::abs(w.value())) <= 1e-12);
    }
  }
}

TEST_CASE("chart_inverse inverts chart_map") {
  PunctureSet S({cplx(0.0, 0.0), cplx(2.0, 1.0)});
  SUBCASE("fixed examples") {
    CHECK(chart_inverse(SpherePoint::finite(0, 5), 0, S) == SpherePoint::finite(0, 5));
    SpherePoint x = chart_inverse(SpherePoint::finite(-2, 0), 1, S);
    CHECK(x.value().real() == doctest::Approx(0.5));
    CHECK(chart_inverse(SpherePoint::infinity(), 1, S) == SpherePoint::finite(0, 0));
    CHECK(chart_inverse(SpherePoint::finite(0, 0), 1, S).is_infinity());
  }
  SUBCASE("random round trips") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    for (int j = 0; j <= S.nu(); ++j) {
      for (int i = 0; i < 10000; ++i) {
        SpherePoint x = SpherePoint::finite(u(rng), u(rng));
        if (S.is_puncture(x)) continue;
        SpherePoint back = chart_inverse(chart_map(x, j, S), j, S);
        REQUIRE(back.is_finite());
        CHECK(std::abs(back.value() - x.value()) <=
              1e-12 * std::max(1.0, std::abs(x.value())));
      }
    }
  }
}

TEST_CASE("separation radius") {
  SUBCASE("single puncture at the origin") {
    CHECK(compute_rho_S({cplx(0, 0)}) == doctest::Approx(2.0));
  }
  SUBCASE("origin and one") {
    CHECK(compute_rho_S({cplx(0, 0), cplx(1, 0)}) == doctest::Approx(2.0));
  }
  SUBCASE("close pair dominates") {
    CHECK(compute_rho_S({cplx(0, 0), cplx(0.1, 0)}) == doctest::Approx(20.0));
  }
  SUBCASE("coincident punctures are rejected") {
    CHECK_THROWS_AS(PunctureSet({cplx(1, 1), cplx(1, 1)}), precondition_error);
  }
  SUBCASE("separation property holds for every chart") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<cplx> ys;
      int nu = 1 + trial % 3;
      for (int i = 0; i < nu; ++i) ys.emplace_back(u(rng), u(rng));
      PunctureSet S(ys);
      double rho = S.rho_S();
      for (int j = 0; j <= S.nu(); ++j) {
        for (int t = 0; t <= S.nu(); ++t) {
          bool inside = generalized_modulus(S.puncture(t), j, S) >= rho;
          CHECK(inside == (t == j));
        }
      }
    }
  }
}

TEST_CASE("dominant symbol") {
  PunctureSet S = origin_set();
  CHECK(dominant_symbol(SpherePoint::finite(10, 0), S, 2.0) == 0);
  CHECK(dominant_symbol(SpherePoint::finite(0.01, 0), S, 2.0) == 1);
  CHECK(!dominant_symbol(SpherePoint::finite(1, 1), S, 2.0).has_value());
  CHECK_THROWS_AS(dominant_symbol(SpherePoint::finite(10, 0), S, 1.0),
                  precondition_error);
  // determinism: repeated calls agree
  for (int i = 0; i < 100; ++i)
    CHECK(dominant_symbol(SpherePoint::finite(10, 0), S, 2.0) == 0);
}
