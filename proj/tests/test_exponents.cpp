#include <doctest.h>

#include <cmath>

#include "emsa/exponents.hpp"

using namespace emsa;

namespace {

ExponentSet base_set() {
  ExponentSet e;
  e.xi = 0.1;
  e.zeta = 0.2;
  e.beta = 0.25;
  e.gamma = 1.2;
  e.tau = 0.9;
  e.kappa = 0.3;
  e.kappa_prime = 0.2;
  e.varsigma = 0.5;
  return e;
}

int failed_rows(const ValidationReport& r) {
  int n = 0;
  for (const auto& e : r.entries)
    if (!e.pass && !e.informational) ++n;
  return n;
}

}  // namespace

TEST_CASE("derived quantities of a hand-built set") {
  ExponentSet e = base_set();
  CHECK(e.zeta_tilde() == doctest::Approx(0.225).epsilon(1e-14));
  CHECK(e.tau_tilde() == doctest::Approx(0.95).epsilon(1e-14));
  // min{0.3, 0.05, 1.2*0.9 - 0.2*0.225 - 1} = min{0.3, 0.05, 0.035}
  CHECK(std::abs(e.varrho() - 0.035) <= 1e-12);
  CHECK(e.tau_lower() == doctest::Approx(((1.2 - 1) * 0.25 + 1) / 1.2).epsilon(1e-14));

  ValidationReport r = validate(e);
  CHECK(r.pass);
  CHECK(failed_rows(r) == 0);
  // kappa = 0.3 > varrho = 0.035: the informational row fails without
  // affecting the verdict
  const ValidationEntry* info = r.find("kappa-le-varrho");
  REQUIRE(info != nullptr);
  CHECK(info->informational);
  CHECK_FALSE(info->pass);
}

TEST_CASE("single violations flip single rows") {
  struct Case {
    const char* id;
    void (*mutate)(ExponentSet&);
  };
  const Case cases[] = {
      {"xi-positive", [](ExponentSet& e) { e.xi = -0.01; }},
      {"gamma-gt-one", [](ExponentSet& e) { e.gamma = 0.9; }},
      {"gamma-sq", [](ExponentSet& e) { e.gamma = 1.42; }},
      {"kappa-sum", [](ExponentSet& e) { e.kappa = 0.5; }},
      {"tau-lt-one", [](ExponentSet& e) { e.tau = 1.0; }},
      {"varsigma-positive", [](ExponentSet& e) { e.varsigma = -0.1; }},
  };
  for (const auto& c : cases) {
    ExponentSet e = base_set();
    c.mutate(e);
    ValidationReport r = validate(e);
    INFO("case " << c.id);
    CHECK_FALSE(r.pass);
    const ValidationEntry* row = r.find(c.id);
    REQUIRE(row != nullptr);
    CHECK_FALSE(row->pass);
  }
}

TEST_CASE("derive with overrides reproduces the hand-built set") {
  ExponentOverrides ov;
  ov.gamma = 1.2;
  ov.beta = 0.25;
  ov.tau = 0.9;
  ov.kappa = 0.3;
  ov.kappa_prime = 0.2;
  ov.varsigma = 0.5;
  ExponentSet e = derive(0.1, 0.2, ov);
  ExponentSet b = base_set();
  CHECK(e.beta == b.beta);
  CHECK(e.gamma == b.gamma);
  CHECK(e.tau == b.tau);
  CHECK(e.kappa == b.kappa);
  CHECK(e.kappa_prime == b.kappa_prime);
  CHECK(e.varsigma == b.varsigma);
}

TEST_CASE("derive defaults form valid sets over a grid") {
  for (double xi : {0.05, 0.1, 0.3}) {
    for (double f : {1.5, 2.0, 4.0}) {
      double zeta = xi * f;
      if (!(zeta < 0.9)) continue;
      INFO("xi=" << xi << " zeta=" << zeta);
      ExponentSet e = derive(xi, zeta);
      ValidationReport r = validate(e);
      CHECK(r.pass);
      CHECK(e.varrho() > 0);
      CHECK(e.varsigma <= 1 - e.varrho() + 1e-14);
    }
  }
}

TEST_CASE("derive reference values at (0.1, 0.2)") {
  ExponentSet e = derive(0.1, 0.2);
  double s = std::sqrt(2.0);
  CHECK(e.gamma == doctest::Approx((1 + s) / 2).epsilon(1e-14));
  CHECK(e.beta == doctest::Approx((0.2 + 1 / e.gamma) / 2).epsilon(1e-14));
  CHECK(e.tau == doctest::Approx((e.tau_lower() + 1) / 2).epsilon(1e-14));
  double margin = e.tau - e.gamma * e.beta;
  CHECK(e.kappa == doctest::Approx(margin / 4).epsilon(1e-12));
  CHECK(e.kappa_prime == e.kappa);
}

TEST_CASE("derive rejects bad input") {
  CHECK_THROWS_AS(derive(0.2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(derive(-0.1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(derive(0.1, 1.1), std::invalid_argument);
  ExponentOverrides ov;
  ov.gamma = 5.0;  // above sqrt(zeta/xi)
  CHECK_THROWS_AS(derive(0.1, 0.2, ov), std::invalid_argument);
}

TEST_CASE("scale sequence") {
  ScaleSequence s = scale_sequence(10, 1.2, 3);
  REQUIRE(s.scales.size() == 4);
  CHECK(s.scales[0] == doctest::Approx(10.0));
  CHECK(s.scales[1] == doctest::Approx(std::pow(10, 1.2)).epsilon(1e-12));
  CHECK(s.scales[2] == doctest::Approx(std::pow(10, 1.44)).epsilon(1e-12));
  CHECK(s.scales[3] == doctest::Approx(std::pow(10, 1.728)).epsilon(1e-12));
  CHECK_FALSE(s.overflowed);

  ScaleSequence t = scale_sequence(2, 2.0, 3);
  REQUIRE(t.scales.size() == 4);
  CHECK(t.scales[1] == 4.0);
  CHECK(t.scales[2] == 16.0);
  CHECK(t.scales[3] == 256.0);

  ScaleSequence big = scale_sequence(10, 2.0, 100);
  CHECK(big.overflowed);
  CHECK(big.scales.size() < 101);

  CHECK_THROWS_AS(scale_sequence(10, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(scale_sequence(0.5, 2.0, 3), std::invalid_argument);
}

TEST_CASE("floor_pow") {
  CHECK(floor_pow(64, 0.75) == 22);  // 64^0.75 = 22.627
  CHECK(floor_pow(2, 0.5) == 1);
  CHECK(floor_pow(1, 0.9) == 1);
  CHECK(floor_pow(10, 2.0) == 100);
  CHECK_THROWS_AS(floor_pow(0.5, 1.0), std::invalid_argument);
}
