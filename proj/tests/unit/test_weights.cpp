#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "gkdv/weights.hpp"

using namespace gkdv;

namespace {

/// Fourth-order central difference.
template <class F>
double fd(F f, double x, double h = 1e-3) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double quad(double (*f)(double), double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

TEST_CASE("psi values") {
  CHECK(psi(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(psi_d1(0.0) == doctest::Approx(1.0 / (4.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK(psi(200.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(psi(-200.0) < 1e-20);
}

TEST_CASE("psi symmetry, derivative formula and third-derivative bound") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-60.0, 60.0);
  for (int i = 0; i < 100; ++i) {
    const double x = ud(rng);
    CHECK(std::abs(psi(x) + psi(-x) - 1.0) < 1e-12);
    CHECK(std::abs(psi_d1(x) - 1.0 / (4.0 * std::numbers::pi * std::cosh(x / 4.0))) < 1e-12);
    CHECK(psi_d1(x) > 0.0);
    CHECK(std::abs(psi_d3(x)) <= psi_d1(x) / 16.0 * (1.0 + 1e-12));
  }
}

TEST_CASE("psi derivatives agree with finite differences") {
  for (double x : {-13.0, -2.5, 0.0, 0.7, 9.0}) {
    CHECK(psi_d1(x) == doctest::Approx(fd(psi, x)).epsilon(1e-9));
    CHECK(psi_d3(x) == doctest::Approx(fd([](double y) { return fd(psi_d1, y, 1e-2); }, x, 1e-2))
                           .epsilon(1e-6));
  }
}

TEST_CASE("plateau shape") {
  CHECK(plateau_phi(0.0) == 1.0);
  CHECK(plateau_phi(1.0) == 1.0);
  CHECK(plateau_phi(2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(plateau_phi(5.0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-15));
  for (double x = 0.0; x < 8.0; x += 0.01) {
    CHECK(plateau_phi(-x) == plateau_phi(x));
    CHECK(plateau_phi(x) >= std::exp(-x) * (1 - 1e-15));
    CHECK(plateau_phi(x) <= 3.0 * std::exp(-x));
    CHECK(plateau_phi_d1(x) <= 0.0);
  }
}

TEST_CASE("plateau derivatives agree with finite differences") {
  for (double x : {0.3, 1.1, 1.25, 1.45, 1.8, 2.6, -1.2}) {
    CHECK(plateau_phi_d1(x) == doctest::Approx(fd(plateau_phi, x, 1e-4)).epsilon(1e-7));
    CHECK(plateau_phi_d2(x) == doctest::Approx(fd(plateau_phi_d1, x, 1e-4)).epsilon(1e-7));
    CHECK(plateau_phi_d3(x) == doctest::Approx(fd(plateau_phi_d2, x, 1e-4)).epsilon(1e-6));
  }
}

TEST_CASE("Psi integrates Phi and is odd") {
  const double L0 = quad(plateau_phi, 0.0, 60.0);
  CHECK(plateau_L0() == doctest::Approx(L0).epsilon(1e-12));
  for (double x : {0.5, 1.0, 1.3, 2.0, 7.0}) {
    CHECK(plateau_Psi(x) == doctest::Approx(quad(plateau_phi, 0.0, x)).epsilon(1e-12));
    CHECK(plateau_Psi(-x) == -plateau_Psi(x));
  }
  CHECK(plateau_Psi(80.0) == doctest::Approx(plateau_L0()).epsilon(1e-14));
}

TEST_CASE("weight_eval kinds and chain rule") {
  const WeightValue a = weight_eval({WeightKind::psi, 1.0, 3.0, std::nullopt}, 5.0, 0.0);
  CHECK(a.w == psi(2.0));
  CHECK(a.w1 == psi_d1(2.0));
  CHECK(a.w3 == psi_d3(2.0));

  const WeightValue b = weight_eval({WeightKind::psi_scaled, 0.5, 0.0, std::nullopt}, 4.0, 0.0);
  CHECK(b.w == doctest::Approx(psi(2.0)));
  CHECK(b.w1 == doctest::Approx(0.5 * psi_d1(2.0)));
  CHECK(b.w3 == doctest::Approx(0.125 * psi_d3(2.0)));

  const WeightValue c = weight_eval({WeightKind::phi_plateau, 20.0, 0.0, std::nullopt}, 30.0, 0.0);
  CHECK(c.w == doctest::Approx(plateau_phi(1.5)));
  CHECK(c.w1 == doctest::Approx(plateau_phi_d1(1.5) / 20.0));

  const WeightValue d = weight_eval({WeightKind::psi_capital, 10.0, 0.0, std::nullopt}, 25.0, 0.0);
  CHECK(d.w == doctest::Approx(10.0 * plateau_Psi(2.5)));
  CHECK(d.w1 == doctest::Approx(plateau_phi(2.5)));
  CHECK(d.w3 == doctest::Approx(plateau_phi_d2(2.5) / 100.0));
}

TEST_CASE("drifting weights shift with time") {
  const WeightSpec s{WeightKind::psi, 1.0, 1.0, WeightDrift{0.5, 2.0, 3.0}};
  // y = x - 1 + 3 + 0.5 (t - 2)
  for (double t : {2.0, 6.0, 10.0}) {
    const double y = 4.0 - 1.0 + 3.0 + 0.5 * (t - 2.0);
    CHECK(weight_eval(s, 4.0, t).w == doctest::Approx(psi(y)));
  }
  // The argument is preserved along x = const - slope (t - t0).
  CHECK(weight_eval(s, 0.0, 2.0).w == doctest::Approx(weight_eval(s, -2.0, 6.0).w));
}
