#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gkdv/model.hpp"

using namespace gkdv;

TEST_CASE("eval_nonlinearity on pure powers") {
  const NonlinearityValue a = eval_nonlinearity(NonlinearitySpec(2), 2.0);
  CHECK(a.f == 4.0);
  CHECK(a.f_prime == 4.0);
  CHECK(a.F == doctest::Approx(8.0 / 3.0).epsilon(1e-15));

  const NonlinearityValue b = eval_nonlinearity(NonlinearitySpec(3), 1.0);
  CHECK(b.f == 1.0);
  CHECK(b.f_prime == 3.0);
  CHECK(b.F == 0.25);

  const NonlinearityValue z = eval_nonlinearity(NonlinearitySpec(4), 0.0);
  CHECK(z.f == 0.0);
  CHECK(z.f_prime == 0.0);
  CHECK(z.F == 0.0);
}

TEST_CASE("F is the antiderivative of u^p at random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int p : {2, 3, 4}) {
    const NonlinearitySpec spec(p);
    double worst = 0.0;
    for (int i = 0; i < 1000000; ++i) {
      const double u = dist(rng);
      const double exact = std::pow(u, p + 1) / (p + 1);
      if (exact == 0.0) continue;
      worst = std::max(worst, std::abs(spec.F(u) - exact) / std::abs(exact));
    }
    CHECK(worst < 1e-14);
  }
}

TEST_CASE("perturbed nonlinearity adds terms consistently") {
  const NonlinearitySpec spec(4, {{6, 0.5}});
  const double u = 0.7;
  CHECK(spec.f(u) == doctest::Approx(std::pow(u, 4) + 0.5 * std::pow(u, 6)).epsilon(1e-15));
  CHECK(spec.f_prime(u) ==
        doctest::Approx(4 * std::pow(u, 3) + 3.0 * std::pow(u, 5)).epsilon(1e-15));
  CHECK(spec.F(u) == doctest::Approx(std::pow(u, 5) / 5 + 0.5 * std::pow(u, 7) / 7).epsilon(1e-15));
  // Central differences of F reproduce f.
  const double h = 1e-5;
  CHECK((spec.F(u + h) - spec.F(u - h)) / (2 * h) == doctest::Approx(spec.f(u)).epsilon(1e-9));
  CHECK(spec.F(0.0) == 0.0);
}

TEST_CASE("nonlinearity preconditions") {
  CHECK_THROWS_AS(NonlinearitySpec(1), InvalidArgument);
  CHECK_THROWS_AS(NonlinearitySpec(5), InvalidArgument);
  CHECK_THROWS_AS(NonlinearitySpec(3, {{3, 1.0}}), InvalidArgument);
  CHECK(NonlinearitySpec(3).q() == doctest::Approx(0.25));
  CHECK(NonlinearitySpec(4).q() == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid(10.0, 8), InvalidArgument);
  CHECK_THROWS_AS(Grid(10.0, 17), InvalidArgument);
  CHECK_THROWS_AS(Grid(-1.0, 64), InvalidArgument);
  const Grid g(10.0, 64);
  CHECK(g.x(0) == -5.0);
  CHECK(g.dx() == 10.0 / 64);
  CHECK(g.wavenumber(1) == doctest::Approx(2 * std::numbers::pi / 10.0));
}

TEST_CASE("spectral_derivative on eigenfunctions") {
  const double L = 10.0;
  const Grid g(L, 64);
  const double k = 2 * std::numbers::pi / L;
  const Field s = Field::from_function(g, [&](double x) { return std::sin(k * x); });
  const Field d1 = spectral_derivative(s, 1);
  double err = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) err = std::max(err, std::abs(d1[i] - k * std::cos(k * g.x(i))));
  CHECK(err < 1e-13);

  const Field c = Field::from_function(g, [&](double x) { return std::cos(2 * k * x); });
  const Field d3 = spectral_derivative(c, 3);
  err = 0.0;
  for (std::size_t i = 0; i < g.n; ++i)
    err = std::max(err, std::abs(d3[i] - std::pow(2 * k, 3) * std::sin(2 * k * g.x(i))));
  CHECK(err < 1e-11);

  const Field one(g, 3.0);
  for (int order : {1, 2, 3}) CHECK(spectral_derivative(one, order).max_abs() < 1e-14);
  CHECK_THROWS_AS(spectral_derivative(one, 4), InvalidArgument);
  CHECK_THROWS_AS(spectral_derivative(one, 0), InvalidArgument);
}

TEST_CASE("derivative composition and periodicity") {
  const Grid g(40.0, 256);
  const Field v = Field::from_function(g, [](double x) { return std::exp(-x * x / 4.0) * std::cos(x); });
  const Field dd = spectral_derivative(spectral_derivative(v, 1), 1);
  const Field d2 = spectral_derivative(v, 2);
  CHECK((dd - d2).max_abs() < 1e-10);
  CHECK(std::abs(integrate(spectral_derivative(v, 1))) < 1e-10);
}

TEST_CASE("integrate") {
  const Grid g(10.0, 64);
  CHECK(integrate(Field(g, 1.0)) == doctest::Approx(10.0).epsilon(1e-15));
  const double k = 2 * std::numbers::pi / g.length;
  CHECK(std::abs(integrate(Field::from_function(g, [&](double x) { return std::sin(k * x); }))) <
        1e-15);
  // int sech^2(a x) dx = 2/a.
  const Grid h(80.0, 1024);
  const double a = 1.3;
  const Field s = Field::from_function(h, [&](double x) {
    const double ch = std::cosh(a * x);
    return 1.0 / (ch * ch);
  });
  CHECK(std::abs(integrate(s) - 2.0 / a) < 1e-10);
}

TEST_CASE("field algebra requires one grid") {
  const Field a(Grid(10.0, 64), 1.0);
  const Field b(Grid(20.0, 64), 1.0);
  CHECK_THROWS_AS(a + b, InvalidArgument);
  CHECK_THROWS_AS(multiply(a, b), InvalidArgument);
  CHECK((a * 2.0 + a)[5] == 3.0);
  CHECK(h1c_norm(Field(Grid(10.0, 64), 2.0), 0.25) == doctest::Approx(std::sqrt(0.25 * 4 * 10)));
}

TEST_CASE("wrap to the nearest image") {
  CHECK(wrap(6.0, 10.0) == doctest::Approx(-4.0));
  CHECK(wrap(-5.0, 10.0) == doctest::Approx(-5.0));
  CHECK(wrap(4.9, 10.0) == doctest::Approx(4.9));
}
