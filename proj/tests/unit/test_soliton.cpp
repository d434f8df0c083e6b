#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "gkdv/soliton.hpp"
#include "gkdv/weights.hpp"

using namespace gkdv;

namespace {

double ode_residual(const ProfileFamily& fam) {
  const Field Qxx = spectral_derivative(fam.Q, 2);
  double worst = 0.0;
  for (std::size_t k = 0; k < fam.Q.size(); ++k)
    worst = std::max(worst, std::abs(Qxx[k] + fam.spec.f(fam.Q[k]) - fam.params.c * fam.Q[k]));
  return worst;
}

/// Q'' = cQ - f(Q) from Q(0) = peak, Q'(0) = 0, with the peak from bisection
/// on c q^2 / 2 = F(q). Returns Q at the requested nonnegative offsets.
std::vector<double> shooting_oracle(const NonlinearitySpec& spec, double c,
                                    const std::vector<double>& xs) {
  // Largest q with c q^2/2 - F(q) < 0 below it starts at the first sign change.
  auto g = [&](double q) { return 0.5 * c * q * q - spec.F(q); };
  double hi = 1e-3;
  while (g(hi) > 0.0) hi *= 1.1;
  double lo = hi / 1.1;
  const auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto root = boost::math::tools::bisect(g, lo, hi, tol);
  const double peak = 0.5 * (root.first + root.second);

  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  auto rhs = [&](const State& y, State& dy, double) {
    dy[0] = y[1];
    dy[1] = c * y[0] - spec.f(y[0]);
  };
  std::vector<double> out;
  State y{peak, 0.0};
  double x = 0.0;
  auto stepper = ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_dopri5<State>());
  for (double target : xs) {
    ode::integrate_adaptive(stepper, rhs, y, x, target, 1e-3);
    x = target;
    out.push_back(y[0]);
  }
  return out;
}

/// Dense matrix of the spectral first derivative.
Eigen::MatrixXd derivative_matrix(const Grid& grid) {
  Eigen::MatrixXd D(grid.n, grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    Field e(grid);
    e[j] = 1.0;
    const Field d = spectral_derivative(e, 1);
    for (std::size_t i = 0; i < grid.n; ++i) D(i, j) = d[i];
  }
  return D;
}

}  // namespace

TEST_CASE("power profile peaks") {
  const Grid g(80.0, 1024);
  CHECK(power_profile(2, {1.0, 0.0}, g).Q[512] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(power_profile(4, {1.0, 0.0}, g).Q[512] == doctest::Approx(std::cbrt(2.5)).epsilon(1e-15));
  CHECK(power_profile(3, {4.0, 0.0}, g).Q[512] ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::cbrt(2.5) == doctest::Approx(1.357209).epsilon(1e-6));
}

TEST_CASE("power profile rejects a box that cuts the tail") {
  CHECK_THROWS_AS(power_profile(2, {0.01, 0.0}, Grid(80.0, 1024)), InvalidArgument);
  CHECK_THROWS_AS(power_profile(2, {-1.0, 0.0}, Grid(80.0, 1024)), InvalidArgument);
}

TEST_CASE("profile residual, evenness and derived fields") {
  for (int p : {2, 3, 4}) {
    for (double c : {0.25, 1.0, 4.0}) {
      const Grid g(100.0 / std::sqrt(c), 2048);
      const ProfileFamily f = power_profile(p, {c, 0.0}, g);
      CHECK(ode_residual(f) < 1e-8 * std::max(1.0, c * f.Q.max_abs()));
      // x_k and x_{n-k} are mirror images about 0.
      double odd = 0.0;
      for (std::size_t k = 1; k < g.n; ++k) odd = std::max(odd, std::abs(f.Q[k] - f.Q[g.n - k]));
      CHECK(odd < 1e-12);
      CHECK((f.Qx - spectral_derivative(f.Q, 1)).max_abs() < 1e-9 * std::max(1.0, f.Q.max_abs()));
      // dQ/dc = LambdaQ / (2c) for pure powers.
      CHECK((f.dQdc - f.LambdaQ * (0.5 / c)).max_abs() < 1e-12 * std::max(1.0, f.Q.max_abs()));
    }
  }
}

TEST_CASE("general profile reproduces the closed form") {
  const Grid g(80.0, 1024);
  const ProfileFamily a = general_profile(NonlinearitySpec(2), {1.0, 0.0}, g);
  const ProfileFamily b = power_profile(2, {1.0, 0.0}, g);
  CHECK((a.Q - b.Q).max_abs() < 1e-8);

  const Grid h(200.0, 2048);
  const ProfileFamily d = general_profile(NonlinearitySpec(3), {0.25, 1.5}, h);
  const ProfileFamily e = power_profile(3, {0.25, 1.5}, h);
  CHECK((d.Q - e.Q).max_abs() < 1e-8);
  CHECK((d.Qx - e.Qx).max_abs() < 1e-8);
}

TEST_CASE("general profile scaling consistency for a pure power") {
  const NonlinearitySpec spec(4);
  const double c1 = 1.0;
  const double c2 = 0.3;
  const Grid g(200.0, 4096);
  const ProfileEvaluator e1(spec, c1);
  const ProfileEvaluator e2(spec, c2);
  // Q_{c2}(s) = (c2/c1)^{1/(p-1)} Q_{c1}(sqrt(c2/c1) s).
  const double r = c2 / c1;
  double worst = 0.0;
  for (double s = -40.0; s <= 40.0; s += 0.37)
    worst = std::max(worst, std::abs(e2(s).Q - std::cbrt(r) * e1(std::sqrt(r) * s).Q));
  CHECK(worst < 1e-8);
  const ProfileFamily f = general_profile(spec, {c2, 0.0}, g);
  CHECK(f.Q[2048] == doctest::Approx(e2(0.0).Q).epsilon(1e-12));
}

TEST_CASE("perturbed profile against an independent shooting integration") {
  const NonlinearitySpec spec(4, {{6, 1.0}});
  const double c = 0.01;
  const Grid g(800.0, 4096);
  const ProfileFamily f = general_profile(spec, {c, 0.0}, g);
  CHECK(ode_residual(f) < 1e-8);
  for (std::size_t k = 0; k < g.n; ++k) REQUIRE(f.Q[k] > 0.0);
  double odd = 0.0;
  for (std::size_t k = 1; k < g.n; ++k) odd = std::max(odd, std::abs(f.Q[k] - f.Q[g.n - k]));
  CHECK(odd < 1e-12);

  std::vector<double> xs;
  std::vector<double> ours;
  for (std::size_t k = g.n / 2; k < g.n / 2 + 300; k += 10) {
    xs.push_back(g.x(k));
    ours.push_back(f.Q[k]);
  }
  const std::vector<double> ref = shooting_oracle(spec, c, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(ours[i] - ref[i]) < 1e-8);
}

TEST_CASE("soliton invariants against closed forms") {
  // int (3/2 sech^2(x/2))^2 = (9/4)(4/3)(2) = 6; int 2 sech^2 = 4.
  const SolitonInvariants a = soliton_invariants(2, 1.0);
  CHECK(a.massQ == doctest::Approx(6.0).epsilon(1e-10));
  CHECK(a.intQp1 == doctest::Approx(7.2).epsilon(1e-10));
  CHECK(a.intQx2 == doctest::Approx(1.2).epsilon(1e-10));
  CHECK(a.energyQ == doctest::Approx(-1.8).epsilon(1e-10));
  const SolitonInvariants b = soliton_invariants(3, 1.0);
  CHECK(b.massQ == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(b.intQx2 == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
  CHECK(soliton_invariants(2, 0.25).massQ == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(std::abs(base_mass(2) - 6.0) < 1e-10);
  CHECK(std::abs(base_mass(3) - 4.0) < 1e-10);
}

TEST_CASE("quadrature of the identities at every speed") {
  for (int p : {2, 3, 4}) {
    const NonlinearitySpec spec(p);
    for (double c : {0.05, 1.0, 4.0}) {
      const Grid g(120.0 / std::sqrt(c), 2048);
      const ProfileFamily f = power_profile(p, {c, 0.0}, g);
      const double mass = inner(f.Q, f.Q);
      double qp1 = 0.0, qx2 = 0.0;
      for (std::size_t k = 0; k < g.n; ++k) {
        qp1 += std::pow(f.Q[k], p + 1);
        qx2 += f.Qx[k] * f.Qx[k];
      }
      qp1 *= g.dx();
      qx2 *= g.dx();
      CHECK(qp1 == doctest::Approx(c * 2.0 * (p + 1) / (p + 3) * mass).epsilon(1e-8));
      CHECK(qx2 == doctest::Approx(c * (p - 1.0) / (p + 3) * mass).epsilon(1e-8));
      const SolitonInvariants inv = soliton_invariants(p, c);
      CHECK(mass == doctest::Approx(inv.massQ).epsilon(1e-8));
      CHECK(inv.energyQ == doctest::Approx(0.5 * qx2 - qp1 / (p + 1)).epsilon(1e-8));
    }
  }
}

TEST_CASE("linearized operator identities") {
  for (int p : {2, 3, 4}) {
    for (double c : {0.05, 0.25, 1.0, 4.0}) {
      const Grid g(120.0 / std::sqrt(c), 2048);
      const ProfileFamily f = power_profile(p, {c, 0.0}, g);
      const double scale = c * f.Q.max_abs();
      CHECK(apply_linearized(f, f.Qx).max_abs() < 1e-8 * scale);
      CHECK((apply_linearized(f, f.LambdaQ) + 2.0 * c * f.Q).max_abs() < 1e-8 * scale);
      Field r = apply_linearized(f, spectral_derivative(multiply(offsets(g, 0.0), f.Q), 1)) +
                2.0 * c * f.Q;
      for (std::size_t k = 0; k < g.n; ++k) r[k] += (p - 3) * std::pow(f.Q[k], p);
      CHECK(r.max_abs() < 1e-8 * scale);
    }
  }
}

TEST_CASE("linearized operator is self-adjoint") {
  const Grid g(80.0, 512);
  const ProfileFamily f = power_profile(3, {1.0, 0.0}, g);
  const Field v = Field::from_function(g, [](double x) { return std::exp(-x * x / 8) * std::sin(x); });
  const Field w = Field::from_function(g, [](double x) { return std::exp(-x * x / 20) * (1 + x); });
  CHECK(std::abs(inner(apply_linearized(f, v), w) - inner(v, apply_linearized(f, w))) < 1e-10);
  CHECK_THROWS_AS(apply_linearized(f, Field(Grid(50.0, 512))), InvalidArgument);
}

TEST_CASE("coercivity matches a dense generalized eigensolve without constraints") {
  const Grid g(80.0, 384);
  const ProfileFamily f = power_profile(2, {1.0, 0.0}, g);
  const Eigen::MatrixXd D = derivative_matrix(g);
  const Eigen::MatrixXd K = D.transpose() * D;
  Eigen::MatrixXd A = K;
  Eigen::MatrixXd B = K;
  for (std::size_t i = 0; i < g.n; ++i) {
    A(i, i) += 1.0 - f.spec.f_prime(f.Q[i]);
    B(i, i) += 1.0;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  const double oracle = es.eigenvalues().minCoeff();
  const CoercivityResult r = coercivity_estimate(f, {});
  CHECK(oracle < 0.0);
  CHECK(r.lambda < 0.0);
  CHECK(r.lambda == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("coercivity under the orthogonality constraints") {
  for (int p : {2, 3, 4}) {
    const Grid g(80.0, 512);
    const ProfileFamily f = power_profile(p, {1.0, 0.0}, g);
    const std::vector<Field> cons{f.Q, multiply(offsets(g, 0.0), f.Q)};
    const double lam = coercivity_estimate(f, cons).lambda;
    CHECK(lam > 0.0);
    const Grid h(80.0, 1024);
    const ProfileFamily fh = power_profile(p, {1.0, 0.0}, h);
    const double lam_h = coercivity_estimate(fh, {fh.Q, multiply(offsets(h, 0.0), fh.Q)}).lambda;
    CHECK(std::abs(lam_h - lam) < 0.05 * lam);
  }
}

TEST_CASE("localized coercivity keeps a quarter of the constant") {
  const Grid g(120.0, 1024);
  const ProfileFamily f = power_profile(2, {1.0, 0.0}, g);
  const std::vector<Field> cons{f.Q, multiply(offsets(g, 0.0), f.Q)};
  const double lam = coercivity_estimate(f, cons).lambda;
  const Field w = Field::from_function(g, [](double x) { return plateau_phi(x / 20.0); });
  const double lam_w = coercivity_estimate(f, cons, w).lambda;
  CHECK(lam_w >= lam / 4 - 1e-6);
}

TEST_CASE("stability index") {
  const StabilityIndex a = stability_index(NonlinearitySpec(2), 1.0);
  CHECK(std::abs(a.value - 9.0) < 1e-4);
  CHECK(std::abs(a.closed_form - 9.0) < 1e-8);
  const StabilityIndex b = stability_index(NonlinearitySpec(4), 1.0);
  CHECK(b.value > 0.0);
  CHECK(b.value == doctest::Approx(2.0 / 12.0 * base_mass(4)).epsilon(1e-6));
  const StabilityIndex d = stability_index(NonlinearitySpec(3), 0.01);
  CHECK(std::abs(d.value - 20.0) < 1e-3);
  const StabilityIndex e = stability_index(NonlinearitySpec(2, {{3, -0.5}}), 0.2);
  CHECK(std::isnan(e.closed_form));
  CHECK(std::isfinite(e.value));
}

TEST_CASE("existence threshold of u^3 - u^5 is 3/16") {
  // c q^2 / 2 = q^4/4 - q^6/6 has a simple positive root iff c < 3/16.
  const double cs = existence_threshold(NonlinearitySpec(3, {{5, -1.0}}));
  CHECK(cs == doctest::Approx(3.0 / 16.0).epsilon(1e-4));
  CHECK(std::isinf(existence_threshold(NonlinearitySpec(2))));
  CHECK_THROWS(general_profile(NonlinearitySpec(3, {{5, -1.0}}), {0.2, 0.0}, Grid(200.0, 1024)));
}
