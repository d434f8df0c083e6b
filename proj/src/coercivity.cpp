#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gkdv/soliton.hpp"

namespace gkdv {

namespace {

// Column j is the spectral first derivative of the j-th unit vector.
Eigen::MatrixXd derivative_matrix(const Grid& grid) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.n);
  Eigen::MatrixXd D(n, n);
  Field e(grid);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Field col = spectral_derivative(e, 1);
    for (Eigen::Index i = 0; i < n; ++i) D(i, j) = col[i];
    e[j] = 0.0;
  }
  return D;
}

}  // namespace

CoercivityResult coercivity_estimate(const ProfileFamily& family,
                                     const std::vector<Field>& constraints,
                                     const std::optional<Field>& weight,
                                     const CoercivityOptions& options) {
  const Grid& grid = family.Q.grid();
  const Eigen::Index n = static_cast<Eigen::Index>(grid.n);
  const double c = family.params.c;
  const double dx = grid.dx();

  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (weight) {
    require_same_grid(grid, weight->grid(), "coercivity_estimate weight");
    for (Eigen::Index i = 0; i < n; ++i) w(i) = (*weight)[i];
    if (w.minCoeff() <= 0.0) throw InvalidArgument("coercivity weight must be positive");
  }
  Eigen::VectorXd fp(n);
  for (Eigen::Index i = 0; i < n; ++i) fp(i) = family.spec.f_prime(family.Q[i]);

  const Eigen::MatrixXd D = derivative_matrix(grid);
  const Eigen::MatrixXd K = D.transpose() * w.asDiagonal() * D * dx;
  Eigen::MatrixXd A = K;
  A.diagonal() += (w.array() * (c - fp.array())).matrix() * dx;
  Eigen::MatrixXd M = K;
  M.diagonal() += w * (c * dx);

  const Eigen::Index m = static_cast<Eigen::Index>(constraints.size());
  Eigen::MatrixXd Z;
  if (m == 0) {
    Z = Eigen::MatrixXd::Identity(n, n);
  } else {
    Eigen::MatrixXd C(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      require_same_grid(grid, constraints[j].grid(), "coercivity_estimate constraint");
      for (Eigen::Index i = 0; i < n; ++i) C(i, j) = constraints[j][i];
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    const double rmax = R.diagonal().cwiseAbs().maxCoeff();
    if (!(R.diagonal().cwiseAbs().minCoeff() > 1e-10 * rmax) || rmax == 0.0)
      throw InvalidArgument("coercivity constraints are linearly dependent on the grid");
    const Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    Z = Qfull.rightCols(n - m);
  }
  const Eigen::MatrixXd Ar = Z.transpose() * A * Z;
  const Eigen::MatrixXd Mr = Z.transpose() * M * Z;

  // Ar - sigma Mr is positive definite once c (1 - sigma) > max f'(Q).
  const double sigma = 1.0 - fp.maxCoeff() / c - 0.5;
  const Eigen::LLT<Eigen::MatrixXd> llt(Ar - sigma * Mr);
  if (llt.info() != Eigen::Success) throw NumericalFailure("coercivity: shifted form not definite");

  const Eigen::Index r = Ar.rows();
  Eigen::VectorXd x(r);
  for (Eigen::Index i = 0; i < r; ++i) x(i) = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i));
  x /= std::sqrt(x.dot(Mr * x));

  CoercivityResult out;
  double lambda = x.dot(Ar * x);
  double prev = lambda;
  for (int it = 1; it <= options.max_iterations; ++it) {
    x = llt.solve(Mr * x);
    x /= std::sqrt(x.dot(Mr * x));
    lambda = x.dot(Ar * x);
    const Eigen::VectorXd Mx = Mr * x;
    out.residual = (Ar * x - lambda * Mx).norm() / Mx.norm();
    out.iterations = it;
    if (std::abs(lambda - prev) <= options.tolerance * std::max(1.0, std::abs(lambda)) &&
        out.residual < 1e-5) {
      out.lambda = lambda;
      return out;
    }
    prev = lambda;
  }
  throw NumericalFailure("coercivity: inverse iteration did not converge (residual " +
                         std::to_string(out.residual) + ")");
}

}  // namespace gkdv
