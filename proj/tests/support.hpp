#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cvqkd/cvqkd.hpp"

namespace cvqkd::testing {

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Symplectic eigenvalues from the plain eigenvalues of Omega gamma (+-i nu).
inline std::vector<double> dense_symplectic_eigenvalues(const Matrix& gamma) {
  const auto n = static_cast<std::size_t>(gamma.rows() / 2);
  Eigen::EigenSolver<Matrix> es(symplectic_form(n) * gamma, false);
  std::vector<double> nu;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (es.eigenvalues()(k).imag() > 0.0) nu.push_back(es.eigenvalues()(k).imag());
  }
  std::sort(nu.rbegin(), nu.rend());
  return nu;
}

inline SymplecticTransform rotation(double theta) {
  Matrix m(2, 2);
  m << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return SymplecticTransform(std::move(m));
}

inline SymplecticTransform single_mode_squeezer(double r) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::exp(-r);
  m(1, 1) = std::exp(r);
  return SymplecticTransform(std::move(m));
}

/// Product of random beamsplitters, two-mode squeezers, rotations and
/// single-mode squeezers on an n-mode register.
inline SymplecticTransform random_symplectic(std::mt19937_64& rng, std::size_t n, int layers = 12) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> mode(0, n - 1);
  Matrix s = Matrix::Identity(2 * n, 2 * n);
  for (int k = 0; k < layers; ++k) {
    const std::size_t a = mode(rng);
    std::size_t b = mode(rng);
    while (n > 1 && b == a) b = mode(rng);
    Matrix step;
    switch (k % 4) {
      case 0:
        step = n > 1 ? embed(beamsplitter(unit(rng)), {a, b}, n).matrix() : Matrix::Identity(2 * n, 2 * n);
        break;
      case 1:
        step = n > 1 ? embed(two_mode_squeezer(1.0 + 3.0 * unit(rng)), {a, b}, n).matrix()
                     : Matrix::Identity(2 * n, 2 * n);
        break;
      case 2: step = embed(rotation(6.283 * unit(rng)), {a}, n).matrix(); break;
      default: step = embed(single_mode_squeezer(unit(rng) - 0.5), {a}, n).matrix(); break;
    }
    s = step * s;
  }
  return SymplecticTransform(std::move(s));
}

/// Random physical state: thermal product state under a random transform.
inline CovarianceMatrix random_state(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix d = Matrix::Zero(2 * n, 2 * n);
  for (std::size_t k = 0; k < n; ++k) d(2 * k, 2 * k) = d(2 * k + 1, 2 * k + 1) = 1.0 + 4.0 * unit(rng);
  return apply(random_symplectic(rng, n), CovarianceMatrix(d));
}

/// Reference covariance of A and Bob for a channel (T, chi) fed by an EPR
/// arm of variance V.
inline Matrix channel_output_ab(double v, double t, double chi) {
  Matrix m(4, 4);
  const double c = std::sqrt(t * (v * v - 1.0));
  m << v * identity2(), c * pauli_z(), c * pauli_z(), (t * v + chi) * identity2();
  return m;
}

}  // namespace cvqkd::testing
