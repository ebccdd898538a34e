#pragma once

// Zero-mean multimode Gaussian states in shot-noise units.
//
// Quadratures are ordered (x1, p1, ..., xN, pN); the vacuum has covariance I.
// All types are immutable values and every operation is a pure function.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cvqkd/errors.hpp"

namespace cvqkd {

using Matrix = Eigen::MatrixXd;
using Mat2 = Eigen::Matrix2d;

enum class Quadrature { x, p };

namespace tolerance {
inline constexpr double symmetry = 1e-10;
inline constexpr double symplectic = 1e-10;
// Symplectic eigenvalues within this distance below 1 are clamped silently.
inline constexpr double physical_clamp = 1e-9;
// Anything further below 1 than this is a construction bug upstream.
inline constexpr double physical_hard = 1e-6;
}  // namespace tolerance

inline Mat2 identity2() { return Mat2::Identity(); }
inline Mat2 pauli_z() { return (Mat2() << 1.0, 0.0, 0.0, -1.0).finished(); }

/// Block-diagonal symplectic form with [[0,1],[-1,0]] per mode.
inline Matrix symplectic_form(std::size_t modes) {
  Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
  for (std::size_t k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

/// Largest entry of |S Omega S^T - Omega|.
inline double symplectic_defect(const Matrix& s) {
  const Matrix omega = symplectic_form(static_cast<std::size_t>(s.rows() / 2));
  return (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff();
}

class SymplecticTransform {
 public:
  explicit SymplecticTransform(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0 || m_.rows() % 2 != 0) {
      throw DimensionError("symplectic transform must be a non-empty 2N x 2N matrix");
    }
    // Entries grow like sqrt(gain), so the defect is judged relative to |S|^2.
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff() * m_.cwiseAbs().maxCoeff());
    if (symplectic_defect(m_) > tolerance::symplectic * scale) {
      throw DomainError("matrix does not preserve the symplectic form");
    }
  }

  static SymplecticTransform identity(std::size_t modes) {
    return SymplecticTransform(Matrix::Identity(2 * modes, 2 * modes));
  }

  std::size_t modes() const { return static_cast<std::size_t>(m_.rows() / 2); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

class CovarianceMatrix {
 public:
  /// Labels default to "m0", "m1", ... when omitted.
  explicit CovarianceMatrix(Matrix m, std::vector<std::string> labels = {})
      : m_(std::move(m)), labels_(std::move(labels)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0 || m_.rows() % 2 != 0) {
      throw DimensionError("covariance matrix must be a non-empty 2N x 2N matrix");
    }
    const auto n = modes();
    if (labels_.empty()) {
      for (std::size_t k = 0; k < n; ++k) labels_.push_back("m" + std::to_string(k));
    }
    if (labels_.size() != n) throw DimensionError("label count differs from mode count");
    std::unordered_set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) throw IndexError("mode labels must be unique");

    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > tolerance::symmetry * scale) {
      throw DomainError("covariance matrix is not symmetric");
    }
    m_ = 0.5 * (m_ + m_.transpose()).eval();
  }

  std::size_t modes() const { return static_cast<std::size_t>(m_.rows() / 2); }
  const Matrix& matrix() const { return m_; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::size_t index_of(std::string_view label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw IndexError("unknown mode label '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  /// 2x2 block between modes i and j.
  Mat2 block(std::size_t i, std::size_t j) const {
    return m_.block<2, 2>(2 * static_cast<Eigen::Index>(i), 2 * static_cast<Eigen::Index>(j));
  }
  Mat2 block(std::string_view a, std::string_view b) const { return block(index_of(a), index_of(b)); }

  CovarianceMatrix relabeled(std::vector<std::string> labels) const {
    return CovarianceMatrix(m_, std::move(labels));
  }

 private:
  Matrix m_;
  std::vector<std::string> labels_;
};

struct SymplecticSpectrum {
  std::vector<double> values;  // descending, each >= 1
};

// ---------------------------------------------------------------------------
// States and elementary transforms

inline CovarianceMatrix vacuum(std::string label = "m0") {
  return CovarianceMatrix(Matrix::Identity(2, 2), {std::move(label)});
}

inline CovarianceMatrix thermal_state(double variance, std::string label = "m0") {
  if (!(variance >= 1.0)) throw DomainError("thermal variance must be >= 1");
  return CovarianceMatrix(variance * Matrix::Identity(2, 2), {std::move(label)});
}

/// Two-mode squeezed vacuum with local variance V.
inline CovarianceMatrix epr_state(double variance, std::string first = "m0", std::string second = "m1") {
  if (!(variance >= 1.0)) throw DomainError("EPR variance must be >= 1");
  const double corr = std::sqrt(std::max(0.0, (variance - 1.0) * (variance + 1.0)));
  Matrix m(4, 4);
  m << variance * identity2(), corr * pauli_z(), corr * pauli_z(), variance * identity2();
  return CovarianceMatrix(std::move(m), {std::move(first), std::move(second)});
}

/// Phase-insensitive two-mode amplifier: sqrt(g) I on the diagonal,
/// sqrt(g-1) sigma_z off the diagonal.
inline SymplecticTransform two_mode_squeezer(double gain) {
  if (!(gain >= 1.0)) throw DomainError("two-mode squeezing gain must be >= 1");
  const double d = std::sqrt(gain);
  const double o = std::sqrt(gain - 1.0);
  Matrix m(4, 4);
  m << d * identity2(), o * pauli_z(), o * pauli_z(), d * identity2();
  return SymplecticTransform(std::move(m));
}

/// Beamsplitter of transmittance t: out1 = sqrt(t) in1 + sqrt(1-t) in2,
/// out2 = -sqrt(1-t) in1 + sqrt(t) in2.
inline SymplecticTransform beamsplitter(double transmittance) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    throw DomainError("beamsplitter transmittance must lie in [0, 1]");
  }
  const double d = std::sqrt(transmittance);
  const double o = std::sqrt(1.0 - transmittance);
  Matrix m(4, 4);
  m << d * identity2(), o * identity2(), -o * identity2(), d * identity2();
  return SymplecticTransform(std::move(m));
}

namespace detail {

// gamma -> S gamma S^T where S acts on `targets` only; touches just the
// affected rows and columns.
inline void apply_local(Matrix& gamma, const Matrix& s, std::span<const std::size_t> targets) {
  std::vector<Eigen::Index> idx;
  idx.reserve(2 * targets.size());
  for (auto t : targets) {
    idx.push_back(static_cast<Eigen::Index>(2 * t));
    idx.push_back(static_cast<Eigen::Index>(2 * t + 1));
  }
  const Matrix rows = s * gamma(idx, Eigen::all);
  gamma(idx, Eigen::all) = rows;
  const Matrix cols = gamma(Eigen::all, idx) * s.transpose();
  gamma(Eigen::all, idx) = cols;
}

inline void check_targets(std::span<const std::size_t> targets, std::size_t expected, std::size_t total_modes) {
  if (targets.size() != expected) throw IndexError("target count differs from transform size");
  std::vector<bool> used(total_modes, false);
  for (auto t : targets) {
    if (t >= total_modes) throw IndexError("target mode out of range");
    if (used[t]) throw IndexError("target modes must be distinct");
    used[t] = true;
  }
}

}  // namespace detail

/// Lift S to act on `targets` (in order) of an N-mode register.
inline SymplecticTransform embed(const SymplecticTransform& s, std::span<const std::size_t> targets,
                                 std::size_t total_modes) {
  detail::check_targets(targets, s.modes(), total_modes);
  Matrix m = Matrix::Identity(2 * total_modes, 2 * total_modes);
  for (std::size_t a = 0; a < targets.size(); ++a) {
    for (std::size_t b = 0; b < targets.size(); ++b) {
      m.block<2, 2>(2 * targets[a], 2 * targets[b]) = s.matrix().block<2, 2>(2 * a, 2 * b);
    }
  }
  return SymplecticTransform(std::move(m));
}

inline SymplecticTransform embed(const SymplecticTransform& s, std::initializer_list<std::size_t> targets,
                                 std::size_t total_modes) {
  return embed(s, std::span<const std::size_t>(targets.begin(), targets.size()), total_modes);
}

/// S gamma S^T.
inline CovarianceMatrix apply(const SymplecticTransform& s, const CovarianceMatrix& gamma) {
  if (s.modes() != gamma.modes()) throw DimensionError("transform and state sizes differ");
  return CovarianceMatrix(s.matrix() * gamma.matrix() * s.matrix().transpose(), gamma.labels());
}

/// embed(S, targets, N) gamma embed(S, targets, N)^T without forming the
/// full 2N x 2N transform.
inline CovarianceMatrix apply(const SymplecticTransform& s, std::span<const std::size_t> targets,
                              const CovarianceMatrix& gamma) {
  detail::check_targets(targets, s.modes(), gamma.modes());
  Matrix m = gamma.matrix();
  detail::apply_local(m, s.matrix(), targets);
  return CovarianceMatrix(std::move(m), gamma.labels());
}

inline CovarianceMatrix apply(const SymplecticTransform& s, std::initializer_list<std::size_t> targets,
                              const CovarianceMatrix& gamma) {
  return apply(s, std::span<const std::size_t>(targets.begin(), targets.size()), gamma);
}

/// Direct sum gamma1 (+) gamma2.
inline CovarianceMatrix tensor(const CovarianceMatrix& a, const CovarianceMatrix& b) {
  const auto na = a.matrix().rows();
  const auto nb = b.matrix().rows();
  Matrix m = Matrix::Zero(na + nb, na + nb);
  m.topLeftCorner(na, na) = a.matrix();
  m.bottomRightCorner(nb, nb) = b.matrix();
  auto labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return CovarianceMatrix(std::move(m), std::move(labels));
}

/// Keep the listed modes, in the listed order.
inline CovarianceMatrix partial_trace(const CovarianceMatrix& gamma, std::span<const std::size_t> keep) {
  if (keep.empty()) throw DomainError("partial trace must keep at least one mode");
  std::vector<bool> used(gamma.modes(), false);
  for (auto k : keep) {
    if (k >= gamma.modes()) throw IndexError("kept mode out of range");
    if (used[k]) throw IndexError("kept modes must be distinct");
    used[k] = true;
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  Matrix m(2 * n, 2 * n);
  std::vector<std::string> labels;
  for (Eigen::Index a = 0; a < n; ++a) {
    labels.push_back(gamma.labels()[keep[a]]);
    for (Eigen::Index b = 0; b < n; ++b) {
      m.block<2, 2>(2 * a, 2 * b) = gamma.block(keep[a], keep[b]);
    }
  }
  return CovarianceMatrix(std::move(m), std::move(labels));
}

inline CovarianceMatrix partial_trace(const CovarianceMatrix& gamma, std::initializer_list<std::size_t> keep) {
  return partial_trace(gamma, std::span<const std::size_t>(keep.begin(), keep.size()));
}

inline CovarianceMatrix partial_trace(const CovarianceMatrix& gamma, const std::vector<std::string>& keep) {
  std::vector<std::size_t> idx;
  idx.reserve(keep.size());
  for (const auto& label : keep) idx.push_back(gamma.index_of(label));
  return partial_trace(gamma, std::span<const std::size_t>(idx));
}

namespace detail {

struct Split {
  Matrix rest;   // covariance of the unmeasured modes
  Matrix cross;  // rest x measured
  Mat2 measured;
  std::vector<std::string> labels;
};

inline Split split_mode(const CovarianceMatrix& gamma, std::size_t mode) {
  if (mode >= gamma.modes()) throw IndexError("measured mode out of range");
  if (gamma.modes() < 2) throw DomainError("conditioning needs at least one unmeasured mode");
  std::vector<std::size_t> rest;
  for (std::size_t k = 0; k < gamma.modes(); ++k) {
    if (k != mode) rest.push_back(k);
  }
  Split s;
  const auto n = static_cast<Eigen::Index>(rest.size());
  s.rest.resize(2 * n, 2 * n);
  s.cross.resize(2 * n, 2);
  for (Eigen::Index a = 0; a < n; ++a) {
    s.labels.push_back(gamma.labels()[rest[a]]);
    s.cross.block<2, 2>(2 * a, 0) = gamma.block(rest[a], mode);
    for (Eigen::Index b = 0; b < n; ++b) s.rest.block<2, 2>(2 * a, 2 * b) = gamma.block(rest[a], rest[b]);
  }
  s.measured = gamma.block(mode, mode);
  return s;
}

}  // namespace detail

/// State of the other modes after homodyning one quadrature of `mode`.
/// Uses the Moore-Penrose inverse of X gamma_m X, so a vanishing measured
/// variance leaves the remainder untouched.
inline CovarianceMatrix condition_on_homodyne(const CovarianceMatrix& gamma, std::size_t mode, Quadrature q) {
  const auto s = detail::split_mode(gamma, mode);
  const int k = q == Quadrature::x ? 0 : 1;
  Mat2 pinv = Mat2::Zero();
  const double v = s.measured(k, k);
  if (v > 0.0) pinv(k, k) = 1.0 / v;
  return CovarianceMatrix(s.rest - s.cross * pinv * s.cross.transpose(), s.labels);
}

inline CovarianceMatrix condition_on_heterodyne(const CovarianceMatrix& gamma, std::size_t mode) {
  const auto s = detail::split_mode(gamma, mode);
  const Mat2 inv = (s.measured + identity2()).inverse();
  return CovarianceMatrix(s.rest - s.cross * inv * s.cross.transpose(), s.labels);
}

// ---------------------------------------------------------------------------
// Spectrum and entropy

/// Symplectic eigenvalues from the Hermitian matrix i gamma^{1/2} Omega gamma^{1/2},
/// which keeps the small eigenvalues accurate when the state has very large
/// variances elsewhere.
inline SymplecticSpectrum symplectic_eigenvalues(const CovarianceMatrix& gamma) {
  const auto n = gamma.modes();
  Eigen::SelfAdjointEigenSolver<Matrix> sym(gamma.matrix());
  if (sym.info() != Eigen::Success) throw PhysicalityError("eigen-decomposition of covariance matrix failed");
  const double scale = std::max(1.0, sym.eigenvalues().cwiseAbs().maxCoeff());
  if (sym.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw PhysicalityError("covariance matrix is not positive semi-definite");
  }
  const Eigen::VectorXd root = sym.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix half = sym.eigenvectors() * root.asDiagonal() * sym.eigenvectors().transpose();
  const Matrix k = half * symplectic_form(n) * half;
  const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * k.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> herm(h, Eigen::EigenvaluesOnly);
  if (herm.info() != Eigen::Success) throw PhysicalityError("symplectic diagonalisation failed");

  // Eigenvalues come as +-nu in ascending order; the upper half are the nu.
  SymplecticSpectrum spec;
  spec.values.reserve(n);
  for (std::size_t k2 = 0; k2 < n; ++k2) {
    double nu = herm.eigenvalues()(static_cast<Eigen::Index>(2 * n - 1 - k2));
    if (nu < 1.0 - tolerance::physical_hard) {
      throw PhysicalityError("symplectic eigenvalue " + std::to_string(nu) + " violates the uncertainty relation");
    }
    spec.values.push_back(std::max(nu, 1.0));
  }
  return spec;
}

inline bool is_physical(const CovarianceMatrix& gamma) {
  try {
    (void)symplectic_eigenvalues(gamma);
    return true;
  } catch (const PhysicalityError&) {
    return false;
  }
}

/// g(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2), with g(1) = 0.
inline double entropy_function(double nu) {
  const double d = nu - 1.0;
  if (d <= 0.0) return 0.0;
  if (d < 1e-8) {
    // First order in d: (d/2) (log2(2/d) + 1/ln 2).
    return 0.5 * d * (std::log2(2.0 / d) + 1.0 / std::log(2.0));
  }
  const double a = 0.5 * (nu + 1.0);
  const double b = 0.5 * d;
  return a * std::log2(a) - b * std::log2(b);
}

/// Von Neumann entropy in bits.
inline double von_neumann_entropy(const CovarianceMatrix& gamma) {
  const auto spec = symplectic_eigenvalues(gamma);
  double s = 0.0;
  for (double nu : spec.values) s += entropy_function(nu);
  return s;
}

}  // namespace cvqkd
