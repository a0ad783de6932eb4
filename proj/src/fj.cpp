#include "fjv/fj.hpp"

#include <algorithm>
#include <cmath>

namespace fjv {

namespace {

bool is_diagonal(const Matrix<double>& m) {
  if (m.rows() != m.cols()) return false;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

// Deterministic start vectors: all-ones first, then ramps in case the
// first lies in the kernel of M.
Vector<double> start_vector(Index n, int attempt) {
  Vector<double> v(n);
  for (Index i = 0; i < n; ++i) {
    v(i) = attempt == 0 ? 1.0 : 1.0 + static_cast<double>((i * (attempt + 1)) % (n + 1)) / (n + 1);
  }
  return v.normalized();
}

}  // namespace

double spectral_norm(const Matrix<double>& m) { return spectral_norm(m, PowerIterationOptions{}); }

double spectral_norm(const Matrix<double>& m, const PowerIterationOptions& options) {
  if (!m.allFinite()) throw DomainError("spectral_norm: non-finite entries");
  if (m.size() == 0) return 0.0;
  if (is_diagonal(m)) return m.diagonal().cwiseAbs().maxCoeff();
  if (m.isZero(0.0)) return 0.0;

  const Index n = m.cols();
  for (int attempt = 0; attempt < 3; ++attempt) {
    Vector<double> v = start_vector(n, attempt);
    double estimate = 0.0;  // Rayleigh quotient of M^T M
    bool collapsed = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      const Vector<double> mv = m * v;
      const Vector<double> next = m.transpose() * mv;
      const double rayleigh = mv.squaredNorm();
      const double length = next.norm();
      if (length == 0.0) {
        collapsed = true;
        break;
      }
      v = next / length;
      // Rayleigh-quotient stagnation well below the requested accuracy in sigma.
      if (it > 0 && std::abs(rayleigh - estimate) <= 1e-4 * options.tolerance * std::max(1.0, rayleigh)) {
        // Final refinement with the updated vector.
        return std::sqrt(std::max(rayleigh, (m * v).squaredNorm()));
      }
      estimate = rayleigh;
    }
    if (!collapsed) {
      throw NotConvergedError("spectral_norm: power iteration did not converge in " +
                              std::to_string(options.max_iterations) + " iterations");
    }
  }
  throw NotConvergedError("spectral_norm: start vectors collapsed onto the kernel");
}

Vector<Rational> to_rational(const Vector<double>& v) {
  Vector<Rational> out(v.size());
  for (Index i = 0; i < v.size(); ++i) out(i) = rational_from_double(v(i));
  return out;
}

Matrix<Rational> to_rational(const Matrix<double>& m) {
  Matrix<Rational> out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) out(i, j) = rational_from_double(m(i, j));
  }
  return out;
}

InfluenceMatrix<Rational> to_rational(const InfluenceMatrix<double>& w) {
  Matrix<Rational> m = to_rational(w.matrix());
  for (Index i = 0; i < m.rows(); ++i) {
    Rational sum = 0;
    for (Index j = 0; j < m.cols(); ++j) sum += m(i, j);
    for (Index j = 0; j < m.cols(); ++j) m(i, j) /= sum;
  }
  return InfluenceMatrix<Rational>(std::move(m));
}

}  // namespace fjv
