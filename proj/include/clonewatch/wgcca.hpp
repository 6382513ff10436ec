#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clonewatch/errors.hpp"

namespace clonewatch::wgcca {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

enum class Method {
  automatic,  ///< factored when the stacked view width is below n
  dense,      ///< eigendecomposition of the n x n matrix
  factored,   ///< QR of the stacked whitened views, then a small eigenproblem
};

/// Views X_i (n x d_i) with nonnegative weights w_i.
template <typename Scalar>
struct Problem {
  std::vector<Matrix<Scalar>> views;
  std::vector<Scalar> weights;
  Eigen::Index embedding_dim = 100;
  /// Ridge added to each X_i'X_i. Unset: 1e-8 * trace(X_i'X_i) / d_i per view.
  std::optional<Scalar> ridge;
  /// Subtract column means before solving.
  bool center = true;
  Method method = Method::automatic;
};

template <typename Scalar>
struct Solution {
  Matrix<Scalar> G;                       ///< n x k, orthonormal columns
  std::vector<Matrix<Scalar>> U;          ///< d_i x k per view
  Vector<Scalar> eigenvalues;             ///< k values, descending
  std::vector<RowVector<Scalar>> means;   ///< column means removed per view
  std::vector<Scalar> ridges;
  std::vector<std::string> warnings;
};

namespace detail {

template <typename Scalar>
void validate(const Problem<Scalar>& p) {
  if (p.views.empty()) throw ValidationError("wgcca: no views");
  if (p.weights.size() != p.views.size())
    throw ValidationError("wgcca: one weight per view required");
  const Eigen::Index n = p.views.front().rows();
  for (std::size_t i = 0; i < p.views.size(); ++i) {
    if (p.views[i].rows() != n) throw DimensionError("wgcca: views disagree on row count");
    if (!p.views[i].allFinite()) throw ValidationError("wgcca: view " + std::to_string(i) + " is not finite");
    if (!(p.weights[i] >= 0) || !std::isfinite(static_cast<double>(p.weights[i])))
      throw ValidationError("wgcca: weights must be finite and nonnegative");
  }
  if (p.embedding_dim < 1 || p.embedding_dim > n)
    throw DimensionError("wgcca: embedding_dim must lie in [1, n]");
  if (p.ridge && !(*p.ridge >= 0)) throw ValidationError("wgcca: ridge must be nonnegative");
}

template <typename Scalar>
Matrix<Scalar> prepared_view(const Problem<Scalar>& p, std::size_t i, RowVector<Scalar>& mean) {
  const auto& x = p.views[i];
  if (p.center) {
    mean = x.colwise().mean();
    return x.rowwise() - mean;
  }
  mean = RowVector<Scalar>::Zero(x.cols());
  return x;
}

template <typename Scalar>
Scalar default_ridge(const Matrix<Scalar>& gram) {
  return Scalar(1e-8) * gram.trace() / static_cast<Scalar>(gram.rows());
}

/// Flips each column so its first non-negligible entry is positive.
template <typename Scalar>
void fix_signs(Matrix<Scalar>& g) {
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    const Scalar tol = g.col(c).cwiseAbs().maxCoeff() * Scalar(1e-9);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      if (std::abs(g(r, c)) > tol) {
        if (g(r, c) < 0) g.col(c) *= Scalar(-1);
        break;
      }
    }
  }
}

}  // namespace detail

/// Weighted GCCA: G holds the top-k eigenvectors of
///   M = sum_i w_i X_i (X_i'X_i + lambda_i I)^-1 X_i'
/// and U_i = (X_i'X_i + lambda_i I)^-1 X_i' G.
///
/// M is never formed on the factored path: with A_i = L_i L_i', the matrix
/// Z = [sqrt(w_i) X_i L_i^-T]_i satisfies M = Z Z', so the eigenvectors come
/// from a thin QR of Z and an eigenproblem of size sum_i d_i.
template <typename Scalar>
Solution<Scalar> solve(const Problem<Scalar>& problem) {
  detail::validate(problem);
  const Eigen::Index n = problem.views.front().rows();
  const Eigen::Index k = problem.embedding_dim;
  const std::size_t m = problem.views.size();

  Solution<Scalar> sol;
  sol.means.resize(m);
  sol.ridges.assign(m, Scalar(0));
  std::vector<Matrix<Scalar>> centred(m);
  std::vector<Eigen::LLT<Matrix<Scalar>>> factors(m);
  std::vector<bool> usable(m, false);

  Eigen::Index width = 0;
  for (std::size_t i = 0; i < m; ++i) {
    centred[i] = detail::prepared_view(problem, i, sol.means[i]);
    Matrix<Scalar> gram = centred[i].transpose() * centred[i];
    if (gram.trace() <= Scalar(0)) {
      sol.warnings.push_back("view " + std::to_string(i) + " is all zero and contributes nothing");
      continue;
    }
    const Scalar lambda = problem.ridge.value_or(detail::default_ridge(gram));
    sol.ridges[i] = lambda;
    gram.diagonal().array() += lambda;
    factors[i].compute(gram);
    if (factors[i].info() != Eigen::Success)
      throw ValidationError("wgcca: X'X + ridge is not invertible for view " + std::to_string(i));
    usable[i] = true;
    if (problem.weights[i] > Scalar(0)) width += centred[i].cols();
  }
  if (width == 0) throw ValidationError("wgcca: no view with positive weight carries information");

  Matrix<Scalar> z(n, width);
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!usable[i] || problem.weights[i] <= Scalar(0)) continue;
    const Eigen::Index d = centred[i].cols();
    Matrix<Scalar> whitened = factors[i].matrixL().solve(centred[i].transpose());
    z.middleCols(col, d) = std::sqrt(problem.weights[i]) * whitened.transpose();
    col += d;
  }

  const bool factored = problem.method == Method::factored ||
                        (problem.method == Method::automatic && width < n);
  if (factored) {
    const Eigen::Index r = std::min(width, n);
    Eigen::HouseholderQR<Matrix<Scalar>> qr(z);
    const Matrix<Scalar> R = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(R * R.transpose());
    const Eigen::Index take = std::min(k, r);
    // Eigen sorts ascending.
    Matrix<Scalar> small(r, k);
    small.setZero();
    sol.eigenvalues = Vector<Scalar>::Zero(k);
    for (Eigen::Index c = 0; c < take; ++c) {
      small.col(c).head(r) = eig.eigenvectors().col(r - 1 - c);
      sol.eigenvalues[c] = std::max(Scalar(0), eig.eigenvalues()[r - 1 - c]);
    }
    Matrix<Scalar> basis = qr.householderQ() * Matrix<Scalar>::Identity(n, std::max(k, r));
    sol.G = basis.leftCols(r) * small.topRows(r);
    // Beyond rank(M) the eigenvalue is 0; any orthonormal completion works.
    if (k > take) sol.G.rightCols(k - take) = basis.middleCols(take, k - take);
  } else {
    const Matrix<Scalar> dense = z * z.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(dense);
    sol.G.resize(n, k);
    sol.eigenvalues.resize(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      sol.G.col(c) = eig.eigenvectors().col(n - 1 - c);
      sol.eigenvalues[c] = std::max(Scalar(0), eig.eigenvalues()[n - 1 - c]);
    }
  }
  detail::fix_signs(sol.G);

  sol.U.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (usable[i])
      sol.U[i] = factors[i].solve(centred[i].transpose() * sol.G);
    else
      sol.U[i] = Matrix<Scalar>::Zero(centred[i].cols(), k);
  }
  return sol;
}

/// sum_i w_i ||G - X_i U_i||_F^2 with U_i the regularised least-squares
/// mapping for the given G.
template <typename Scalar>
Scalar objective(const Problem<Scalar>& problem, const Matrix<Scalar>& G) {
  detail::validate(problem);
  Scalar total = 0;
  for (std::size_t i = 0; i < problem.views.size(); ++i) {
    RowVector<Scalar> mean;
    const Matrix<Scalar> x = detail::prepared_view(problem, i, mean);
    Matrix<Scalar> gram = x.transpose() * x;
    if (gram.trace() <= Scalar(0)) {
      total += problem.weights[i] * G.squaredNorm();
      continue;
    }
    gram.diagonal().array() += problem.ridge.value_or(detail::default_ridge(gram));
    const Matrix<Scalar> u = gram.llt().solve(x.transpose() * G);
    total += problem.weights[i] * (G - x * u).squaredNorm();
  }
  return total;
}

/// CSV: a `# centered=<bool>` comment, then `account_id,g0,...,g{k-1}`.
void save_embeddings(const std::filesystem::path& path, const std::vector<std::string>& ids,
                     const Matrix<double>& G, bool centered);

struct LoadedEmbeddings {
  std::vector<std::string> ids;
  Matrix<double> G;
  bool centered = false;
};
LoadedEmbeddings load_embeddings(const std::filesystem::path& path);

}  // namespace clonewatch::wgcca
