#pragma once

#include "archspace/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace archspace {

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order and
/// eigenvectors in the matching columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/**
 * Cyclic Jacobi eigensolver for a dense symmetric matrix.
 *
 * Sweeps until the off-diagonal Frobenius norm drops below
 * `tol * ||A||_F` or `max_sweeps` is reached. Each eigenvector is signed so
 * its largest-magnitude component is positive, so results are reproducible
 * across runs.
 */
SymmetricEigen symmetric_eigen(const Matrix& a, double tol = 1e-15, int max_sweeps = 100);

/// Everything needed to map between feature space and a PCA subspace.
struct PcaRecord {
  Vector mean;          // length m
  Matrix components;    // dims x m, orthonormal rows
  Vector variances;     // length dims, descending
  double total_variance = 0.0;

  double explained_fraction() const;
  Matrix project(const Matrix& x) const;
  Matrix reconstruct(const Matrix& projected) const;
};

/// Mean-centres `x` and projects it onto its top `dims` principal axes.
std::pair<DataMatrix, PcaRecord> pca_reduce(const DataMatrix& x, std::size_t dims);

/// Torgerson MDS on Euclidean distances between rows. Output columns are
/// centred; coordinates of negative eigen-directions are clamped to 0.
DataMatrix classical_mds(const DataMatrix& points, std::size_t dims);

/// Euclidean projection onto {w : w >= 0, sum w = 1} (sort and threshold).
Vector project_simplex(const Vector& v);
void project_simplex_inplace(std::span<double> v);

/// Squared Euclidean distances between rows of a and rows of b.
Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b);

/// Bandwidth multipliers of the multiscale MMD kernel.
inline constexpr double kMmdScales[] = {0.25, 0.5, 1.0, 2.0, 4.0};

/// Median pairwise Euclidean distance of the pooled rows of a and b.
double pooled_median_distance(const Matrix& a, const Matrix& b);

/**
 * Biased (V-statistic) squared MMD between two samples.
 *
 * The kernel is sum_s exp(-d^2 / (2 (s h)^2)) for s in kMmdScales, where h is
 * the median pairwise distance of the pooled sample.
 */
double mmd(const DataMatrix& a, const DataMatrix& b);

/// Single-pass LOWESS: local linear fit with tricube weights over the
/// ceil(frac * n) nearest x-neighbours of each point.
std::vector<double> lowess(std::span<const double> x, std::span<const double> y,
                           double frac = 0.3);

}  // namespace archspace
