#pragma once

#include "archspace/model.hpp"
#include "archspace/rng.hpp"
#include "archspace/types.hpp"

#include <vector>

namespace archspace {

/// n x k row-stochastic weights; every entry >= 0, rows sum to 1.
struct SimplexSample {
  Matrix weights;
};

/// Flat Dirichlet rows via S_ij = -log U_ij / sum_l -log U_il.
SimplexSample sample_simplex_uniform(std::size_t n, std::size_t k, Rng& rng);

/// True when every entry is >= -tol and the row sums to 1 within tol.
bool on_simplex(const RowVector& alpha, double tol = 1e-9);

/// Decoded points together with the mixtures that produced them. Rows whose
/// mixture lies off the simplex are flagged as extrapolated.
struct GeneratedData {
  DataMatrix points;
  Matrix mixtures;
  std::vector<bool> extrapolated;

  bool any_extrapolated() const;
};

GeneratedData generate_uniform(const ArchetypalModel& model, std::size_t n, Rng& rng);
GeneratedData generate_from_mixtures(const ArchetypalModel& model, const Matrix& mixtures);

/// Decodes (1 - t) e_i + t e_j for t = 0, 1/(steps-1), ..., 1.
DataMatrix interpolate_archetypes(const ArchetypalModel& model, std::size_t i, std::size_t j,
                                  std::size_t steps);

struct GeneratedPoint {
  Vector values;
  bool extrapolated = false;
};

GeneratedPoint generate_at(const ArchetypalModel& model, const Vector& alpha);

}  // namespace archspace
