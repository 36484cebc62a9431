#pragma once

#include "archspace/rng.hpp"
#include "archspace/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace archspace {

enum class SamplingBias { uniform, center_biased };

/// Dirichlet concentration used for SamplingBias::center_biased.
inline constexpr double kCenterBiasConcentration = 5.0;

/**
 * A curved or flat simplex embedded in a high-dimensional space.
 *
 * Mixtures are mapped through k vertices living in a `vertices.cols()`
 * dimensional space, warped coordinate-wise by u -> u + curvature * u^3
 * (monotone, so invertible), then rotated into the ambient space by the
 * orthonormal columns of `rotation` (ambient x d).
 */
struct SimplexGeometry {
  Matrix vertices;   // k x d
  Matrix rotation;   // ambient x d
  double curvature = 0.0;

  std::size_t k() const { return static_cast<std::size_t>(vertices.rows()); }
  std::size_t ambient_dim() const { return static_cast<std::size_t>(rotation.rows()); }
  /// Feature-space points of the given mixtures (n x k).
  Matrix embed(const Matrix& mixtures) const;
  /// The k vertices after warp and rotation.
  Matrix archetypes() const;
};

struct GeneratorParams {
  std::string generator;  // "triangle_sphere" or "simplex_highdim"
  double radius = 0.0;
  std::size_t ambient_dim = 0;
  double curvature = 0.0;
  SamplingBias bias = SamplingBias::uniform;
  std::uint64_t seed = 0;
  /// Largest distance of a generated point from the triangle's tangent plane.
  double max_plane_deviation = 0.0;
  std::optional<SimplexGeometry> geometry;
};

struct SyntheticDataset {
  DataMatrix points;
  Matrix true_archetypes;  // k x m
  Matrix true_mixtures;    // n x k, rows on the simplex
  GeneratorParams params;
};

/// Vertices of the canonical triangle: equilateral, circumradius 1, centred
/// at the origin of the z = 0 plane, first vertex on +y.
Matrix canonical_triangle();

/// Radial projection of points on the z = 0 plane onto the sphere of the
/// given radius centred at (0, 0, radius), i.e. tangent to the plane at the
/// origin.
Matrix project_onto_sphere(const Matrix& planar, double radius);

/**
 * n barycentric-uniform points in the canonical triangle, projected onto a
 * sphere of the given radius. Ground truth: the projected vertices and the
 * barycentric coordinates.
 */
SyntheticDataset gen_triangle_on_sphere(std::size_t n, double radius, Rng& rng);

/// Draws the vertices and embedding of a random simplex. Uses only the
/// "geometry" sub-stream of `rng`.
SimplexGeometry random_simplex_geometry(std::size_t k, std::size_t ambient_dim, double curvature,
                                        const Rng& rng);

/// Mixtures under the given bias: flat Dirichlet or Dirichlet(5, ..., 5).
Matrix sample_mixtures(std::size_t n, std::size_t k, SamplingBias bias, Rng& rng);

/**
 * n points on a random k-vertex simplex embedded in `ambient_dim`
 * dimensions. The geometry comes from the "geometry" sub-stream and the
 * mixtures from the "mixtures" sub-stream, so two calls with the same seed
 * and different bias share one geometry.
 */
SyntheticDataset gen_simplex_highdim(std::size_t n, std::size_t k, std::size_t ambient_dim,
                                     double curvature, SamplingBias bias, const Rng& rng);

/// Reads a numeric CSV. Throws DataError with the 1-based line number on
/// ragged rows, non-numeric or non-finite cells.
DataMatrix load_csv(const std::filesystem::path& path, bool has_header = true);
DataMatrix parse_csv(const std::string& text, bool has_header = true);

/// Writes values with 17 significant digits; a header row when the matrix
/// has column names.
void save_csv(const DataMatrix& matrix, const std::filesystem::path& path);
void save_csv(const Matrix& matrix, const std::filesystem::path& path,
              const std::vector<std::string>& col_names = {});
std::string format_csv(const Matrix& matrix, const std::vector<std::string>& col_names = {});

/// Writes <prefix>_points.csv, <prefix>_archetypes.csv and <prefix>_mixtures.csv.
void save_synthetic(const SyntheticDataset& data, const std::string& prefix);

}  // namespace archspace
