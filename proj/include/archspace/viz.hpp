#pragma once

#include "archspace/model.hpp"
#include "archspace/types.hpp"

#include <string>

namespace archspace {

/// Low-dimensional picture of the archetypal space: archetypes placed by
/// classical MDS, every point at its mixture-weighted average of them.
struct VizCoords {
  Matrix archetype_coords;  // k x d
  Matrix point_coords;      // n x d
};

/// Row i of the result is sum_j mixtures(i, j) * archetype_coords.row(j),
/// accumulated in index order.
Matrix interpolate_coords(const Matrix& mixtures, const Matrix& archetype_coords);

/// Places k archetypes (k x m feature vectors) in `dims` dimensions and
/// interpolates the mixtures. With fewer than dims + 1 archetypes the
/// layout is degenerate: the missing axes are zero and a warning is logged.
VizCoords viz_coords(const Matrix& archetypes, const Matrix& mixtures, std::size_t dims = 2);

/// viz_coords on the model's decoded archetypes and the encoded data.
VizCoords viz_coords(const ArchetypalModel& model, const DataMatrix& x, std::size_t dims = 2);

/// Scatter plot of the first two coordinates: grey points, red archetypes.
std::string scatter_svg(const VizCoords& coords, int size = 600);

}  // namespace archspace
