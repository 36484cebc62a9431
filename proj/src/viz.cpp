#include "archspace/viz.hpp"

#include "archspace/log.hpp"
#include "archspace/numerics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace archspace {

Matrix interpolate_coords(const Matrix& mixtures, const Matrix& archetype_coords) {
  if (mixtures.cols() != archetype_coords.rows()) {
    std::ostringstream os;
    os << "viz: mixtures have " << mixtures.cols() << " columns but there are " << archetype_coords.rows()
       << " archetypes";
    throw DataError(os.str());
  }
  const Eigen::Index n = mixtures.rows(), k = mixtures.cols(), d = archetype_coords.cols();
  Matrix out = Matrix::Zero(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < d; ++c) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) acc += mixtures(i, j) * archetype_coords(j, c);
      out(i, c) = acc;
    }
  return out;
}

VizCoords viz_coords(const Matrix& archetypes, const Matrix& mixtures, std::size_t dims) {
  if (dims < 1) throw std::invalid_argument("viz: dims must be at least 1");
  const std::size_t k = static_cast<std::size_t>(archetypes.rows());
  if (k < 2) throw std::invalid_argument("viz: need at least 2 archetypes");
  std::size_t usable = dims;
  if (k < dims + 1) {
    usable = k - 1;
    std::ostringstream os;
    os << "viz: " << k << " archetypes cannot span " << dims << " dimensions; layout is degenerate";
    log_warning(os.str());
  }
  VizCoords v;
  v.archetype_coords = Matrix::Zero(idx(k), idx(dims));
  v.archetype_coords.leftCols(idx(usable)) = classical_mds(DataMatrix::unchecked(archetypes), usable).values();
  v.point_coords = interpolate_coords(mixtures, v.archetype_coords);
  return v;
}

VizCoords viz_coords(const ArchetypalModel& model, const DataMatrix& x, std::size_t dims) {
  return viz_coords(model.archetypes().values(), model.encode(x), dims);
}

std::string scatter_svg(const VizCoords& coords, int size) {
  if (coords.archetype_coords.cols() < 1) throw std::invalid_argument("scatter_svg: no coordinates");
  const bool two_d = coords.archetype_coords.cols() >= 2;
  auto y_of = [&](const Matrix& m, Eigen::Index r) { return two_d ? m(r, 1) : 0.0; };
  double lo_x = coords.archetype_coords.col(0).minCoeff(), hi_x = coords.archetype_coords.col(0).maxCoeff();
  double lo_y = 0.0, hi_y = 0.0;
  if (two_d) {
    lo_y = coords.archetype_coords.col(1).minCoeff();
    hi_y = coords.archetype_coords.col(1).maxCoeff();
  }
  if (coords.point_coords.rows() > 0) {
    lo_x = std::min(lo_x, coords.point_coords.col(0).minCoeff());
    hi_x = std::max(hi_x, coords.point_coords.col(0).maxCoeff());
    if (two_d) {
      lo_y = std::min(lo_y, coords.point_coords.col(1).minCoeff());
      hi_y = std::max(hi_y, coords.point_coords.col(1).maxCoeff());
    }
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double margin = 0.05 * size;
  const double scale = (size - 2.0 * margin) / span;
  auto px = [&](double x) { return margin + (x - lo_x) * scale; };
  auto py = [&](double y) { return size - margin - (y - lo_y) * scale; };

  std::ostringstream os;
  char buf[160];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Eigen::Index r = 0; r < coords.point_coords.rows(); ++r) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.5\" fill=\"#888\"/>\n",
                  px(coords.point_coords(r, 0)), py(y_of(coords.point_coords, r)));
    os << buf;
  }
  for (Eigen::Index r = 0; r < coords.archetype_coords.rows(); ++r) {
    const double x = px(coords.archetype_coords(r, 0)), y = py(y_of(coords.archetype_coords, r));
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"#d62728\"/>\n", x, y);
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">%ld</text>\n", x + 6, y - 6,
                  static_cast<long>(r));
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace archspace
