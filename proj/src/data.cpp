#include "archspace/data.hpp"

#include "archspace/generation.hpp"

#include <Eigen/QR>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace archspace {

Matrix SimplexGeometry::archetypes() const {
  const Matrix eye = Matrix::Identity(vertices.rows(), vertices.rows());
  return embed(eye);
}

Matrix SimplexGeometry::embed(const Matrix& mixtures) const {
  if (mixtures.cols() != vertices.rows()) throw DataError("geometry: mixture width mismatch");
  Matrix low = mixtures * vertices;
  if (curvature != 0.0) low = (low.array() + curvature * low.array().cube()).matrix();
  return low * rotation.transpose();
}

Matrix canonical_triangle() {
  Matrix v(3, 3);
  for (int i = 0; i < 3; ++i) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / 3.0;
    v(i, 0) = std::cos(angle);
    v(i, 1) = std::sin(angle);
    v(i, 2) = 0.0;
  }
  return v;
}

Matrix project_onto_sphere(const Matrix& planar, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  if (planar.cols() != 3) throw DataError("project_onto_sphere: expected 3-D points");
  Matrix out(planar.rows(), 3);
  for (Eigen::Index i = 0; i < planar.rows(); ++i) {
    // Offset from the sphere centre (0, 0, radius).
    const double dx = planar(i, 0), dy = planar(i, 1), dz = planar(i, 2) - radius;
    const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double s = radius / len;
    out(i, 0) = s * dx;
    out(i, 1) = s * dy;
    out(i, 2) = radius + s * dz;
  }
  return out;
}

SyntheticDataset gen_triangle_on_sphere(std::size_t n, double radius, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_triangle_on_sphere: n must be at least 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("gen_triangle_on_sphere: radius must be positive and finite");
  }
  const Matrix tri = canonical_triangle();
  SyntheticDataset ds;
  ds.true_mixtures = sample_simplex_uniform(n, 3, rng).weights;
  const Matrix planar = ds.true_mixtures * tri;
  const Matrix projected = project_onto_sphere(planar, radius);
  ds.points = DataMatrix(projected, {"x", "y", "z"});
  ds.true_archetypes = project_onto_sphere(tri, radius);
  ds.params.generator = "triangle_sphere";
  ds.params.radius = radius;
  ds.params.ambient_dim = 3;
  ds.params.seed = rng.seed();
  ds.params.max_plane_deviation = projected.col(2).cwiseAbs().maxCoeff();
  return ds;
}

SimplexGeometry random_simplex_geometry(std::size_t k, std::size_t ambient_dim, double curvature,
                                        const Rng& rng) {
  if (k < 1) throw std::invalid_argument("simplex geometry: k must be at least 1");
  if (ambient_dim < 1) throw std::invalid_argument("simplex geometry: ambient_dim must be at least 1");
  if (k > ambient_dim + 1) {
    std::ostringstream os;
    os << "simplex geometry: k = " << k << " vertices need at least " << k - 1
       << " ambient dimensions, got " << ambient_dim;
    throw std::invalid_argument(os.str());
  }
  if (curvature < 0.0) throw std::invalid_argument("simplex geometry: curvature must be non-negative");
  Rng g = rng.derive("geometry");
  const std::size_t d = std::min(k, ambient_dim);
  SimplexGeometry geo;
  geo.curvature = curvature;
  geo.vertices.resize(idx(k), idx(d));
  for (Eigen::Index c = 0; c < geo.vertices.cols(); ++c)
    for (Eigen::Index r = 0; r < geo.vertices.rows(); ++r) geo.vertices(r, c) = g.normal();
  if (k > 1) {
    geo.vertices.rowwise() -= geo.vertices.colwise().mean();
    const double radius = geo.vertices.rowwise().norm().maxCoeff();
    if (radius > 0.0) geo.vertices /= radius;
  }
  Matrix gauss(idx(ambient_dim), idx(d));
  for (Eigen::Index c = 0; c < gauss.cols(); ++c)
    for (Eigen::Index r = 0; r < gauss.rows(); ++r) gauss(r, c) = g.normal();
  Eigen::HouseholderQR<Matrix> qr(gauss);
  geo.rotation = qr.householderQ() * Matrix::Identity(idx(ambient_dim), idx(d));
  return geo;
}

Matrix sample_mixtures(std::size_t n, std::size_t k, SamplingBias bias, Rng& rng) {
  if (bias == SamplingBias::uniform) return sample_simplex_uniform(n, k, rng).weights;
  Matrix w(idx(n), idx(k));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      w(r, c) = rng.gamma(kCenterBiasConcentration);
      total += w(r, c);
    }
    w.row(r) /= total;
  }
  return w;
}

SyntheticDataset gen_simplex_highdim(std::size_t n, std::size_t k, std::size_t ambient_dim,
                                     double curvature, SamplingBias bias, const Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_simplex_highdim: n must be at least 1");
  SimplexGeometry geo = random_simplex_geometry(k, ambient_dim, curvature, rng);
  Rng mix_rng = rng.derive("mixtures");
  SyntheticDataset ds;
  ds.true_mixtures = sample_mixtures(n, k, bias, mix_rng);
  ds.true_archetypes = geo.archetypes();
  if (curvature == 0.0) {
    ds.points = DataMatrix(ds.true_mixtures * ds.true_archetypes);
  } else {
    ds.points = DataMatrix(geo.embed(ds.true_mixtures));
  }
  ds.params.generator = "simplex_highdim";
  ds.params.ambient_dim = ambient_dim;
  ds.params.curvature = curvature;
  ds.params.bias = bias;
  ds.params.seed = rng.seed();
  ds.params.geometry = std::move(geo);
  return ds;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

DataMatrix parse_csv(const std::string& text, bool has_header) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> names;
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  bool header_pending = has_header;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_cells(line);
    if (header_pending) {
      names = std::move(cells);
      cols = names.size();
      header_pending = false;
      continue;
    }
    if (cols == 0) cols = cells.size();
    if (cells.size() != cols) {
      std::ostringstream os;
      os << "line " << line_no << ": expected " << cols << " fields, found " << cells.size();
      throw DataError(os.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last) {
        std::ostringstream os;
        os << "line " << line_no << ", column " << c + 1 << ": not a number: '" << cell << "'";
        throw DataError(os.str());
      }
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "line " << line_no << ", column " << c + 1 << ": non-finite value '" << cell << "'";
        throw DataError(os.str());
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("csv: no data rows");
  Matrix m(idx(rows), idx(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(idx(r), idx(c)) = values[r * cols + c];
  return DataMatrix(std::move(m), std::move(names));
}

DataMatrix load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str(), has_header);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_csv(const Matrix& matrix, const std::vector<std::string>& col_names) {
  std::string out;
  if (!col_names.empty()) {
    for (std::size_t c = 0; c < col_names.size(); ++c) {
      if (c) out += ',';
      out += col_names[c];
    }
    out += '\n';
  }
  char buf[32];
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", matrix(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_csv(const Matrix& matrix, const std::filesystem::path& path,
              const std::vector<std::string>& col_names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_csv(matrix, col_names);
  if (!out) throw DataError("write failed: " + path.string());
}

void save_csv(const DataMatrix& matrix, const std::filesystem::path& path) {
  save_csv(matrix.values(), path, matrix.col_names());
}

namespace {

std::vector<std::string> numbered(const std::string& stem, Eigen::Index count) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < count; ++i) names.push_back(stem + std::to_string(i + 1));
  return names;
}

}  // namespace

void save_synthetic(const SyntheticDataset& data, const std::string& prefix) {
  std::vector<std::string> feature_names = data.points.col_names();
  if (feature_names.empty()) feature_names = numbered("f", data.points.values().cols());
  save_csv(data.points.values(), prefix + "_points.csv", feature_names);
  save_csv(data.true_archetypes, prefix + "_archetypes.csv", feature_names);
  save_csv(data.true_mixtures, prefix + "_mixtures.csv", numbered("AT", data.true_mixtures.cols()));
}

}  // namespace archspace
