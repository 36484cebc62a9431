#include "archspace/data.hpp"
#include "archspace/rng.hpp"
#include "archspace/types.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace archspace;

TEST_CASE("DataMatrix enforces its invariants") {
  CHECK_THROWS_AS(DataMatrix(Matrix(0, 3)), DataError);
  CHECK_THROWS_AS(DataMatrix(Matrix(3, 0)), DataError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DataMatrix{bad}, DataError);
  CHECK_THROWS_AS(DataMatrix(Matrix::Zero(2, 2), {"a"}), DataError);
  const DataMatrix ok(Matrix::Ones(2, 2), {"a", "b"});
  CHECK(ok.has_col_names());
  CHECK(ok(1, 1) == 1.0);
  CHECK(DataMatrix::unchecked(Matrix(0, 2)).empty());
}

TEST_CASE("Rng streams are reproducible and independent of parent use") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng fresh(42);
  Rng used(42);
  for (int i = 0; i < 5; ++i) used.normal();
  CHECK(fresh.derive("x").next_u64() == used.derive("x").next_u64());
  CHECK(fresh.derive("x").next_u64() != fresh.derive("y").next_u64());
  CHECK(fresh.derive(std::uint64_t{0}).next_u64() != fresh.derive(std::uint64_t{1}).next_u64());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(a.index(7) < 7);
  }
}

TEST_CASE("Rng gamma has the right mean") {
  Rng rng(9);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += rng.gamma(5.0);
  CHECK(sum / n == doctest::Approx(5.0).epsilon(0.03));
}

TEST_CASE("triangle on a huge sphere is flat") {
  Rng rng(1);
  const auto ds = gen_triangle_on_sphere(500, 1e6, rng);
  CHECK(ds.params.max_plane_deviation < 1e-5);
  CHECK(ds.points.rows() == 500);
  CHECK(ds.points.cols() == 3);
  for (Eigen::Index r = 0; r < ds.true_mixtures.rows(); ++r) CHECK(ds.true_mixtures.row(r).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("triangle plane deviation matches a direct projection") {
  Rng rng(2);
  const double radius = 0.75;
  const auto ds = gen_triangle_on_sphere(400, radius, rng);
  const Matrix planar = ds.true_mixtures * canonical_triangle();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < planar.rows(); ++i) {
    const Eigen::Vector3d q(planar(i, 0), planar(i, 1), 0.0);
    const Eigen::Vector3d c(0.0, 0.0, radius);
    const Eigen::Vector3d p = c + radius * (q - c).normalized();
    CHECK((p.transpose() - ds.points.values().row(i)).norm() < 1e-12);
    worst = std::max(worst, std::abs(p.z()));
  }
  CHECK(ds.params.max_plane_deviation == doctest::Approx(worst).epsilon(1e-12));
}

TEST_CASE("triangle centre maps to the tangent point and vertices stay on the sphere") {
  Matrix centre = Matrix::Zero(1, 3);
  const Matrix p = project_onto_sphere(centre, 2.0);
  CHECK(p.norm() == 0.0);
  const Matrix v = project_onto_sphere(canonical_triangle(), 2.0);
  for (int i = 0; i < 3; ++i) CHECK((v.row(i) - Eigen::RowVector3d(0, 0, 2.0)).norm() == doctest::Approx(2.0));
  CHECK_THROWS_AS(project_onto_sphere(centre, 0.0), std::invalid_argument);
}

TEST_CASE("canonical triangle has circumradius 1 and a vertex on +y") {
  const Matrix t = canonical_triangle();
  for (int i = 0; i < 3; ++i) CHECK(t.row(i).norm() == doctest::Approx(1.0));
  CHECK(t(0, 1) == doctest::Approx(1.0));
  CHECK((t.row(0) - t.row(1)).norm() == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("flat simplex data is exactly mixtures times vertices") {
  Rng rng(4);
  const auto ds = gen_simplex_highdim(300, 4, 20, 0.0, SamplingBias::uniform, rng);
  CHECK(ds.points.cols() == 20);
  CHECK((ds.points.values() - ds.true_mixtures * ds.true_archetypes).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ds.params.geometry.has_value());
  CHECK((ds.params.geometry->rotation.transpose() * ds.params.geometry->rotation - Matrix::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("curved simplex data goes through the recorded geometry") {
  Rng rng(5);
  const auto ds = gen_simplex_highdim(200, 4, 100, 1.0, SamplingBias::uniform, rng);
  const auto& g = *ds.params.geometry;
  Matrix low = ds.true_mixtures * g.vertices;
  low = (low.array() + low.array().cube()).matrix();
  CHECK((ds.points.values() - low * g.rotation.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("center-biased mixtures sit closer to the barycentre") {
  Rng rng(6);
  const auto uni = gen_simplex_highdim(2000, 4, 10, 0.0, SamplingBias::uniform, rng);
  const auto ctr = gen_simplex_highdim(2000, 4, 10, 0.0, SamplingBias::center_biased, rng);
  CHECK((uni.true_archetypes - ctr.true_archetypes).norm() == 0.0);
  auto spread = [](const Matrix& m) {
    return (m.array() - 0.25).matrix().rowwise().norm().mean();
  };
  CHECK(spread(ctr.true_mixtures) < spread(uni.true_mixtures));
}

TEST_CASE("runtime benchmark shape") {
  Rng rng(7);
  const auto ds = gen_simplex_highdim(50, 10, 100, 0.0, SamplingBias::uniform, rng);
  CHECK(ds.points.rows() == 50);
  CHECK(ds.points.cols() == 100);
  CHECK_THROWS_AS(gen_simplex_highdim(10, 12, 10, 0.0, SamplingBias::uniform, rng), std::invalid_argument);
}

TEST_CASE("generators are seed-deterministic") {
  Rng a(8), b(8);
  CHECK(gen_triangle_on_sphere(50, 2.0, a).points.values() == gen_triangle_on_sphere(50, 2.0, b).points.values());
  const Rng c(9);
  CHECK(gen_simplex_highdim(30, 3, 5, 0.5, SamplingBias::uniform, c).points.values() ==
        gen_simplex_highdim(30, 3, 5, 0.5, SamplingBias::uniform, c).points.values());
}

TEST_CASE("csv round trip") {
  Rng rng(10);
  Matrix m(100, 10);
  for (Eigen::Index c = 0; c < 10; ++c)
    for (Eigen::Index r = 0; r < 100; ++r) m(r, c) = rng.normal() * 1e3;
  const auto path = std::filesystem::temp_directory_path() / "archspace_roundtrip.csv";
  save_csv(m, path);
  const DataMatrix back = load_csv(path, false);
  CHECK((back.values() - m).cwiseAbs().maxCoeff() < 1e-12);
  std::filesystem::remove(path);
}

TEST_CASE("csv header handling") {
  const DataMatrix with = parse_csv("a,b\n1,2\n3,4\n", true);
  CHECK(with.col_names() == std::vector<std::string>{"a", "b"});
  CHECK(with.rows() == 2);
  const DataMatrix without = parse_csv("1,2\n3,4\n", false);
  CHECK_FALSE(without.has_col_names());
  CHECK(without(1, 0) == 3.0);
  CHECK(format_csv(with.values(), with.col_names()).rfind("a,b\n", 0) == 0);
}

TEST_CASE("csv errors name the row") {
  try {
    parse_csv("a,b\n1,2\n3\n", true);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_csv("1,x\n", false), DataError);
  CHECK_THROWS_AS(parse_csv("1,nan\n", false), DataError);
  CHECK_THROWS_AS(parse_csv("1,inf\n", false), DataError);
  CHECK_THROWS_AS(parse_csv("a,b\n", true), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
}
