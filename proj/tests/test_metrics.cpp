#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "erbfit/metrics.hpp"
#include "testutil.hpp"

using namespace erbfit;

namespace {

constexpr double kPi = 3.14159265358979323846;

TriMesh rotated(const TriMesh& mesh, const Mat3& rot) {
  TriMesh out = mesh;
  for (Vec3& v : out.vertices) v = rot.apply(v);
  return out;
}

}  // namespace

TEST_CASE("mesh_area basics") {
  SUBCASE("single triangle") {
    TriMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    mesh.triangles = {{0, 1, 2}};
    CHECK(mesh_area(mesh) == 0.5);
  }
  SUBCASE("unit cube surface") {
    CHECK(mesh_area(testutil::cube_mesh(0.5)) == doctest::Approx(6.0));
  }
  SUBCASE("icosphere approaches the analytic sphere area") {
    const TriMesh mesh = testutil::icosphere(1.0, 4);
    CHECK(std::abs(mesh_area(mesh) - 4 * kPi) / (4 * kPi) < 0.01);
  }
}

TEST_CASE("mesh_volume basics") {
  SUBCASE("unit cube") {
    const VolumeResult v = mesh_volume(testutil::cube_mesh(0.5));
    CHECK(v.value == doctest::Approx(1.0));
    CHECK(v.watertight);
  }
  SUBCASE("translation invariance of a closed mesh") {
    const VolumeResult v =
        mesh_volume(testutil::cube_mesh(0.5, {100, 0, 0}));
    CHECK(v.value == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("icosphere of radius 2 approaches 32 pi / 3") {
    const TriMesh mesh = testutil::icosphere(2.0, 4);
    const double exact = 32.0 * kPi / 3.0;
    CHECK(std::abs(mesh_volume(mesh).value - exact) / exact < 0.01);
  }
  SUBCASE("open mesh is flagged, value still computed") {
    TriMesh open_cube = testutil::cube_mesh(0.5);
    open_cube.triangles.pop_back();
    CHECK(!is_watertight(open_cube));
    const VolumeResult v = mesh_volume(open_cube);
    CHECK(!v.watertight);
    CHECK(v.value > 0.8);
  }
}

TEST_CASE("area and volume are rotation invariant") {
  std::mt19937_64 gen(61);
  const TriMesh mesh = testutil::icosphere(1.3, 2, {0.4, 0.2, -0.7});
  const double area0 = mesh_area(mesh);
  const double vol0 = mesh_volume(mesh).value;
  for (int t = 0; t < 5; ++t) {
    const Mat3 rot = rotation_matrix(testutil::vrand(gen, -3, 3));
    const TriMesh r = rotated(mesh, rot);
    CHECK(std::abs(mesh_area(r) - area0) / area0 < 1e-9);
    CHECK(std::abs(mesh_volume(r).value - vol0) / vol0 < 1e-9);
  }
}

TEST_CASE("hausdorff oracles") {
  SUBCASE("identical meshes") {
    const TriMesh mesh = testutil::icosphere(1.0, 2);
    CHECK(hausdorff(mesh, mesh) < 1e-12);
  }
  SUBCASE("concentric cubes: the outer corner decides") {
    const TriMesh inner = testutil::cube_mesh(1.0);
    const TriMesh outer = testutil::cube_mesh(1.5);
    const double expected = 0.5 * std::sqrt(3.0);
    CHECK(hausdorff(inner, outer) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(hausdorff(outer, inner) ==
          doctest::Approx(expected).epsilon(1e-9));  // symmetric
  }
  SUBCASE("translated cube") {
    const TriMesh a = testutil::cube_mesh(1.0);
    const TriMesh b = testutil::cube_mesh(1.0, {0.1, 0, 0});
    const double h = hausdorff(a, b);
    CHECK(h > 0.0);
    CHECK(h <= 0.1 + 1e-12);
    CHECK(h == doctest::Approx(0.1));
  }
  SUBCASE("doubling the sample density never lowers the value") {
    const TriMesh a = testutil::icosphere(1.0, 2);
    const TriMesh b = testutil::cube_mesh(0.9);
    const double h10 = hausdorff(a, b, 10.0);
    const double h20 = hausdorff(a, b, 20.0);
    const double h40 = hausdorff(a, b, 40.0);
    CHECK(h20 >= h10);
    CHECK(h40 >= h20);
  }
}

TEST_CASE("compare_shapes") {
  SUBCASE("mesh against itself") {
    const TriMesh mesh = testutil::icosphere(1.0, 2);
    const ShapeReport r = compare_shapes(mesh, mesh);
    CHECK(r.error_area == 0.0);
    CHECK(r.error_volume == 0.0);
    CHECK(r.hausdorff < 1e-12);
    CHECK(r.closed_a);
  }
  SUBCASE("cube against inflated cube") {
    const ShapeReport r =
        compare_shapes(testutil::cube_mesh(1.0), testutil::cube_mesh(1.1));
    CHECK(r.error_area == doctest::Approx(0.21));        // 1.1^2 - 1
    CHECK(r.error_volume == doctest::Approx(0.331));     // 1.1^3 - 1
    CHECK(r.hausdorff == doctest::Approx(0.1 * std::sqrt(3.0)).epsilon(1e-6));
  }
}

TEST_CASE("sparse_stats") {
  const SparseStats s = sparse_stats(39, 5);
  CHECK(s.n_atoms == 39);
  CHECK(s.n_neurons == 5);
  CHECK(s.ratio == doctest::Approx(5.0 / 39.0));
}

TEST_CASE("report serialization") {
  ShapeReport r;
  r.area_a = 367.9334;
  r.area_b = 358.4047;
  r.error_area = 0.0259;
  r.volume_a = 458.0317;
  r.volume_b = 454.5578;
  r.error_volume = 0.0076;
  r.hausdorff = 0.6605;

  std::ostringstream text;
  write_report(text, r, "mol");
  CHECK(text.str().find("molecule mol") != std::string::npos);
  CHECK(text.str().find("error_area 0.0259") != std::string::npos);
  CHECK(text.str().find("hausdorff 0.6605") != std::string::npos);

  std::ostringstream csv;
  write_report_csv(csv, r, "mol");
  CHECK(csv.str().find("molecule,area_orig,area_sparse,err_A,vol_orig,"
                       "vol_sparse,err_V,hausdorff") == 0);
  CHECK(csv.str().find("mol,367.9334,358.4047,0.0259") != std::string::npos);
}
