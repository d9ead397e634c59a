#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "erbfit/pqr.hpp"
#include "erbfit/vec.hpp"

namespace erbfit {

// Volumetric Gaussian density map: phi(x) = sum_i exp(-d (|x-x_i|^2 - r_i^2)).
struct DensityMap {
  AtomSet atoms;
  double decay = 0.5;  // d, Å^-2, > 0
  // Optional term cutoff: when > 0, kernel terms whose exponent argument is
  // below -exponent_cutoff are dropped. exp(-40) ~ 4e-18, far below the
  // isovalue scale. 0 disables (default: exact sum over all atoms).
  double exponent_cutoff = 0.0;
};

constexpr double kDefaultDecay = 0.5;
constexpr double kDefaultIsovalue = 1.0;
// Grid size cap for sample_grid / meshing; ~64M points = 512 MB of doubles.
constexpr std::size_t kGridPointCap = std::size_t(1) << 26;

// Uniform lattice over box: point(i,j,k) = min_corner + (i hx, j hy, k hz),
// i in [0, nx), hx = extent.x / nx; counts >= 2 per axis.
struct UniformGrid {
  BoundingBox box;
  int nx = 0, ny = 0, nz = 0;

  Vec3 spacing() const {
    Vec3 e = box.extent();
    return {e.x / nx, e.y / ny, e.z / nz};
  }
  Vec3 point(int i, int j, int k) const {
    Vec3 h = spacing();
    return {box.min_corner.x + i * h.x, box.min_corner.y + j * h.y,
            box.min_corner.z + k * h.z};
  }
  // x fastest, then y, then z — fixed project-wide.
  std::size_t index(int i, int j, int k) const {
    return std::size_t(i) +
           std::size_t(nx) * (std::size_t(j) + std::size_t(ny) * k);
  }
  std::size_t point_count() const {
    return std::size_t(nx) * std::size_t(ny) * std::size_t(nz);
  }
};

// counts = max(2, ceil(extent / spacing)) per axis.
UniformGrid make_grid(const BoundingBox& box, double spacing);

struct ScalarField {
  UniformGrid grid;
  std::vector<double> values;  // grid.point_count(), x fastest

  double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
};

double phi(const DensityMap& map, const Vec3& x);

// phi at many points through the block kernels.
void phi_many(const DensityMap& map, const std::vector<Vec3>& points,
              std::vector<double>& out);

// Evaluates phi at every lattice point. Throws ResourceError when the grid
// exceeds `point_cap` points.
ScalarField sample_grid(const DensityMap& map, const UniformGrid& grid,
                        std::size_t point_cap = kGridPointCap);

// Debug volume format: text header (counts, box corners) + one value per
// line in index order.
void write_volume(std::ostream& out, const ScalarField& field);
void write_volume_file(const std::string& path, const ScalarField& field);
ScalarField read_volume(std::istream& in);

}  // namespace erbfit
