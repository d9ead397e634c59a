#include "erbfit/density.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "erbfit/error.hpp"
#include "erbfit/kernels.hpp"

namespace erbfit {

namespace {

// SoA copy of the atom data for the block kernels.
struct AtomsSoA {
  std::vector<double> x, y, z, r2;

  explicit AtomsSoA(const AtomSet& atoms) {
    const std::size_t n = atoms.size();
    x.resize(n);
    y.resize(n);
    z.resize(n);
    r2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Atom& a = atoms.atoms[i];
      x[i] = a.center.x;
      y[i] = a.center.y;
      z[i] = a.center.z;
      r2[i] = a.radius * a.radius;
    }
  }

  kernels::AtomsView view() const {
    return {x.data(), y.data(), z.data(), r2.data(), x.size()};
  }
};

}  // namespace

UniformGrid make_grid(const BoundingBox& box, double spacing) {
  if (!(spacing > 0.0)) throw ValidationError("make_grid: spacing must be > 0");
  Vec3 e = box.extent();
  if (!(e.x > 0.0 && e.y > 0.0 && e.z > 0.0))
    throw ValidationError("make_grid: degenerate bounding box");
  UniformGrid g;
  g.box = box;
  g.nx = std::max(2, static_cast<int>(std::ceil(e.x / spacing)));
  g.ny = std::max(2, static_cast<int>(std::ceil(e.y / spacing)));
  g.nz = std::max(2, static_cast<int>(std::ceil(e.z / spacing)));
  return g;
}

double phi(const DensityMap& map, const Vec3& x) {
  double out = 0.0;
  AtomsSoA soa(map.atoms);
  kernels::phi_block(soa.view(), map.decay, map.exponent_cutoff, &x.x, &x.y,
                     &x.z, 1, &out);
  return out;
}

void phi_many(const DensityMap& map, const std::vector<Vec3>& points,
              std::vector<double>& out) {
  const std::size_t np = points.size();
  std::vector<double> px(np), py(np), pz(np);
  for (std::size_t m = 0; m < np; ++m) {
    px[m] = points[m].x;
    py[m] = points[m].y;
    pz[m] = points[m].z;
  }
  out.resize(np);
  AtomsSoA soa(map.atoms);
  kernels::phi_block(soa.view(), map.decay, map.exponent_cutoff, px.data(),
                     py.data(), pz.data(), np, out.data());
}

ScalarField sample_grid(const DensityMap& map, const UniformGrid& grid,
                        std::size_t point_cap) {
  const std::size_t total = grid.point_count();
  if (total > point_cap) {
    throw ResourceError("sample_grid: " + std::to_string(total) +
                        " lattice points exceed cap of " +
                        std::to_string(point_cap));
  }
  ScalarField field;
  field.grid = grid;
  field.values.resize(total);

  AtomsSoA soa(map.atoms);
  const kernels::AtomsView view = soa.view();
  const Vec3 h = grid.spacing();

  // One x-row of lattice points per kernel call.
  std::vector<double> px(grid.nx), py(grid.nx), pz(grid.nx);
  for (int i = 0; i < grid.nx; ++i) px[i] = grid.box.min_corner.x + i * h.x;
  for (int k = 0; k < grid.nz; ++k) {
    const double zk = grid.box.min_corner.z + k * h.z;
    for (int j = 0; j < grid.ny; ++j) {
      const double yj = grid.box.min_corner.y + j * h.y;
      for (int i = 0; i < grid.nx; ++i) {
        py[i] = yj;
        pz[i] = zk;
      }
      kernels::phi_block(view, map.decay, map.exponent_cutoff, px.data(),
                         py.data(), pz.data(), grid.nx,
                         field.values.data() + grid.index(0, j, k));
    }
  }
  return field;
}

void write_volume(std::ostream& out, const ScalarField& field) {
  char buf[128];
  out << "erbfit-volume 1\n";
  out << "counts " << field.grid.nx << " " << field.grid.ny << " "
      << field.grid.nz << "\n";
  std::snprintf(buf, sizeof(buf), "min %.17g %.17g %.17g\n",
                field.grid.box.min_corner.x, field.grid.box.min_corner.y,
                field.grid.box.min_corner.z);
  out << buf;
  std::snprintf(buf, sizeof(buf), "max %.17g %.17g %.17g\n",
                field.grid.box.max_corner.x, field.grid.box.max_corner.y,
                field.grid.box.max_corner.z);
  out << buf;
  out << "values\n";
  for (double v : field.values) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
}

void write_volume_file(const std::string& path, const ScalarField& field) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_volume(out, field);
}

ScalarField read_volume(std::istream& in) {
  std::string word;
  int version = 0;
  in >> word >> version;
  if (word != "erbfit-volume" || version != 1)
    throw ParseError("not an erbfit-volume document");
  ScalarField field;
  in >> word >> field.grid.nx >> field.grid.ny >> field.grid.nz;
  if (word != "counts" || !in) throw ParseError("volume: bad counts line");
  Vec3& lo = field.grid.box.min_corner;
  Vec3& hi = field.grid.box.max_corner;
  in >> word >> lo.x >> lo.y >> lo.z;
  if (word != "min" || !in) throw ParseError("volume: bad min line");
  in >> word >> hi.x >> hi.y >> hi.z;
  if (word != "max" || !in) throw ParseError("volume: bad max line");
  in >> word;
  if (word != "values") throw ParseError("volume: missing values section");
  const std::size_t total = field.grid.point_count();
  field.values.resize(total);
  for (std::size_t n = 0; n < total; ++n) {
    if (!(in >> field.values[n]))
      throw ParseError("volume: truncated value list at entry " +
                       std::to_string(n));
  }
  return field;
}

}  // namespace erbfit
