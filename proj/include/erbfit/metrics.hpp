#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "erbfit/mesher.hpp"

namespace erbfit {

double mesh_area(const TriMesh& mesh);

struct VolumeResult {
  double value = 0.0;
  bool watertight = true;  // open meshes get a warning flag, not an error
};

// Divergence-theorem signed-tetrahedron sum to the origin, absolute value;
// translation-invariant for closed meshes.
VolumeResult mesh_volume(const TriMesh& mesh);

// Every undirected edge is shared by exactly two triangles.
bool is_watertight(const TriMesh& mesh);

// Symmetric Hausdorff distance, Metro-style: each mesh is sampled at all
// vertices plus ~samples_per_area quasirandom points per Å² of face area
// (nested as the density grows), and every sample is measured against the
// other mesh by exact point-to-triangle distance through a BVH.
double hausdorff(const TriMesh& a, const TriMesh& b,
                 double samples_per_area = 10.0);

struct ShapeReport {
  double area_a = 0.0, area_b = 0.0;
  double volume_a = 0.0, volume_b = 0.0;
  double error_area = 0.0, error_volume = 0.0;  // relative to mesh a
  double hausdorff = 0.0;
  bool closed_a = true, closed_b = true;
};

ShapeReport compare_shapes(const TriMesh& original, const TriMesh& sparse,
                           double samples_per_area = 10.0);

struct SparseStats {
  std::size_t n_atoms = 0;
  std::size_t n_neurons = 0;
  double ratio = 0.0;  // n_neurons / n_atoms
};

SparseStats sparse_stats(std::size_t n_atoms, std::size_t n_neurons);

// Structured text document.
void write_report(std::ostream& out, const ShapeReport& report,
                  const std::string& name);
// Header + one row matching the table layout
// molecule,area_orig,area_sparse,err_A,vol_orig,vol_sparse,err_V,hausdorff.
void write_report_csv(std::ostream& out, const ShapeReport& report,
                      const std::string& name);

}  // namespace erbfit
