#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "erbfit/density.hpp"
#include "erbfit/erbf.hpp"
#include "erbfit/pqr.hpp"
#include "erbfit/vec.hpp"

namespace erbfit {

// Indexed triangle mesh. Triangle normals (right-hand rule over the index
// order) point toward decreasing field values, i.e. outward for a density
// isosurface.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
};

// Standard 256-case marching cubes with linear edge interpolation and
// edge-keyed vertex deduplication. Returns an empty mesh when the isovalue
// does not lie strictly between the field minimum and maximum.
TriMesh marching_cubes(const ScalarField& field, double isovalue);

// Sample-then-triangulate on the grid make_grid(box, spacing); the map and
// network overloads share the grid so their meshes are directly comparable.
TriMesh mesh_from_map(const DensityMap& map, const BoundingBox& box,
                      double spacing, double isovalue,
                      std::size_t point_cap = kGridPointCap);
TriMesh mesh_from_model(const ErbfParams& params, const BoundingBox& box,
                        double spacing, double isovalue,
                        std::size_t point_cap = kGridPointCap);

void write_obj(std::ostream& out, const TriMesh& mesh);
void write_off(std::ostream& out, const TriMesh& mesh);
// Writes OBJ or OFF depending on the path extension.
void write_mesh_file(const std::string& path, const TriMesh& mesh);
// Reads OBJ ("v"/"f" records) or OFF, by content.
TriMesh read_mesh_file(const std::string& path);

}  // namespace erbfit
