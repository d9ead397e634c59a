#include "erbfit/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "erbfit/error.hpp"
#include "mc_tables.hpp"

namespace erbfit {

namespace {

// Corner offsets in Bourke's order (see mc_tables.cpp).
const int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                           {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// Edge endpoints as corner indices.
const int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                          {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

// Lattice identity of an edge: owning lattice point + axis. Two cells
// sharing an edge agree on this key, which is what makes the mesh watertight.
struct EdgeKey {
  int i, j, k, axis;
};

EdgeKey edge_key(int i, int j, int k, int e) {
  const int* a = kCorner[kEdge[e][0]];
  const int* b = kCorner[kEdge[e][1]];
  const int oi = std::min(a[0], b[0]);
  const int oj = std::min(a[1], b[1]);
  const int ok = std::min(a[2], b[2]);
  int axis = 0;
  if (a[1] != b[1]) axis = 1;
  if (a[2] != b[2]) axis = 2;
  return {i + oi, j + oj, k + ok, axis};
}

}  // namespace

TriMesh marching_cubes(const ScalarField& field, double isovalue) {
  TriMesh mesh;
  const UniformGrid& g = field.grid;
  if (field.values.empty()) return mesh;

  const auto [mn, mx] =
      std::minmax_element(field.values.begin(), field.values.end());
  if (!(isovalue > *mn && isovalue < *mx)) return mesh;

  std::unordered_map<std::uint64_t, int> edge_vertex;
  edge_vertex.reserve(1024);
  const auto key_of = [&](const EdgeKey& e) {
    return ((std::uint64_t(e.k) * (g.ny + 1) + e.j) * std::uint64_t(g.nx + 1) +
            e.i) *
               4 +
           e.axis;
  };

  // Corner values exactly equal to the isovalue would put vertices on
  // lattice points shared by several edges, collapsing triangles and
  // opening cracks; nudge them by a relative epsilon instead.
  const double snap =
      (std::abs(isovalue) + std::abs(*mx - *mn)) * 1e-10;

  double vals[8];
  int edge_to_index[12];
  for (int k = 0; k + 1 < g.nz; ++k)
    for (int j = 0; j + 1 < g.ny; ++j)
      for (int i = 0; i + 1 < g.nx; ++i) {
        for (int c = 0; c < 8; ++c) {
          vals[c] = field.at(i + kCorner[c][0], j + kCorner[c][1],
                             k + kCorner[c][2]);
          if (vals[c] == isovalue) vals[c] = isovalue + snap;
        }
        int ci = 0;
        for (int c = 0; c < 8; ++c)
          if (vals[c] < isovalue) ci |= 1 << c;
        const int edges = kMcEdgeTable[ci];
        if (edges == 0) continue;

        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          const EdgeKey ek = edge_key(i, j, k, e);
          auto [it, inserted] = edge_vertex.try_emplace(key_of(ek), 0);
          if (inserted) {
            const int a = kEdge[e][0], b = kEdge[e][1];
            const double va = vals[a], vb = vals[b];
            const double denom = vb - va;
            const double t =
                std::abs(denom) > 0.0
                    ? std::clamp((isovalue - va) / denom, 0.0, 1.0)
                    : 0.5;
            const Vec3 pa = g.point(i + kCorner[a][0], j + kCorner[a][1],
                                    k + kCorner[a][2]);
            const Vec3 pb = g.point(i + kCorner[b][0], j + kCorner[b][1],
                                    k + kCorner[b][2]);
            it->second = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(pa + t * (pb - pa));
          }
          edge_to_index[e] = it->second;
        }

        for (const int* t = kMcTriTable[ci]; *t != -1; t += 3) {
          const int a = edge_to_index[t[0]];
          const int b = edge_to_index[t[1]];
          const int c = edge_to_index[t[2]];
          if (a == b || b == c || a == c) continue;
          const Vec3 va = mesh.vertices[a], vb = mesh.vertices[b],
                     vc = mesh.vertices[c];
          if ((vb - va).cross(vc - va).norm2() == 0.0) continue;
          mesh.triangles.push_back({a, b, c});
        }
      }
  return mesh;
}

TriMesh mesh_from_map(const DensityMap& map, const BoundingBox& box,
                      double spacing, double isovalue, std::size_t point_cap) {
  const UniformGrid grid = make_grid(box, spacing);
  return marching_cubes(sample_grid(map, grid, point_cap), isovalue);
}

TriMesh mesh_from_model(const ErbfParams& params, const BoundingBox& box,
                        double spacing, double isovalue,
                        std::size_t point_cap) {
  const UniformGrid grid = make_grid(box, spacing);
  if (grid.point_count() > point_cap)
    throw ResourceError("mesh_from_model: grid exceeds point cap");

  ScalarField field;
  field.grid = grid;
  field.values.resize(grid.point_count());
  PackedNeurons packed;
  packed.build(params, false);
  const Vec3 h = grid.spacing();
  std::vector<double> px(grid.nx), py(grid.nx), pz(grid.nx);
  for (int i = 0; i < grid.nx; ++i) px[i] = box.min_corner.x + i * h.x;
  for (int k = 0; k < grid.nz; ++k)
    for (int j = 0; j < grid.ny; ++j) {
      std::fill(py.begin(), py.end(), box.min_corner.y + j * h.y);
      std::fill(pz.begin(), pz.end(), box.min_corner.z + k * h.z);
      kernels::forward_block(packed.view(), px.data(), py.data(), pz.data(),
                             grid.nx, field.values.data() + grid.index(0, j, k));
    }
  return marching_cubes(field, isovalue);
}

void write_obj(std::ostream& out, const TriMesh& mesh) {
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

void write_off(std::ostream& out, const TriMesh& mesh) {
  char buf[128];
  out << "OFF\n"
      << mesh.vertices.size() << " " << mesh.triangles.size() << " 0\n";
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

void write_mesh_file(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const bool off = path.size() >= 4 &&
                   path.compare(path.size() - 4, 4, ".off") == 0;
  if (off)
    write_off(out, mesh);
  else
    write_obj(out, mesh);
}

namespace {

TriMesh read_off_stream(std::istream& in) {
  std::string tag;
  in >> tag;  // "OFF"
  std::size_t nv = 0, nf = 0, ne = 0;
  if (!(in >> nv >> nf >> ne)) throw ParseError("OFF: bad header");
  TriMesh mesh;
  mesh.vertices.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!(in >> mesh.vertices[i].x >> mesh.vertices[i].y >> mesh.vertices[i].z))
      throw ParseError("OFF: truncated vertex list");
  }
  for (std::size_t f = 0; f < nf; ++f) {
    int arity, a, b, c;
    if (!(in >> arity >> a >> b >> c) || arity != 3)
      throw ParseError("OFF: only triangle faces supported");
    mesh.triangles.push_back({a, b, c});
  }
  return mesh;
}

int parse_obj_index(const std::string& tok) {
  // "f 3", "f 3/1", "f 3//2" all reference vertex 3.
  return std::stoi(tok.substr(0, tok.find('/')));
}

TriMesh read_obj_stream(std::istream& in) {
  TriMesh mesh;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::string tag;
    if (!(row >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(row >> v.x >> v.y >> v.z))
        throw ParseError("obj line " + std::to_string(line_no) +
                         ": bad vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::string a, b, c;
      if (!(row >> a >> b >> c))
        throw ParseError("obj line " + std::to_string(line_no) + ": bad face");
      mesh.triangles.push_back({parse_obj_index(a) - 1, parse_obj_index(b) - 1,
                                parse_obj_index(c) - 1});
    }
  }
  return mesh;
}

}  // namespace

TriMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file '" + path + "'");
  std::string first;
  in >> first;
  in.seekg(0);
  TriMesh mesh = (first == "OFF") ? read_off_stream(in) : read_obj_stream(in);
  for (const auto& t : mesh.triangles)
    for (int idx : t)
      if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
        throw ValidationError("mesh file '" + path +
                              "': face index out of range");
  return mesh;
}

}  // namespace erbfit
