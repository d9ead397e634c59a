#include "erbfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "erbfit/error.hpp"

namespace erbfit {

double mesh_area(const TriMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

bool is_watertight(const TriMesh& mesh) {
  if (mesh.empty()) return false;
  std::unordered_map<std::uint64_t, int> edge_count;
  edge_count.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const std::uint64_t a = t[e], b = t[(e + 1) % 3];
      const std::uint64_t key = (std::min(a, b) << 32) | std::max(a, b);
      ++edge_count[key];
    }
  }
  for (const auto& [key, count] : edge_count)
    if (count != 2) return false;
  return true;
}

VolumeResult mesh_volume(const TriMesh& mesh) {
  double six_v = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    six_v += a.dot(b.cross(c));
  }
  return {std::abs(six_v) / 6.0, is_watertight(mesh)};
}

namespace {

// Closest point on triangle abc to p (region decomposition, Ericson).
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                         const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = va + vb + vc;
  if (!(denom > 0.0)) return a;  // degenerate triangle
  const double v = vb / denom, w = vc / denom;
  return a + v * ab + w * ac;
}

struct Aabb {
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};

  void expand(const Vec3& p) {
    lo = min(lo, p);
    hi = max(hi, p);
  }
  void expand(const Aabb& o) {
    lo = min(lo, o.lo);
    hi = max(hi, o.hi);
  }
  double dist2(const Vec3& p) const {
    const double dx = std::fmax(0.0, std::fmax(lo.x - p.x, p.x - hi.x));
    const double dy = std::fmax(0.0, std::fmax(lo.y - p.y, p.y - hi.y));
    const double dz = std::fmax(0.0, std::fmax(lo.z - p.z, p.z - hi.z));
    return dx * dx + dy * dy + dz * dz;
  }
};

// Median-split BVH over triangles for nearest-triangle queries.
class TriangleBvh {
 public:
  explicit TriangleBvh(const TriMesh& mesh) : mesh_(mesh) {
    const std::size_t nt = mesh.triangles.size();
    order_.resize(nt);
    boxes_.resize(nt);
    centroids_.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      order_[t] = static_cast<int>(t);
      Aabb box;
      Vec3 cen{0, 0, 0};
      for (int v : mesh.triangles[t]) {
        box.expand(mesh.vertices[v]);
        cen += mesh.vertices[v];
      }
      boxes_[t] = box;
      centroids_[t] = cen * (1.0 / 3.0);
    }
    nodes_.reserve(2 * nt / kLeafSize + 2);
    if (nt > 0) build(0, nt);
  }

  double min_dist2(const Vec3& p) const {
    double best = 1e300;
    if (nodes_.empty()) return best;
    // Depth-first with box-distance pruning; nearer child first.
    int stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (node.box.dist2(p) >= best) continue;
      if (node.count > 0) {
        for (int t = node.first; t < node.first + node.count; ++t) {
          const auto& tri = mesh_.triangles[order_[t]];
          const Vec3 q =
              closest_on_triangle(p, mesh_.vertices[tri[0]],
                                  mesh_.vertices[tri[1]], mesh_.vertices[tri[2]]);
          best = std::min(best, (p - q).norm2());
        }
        continue;
      }
      const double dl = nodes_[node.left].box.dist2(p);
      const double dr = nodes_[node.right].box.dist2(p);
      if (dl < dr) {
        if (dr < best) stack[top++] = node.right;
        if (dl < best) stack[top++] = node.left;
      } else {
        if (dl < best) stack[top++] = node.left;
        if (dr < best) stack[top++] = node.right;
      }
    }
    return best;
  }

 private:
  static constexpr int kLeafSize = 8;
  struct Node {
    Aabb box;
    int first = 0, count = 0;  // leaf when count > 0
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Aabb box;
    for (std::size_t t = begin; t < end; ++t) box.expand(boxes_[order_[t]]);
    nodes_[index].box = box;
    if (end - begin <= kLeafSize) {
      nodes_[index].first = static_cast<int>(begin);
      nodes_[index].count = static_cast<int>(end - begin);
      return index;
    }
    const Vec3 e = box.hi - box.lo;
    const int axis = (e.x >= e.y && e.x >= e.z) ? 0 : (e.y >= e.z ? 1 : 2);
    const std::size_t mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](int a, int b) {
                       return centroids_[a][axis] < centroids_[b][axis];
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  const TriMesh& mesh_;
  std::vector<int> order_;
  std::vector<Aabb> boxes_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

// All vertices plus ceil(area * density) quasirandom interior points per
// triangle. The per-triangle point sequence is a fixed low-discrepancy
// series, so the sample set at density d is a subset of the set at any
// higher density (nested sampling) and depends only on the mesh.
std::vector<Vec3> sample_surface(const TriMesh& mesh, double density) {
  std::vector<Vec3> samples = mesh.vertices;
  const double g1 = 0.7548776662466927;  // plastic-constant pair
  const double g2 = 0.5698402909980532;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const long n = static_cast<long>(std::ceil(area * density));
    for (long k = 1; k <= n; ++k) {
      double u = std::fmod(0.5 + k * g1, 1.0);
      double v = std::fmod(0.5 + k * g2, 1.0);
      if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
      }
      samples.push_back(a + u * (b - a) + v * (c - a));
    }
  }
  return samples;
}

double directed_max_dist(const std::vector<Vec3>& samples,
                         const TriangleBvh& bvh) {
  double worst = 0.0;
  for (const Vec3& p : samples) worst = std::max(worst, bvh.min_dist2(p));
  return std::sqrt(worst);
}

}  // namespace

double hausdorff(const TriMesh& a, const TriMesh& b, double samples_per_area) {
  if (a.empty() || b.empty())
    throw ValidationError("hausdorff: empty mesh");
  const TriangleBvh bvh_a(a);
  const TriangleBvh bvh_b(b);
  const std::vector<Vec3> sa = sample_surface(a, samples_per_area);
  const std::vector<Vec3> sb = sample_surface(b, samples_per_area);
  return std::max(directed_max_dist(sa, bvh_b), directed_max_dist(sb, bvh_a));
}

ShapeReport compare_shapes(const TriMesh& original, const TriMesh& sparse,
                           double samples_per_area) {
  ShapeReport r;
  r.area_a = mesh_area(original);
  r.area_b = mesh_area(sparse);
  const VolumeResult va = mesh_volume(original);
  const VolumeResult vb = mesh_volume(sparse);
  r.volume_a = va.value;
  r.volume_b = vb.value;
  r.closed_a = va.watertight;
  r.closed_b = vb.watertight;
  r.error_area = std::abs(r.area_b - r.area_a) / r.area_a;
  r.error_volume = std::abs(r.volume_b - r.volume_a) / r.volume_a;
  r.hausdorff = hausdorff(original, sparse, samples_per_area);
  return r;
}

SparseStats sparse_stats(std::size_t n_atoms, std::size_t n_neurons) {
  return {n_atoms, n_neurons,
          static_cast<double>(n_neurons) / static_cast<double>(n_atoms)};
}

void write_report(std::ostream& out, const ShapeReport& r,
                  const std::string& name) {
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s %.10g\n", key, v);
    out << buf;
  };
  out << "erbfit-shape-report 1\n";
  out << "molecule " << name << "\n";
  put("area_original", r.area_a);
  put("area_sparse", r.area_b);
  put("error_area", r.error_area);
  put("volume_original", r.volume_a);
  put("volume_sparse", r.volume_b);
  put("error_volume", r.error_volume);
  put("hausdorff", r.hausdorff);
  if (!r.closed_a) out << "warning mesh_a_not_watertight\n";
  if (!r.closed_b) out << "warning mesh_b_not_watertight\n";
}

void write_report_csv(std::ostream& out, const ShapeReport& r,
                      const std::string& name) {
  char buf[256];
  out << "molecule,area_orig,area_sparse,err_A,vol_orig,vol_sparse,err_V,"
         "hausdorff\n";
  std::snprintf(buf, sizeof(buf),
                "%s,%.10g,%.10g,%.6g,%.10g,%.10g,%.6g,%.6g\n", name.c_str(),
                r.area_a, r.area_b, r.error_area, r.volume_a, r.volume_b,
                r.error_volume, r.hausdorff);
  out << buf;
}

}  // namespace erbfit
