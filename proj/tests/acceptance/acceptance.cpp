// Acceptance suite: one pass/fail line per criterion, exit status = number
// of failed criteria. Usage: erbfit_acceptance [data_dir]

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "erbfit/cli.hpp"
#include "erbfit/density.hpp"
#include "erbfit/erbf.hpp"
#include "erbfit/mesher.hpp"
#include "erbfit/metrics.hpp"
#include "erbfit/pqr.hpp"
#include "erbfit/trainer.hpp"

#include "../testutil.hpp"

using namespace erbfit;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report(const char* id, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id,
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double max_abs_network_vs_map(const AtomSet& atoms, double decay,
                              std::uint64_t seed) {
  const ErbfParams params = initialize(atoms, decay);
  const DensityMap map{atoms, decay, 0.0};
  const BoundingBox box = bounding_box(atoms, 5.0);
  std::mt19937_64 gen(seed);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i)
    pts.push_back({uniform_range(gen, box.min_corner.x, box.max_corner.x),
                   uniform_range(gen, box.min_corner.y, box.max_corner.y),
                   uniform_range(gen, box.min_corner.z, box.max_corner.z)});
  std::vector<double> net, ref;
  forward_many(params, pts, net);
  phi_many(map, pts, ref);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i)
    worst = std::max(worst, std::abs(net[i] - ref[i]));
  return worst;
}

// ---- criteria ----

void c1_init_exactness(const AtomSet& m39, const AtomSet& m163) {
  Timer timer;
  const double w39 = max_abs_network_vs_map(m39, 0.5, 1001);
  const double w163 = max_abs_network_vs_map(m163, 0.5, 1002);
  const double worst = std::max(w39, w163);
  const double secs = timer.seconds();
  report("C1", worst < 1e-10 && secs < 1.0,
         fmt("initialization exactness: max |Psi-phi| = %.2e over 2x1000 "
             "random points (< 1e-10)",
             worst),
         secs);
}

void c2_gradient_oracle() {
  Timer timer;
  std::mt19937_64 gen(77);
  double worst_rel = 0.0;
  bool pass = true;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + gen() % 5;
    const std::size_t np = 1 + gen() % 50;
    ErbfParams params = testutil::random_params(gen, n);
    auto pts = testutil::random_points(gen, np, -4, 4);
    std::vector<double> targets;
    for (std::size_t m = 0; m < np; ++m)
      targets.push_back(uniform_range(gen, 0.0, 2.5));
    const LossWeights w{uniform_range(gen, 0.0, 2.0),
                        uniform_range(gen, 0.1, 2.0)};

    const std::vector<double> analytic =
        loss_gradient(params, pts, targets, w);
    std::vector<double> flat = pack(params);
    ErbfParams work = params;
    const double h = 1e-5;
    for (std::size_t k = 0; k < flat.size(); ++k) {
      const double saved = flat[k];
      flat[k] = saved + h;
      unpack(flat, work);
      const double up = loss(work, pts, targets, w);
      flat[k] = saved - h;
      unpack(flat, work);
      const double down = loss(work, pts, targets, w);
      flat[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double abs_err = std::abs(analytic[k] - numeric);
      if (abs_err < 1e-8) continue;  // absolute floor for tiny components
      const double rel = abs_err / std::abs(analytic[k]);
      worst_rel = std::max(worst_rel, rel);
      if (rel >= 1e-5) pass = false;
    }
    unpack(flat, work);
  }
  const double secs = timer.seconds();
  report("C2", pass && secs < 10.0,
         fmt("gradient vs central differences: worst rel err = %.2e "
             "(< 1e-5, abs floor 1e-8)",
             worst_rel),
         secs);
}

struct TrainedSet {
  std::vector<TrainResult> m39_by_seed;  // seeds 42..46
  TrainResult m163, m307, m552;
};

void c3_sparsity_small(const AtomSet& m39, TrainedSet& trained) {
  Timer timer;
  bool pass = true;
  std::size_t best = SIZE_MAX;
  std::string counts;
  for (std::uint64_t seed = 42; seed <= 46; ++seed) {
    Timer one;
    TrainConfig config;
    config.seed = seed;
    TrainResult result = train(m39, config);
    if (one.seconds() > 600.0) pass = false;
    const std::size_t n = result.params.neuron_count();
    best = std::min(best, n);
    counts += (counts.empty() ? "" : ",") + std::to_string(n);
    if (n > 13) pass = false;
    trained.m39_by_seed.push_back(std::move(result));
  }
  if (best > 8) pass = false;
  report("C3", pass,
         fmt("sparsity, 39-atom molecule x5 seeds: final counts {%s} "
             "(every <= 13, best %zu <= 8)",
             counts.c_str(), best),
         timer.seconds());
}

void c4_ratio_band(const AtomSet& m163, const AtomSet& m307,
                   const AtomSet& m552, TrainedSet& trained) {
  Timer timer;
  TrainConfig config;
  trained.m163 = train(m163, config);
  trained.m307 = train(m307, config);
  trained.m552 = train(m552, config);
  bool pass = true;
  std::string detail = "sparse ratios:";
  for (const TrainResult* r : {&trained.m163, &trained.m307, &trained.m552}) {
    const double ratio = double(r->params.neuron_count()) / r->atom_count;
    detail += fmt(" %zu/%zu=%.4f", r->params.neuron_count(), r->atom_count,
                  ratio);
    if (!(ratio > 0.031 && ratio < 0.20)) pass = false;
  }
  detail += " (band (0.031, 0.20))";
  report("C4", pass, detail, timer.seconds());
}

void c5_shape_preservation(const AtomSet& m39, const AtomSet& m163,
                           const TrainedSet& trained) {
  Timer timer;
  bool pass = true;
  std::string detail = "shape vs original at 0.5 A:";
  struct Case {
    const AtomSet* atoms;
    const TrainResult* result;
  } cases[] = {{&m39, &trained.m39_by_seed[0]}, {&m163, &trained.m163}};
  for (const Case& c : cases) {
    const DensityMap map{*c.atoms, 0.5, 0.0};
    const TriMesh orig = mesh_from_map(map, c.result->box, 0.5, 1.0);
    const TriMesh sparse =
        mesh_from_model(c.result->params, c.result->box, 0.5, 1.0);
    const ShapeReport r = compare_shapes(orig, sparse);
    detail += fmt(" [%zu atoms: errA=%.4f errV=%.4f H=%.3f]",
                  c.atoms->size(), r.error_area, r.error_volume, r.hausdorff);
    if (!(r.error_area <= 0.05 && r.error_volume <= 0.02 &&
          r.hausdorff <= 1.0))
      pass = false;
  }
  detail += " (errA <= 0.05, errV <= 0.02, H <= 1.0)";
  report("C5", pass, detail, timer.seconds());
}

void c6_mesh_metric_oracles() {
  Timer timer;
  constexpr double kPi = 3.14159265358979323846;
  bool pass = true;
  std::string detail;

  // Icosphere of radius 2 refined until the longest edge is <= 0.1.
  TriMesh sphere = testutil::icosphere(2.0, 5);
  double max_edge = 0.0;
  for (const auto& t : sphere.triangles)
    for (int e = 0; e < 3; ++e)
      max_edge = std::max(max_edge, (sphere.vertices[t[e]] -
                                     sphere.vertices[t[(e + 1) % 3]])
                                        .norm());
  if (max_edge > 0.1) pass = false;
  const double area = mesh_area(sphere);
  const double vol = mesh_volume(sphere).value;
  const double area_err = std::abs(area - 16.0 * kPi) / (16.0 * kPi);
  const double vol_err =
      std::abs(vol - 32.0 * kPi / 3.0) / (32.0 * kPi / 3.0);
  if (area_err > 0.01 || vol_err > 0.01) pass = false;
  detail += fmt("sphere r=2 (edge %.3f): area err %.2e, volume err %.2e;",
                max_edge, area_err, vol_err);

  const TriMesh cube = testutil::cube_mesh(0.5);
  const double cube_area = mesh_area(cube);
  const double cube_vol = mesh_volume(cube).value;
  if (std::abs(cube_area - 6.0) > 1e-9 || std::abs(cube_vol - 1.0) > 1e-9)
    pass = false;
  detail += fmt(" cube: area %.12f, volume %.12f;", cube_area, cube_vol);

  const TriMesh small = testutil::icosphere(1.0, 3);
  const double self = hausdorff(small, small);
  if (!(self < 1e-12)) pass = false;
  detail += fmt(" hausdorff(self) = %.1e", self);

  report("C6", pass, detail, timer.seconds());
}

void c7_trainer_trace(const TrainedSet& trained) {
  Timer timer;
  const TrainTrace& trace = trained.m552.trace;
  const auto& rows = trace.rows;
  bool pass = rows.size() == 10000;

  bool non_increasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].neuron_count > rows[i - 1].neuron_count)
      non_increasing = false;

  bool frozen = true;
  for (std::size_t i = 6000; i < rows.size(); ++i)
    if (rows[i].neuron_count != rows[5999].neuron_count) frozen = false;

  double max_pre = 0.0, max_post = 0.0;
  for (std::size_t i = 5500; i < 6000; ++i)
    max_pre = std::max(max_pre, rows[i].loss);
  for (std::size_t i = 6000; i < 6500; ++i)
    max_post = std::max(max_post, rows[i].loss);
  const bool abrupt = max_pre > 2.0 * max_post;

  pass = pass && non_increasing && frozen && abrupt;
  report("C7", pass,
         fmt("552-atom trace: count %zu->%ld non-increasing=%d, frozen after "
             "sparse_iter=%d, loss drop at 6000: %.1f -> %.1f (>2x)",
             trained.m552.atom_count, rows.back().neuron_count,
             int(non_increasing), int(frozen), max_pre, max_post),
         timer.seconds());
}

void c8_determinism(const std::string& pqr_path) {
  Timer timer;
  const fs::path dir = fs::temp_directory_path() / "erbfit_acceptance";
  fs::create_directories(dir);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
  };
  auto run = [&](const std::string& tag) {
    const std::string model = (dir / ("det_" + tag + ".model")).string();
    const std::string trace = (dir / ("det_" + tag + ".csv")).string();
    return run_cli({"sparsify", "--input", pqr_path, "--out", model,
                    "--trace", trace, "--seed", "42"}) == 0;
  };
  const bool ok = run("a") && run("b");
  const bool models_equal =
      ok && slurp(dir / "det_a.model") == slurp(dir / "det_b.model");
  const bool traces_equal =
      ok && slurp(dir / "det_a.csv") == slurp(dir / "det_b.csv");
  fs::remove_all(dir);
  report("C8", ok && models_equal && traces_equal,
         fmt("determinism: same-seed runs byte-identical (model %s, trace %s)",
             models_equal ? "yes" : "NO", traces_equal ? "yes" : "NO"),
         timer.seconds());
}

void c9_rotation_suite() {
  Timer timer;
  std::mt19937_64 gen(99);
  double worst_orth = 0.0, worst_det = 0.0, worst_closed = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 ang{uniform_range(gen, -6.5, 6.5),
                   uniform_range(gen, -6.5, 6.5),
                   uniform_range(gen, -6.5, 6.5)};
    const Mat3 r = rotation_matrix(ang);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) dot += r.m[k][i] * r.m[k][j];
        worst_orth = std::max(worst_orth,
                              std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
    worst_det = std::max(worst_det, std::abs(r.det() - 1.0));

    Mat3 rx = Mat3::identity(), ry = Mat3::identity(), rz = Mat3::identity();
    rx.m[1][1] = std::cos(ang.x);
    rx.m[1][2] = -std::sin(ang.x);
    rx.m[2][1] = std::sin(ang.x);
    rx.m[2][2] = std::cos(ang.x);
    ry.m[0][0] = std::cos(ang.y);
    ry.m[0][2] = std::sin(ang.y);
    ry.m[2][0] = -std::sin(ang.y);
    ry.m[2][2] = std::cos(ang.y);
    rz.m[0][0] = std::cos(ang.z);
    rz.m[0][1] = -std::sin(ang.z);
    rz.m[1][0] = std::sin(ang.z);
    rz.m[1][1] = std::cos(ang.z);
    const Mat3 product = rz * ry * rx;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        worst_closed = std::max(worst_closed,
                                std::abs(r.m[i][j] - product.m[i][j]));
  }
  report("C9",
         worst_orth < 1e-12 && worst_det <= 1e-12 && worst_closed <= 1e-14,
         fmt("rotations x1000: orthogonality %.1e (<1e-12), |det-1| %.1e "
             "(<=1e-12), closed form vs product %.1e (<=1e-14)",
             worst_orth, worst_det, worst_closed),
         timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data_dir = argc > 1 ? argv[1] : "data";
  const std::string p39 = data_dir + "/mol039.pqr";
  AtomSet m39, m163, m307, m552;
  try {
    m39 = parse_pqr_file(p39);
    m163 = parse_pqr_file(data_dir + "/mol163.pqr");
    m307 = parse_pqr_file(data_dir + "/mol307.pqr");
    m552 = parse_pqr_file(data_dir + "/mol552.pqr");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load benchmark molecules from '%s': %s\n",
                 data_dir.c_str(), e.what());
    return 99;
  }

  TrainedSet trained;
  c1_init_exactness(m39, m163);
  c2_gradient_oracle();
  c3_sparsity_small(m39, trained);
  c4_ratio_band(m163, m307, m552, trained);
  c5_shape_preservation(m39, m163, trained);
  c6_mesh_metric_oracles();
  c7_trainer_trace(trained);
  c8_determinism(p39);
  c9_rotation_suite();

  std::printf("%d/9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
