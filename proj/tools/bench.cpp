// Kernel throughput comparison between the scalar reference and the SIMD
// variants, on workloads shaped like real training iterations.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "erbfit/erbf.hpp"
#include "erbfit/error.hpp"
#include "erbfit/kernels.hpp"
#include "erbfit/rng.hpp"

using namespace erbfit;
namespace kn = erbfit::kernels;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Workload {
  std::vector<double> ax, ay, az, ar2;        // atoms
  PackedNeurons packed;                        // neurons with derivatives
  std::vector<double> px, py, pz, targets;     // batch points
  std::size_t n_atoms, n_neurons, n_points;

  kn::AtomsView atoms() const {
    return {ax.data(), ay.data(), az.data(), ar2.data(), n_atoms};
  }
};

Workload make_workload(std::size_t n_atoms, std::size_t n_points) {
  std::mt19937_64 gen(12345);
  Workload w;
  w.n_atoms = n_atoms;
  w.n_neurons = n_atoms;
  w.n_points = n_points;
  ErbfParams params;
  for (std::size_t i = 0; i < n_atoms; ++i) {
    const double x = uniform_range(gen, -10, 10);
    const double y = uniform_range(gen, -10, 10);
    const double z = uniform_range(gen, -10, 10);
    const double r = uniform_range(gen, 1.1, 1.9);
    w.ax.push_back(x);
    w.ay.push_back(y);
    w.az.push_back(z);
    w.ar2.push_back(r * r);
    ErbfNeuron nr;
    nr.w_tilde = uniform_range(gen, 0.5, 2.0);
    nr.d_tilde = {uniform_range(gen, 0.6, 1.0), uniform_range(gen, 0.6, 1.0),
                  uniform_range(gen, 0.6, 1.0)};
    nr.center = {x, y, z};
    nr.angles = {uniform_range(gen, -3, 3), uniform_range(gen, -3, 3),
                 uniform_range(gen, -3, 3)};
    params.neurons.push_back(nr);
  }
  w.packed.build(params, true);
  for (std::size_t m = 0; m < n_points; ++m) {
    w.px.push_back(uniform_range(gen, -14, 14));
    w.py.push_back(uniform_range(gen, -14, 14));
    w.pz.push_back(uniform_range(gen, -14, 14));
    w.targets.push_back(uniform_range(gen, 0.0, 2.0));
  }
  return w;
}

template <typename F>
double time_best_of(int reps, F&& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    body();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

void run_suite(const Workload& w, kn::SimdLevel level) {
  kn::force_level(level);
  const std::size_t np = w.n_points;
  const std::size_t np4 = kn::round_up4(np);
  std::vector<double> out(np), grad(10 * w.n_neurons), psi(w.n_neurons * np4),
      acc(np4), resid(np4);

  const double t_phi = time_best_of(5, [&] {
    kn::phi_block(w.atoms(), 0.5, 0.0, w.px.data(), w.py.data(), w.pz.data(),
                  np, out.data());
  });
  const double t_fwd = time_best_of(5, [&] {
    kn::forward_block(w.packed.view(), w.px.data(), w.py.data(), w.pz.data(),
                      np, out.data());
  });
  const double t_grad = time_best_of(5, [&] {
    kn::es_grad_block(w.packed.view(), w.px.data(), w.py.data(), w.pz.data(),
                      w.targets.data(), np, grad.data(), psi.data(),
                      acc.data(), resid.data());
  });

  const double pairs = double(w.n_atoms) * double(np);
  std::printf("%-6s  phi %7.1f Mpair/s   forward %7.1f Mpair/s   es+grad %7.1f Mpair/s\n",
              kn::level_name(level), pairs / t_phi / 1e6, pairs / t_fwd / 1e6,
              pairs / t_grad / 1e6);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_atoms = argc > 1 ? std::stoul(argv[1]) : 552;
  const std::size_t n_points = argc > 2 ? std::stoul(argv[2]) : 1000;
  std::printf("workload: %zu atoms/neurons x %zu points\n", n_atoms, n_points);
  const Workload w = make_workload(n_atoms, n_points);
  run_suite(w, kn::SimdLevel::scalar);
  try {
    run_suite(w, kn::SimdLevel::avx2);
  } catch (const Error&) {
    std::printf("avx2    unavailable on this CPU\n");
  }
  return 0;
}
