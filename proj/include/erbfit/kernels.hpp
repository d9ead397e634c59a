#pragma once

#include <cstddef>
#include <string>

namespace erbfit::kernels {

// Runtime-selected implementation of the arithmetic inner loops. The scalar
// kernels are the reference; the AVX2 kernels must agree with them within the
// tolerances pinned by the equivalence tests (they use a polynomial exp, so
// agreement is to ~1 ulp per term, not bitwise).
enum class SimdLevel { scalar, avx2 };

// Level chosen at first use: AVX2 when the CPU supports AVX2+FMA, else scalar.
// The ERBFIT_SIMD environment variable ("scalar" or "avx2") overrides.
SimdLevel active_level();
const char* level_name(SimdLevel level);

// Test hook; throws Error if the level is unsupported on this machine.
void force_level(SimdLevel level);

// Atom data laid out structure-of-arrays; r2 holds squared radii.
struct AtomsView {
  const double* x = nullptr;
  const double* y = nullptr;
  const double* z = nullptr;
  const double* r2 = nullptr;
  std::size_t n = 0;
};

// Neuron data laid out structure-of-arrays. rot holds the 3x3 rotation matrix
// of each neuron row-major (9 doubles per neuron); drot holds the three
// per-angle derivative matrices (27 doubles per neuron: d/dalpha, d/dbeta,
// d/dgamma, each row-major). drot may be null for forward-only calls.
struct NeuronsView {
  const double* w_tilde = nullptr;  // n
  const double* d_tilde = nullptr;  // 3n
  const double* center = nullptr;   // 3n
  const double* rot = nullptr;      // 9n
  const double* drot = nullptr;     // 27n
  std::size_t n = 0;
};

// out[m] = sum_i exp(-decay * (|p_m - x_i|^2 - r2_i)).
// When cutoff > 0, terms whose exponent argument is below -cutoff contribute
// exactly zero (both implementations apply the same predicate).
void phi_block(const AtomsView& atoms, double decay, double cutoff,
               const double* px, const double* py, const double* pz,
               std::size_t np, double* out);

// out[m] = sum_i wt_i^2 * exp(-sum_q (dt_iq^2 * y_q)^2), y = rot_i (p_m - c_i).
void forward_block(const NeuronsView& neurons, const double* px,
                   const double* py, const double* pz, std::size_t np,
                   double* out);

// Fused E_s and its gradient over a batch:
//   E_s        = sum_m (Psi(p_m) - target_m)^2
//   grad_es    = d E_s / d sigma, neuron-major (w~, d~ x3, c x3, alpha, beta,
//                gamma), length 10n — overwritten, not accumulated.
// Scratch (caller-allocated): psi of size n * round_up4(np), acc and resid of
// size round_up4(np) each. Returns E_s.
double es_grad_block(const NeuronsView& neurons, const double* px,
                     const double* py, const double* pz, const double* target,
                     std::size_t np, double* grad_es, double* psi, double* acc,
                     double* resid);

inline std::size_t round_up4(std::size_t n) { return (n + 3) & ~std::size_t(3); }

}  // namespace erbfit::kernels
