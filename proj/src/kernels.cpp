#include "erbfit/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "erbfit/error.hpp"
#include "kernels_internal.hpp"

namespace erbfit::kernels {

namespace {

SimdLevel detect_level() {
  if (const char* env = std::getenv("ERBFIT_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return SimdLevel::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_available())
        throw Error("ERBFIT_SIMD=avx2 requested but CPU lacks AVX2+FMA");
      return SimdLevel::avx2;
    }
    throw Error(std::string("unknown ERBFIT_SIMD value '") + env + "'");
  }
  return avx2_available() ? SimdLevel::avx2 : SimdLevel::scalar;
}

SimdLevel& level_ref() {
  static SimdLevel level = detect_level();
  return level;
}

}  // namespace

SimdLevel active_level() { return level_ref(); }

const char* level_name(SimdLevel level) {
  return level == SimdLevel::avx2 ? "avx2" : "scalar";
}

void force_level(SimdLevel level) {
  if (level == SimdLevel::avx2 && !avx2_available())
    throw Error("cannot force avx2 kernels: CPU lacks AVX2+FMA");
  level_ref() = level;
}

void phi_block(const AtomsView& atoms, double decay, double cutoff,
               const double* px, const double* py, const double* pz,
               std::size_t np, double* out) {
  if (active_level() == SimdLevel::avx2)
    phi_block_avx2(atoms, decay, cutoff, px, py, pz, np, out);
  else
    phi_block_scalar(atoms, decay, cutoff, px, py, pz, np, out);
}

void forward_block(const NeuronsView& neurons, const double* px,
                   const double* py, const double* pz, std::size_t np,
                   double* out) {
  if (active_level() == SimdLevel::avx2)
    forward_block_avx2(neurons, px, py, pz, np, out);
  else
    forward_block_scalar(neurons, px, py, pz, np, out);
}

double es_grad_block(const NeuronsView& neurons, const double* px,
                     const double* py, const double* pz, const double* target,
                     std::size_t np, double* grad_es, double* psi, double* acc,
                     double* resid) {
  if (active_level() == SimdLevel::avx2)
    return es_grad_block_avx2(neurons, px, py, pz, target, np, grad_es, psi,
                              acc, resid);
  return es_grad_block_scalar(neurons, px, py, pz, target, np, grad_es, psi,
                              acc, resid);
}

}  // namespace erbfit::kernels
