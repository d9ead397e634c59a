#pragma once

#include "erbfit/kernels.hpp"

// Per-implementation entry points wired up by the dispatcher in kernels.cpp.

namespace erbfit::kernels {

void phi_block_scalar(const AtomsView&, double decay, double cutoff,
                      const double* px, const double* py, const double* pz,
                      std::size_t np, double* out);
void forward_block_scalar(const NeuronsView&, const double* px,
                          const double* py, const double* pz, std::size_t np,
                          double* out);
double es_grad_block_scalar(const NeuronsView&, const double* px,
                            const double* py, const double* pz,
                            const double* target, std::size_t np,
                            double* grad_es, double* psi, double* acc,
                            double* resid);

bool avx2_available();

void phi_block_avx2(const AtomsView&, double decay, double cutoff,
                    const double* px, const double* py, const double* pz,
                    std::size_t np, double* out);
void forward_block_avx2(const NeuronsView&, const double* px, const double* py,
                        const double* pz, std::size_t np, double* out);
double es_grad_block_avx2(const NeuronsView&, const double* px,
                          const double* py, const double* pz,
                          const double* target, std::size_t np,
                          double* grad_es, double* psi, double* acc,
                          double* resid);

}  // namespace erbfit::kernels
