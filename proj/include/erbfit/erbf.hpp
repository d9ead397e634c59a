#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "erbfit/kernels.hpp"
#include "erbfit/vec.hpp"

namespace erbfit {

// One ellipsoid Gaussian neuron in substituted (tilde) variables: the
// physical weight is w_tilde^2 and the physical axis entries are d_tilde^2,
// so both are non-negative by construction and the L1 penalty is smooth.
// Activation: psi(x) = exp(-sum_q (d_tilde_q^2 * y_q)^2), y = R(angles)(x-c).
struct ErbfNeuron {
  double w_tilde = 0.0;
  Vec3 d_tilde;
  Vec3 center;
  Vec3 angles;  // (alpha, beta, gamma) radians, unconstrained
};

struct ErbfParams {
  std::vector<ErbfNeuron> neurons;

  std::size_t neuron_count() const { return neurons.size(); }
  std::size_t scalar_count() const { return 10 * neurons.size(); }
};

struct LossWeights {
  double rho1 = 1.0;  // sparsity
  double rho2 = 1.0;  // accuracy
};

// Total rotation R = Rz(gamma) * Ry(beta) * Rx(alpha), written as the
// expanded closed form (the factored product is the test oracle).
Mat3 rotation_matrix(const Vec3& angles);
// Partial derivatives of the rotation with respect to each angle,
// computed as Rz Ry Rx' etc.
void rotation_matrix_derivs(const Vec3& angles, Mat3& d_alpha, Mat3& d_beta,
                            Mat3& d_gamma);

double psi(const ErbfNeuron& neuron, const Vec3& x);

// Network output Psi(x) = sum_i w_tilde_i^2 psi_i(x); >= 0 for any params.
double forward(const ErbfParams& params, const Vec3& x);
void forward_many(const ErbfParams& params, std::span<const Vec3> points,
                  std::vector<double>& out);

// Loss of the sparse representation:
//   rho1 (sum_i w~_i^2 + sum_iq d~_iq^2) + rho2 sum_m (Psi(x_m) - t_m)^2.
// Throws NumericalError if the result is non-finite.
double loss(const ErbfParams& params, std::span<const Vec3> points,
            std::span<const double> targets, const LossWeights& weights);

// Analytic gradient of loss, flat neuron-major layout: per neuron
// [w~, d~x, d~y, d~z, cx, cy, cz, alpha, beta, gamma].
std::vector<double> loss_gradient(const ErbfParams& params,
                                  std::span<const Vec3> points,
                                  std::span<const double> targets,
                                  const LossWeights& weights);

// Flat parameter vector in the gradient's layout.
std::vector<double> pack(const ErbfParams& params);
void unpack(std::span<const double> flat, ErbfParams& params);

// SoA neuron data with precomputed rotations, ready for the block kernels.
struct PackedNeurons {
  std::vector<double> w_tilde;  // n
  std::vector<double> d_tilde;  // 3n
  std::vector<double> center;   // 3n
  std::vector<double> rot;      // 9n
  std::vector<double> drot;     // 27n (only when with_derivs)

  void build(const ErbfParams& params, bool with_derivs);
  kernels::NeuronsView view() const {
    return {w_tilde.data(), d_tilde.data(),  center.data(),
            rot.data(),     drot.empty() ? nullptr : drot.data(),
            w_tilde.size()};
  }
};

// L1 term of the loss in substituted variables and its gradient
// contribution (2 rho1 w~, 2 rho1 d~_q; zero for centers and angles).
double l1_term(const ErbfParams& params);

}  // namespace erbfit
