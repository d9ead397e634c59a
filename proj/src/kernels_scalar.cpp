#include <cmath>

#include "kernels_internal.hpp"

// Reference implementations. Plain loops, libm exp; the SIMD variants are
// validated against these.

namespace erbfit::kernels {

void phi_block_scalar(const AtomsView& atoms, double decay, double cutoff,
                      const double* px, const double* py, const double* pz,
                      std::size_t np, double* out) {
  for (std::size_t m = 0; m < np; ++m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < atoms.n; ++i) {
      const double dx = px[m] - atoms.x[i];
      const double dy = py[m] - atoms.y[i];
      const double dz = pz[m] - atoms.z[i];
      const double arg = -decay * (dx * dx + dy * dy + dz * dz - atoms.r2[i]);
      if (cutoff > 0.0 && arg < -cutoff) continue;
      sum += std::exp(arg);
    }
    out[m] = sum;
  }
}

namespace {

// Exponent of the substituted ellipsoid kernel: sum_q (dt_q^2 * y_q)^2 with
// y = R (p - c).
inline double erbf_exponent(const double* dt, const double* c, const double* R,
                            double px, double py, double pz) {
  const double ux = px - c[0];
  const double uy = py - c[1];
  const double uz = pz - c[2];
  const double y0 = R[0] * ux + R[1] * uy + R[2] * uz;
  const double y1 = R[3] * ux + R[4] * uy + R[5] * uz;
  const double y2 = R[6] * ux + R[7] * uy + R[8] * uz;
  const double z0 = dt[0] * dt[0] * y0;
  const double z1 = dt[1] * dt[1] * y1;
  const double z2 = dt[2] * dt[2] * y2;
  return z0 * z0 + z1 * z1 + z2 * z2;
}

}  // namespace

void forward_block_scalar(const NeuronsView& nrn, const double* px,
                          const double* py, const double* pz, std::size_t np,
                          double* out) {
  for (std::size_t m = 0; m < np; ++m) out[m] = 0.0;
  for (std::size_t i = 0; i < nrn.n; ++i) {
    const double w2 = nrn.w_tilde[i] * nrn.w_tilde[i];
    const double* dt = nrn.d_tilde + 3 * i;
    const double* c = nrn.center + 3 * i;
    const double* R = nrn.rot + 9 * i;
    for (std::size_t m = 0; m < np; ++m) {
      const double s = erbf_exponent(dt, c, R, px[m], py[m], pz[m]);
      out[m] += w2 * std::exp(-s);
    }
  }
}

double es_grad_block_scalar(const NeuronsView& nrn, const double* px,
                            const double* py, const double* pz,
                            const double* target, std::size_t np,
                            double* grad_es, double* psi, double* acc,
                            double* resid) {
  const std::size_t np4 = round_up4(np);

  // Pass A: activations and residuals.
  for (std::size_t m = 0; m < np; ++m) acc[m] = 0.0;
  for (std::size_t i = 0; i < nrn.n; ++i) {
    const double w2 = nrn.w_tilde[i] * nrn.w_tilde[i];
    const double* dt = nrn.d_tilde + 3 * i;
    const double* c = nrn.center + 3 * i;
    const double* R = nrn.rot + 9 * i;
    double* psi_row = psi + i * np4;
    for (std::size_t m = 0; m < np; ++m) {
      const double s = erbf_exponent(dt, c, R, px[m], py[m], pz[m]);
      const double p = std::exp(-s);
      psi_row[m] = p;
      acc[m] += w2 * p;
    }
  }
  double es = 0.0;
  for (std::size_t m = 0; m < np; ++m) {
    resid[m] = acc[m] - target[m];
    es += resid[m] * resid[m];
  }

  // Pass B: chain rule per neuron. With s = sum_q (dt_q^2 y_q)^2:
  //   d s / d dt_q  = 4 dt_q^3 y_q^2
  //   d s / d c     = -2 R^T v,            v_q = dt_q^4 y_q
  //   d s / d angle = 2 v . (dR/dangle u)
  // and dE_s/dX = sum_m 2 resid_m * w~^2 * psi * (-ds/dX), except for w~
  // where dE_s/dw~ = sum_m 2 resid_m * 2 w~ * psi.
  for (std::size_t i = 0; i < nrn.n; ++i) {
    const double wt = nrn.w_tilde[i];
    const double w2 = wt * wt;
    const double* dt = nrn.d_tilde + 3 * i;
    const double* c = nrn.center + 3 * i;
    const double* R = nrn.rot + 9 * i;
    const double* Ra = nrn.drot + 27 * i;
    const double* Rb = Ra + 9;
    const double* Rg = Ra + 18;
    const double* psi_row = psi + i * np4;

    const double d2[3] = {dt[0] * dt[0], dt[1] * dt[1], dt[2] * dt[2]};
    const double d4[3] = {d2[0] * d2[0], d2[1] * d2[1], d2[2] * d2[2]};
    const double d3x4[3] = {4.0 * dt[0] * d2[0], 4.0 * dt[1] * d2[1],
                            4.0 * dt[2] * d2[2]};

    double gw = 0.0, gd0 = 0.0, gd1 = 0.0, gd2 = 0.0;
    double gc0 = 0.0, gc1 = 0.0, gc2 = 0.0;
    double ga = 0.0, gb = 0.0, gg = 0.0;

    for (std::size_t m = 0; m < np; ++m) {
      const double ux = px[m] - c[0];
      const double uy = py[m] - c[1];
      const double uz = pz[m] - c[2];
      const double y0 = R[0] * ux + R[1] * uy + R[2] * uz;
      const double y1 = R[3] * ux + R[4] * uy + R[5] * uz;
      const double y2 = R[6] * ux + R[7] * uy + R[8] * uz;
      const double v0 = d4[0] * y0;
      const double v1 = d4[1] * y1;
      const double v2 = d4[2] * y2;

      const double p = psi_row[m];
      const double g = 2.0 * resid[m];
      const double common = g * w2 * p;

      gw += g * 2.0 * wt * p;
      gd0 -= common * d3x4[0] * y0 * y0;
      gd1 -= common * d3x4[1] * y1 * y1;
      gd2 -= common * d3x4[2] * y2 * y2;

      // ds/dc = -2 R^T v  =>  contribution +2 common (R^T v)
      gc0 += 2.0 * common * (R[0] * v0 + R[3] * v1 + R[6] * v2);
      gc1 += 2.0 * common * (R[1] * v0 + R[4] * v1 + R[7] * v2);
      gc2 += 2.0 * common * (R[2] * v0 + R[5] * v1 + R[8] * v2);

      const double ta = v0 * (Ra[0] * ux + Ra[1] * uy + Ra[2] * uz) +
                        v1 * (Ra[3] * ux + Ra[4] * uy + Ra[5] * uz) +
                        v2 * (Ra[6] * ux + Ra[7] * uy + Ra[8] * uz);
      const double tb = v0 * (Rb[0] * ux + Rb[1] * uy + Rb[2] * uz) +
                        v1 * (Rb[3] * ux + Rb[4] * uy + Rb[5] * uz) +
                        v2 * (Rb[6] * ux + Rb[7] * uy + Rb[8] * uz);
      const double tg = v0 * (Rg[0] * ux + Rg[1] * uy + Rg[2] * uz) +
                        v1 * (Rg[3] * ux + Rg[4] * uy + Rg[5] * uz) +
                        v2 * (Rg[6] * ux + Rg[7] * uy + Rg[8] * uz);
      ga -= 2.0 * common * ta;
      gb -= 2.0 * common * tb;
      gg -= 2.0 * common * tg;
    }

    double* g = grad_es + 10 * i;
    g[0] = gw;
    g[1] = gd0;
    g[2] = gd1;
    g[3] = gd2;
    g[4] = gc0;
    g[5] = gc1;
    g[6] = gc2;
    g[7] = ga;
    g[8] = gb;
    g[9] = gg;
  }
  return es;
}

}  // namespace erbfit::kernels
