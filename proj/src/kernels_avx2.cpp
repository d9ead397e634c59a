#include "erbfit/error.hpp"
#include "kernels_internal.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define ERBFIT_X86 1
#else
#define ERBFIT_X86 0
#endif

#if ERBFIT_X86 && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cstdint>
#include <limits>

namespace erbfit::kernels {

namespace {

// Mask with the low `rem` lanes active, rem in [0, 4].
inline __m256i tail_mask(std::size_t rem) {
  alignas(32) static const std::int64_t table[8] = {-1, -1, -1, -1, 0, 0, 0, 0};
  return _mm256_loadu_si256(
      reinterpret_cast<const __m256i*>(table + 4 - rem));
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

inline __m256d bcast(double v) { return _mm256_set1_pd(v); }

// Four-lane exp. Cephes-style: split x = n ln2 + r, rational approximation of
// exp(r) on |r| <= ln2/2, scale by 2^n through the exponent bits. Inputs below
// -708 flush to zero, above +709 clamp (the kernels only ever produce
// arguments <= decay*max_radius^2); NaN propagates.
inline __m256d exp4(__m256d x) {
  const __m256d kLog2e = bcast(1.4426950408889634074);
  const __m256d kLn2Hi = bcast(6.93145751953125e-1);
  const __m256d kLn2Lo = bcast(1.42860682030941723212e-6);
  const __m256d kP0 = bcast(1.26177193074810590878e-4);
  const __m256d kP1 = bcast(3.02994407707441961300e-2);
  const __m256d kP2 = bcast(9.99999999999999999910e-1);
  const __m256d kQ0 = bcast(3.00198505138664455042e-6);
  const __m256d kQ1 = bcast(2.52448340349684104192e-3);
  const __m256d kQ2 = bcast(2.27265548208155028766e-1);
  const __m256d kQ3 = bcast(2.00000000000000000005e0);
  const __m256d kLo = bcast(-708.0);
  const __m256d kHi = bcast(709.0);

  const __m256d nan_in = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  const __m256d under = _mm256_cmp_pd(x, kLo, _CMP_LT_OQ);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, kLo), kHi);

  const __m256d n = _mm256_round_pd(
      _mm256_mul_pd(xc, kLog2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kLn2Hi, xc);
  r = _mm256_fnmadd_pd(n, kLn2Lo, r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_fmadd_pd(kP0, rr, kP1);
  p = _mm256_fmadd_pd(p, rr, kP2);
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_fmadd_pd(kQ0, rr, kQ1);
  q = _mm256_fmadd_pd(q, rr, kQ2);
  q = _mm256_fmadd_pd(q, rr, kQ3);
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, bcast(2.0), bcast(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i scale_bits =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(scale_bits));

  e = _mm256_andnot_pd(under, e);
  return _mm256_blendv_pd(e, x, nan_in);
}

struct Pts {
  __m256d x, y, z;
};

inline Pts load_pts(const double* px, const double* py, const double* pz,
                    std::size_t m, std::size_t rem) {
  if (rem >= 4)
    return {_mm256_loadu_pd(px + m), _mm256_loadu_pd(py + m),
            _mm256_loadu_pd(pz + m)};
  const __m256i mask = tail_mask(rem);
  return {_mm256_maskload_pd(px + m, mask), _mm256_maskload_pd(py + m, mask),
          _mm256_maskload_pd(pz + m, mask)};
}

}  // namespace

bool avx2_available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

void phi_block_avx2(const AtomsView& atoms, double decay, double cutoff,
                    const double* px, const double* py, const double* pz,
                    std::size_t np, double* out) {
  const __m256d dk = bcast(decay);
  const __m256d neg_cut = bcast(cutoff > 0.0
                                    ? -cutoff
                                    : -std::numeric_limits<double>::infinity());
  for (std::size_t m = 0; m < np; m += 4) {
    const std::size_t rem = np - m;
    const Pts pt = load_pts(px, py, pz, m, rem);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < atoms.n; ++i) {
      const __m256d dx = _mm256_sub_pd(pt.x, bcast(atoms.x[i]));
      const __m256d dy = _mm256_sub_pd(pt.y, bcast(atoms.y[i]));
      const __m256d dz = _mm256_sub_pd(pt.z, bcast(atoms.z[i]));
      __m256d d2 = _mm256_mul_pd(dx, dx);
      d2 = _mm256_fmadd_pd(dy, dy, d2);
      d2 = _mm256_fmadd_pd(dz, dz, d2);
      const __m256d arg =
          _mm256_mul_pd(dk, _mm256_sub_pd(bcast(atoms.r2[i]), d2));
      // Keep a lane when not (arg < -cutoff); unordered keeps NaN lanes so
      // the cutoff cannot mask a non-finite input.
      const __m256d keep = _mm256_cmp_pd(arg, neg_cut, _CMP_NLT_UQ);
      acc = _mm256_add_pd(acc, _mm256_and_pd(keep, exp4(arg)));
    }
    if (rem >= 4)
      _mm256_storeu_pd(out + m, acc);
    else
      _mm256_maskstore_pd(out + m, tail_mask(rem), acc);
  }
}

void forward_block_avx2(const NeuronsView& nrn, const double* px,
                        const double* py, const double* pz, std::size_t np,
                        double* out) {
  for (std::size_t m = 0; m < np; m += 4) {
    const std::size_t rem = np - m;
    const Pts pt = load_pts(px, py, pz, m, rem);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nrn.n; ++i) {
      const double* dt = nrn.d_tilde + 3 * i;
      const double* c = nrn.center + 3 * i;
      const double* R = nrn.rot + 9 * i;
      const __m256d ux = _mm256_sub_pd(pt.x, bcast(c[0]));
      const __m256d uy = _mm256_sub_pd(pt.y, bcast(c[1]));
      const __m256d uz = _mm256_sub_pd(pt.z, bcast(c[2]));
      __m256d y0 = _mm256_mul_pd(bcast(R[0]), ux);
      y0 = _mm256_fmadd_pd(bcast(R[1]), uy, y0);
      y0 = _mm256_fmadd_pd(bcast(R[2]), uz, y0);
      __m256d y1 = _mm256_mul_pd(bcast(R[3]), ux);
      y1 = _mm256_fmadd_pd(bcast(R[4]), uy, y1);
      y1 = _mm256_fmadd_pd(bcast(R[5]), uz, y1);
      __m256d y2 = _mm256_mul_pd(bcast(R[6]), ux);
      y2 = _mm256_fmadd_pd(bcast(R[7]), uy, y2);
      y2 = _mm256_fmadd_pd(bcast(R[8]), uz, y2);
      const __m256d z0 = _mm256_mul_pd(bcast(dt[0] * dt[0]), y0);
      const __m256d z1 = _mm256_mul_pd(bcast(dt[1] * dt[1]), y1);
      const __m256d z2 = _mm256_mul_pd(bcast(dt[2] * dt[2]), y2);
      __m256d s = _mm256_mul_pd(z0, z0);
      s = _mm256_fmadd_pd(z1, z1, s);
      s = _mm256_fmadd_pd(z2, z2, s);
      const __m256d p = exp4(_mm256_sub_pd(_mm256_setzero_pd(), s));
      acc = _mm256_fmadd_pd(bcast(nrn.w_tilde[i] * nrn.w_tilde[i]), p, acc);
    }
    if (rem >= 4)
      _mm256_storeu_pd(out + m, acc);
    else
      _mm256_maskstore_pd(out + m, tail_mask(rem), acc);
  }
}

double es_grad_block_avx2(const NeuronsView& nrn, const double* px,
                          const double* py, const double* pz,
                          const double* target, std::size_t np,
                          double* grad_es, double* psi, double* acc,
                          double* resid) {
  const std::size_t np4 = round_up4(np);
  for (std::size_t m = 0; m < np4; ++m) acc[m] = 0.0;

  // Pass A: activations into the psi cache, network outputs into acc.
  // Tail lanes hold garbage finite values; they are never read back because
  // resid is zeroed there.
  for (std::size_t i = 0; i < nrn.n; ++i) {
    const double* dt = nrn.d_tilde + 3 * i;
    const double* c = nrn.center + 3 * i;
    const double* R = nrn.rot + 9 * i;
    const __m256d w2 = bcast(nrn.w_tilde[i] * nrn.w_tilde[i]);
    const __m256d d20 = bcast(dt[0] * dt[0]);
    const __m256d d21 = bcast(dt[1] * dt[1]);
    const __m256d d22 = bcast(dt[2] * dt[2]);
    double* psi_row = psi + i * np4;
    for (std::size_t m = 0; m < np; m += 4) {
      const Pts pt = load_pts(px, py, pz, m, np - m);
      const __m256d ux = _mm256_sub_pd(pt.x, bcast(c[0]));
      const __m256d uy = _mm256_sub_pd(pt.y, bcast(c[1]));
      const __m256d uz = _mm256_sub_pd(pt.z, bcast(c[2]));
      __m256d y0 = _mm256_mul_pd(bcast(R[0]), ux);
      y0 = _mm256_fmadd_pd(bcast(R[1]), uy, y0);
      y0 = _mm256_fmadd_pd(bcast(R[2]), uz, y0);
      __m256d y1 = _mm256_mul_pd(bcast(R[3]), ux);
      y1 = _mm256_fmadd_pd(bcast(R[4]), uy, y1);
      y1 = _mm256_fmadd_pd(bcast(R[5]), uz, y1);
      __m256d y2 = _mm256_mul_pd(bcast(R[6]), ux);
      y2 = _mm256_fmadd_pd(bcast(R[7]), uy, y2);
      y2 = _mm256_fmadd_pd(bcast(R[8]), uz, y2);
      const __m256d z0 = _mm256_mul_pd(d20, y0);
      const __m256d z1 = _mm256_mul_pd(d21, y1);
      const __m256d z2 = _mm256_mul_pd(d22, y2);
      __m256d s = _mm256_mul_pd(z0, z0);
      s = _mm256_fmadd_pd(z1, z1, s);
      s = _mm256_fmadd_pd(z2, z2, s);
      const __m256d p = exp4(_mm256_sub_pd(_mm256_setzero_pd(), s));
      _mm256_storeu_pd(psi_row + m, p);
      const __m256d a = _mm256_loadu_pd(acc + m);
      _mm256_storeu_pd(acc + m, _mm256_fmadd_pd(w2, p, a));
    }
  }

  double es = 0.0;
  for (std::size_t m = 0; m < np; ++m) {
    resid[m] = acc[m] - target[m];
    es += resid[m] * resid[m];
  }
  for (std::size_t m = np; m < np4; ++m) resid[m] = 0.0;

  // Pass B: gradient accumulation. Zeroed tail residuals null the padded
  // lanes' contributions exactly.
  for (std::size_t i = 0; i < nrn.n; ++i) {
    const double wt = nrn.w_tilde[i];
    const double* dt = nrn.d_tilde + 3 * i;
    const double* c = nrn.center + 3 * i;
    const double* R = nrn.rot + 9 * i;
    const double* Ra = nrn.drot + 27 * i;
    const double* Rb = Ra + 9;
    const double* Rg = Ra + 18;
    const double* psi_row = psi + i * np4;

    const double d2s[3] = {dt[0] * dt[0], dt[1] * dt[1], dt[2] * dt[2]};
    const __m256d d40 = bcast(d2s[0] * d2s[0]);
    const __m256d d41 = bcast(d2s[1] * d2s[1]);
    const __m256d d42 = bcast(d2s[2] * d2s[2]);
    const __m256d m4d30 = bcast(4.0 * dt[0] * d2s[0]);
    const __m256d m4d31 = bcast(4.0 * dt[1] * d2s[1]);
    const __m256d m4d32 = bcast(4.0 * dt[2] * d2s[2]);
    const __m256d w2 = bcast(wt * wt);
    const __m256d two_wt = bcast(2.0 * wt);

    __m256d gw = _mm256_setzero_pd();
    __m256d gd0 = _mm256_setzero_pd(), gd1 = _mm256_setzero_pd(),
            gd2 = _mm256_setzero_pd();
    __m256d gc0 = _mm256_setzero_pd(), gc1 = _mm256_setzero_pd(),
            gc2 = _mm256_setzero_pd();
    __m256d ga = _mm256_setzero_pd(), gb = _mm256_setzero_pd(),
            gg = _mm256_setzero_pd();

    for (std::size_t m = 0; m < np; m += 4) {
      const Pts pt = load_pts(px, py, pz, m, np - m);
      const __m256d ux = _mm256_sub_pd(pt.x, bcast(c[0]));
      const __m256d uy = _mm256_sub_pd(pt.y, bcast(c[1]));
      const __m256d uz = _mm256_sub_pd(pt.z, bcast(c[2]));
      __m256d y0 = _mm256_mul_pd(bcast(R[0]), ux);
      y0 = _mm256_fmadd_pd(bcast(R[1]), uy, y0);
      y0 = _mm256_fmadd_pd(bcast(R[2]), uz, y0);
      __m256d y1 = _mm256_mul_pd(bcast(R[3]), ux);
      y1 = _mm256_fmadd_pd(bcast(R[4]), uy, y1);
      y1 = _mm256_fmadd_pd(bcast(R[5]), uz, y1);
      __m256d y2 = _mm256_mul_pd(bcast(R[6]), ux);
      y2 = _mm256_fmadd_pd(bcast(R[7]), uy, y2);
      y2 = _mm256_fmadd_pd(bcast(R[8]), uz, y2);

      const __m256d v0 = _mm256_mul_pd(d40, y0);
      const __m256d v1 = _mm256_mul_pd(d41, y1);
      const __m256d v2 = _mm256_mul_pd(d42, y2);

      const __m256d p = _mm256_loadu_pd(psi_row + m);
      const __m256d g =
          _mm256_mul_pd(bcast(2.0), _mm256_loadu_pd(resid + m));
      const __m256d gp = _mm256_mul_pd(g, p);
      const __m256d common = _mm256_mul_pd(gp, w2);

      gw = _mm256_fmadd_pd(two_wt, gp, gw);
      gd0 = _mm256_fnmadd_pd(_mm256_mul_pd(common, m4d30),
                             _mm256_mul_pd(y0, y0), gd0);
      gd1 = _mm256_fnmadd_pd(_mm256_mul_pd(common, m4d31),
                             _mm256_mul_pd(y1, y1), gd1);
      gd2 = _mm256_fnmadd_pd(_mm256_mul_pd(common, m4d32),
                             _mm256_mul_pd(y2, y2), gd2);

      const __m256d common2 = _mm256_mul_pd(common, bcast(2.0));
      __m256d rt0 = _mm256_mul_pd(bcast(R[0]), v0);
      rt0 = _mm256_fmadd_pd(bcast(R[3]), v1, rt0);
      rt0 = _mm256_fmadd_pd(bcast(R[6]), v2, rt0);
      __m256d rt1 = _mm256_mul_pd(bcast(R[1]), v0);
      rt1 = _mm256_fmadd_pd(bcast(R[4]), v1, rt1);
      rt1 = _mm256_fmadd_pd(bcast(R[7]), v2, rt1);
      __m256d rt2 = _mm256_mul_pd(bcast(R[2]), v0);
      rt2 = _mm256_fmadd_pd(bcast(R[5]), v1, rt2);
      rt2 = _mm256_fmadd_pd(bcast(R[8]), v2, rt2);
      gc0 = _mm256_fmadd_pd(common2, rt0, gc0);
      gc1 = _mm256_fmadd_pd(common2, rt1, gc1);
      gc2 = _mm256_fmadd_pd(common2, rt2, gc2);

      __m256d ta = _mm256_mul_pd(
          v0, _mm256_fmadd_pd(bcast(Ra[2]), uz,
                              _mm256_fmadd_pd(bcast(Ra[1]), uy,
                                              _mm256_mul_pd(bcast(Ra[0]), ux))));
      ta = _mm256_fmadd_pd(
          v1,
          _mm256_fmadd_pd(bcast(Ra[5]), uz,
                          _mm256_fmadd_pd(bcast(Ra[4]), uy,
                                          _mm256_mul_pd(bcast(Ra[3]), ux))),
          ta);
      ta = _mm256_fmadd_pd(
          v2,
          _mm256_fmadd_pd(bcast(Ra[8]), uz,
                          _mm256_fmadd_pd(bcast(Ra[7]), uy,
                                          _mm256_mul_pd(bcast(Ra[6]), ux))),
          ta);
      __m256d tb = _mm256_mul_pd(
          v0, _mm256_fmadd_pd(bcast(Rb[2]), uz,
                              _mm256_fmadd_pd(bcast(Rb[1]), uy,
                                              _mm256_mul_pd(bcast(Rb[0]), ux))));
      tb = _mm256_fmadd_pd(
          v1,
          _mm256_fmadd_pd(bcast(Rb[5]), uz,
                          _mm256_fmadd_pd(bcast(Rb[4]), uy,
                                          _mm256_mul_pd(bcast(Rb[3]), ux))),
          tb);
      tb = _mm256_fmadd_pd(
          v2,
          _mm256_fmadd_pd(bcast(Rb[8]), uz,
                          _mm256_fmadd_pd(bcast(Rb[7]), uy,
                                          _mm256_mul_pd(bcast(Rb[6]), ux))),
          tb);
      __m256d tg = _mm256_mul_pd(
          v0, _mm256_fmadd_pd(bcast(Rg[2]), uz,
                              _mm256_fmadd_pd(bcast(Rg[1]), uy,
                                              _mm256_mul_pd(bcast(Rg[0]), ux))));
      tg = _mm256_fmadd_pd(
          v1,
          _mm256_fmadd_pd(bcast(Rg[5]), uz,
                          _mm256_fmadd_pd(bcast(Rg[4]), uy,
                                          _mm256_mul_pd(bcast(Rg[3]), ux))),
          tg);
      tg = _mm256_fmadd_pd(
          v2,
          _mm256_fmadd_pd(bcast(Rg[8]), uz,
                          _mm256_fmadd_pd(bcast(Rg[7]), uy,
                                          _mm256_mul_pd(bcast(Rg[6]), ux))),
          tg);

      ga = _mm256_fnmadd_pd(common2, ta, ga);
      gb = _mm256_fnmadd_pd(common2, tb, gb);
      gg = _mm256_fnmadd_pd(common2, tg, gg);
    }

    double* gout = grad_es + 10 * i;
    gout[0] = hsum(gw);
    gout[1] = hsum(gd0);
    gout[2] = hsum(gd1);
    gout[3] = hsum(gd2);
    gout[4] = hsum(gc0);
    gout[5] = hsum(gc1);
    gout[6] = hsum(gc2);
    gout[7] = hsum(ga);
    gout[8] = hsum(gb);
    gout[9] = hsum(gg);
  }
  return es;
}

}  // namespace erbfit::kernels

#else  // no AVX2 at compile time: stubs, never dispatched to

namespace erbfit::kernels {

bool avx2_available() { return false; }

void phi_block_avx2(const AtomsView&, double, double, const double*,
                    const double*, const double*, std::size_t, double*) {
  throw Error("AVX2 kernels not compiled in");
}
void forward_block_avx2(const NeuronsView&, const double*, const double*,
                        const double*, std::size_t, double*) {
  throw Error("AVX2 kernels not compiled in");
}
double es_grad_block_avx2(const NeuronsView&, const double*, const double*,
                          const double*, const double*, std::size_t, double*,
                          double*, double*, double*) {
  throw Error("AVX2 kernels not compiled in");
}

}  // namespace erbfit::kernels

#endif
