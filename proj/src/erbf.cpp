#include "erbfit/erbf.hpp"

#include <cmath>

#include "erbfit/error.hpp"

namespace erbfit {

Mat3 rotation_matrix(const Vec3& angles) {
  const double ca = std::cos(angles.x), sa = std::sin(angles.x);
  const double cb = std::cos(angles.y), sb = std::sin(angles.y);
  const double cg = std::cos(angles.z), sg = std::sin(angles.z);
  Mat3 r;
  r.m[0][0] = cb * cg;
  r.m[0][1] = -ca * sg + sa * sb * cg;
  r.m[0][2] = sa * sg + ca * cg * sb;
  r.m[1][0] = cb * sg;
  r.m[1][1] = ca * cg + sa * sb * sg;
  r.m[1][2] = -sa * cg + ca * sb * sg;
  r.m[2][0] = -sb;
  r.m[2][1] = cb * sa;
  r.m[2][2] = ca * cb;
  return r;
}

namespace {

Mat3 rot_x(double a) {
  Mat3 r = Mat3::identity();
  r.m[1][1] = std::cos(a);
  r.m[1][2] = -std::sin(a);
  r.m[2][1] = std::sin(a);
  r.m[2][2] = std::cos(a);
  return r;
}
Mat3 rot_y(double b) {
  Mat3 r = Mat3::identity();
  r.m[0][0] = std::cos(b);
  r.m[0][2] = std::sin(b);
  r.m[2][0] = -std::sin(b);
  r.m[2][2] = std::cos(b);
  return r;
}
Mat3 rot_z(double g) {
  Mat3 r = Mat3::identity();
  r.m[0][0] = std::cos(g);
  r.m[0][1] = -std::sin(g);
  r.m[1][0] = std::sin(g);
  r.m[1][1] = std::cos(g);
  return r;
}
Mat3 drot_x(double a) {
  Mat3 r;
  r.m[1][1] = -std::sin(a);
  r.m[1][2] = -std::cos(a);
  r.m[2][1] = std::cos(a);
  r.m[2][2] = -std::sin(a);
  return r;
}
Mat3 drot_y(double b) {
  Mat3 r;
  r.m[0][0] = -std::sin(b);
  r.m[0][2] = std::cos(b);
  r.m[2][0] = -std::cos(b);
  r.m[2][2] = -std::sin(b);
  return r;
}
Mat3 drot_z(double g) {
  Mat3 r;
  r.m[0][0] = -std::sin(g);
  r.m[0][1] = -std::cos(g);
  r.m[1][0] = std::cos(g);
  r.m[1][1] = -std::sin(g);
  return r;
}

}  // namespace

void rotation_matrix_derivs(const Vec3& angles, Mat3& d_alpha, Mat3& d_beta,
                            Mat3& d_gamma) {
  const Mat3 rx = rot_x(angles.x);
  const Mat3 ry = rot_y(angles.y);
  const Mat3 rz = rot_z(angles.z);
  d_alpha = rz * ry * drot_x(angles.x);
  d_beta = rz * drot_y(angles.y) * rx;
  d_gamma = drot_z(angles.z) * ry * rx;
}

double psi(const ErbfNeuron& neuron, const Vec3& x) {
  const Mat3 rot = rotation_matrix(neuron.angles);
  const Vec3 y = rot.apply(x - neuron.center);
  const Vec3 dt = neuron.d_tilde;
  const double z0 = dt.x * dt.x * y.x;
  const double z1 = dt.y * dt.y * y.y;
  const double z2 = dt.z * dt.z * y.z;
  return std::exp(-(z0 * z0 + z1 * z1 + z2 * z2));
}

double forward(const ErbfParams& params, const Vec3& x) {
  double sum = 0.0;
  for (const ErbfNeuron& n : params.neurons)
    sum += n.w_tilde * n.w_tilde * psi(n, x);
  return sum;
}

void PackedNeurons::build(const ErbfParams& params, bool with_derivs) {
  const std::size_t n = params.neuron_count();
  w_tilde.resize(n);
  d_tilde.resize(3 * n);
  center.resize(3 * n);
  rot.resize(9 * n);
  drot.resize(with_derivs ? 27 * n : 0);
  for (std::size_t i = 0; i < n; ++i) {
    const ErbfNeuron& nr = params.neurons[i];
    w_tilde[i] = nr.w_tilde;
    d_tilde[3 * i + 0] = nr.d_tilde.x;
    d_tilde[3 * i + 1] = nr.d_tilde.y;
    d_tilde[3 * i + 2] = nr.d_tilde.z;
    center[3 * i + 0] = nr.center.x;
    center[3 * i + 1] = nr.center.y;
    center[3 * i + 2] = nr.center.z;
    const Mat3 r = rotation_matrix(nr.angles);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) rot[9 * i + 3 * a + b] = r.m[a][b];
    if (with_derivs) {
      Mat3 da, db, dg;
      rotation_matrix_derivs(nr.angles, da, db, dg);
      const Mat3* ds[3] = {&da, &db, &dg};
      for (int d = 0; d < 3; ++d)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            drot[27 * i + 9 * d + 3 * a + b] = ds[d]->m[a][b];
    }
  }
}

namespace {

struct PointsSoA {
  std::vector<double> x, y, z;

  explicit PointsSoA(std::span<const Vec3> pts) {
    x.resize(pts.size());
    y.resize(pts.size());
    z.resize(pts.size());
    for (std::size_t m = 0; m < pts.size(); ++m) {
      x[m] = pts[m].x;
      y[m] = pts[m].y;
      z[m] = pts[m].z;
    }
  }
};

}  // namespace

void forward_many(const ErbfParams& params, std::span<const Vec3> points,
                  std::vector<double>& out) {
  PackedNeurons packed;
  packed.build(params, false);
  PointsSoA pts(points);
  out.resize(points.size());
  kernels::forward_block(packed.view(), pts.x.data(), pts.y.data(),
                         pts.z.data(), points.size(), out.data());
}

double l1_term(const ErbfParams& params) {
  double sum = 0.0;
  for (const ErbfNeuron& n : params.neurons) {
    sum += n.w_tilde * n.w_tilde;
    sum += n.d_tilde.x * n.d_tilde.x + n.d_tilde.y * n.d_tilde.y +
           n.d_tilde.z * n.d_tilde.z;
  }
  return sum;
}

double loss(const ErbfParams& params, std::span<const Vec3> points,
            std::span<const double> targets, const LossWeights& weights) {
  if (points.size() != targets.size() || points.empty())
    throw ValidationError("loss: batch points/targets mismatch or empty");
  std::vector<double> psi_vals;
  forward_many(params, points, psi_vals);
  double es = 0.0;
  for (std::size_t m = 0; m < points.size(); ++m) {
    const double e = psi_vals[m] - targets[m];
    es += e * e;
  }
  const double value = weights.rho1 * l1_term(params) + weights.rho2 * es;
  if (!std::isfinite(value))
    throw NumericalError("loss: non-finite value (diverging parameters?)");
  return value;
}

std::vector<double> loss_gradient(const ErbfParams& params,
                                  std::span<const Vec3> points,
                                  std::span<const double> targets,
                                  const LossWeights& weights) {
  if (points.size() != targets.size() || points.empty())
    throw ValidationError("loss_gradient: batch points/targets mismatch");
  const std::size_t n = params.neuron_count();
  const std::size_t np = points.size();
  const std::size_t np4 = kernels::round_up4(np);

  PackedNeurons packed;
  packed.build(params, true);
  PointsSoA pts(points);
  std::vector<double> grad(10 * n), psi_cache(n * np4), acc(np4), resid(np4);
  kernels::es_grad_block(packed.view(), pts.x.data(), pts.y.data(),
                         pts.z.data(), targets.data(), np, grad.data(),
                         psi_cache.data(), acc.data(), resid.data());

  for (std::size_t i = 0; i < n; ++i) {
    const ErbfNeuron& nr = params.neurons[i];
    double* g = grad.data() + 10 * i;
    for (int k = 0; k < 10; ++k) g[k] *= weights.rho2;
    g[0] += 2.0 * weights.rho1 * nr.w_tilde;
    g[1] += 2.0 * weights.rho1 * nr.d_tilde.x;
    g[2] += 2.0 * weights.rho1 * nr.d_tilde.y;
    g[3] += 2.0 * weights.rho1 * nr.d_tilde.z;
  }
  for (double g : grad) {
    if (!std::isfinite(g))
      throw NumericalError("loss_gradient: non-finite component");
  }
  return grad;
}

std::vector<double> pack(const ErbfParams& params) {
  std::vector<double> flat;
  flat.reserve(params.scalar_count());
  for (const ErbfNeuron& n : params.neurons) {
    flat.push_back(n.w_tilde);
    flat.push_back(n.d_tilde.x);
    flat.push_back(n.d_tilde.y);
    flat.push_back(n.d_tilde.z);
    flat.push_back(n.center.x);
    flat.push_back(n.center.y);
    flat.push_back(n.center.z);
    flat.push_back(n.angles.x);
    flat.push_back(n.angles.y);
    flat.push_back(n.angles.z);
  }
  return flat;
}

void unpack(std::span<const double> flat, ErbfParams& params) {
  if (flat.size() != params.scalar_count())
    throw ValidationError("unpack: flat vector length mismatch");
  for (std::size_t i = 0; i < params.neurons.size(); ++i) {
    const double* f = flat.data() + 10 * i;
    ErbfNeuron& n = params.neurons[i];
    n.w_tilde = f[0];
    n.d_tilde = {f[1], f[2], f[3]};
    n.center = {f[4], f[5], f[6]};
    n.angles = {f[7], f[8], f[9]};
  }
}

}  // namespace erbfit
