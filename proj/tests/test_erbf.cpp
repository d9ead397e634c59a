#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "erbfit/density.hpp"
#include "erbfit/erbf.hpp"
#include "erbfit/trainer.hpp"
#include "testutil.hpp"

using namespace erbfit;

namespace {

double inf_norm_diff(const Mat3& a, const Mat3& b) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(a.m[i][j] - b.m[i][j]));
  return worst;
}

Mat3 factored_rotation(const Vec3& ang) {
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
  return rz * ry * rx;
}

// Central finite differences of the loss, per coordinate.
std::vector<double> fd_gradient(const ErbfParams& params,
                                std::span<const Vec3> points,
                                std::span<const double> targets,
                                const LossWeights& weights, double h) {
  std::vector<double> flat = pack(params);
  std::vector<double> grad(flat.size());
  ErbfParams work = params;
  for (std::size_t k = 0; k < flat.size(); ++k) {
    const double saved = flat[k];
    flat[k] = saved + h;
    unpack(flat, work);
    const double up = loss(work, points, targets, weights);
    flat[k] = saved - h;
    unpack(flat, work);
    const double down = loss(work, points, targets, weights);
    flat[k] = saved;
    grad[k] = (up - down) / (2.0 * h);
  }
  unpack(flat, work);
  return grad;
}

}  // namespace

TEST_CASE("rotation_matrix basics") {
  SUBCASE("zero angles give the identity") {
    const Mat3 r = rotation_matrix({0, 0, 0});
    CHECK(inf_norm_diff(r, Mat3::identity()) == 0.0);
  }
  SUBCASE("quarter turn about z maps x to y") {
    const Mat3 r = rotation_matrix({0, 0, 1.5707963267948966});
    const Vec3 v = r.apply({1, 0, 0});
    CHECK(v.x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v.y == doctest::Approx(1.0));
    CHECK(v.z == 0.0);
  }
  SUBCASE("closed form equals the three-factor product") {
    const Vec3 ang{0.3, 0.4, 0.5};
    CHECK(inf_norm_diff(rotation_matrix(ang), factored_rotation(ang)) < 1e-14);
  }
}

TEST_CASE("rotation matrices are orthogonal with det +1") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 ang = testutil::vrand(gen, -6.5, 6.5);
    const Mat3 r = rotation_matrix(ang);
    Mat3 rtr;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += r.m[k][i] * r.m[k][j];
        rtr.m[i][j] = s;
      }
    CHECK(inf_norm_diff(rtr, Mat3::identity()) < 1e-12);
    CHECK(std::abs(r.det() - 1.0) < 1e-12);
    CHECK(inf_norm_diff(r, factored_rotation(ang)) < 1e-14);
  }
}

TEST_CASE("rotation derivative matrices match finite differences") {
  std::mt19937_64 gen(22);
  const double h = 1e-6;
  for (int trial = 0; trial < 25; ++trial) {
    const Vec3 ang = testutil::vrand(gen, -3, 3);
    Mat3 da, db, dg;
    rotation_matrix_derivs(ang, da, db, dg);
    const Mat3 fa_p = rotation_matrix({ang.x + h, ang.y, ang.z});
    const Mat3 fa_m = rotation_matrix({ang.x - h, ang.y, ang.z});
    const Mat3 fb_p = rotation_matrix({ang.x, ang.y + h, ang.z});
    const Mat3 fb_m = rotation_matrix({ang.x, ang.y - h, ang.z});
    const Mat3 fg_p = rotation_matrix({ang.x, ang.y, ang.z + h});
    const Mat3 fg_m = rotation_matrix({ang.x, ang.y, ang.z - h});
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        CHECK(da.m[i][j] ==
              doctest::Approx((fa_p.m[i][j] - fa_m.m[i][j]) / (2 * h))
                  .epsilon(1e-6).scale(1.0));
        CHECK(db.m[i][j] ==
              doctest::Approx((fb_p.m[i][j] - fb_m.m[i][j]) / (2 * h))
                  .epsilon(1e-6).scale(1.0));
        CHECK(dg.m[i][j] ==
              doctest::Approx((fg_p.m[i][j] - fg_m.m[i][j]) / (2 * h))
                  .epsilon(1e-6).scale(1.0));
      }
  }
}

TEST_CASE("psi values") {
  ErbfNeuron n;
  n.w_tilde = 1.0;
  n.center = {1, -2, 0.5};

  SUBCASE("unit value at the center") {
    n.d_tilde = {0.9, 0.8, 0.7};
    n.angles = {0.3, -0.2, 1.1};
    CHECK(psi(n, n.center) == 1.0);
  }
  SUBCASE("isotropic neuron is rotation invariant") {
    n.d_tilde = {1, 1, 1};
    std::mt19937_64 gen(23);
    for (int i = 0; i < 200; ++i) {
      n.angles = testutil::vrand(gen, -6, 6);
      const Vec3 x = n.center + Vec3{0.6, -0.64, 0.48};  // |x-c| = 1
      CHECK(std::abs(psi(n, x) - std::exp(-1.0)) < 1e-12);
    }
  }
  SUBCASE("anisotropic hand value") {
    n.center = {0, 0, 0};
    n.d_tilde = {std::sqrt(2.0), 0, 0};
    n.angles = {0, 0, 0};
    // exponent = ((sqrt(2)^2)*1)^2 = 4
    CHECK(psi(n, {1, 0, 0}) == doctest::Approx(std::exp(-4.0)));
  }
}

TEST_CASE("forward is an additive non-negative mixture") {
  ErbfNeuron n;
  n.w_tilde = 1.0;
  n.d_tilde = {0.8, 0.9, 1.0};
  n.center = {0.5, 0, -0.5};
  n.angles = {0.1, 0.2, 0.3};

  ErbfParams one;
  one.neurons = {n};
  ErbfParams two;
  two.neurons = {n, n};

  SUBCASE("single neuron at center") {
    CHECK(forward(one, n.center) == 1.0);
  }
  SUBCASE("two identical neurons double the output") {
    std::mt19937_64 gen(24);
    for (int i = 0; i < 50; ++i) {
      const Vec3 x = testutil::vrand(gen, -3, 3);
      CHECK(forward(two, x) == doctest::Approx(2.0 * psi(n, x)).epsilon(1e-15));
    }
  }
  SUBCASE("non-negative for arbitrary parameters") {
    std::mt19937_64 gen(25);
    for (int t = 0; t < 20; ++t) {
      ErbfParams p = testutil::random_params(gen, 4);
      for (auto& nr : p.neurons) nr.w_tilde = testutil::urand(gen, -3, 3);
      for (int i = 0; i < 20; ++i)
        CHECK(forward(p, testutil::vrand(gen, -5, 5)) >= 0.0);
    }
  }
  SUBCASE("neuron permutation leaves forward unchanged") {
    std::mt19937_64 gen(26);
    ErbfParams p = testutil::random_params(gen, 6);
    ErbfParams q = p;
    std::reverse(q.neurons.begin(), q.neurons.end());
    for (int i = 0; i < 30; ++i) {
      const Vec3 x = testutil::vrand(gen, -4, 4);
      CHECK(forward(p, x) == doctest::Approx(forward(q, x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("forward_many agrees with forward") {
  std::mt19937_64 gen(27);
  ErbfParams p = testutil::random_params(gen, 7);
  auto pts = testutil::random_points(gen, 33, -5, 5);
  std::vector<double> out;
  forward_many(p, pts, out);
  for (std::size_t m = 0; m < pts.size(); ++m)
    CHECK(out[m] == doctest::Approx(forward(p, pts[m])).epsilon(1e-13));
}

TEST_CASE("loss values") {
  std::mt19937_64 gen(28);

  SUBCASE("zero residual with rho1=0 gives zero loss") {
    ErbfParams p = testutil::random_params(gen, 3);
    auto pts = testutil::random_points(gen, 20, -3, 3);
    std::vector<double> targets;
    for (const Vec3& x : pts) targets.push_back(forward(p, x));
    CHECK(loss(p, pts, targets, {0.0, 1.0}) < 1e-22);
  }
  SUBCASE("pure L1 hand value") {
    ErbfNeuron n;
    n.w_tilde = 2.0;
    n.d_tilde = {1, 1, 1};
    ErbfParams p;
    p.neurons = {n};
    const std::vector<Vec3> pts{{0, 0, 0}};
    const std::vector<double> targets{0.0};
    CHECK(loss(p, pts, targets, {1.0, 0.0}) == doctest::Approx(7.0));
  }
  SUBCASE("loss is linear in rho2 at rho1=0") {
    ErbfParams p = testutil::random_params(gen, 4);
    auto pts = testutil::random_points(gen, 25, -3, 3);
    std::vector<double> targets;
    for (const Vec3& x : pts)
      targets.push_back(testutil::urand(gen, 0.0, 2.0));
    const double l1x = loss(p, pts, targets, {0.0, 1.0});
    const double l2x = loss(p, pts, targets, {0.0, 2.0});
    CHECK(l2x == doctest::Approx(2.0 * l1x).epsilon(1e-14));
  }
  SUBCASE("permutation invariance") {
    ErbfParams p = testutil::random_params(gen, 5);
    ErbfParams q = p;
    std::rotate(q.neurons.begin(), q.neurons.begin() + 2, q.neurons.end());
    auto pts = testutil::random_points(gen, 30, -3, 3);
    std::vector<double> targets;
    for (const Vec3& x : pts)
      targets.push_back(testutil::urand(gen, 0.0, 2.0));
    const LossWeights w{0.7, 1.3};
    CHECK(loss(p, pts, targets, w) ==
          doctest::Approx(loss(q, pts, targets, w)).epsilon(1e-13));
  }
}

TEST_CASE("loss_gradient matches central finite differences") {
  std::mt19937_64 gen(29);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + gen() % 5;
    const std::size_t np = 1 + gen() % 50;
    ErbfParams p = testutil::random_params(gen, n);
    auto pts = testutil::random_points(gen, np, -4, 4);
    std::vector<double> targets;
    for (std::size_t m = 0; m < np; ++m)
      targets.push_back(testutil::urand(gen, 0.0, 2.5));
    const LossWeights w{testutil::urand(gen, 0.0, 2.0),
                        testutil::urand(gen, 0.1, 2.0)};

    const std::vector<double> analytic = loss_gradient(p, pts, targets, w);
    const std::vector<double> numeric = fd_gradient(p, pts, targets, w, 1e-5);
    REQUIRE(analytic.size() == numeric.size());
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      const double abs_err = std::abs(analytic[k] - numeric[k]);
      // Central differences at h=1e-5 carry ~eps*|loss|/h of roundoff, so
      // components below ~1e-4 are judged on the absolute floor instead.
      if (abs_err < 1e-8) continue;
      REQUIRE(std::abs(analytic[k]) > 0.0);
      const double rel = abs_err / std::abs(analytic[k]);
      CHECK(rel < 1e-5);
      worst = std::max(worst, rel);
    }
  }
  MESSAGE("worst relative error: ", worst);
}

TEST_CASE("gradient of the pure L1 loss") {
  std::mt19937_64 gen(30);
  ErbfParams p = testutil::random_params(gen, 3);
  auto pts = testutil::random_points(gen, 5, -3, 3);
  const std::vector<double> targets(5, 1.0);
  const std::vector<double> g = loss_gradient(p, pts, targets, {1.0, 0.0});
  for (std::size_t i = 0; i < p.neurons.size(); ++i) {
    CHECK(g[10 * i + 0] == doctest::Approx(2.0 * p.neurons[i].w_tilde));
    CHECK(g[10 * i + 1] == doctest::Approx(2.0 * p.neurons[i].d_tilde.x));
    CHECK(g[10 * i + 7] == 0.0);  // angles absent from the L1 term
    CHECK(g[10 * i + 8] == 0.0);
    CHECK(g[10 * i + 9] == 0.0);
    CHECK(g[10 * i + 4] == 0.0);  // centers too
  }
}

TEST_CASE("gradient vanishes at an exact-fit stationary point") {
  // Single neuron fitted to its own field with rho1 = 0: any batch gives a
  // zero-residual minimum.
  std::mt19937_64 gen(31);
  ErbfParams p = testutil::random_params(gen, 1);
  auto pts = testutil::random_points(gen, 40, -3, 3);
  std::vector<double> targets;
  for (const Vec3& x : pts) targets.push_back(forward(p, x));
  const std::vector<double> g = loss_gradient(p, pts, targets, {0.0, 1.0});
  for (double gk : g) CHECK(std::abs(gk) < 1e-8);
}

TEST_CASE("pack/unpack round-trips the documented layout") {
  std::mt19937_64 gen(32);
  ErbfParams p = testutil::random_params(gen, 4);
  const std::vector<double> flat = pack(p);
  REQUIRE(flat.size() == 40);
  CHECK(flat[0] == p.neurons[0].w_tilde);
  CHECK(flat[1] == p.neurons[0].d_tilde.x);
  CHECK(flat[4] == p.neurons[0].center.x);
  CHECK(flat[7] == p.neurons[0].angles.x);
  CHECK(flat[10] == p.neurons[1].w_tilde);

  ErbfParams q;
  q.neurons.resize(4);
  unpack(flat, q);
  CHECK(pack(q) == flat);
}
