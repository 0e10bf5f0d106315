#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "adcs/lie.hpp"

using namespace adcs;
using namespace adcs::lie;

namespace {

// Independent oracle: exp of the 4x4 twist matrix by truncated power series.
Mat4 expm_series(const Mat4& X, int terms = 40) {
  Mat4 acc = Mat4::Identity();
  Mat4 pow = Mat4::Identity();
  double fact = 1.0;
  for (int n = 1; n <= terms; ++n) {
    pow = pow * X;
    fact *= n;
    acc += pow / fact;
  }
  return acc;
}

Mat4 twist_hat(const Twist& xi) {
  Mat4 X = Mat4::Zero();
  X.topLeftCorner<3, 3>() = skew(xi.omega);
  X.topRightCorner<3, 1>() = xi.v;
  return X;
}

Twist random_twist(rng::Stream& rs, double max_angle) {
  Twist xi;
  for (int i = 0; i < 3; ++i) xi.omega[i] = rs.normal();
  const double a = rs.uniform(0.0, max_angle);
  xi.omega = xi.omega.normalized() * a;
  for (int i = 0; i < 3; ++i) xi.v[i] = rs.normal();
  return xi;
}

Pose random_pose(rng::Stream& rs, double max_angle) {
  return expmap(random_twist(rs, max_angle));
}

}  // namespace

TEST_CASE("expmap of zero twist is identity") {
  const Pose p = expmap(Twist{});
  CHECK((p.R - Mat3::Identity()).norm() == 0.0);
  CHECK(p.t.norm() == 0.0);
}

TEST_CASE("expmap quarter turn about z") {
  Twist xi;
  xi.omega = Vec3(0, 0, M_PI / 2);
  const Pose p = expmap(xi);
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((p.R - expected).norm() < 1e-15);
  CHECK(p.t.norm() == 0.0);
}

TEST_CASE("expmap matches matrix-exponential series oracle") {
  rng::Stream rs(42, "lie-oracle");
  for (int i = 0; i < 200; ++i) {
    const Twist xi = random_twist(rs, M_PI - 0.01);
    const Mat4 expected = expm_series(twist_hat(xi));
    const Mat4 got = expmap(xi).matrix();
    REQUIRE((got - expected).norm() < 1e-12);
  }
}

TEST_CASE("logmap of identity is zero") {
  const Twist xi = logmap(Pose{});
  CHECK(xi.vec().norm() == 0.0);
}

TEST_CASE("logmap of 0.3 rad about x") {
  Twist in;
  in.omega = Vec3(0.3, 0, 0);
  const Twist out = logmap(expmap(in));
  CHECK((out.omega - Vec3(0.3, 0, 0)).norm() < 1e-14);
  CHECK(out.v.norm() < 1e-14);
}

TEST_CASE("logmap raises AngleNearPi at the branch cut") {
  Twist xi;
  xi.omega = Vec3(M_PI - 1e-9, 0, 0);
  CHECK_THROWS_AS(logmap_so3(expmap_so3(xi.omega)), AngleNearPi);
}

TEST_CASE("expmap/logmap round trip over 1e4 random twists") {
  rng::Stream rs(7, "lie-roundtrip");
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Twist xi = random_twist(rs, M_PI - 0.01);
    const Twist back = logmap(expmap(xi));
    worst = std::max(worst, (back.vec() - xi.vec()).norm());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("expmap(logmap(p)) reproduces p") {
  rng::Stream rs(8, "lie-roundtrip2");
  for (int i = 0; i < 1000; ++i) {
    const Pose p = random_pose(rs, M_PI - 0.01);
    const Pose back = expmap(logmap(p));
    REQUIRE((back.matrix() - p.matrix()).norm() < 1e-9);
  }
}

TEST_CASE("group closure: compose then invert is identity") {
  rng::Stream rs(9, "lie-closure");
  for (int i = 0; i < 1000; ++i) {
    const Pose a = random_pose(rs, 3.0);
    const Pose b = random_pose(rs, 3.0);
    const Pose id = (a * b) * (a * b).inverse();
    REQUIRE((id.matrix() - Mat4::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("orthonormality preserved under 1e4 chained compositions") {
  rng::Stream rs(10, "lie-chain");
  Pose acc;
  const Pose step = random_pose(rs, 0.02);
  for (int i = 0; i < 10000; ++i) acc = compose_checked(acc, step);
  CHECK(rotation_drift(acc.R) < 1e-9);
  CHECK(std::abs(acc.R.determinant() - 1.0) < 1e-9);
}

TEST_CASE("renormalize projects a drifted matrix back to SO(3)") {
  rng::Stream rs(11, "lie-renorm");
  const Pose p = random_pose(rs, 2.0);
  Mat3 drifted = p.R;
  drifted(0, 1) += 1e-6;
  drifted(2, 0) -= 2e-6;
  const Mat3 fixed = renormalize(drifted);
  CHECK(rotation_drift(fixed) < 1e-12);
  CHECK((fixed - p.R).norm() < 1e-5);
}

TEST_CASE("perturb with tiny sigma stays near the pose") {
  rng::Stream rs(12, "lie-perturb-small");
  const Pose p = random_pose(rs, 2.0);
  const double sigma = 1e-9;
  const Pose q = perturb(p, sigma, rs);
  CHECK((q.matrix() - p.matrix()).norm() < 1e-7);
}

TEST_CASE("perturb is deterministic under a fixed seed") {
  const Pose p;
  rng::Stream a(99, "noise"), b(99, "noise");
  const Pose qa = perturb(p, 0.1, a);
  const Pose qb = perturb(p, 0.1, b);
  CHECK((qa.matrix() - qb.matrix()).norm() == 0.0);
}

TEST_CASE("perturb noise has zero mean in the tangent space") {
  rng::Stream rs(13, "lie-mc");
  const Pose p = random_pose(rs, 1.0);
  const double sigma = 0.1;
  const int n = 100000;
  Vec6 mean = Vec6::Zero();
  for (int i = 0; i < n; ++i) {
    const Twist eps = logmap(p.inverse() * perturb(p, sigma, rs));
    mean += eps.vec();
  }
  mean /= n;
  const double bound = 3.0 * sigma / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < 6; ++i) REQUIRE(std::abs(mean[i]) < bound);
}

TEST_CASE("gaussian_score at the mode is zero") {
  rng::Stream rs(14, "lie-score");
  const Pose h = random_pose(rs, 2.0);
  const Twist s = gaussian_score(h, h, 0.5);
  CHECK(s.vec().norm() < 1e-12);
}

TEST_CASE("gaussian_score of a pure translation offset") {
  Pose h;  // identity
  Pose h_hat = h;
  const Vec3 d(0.2, -0.1, 0.4);
  h_hat.t = d;
  const Twist s = gaussian_score(h_hat, h, 1.0);
  CHECK(s.omega.norm() < 1e-15);
  CHECK((s.v + d).norm() < 1e-15);
}

TEST_CASE("gaussian_score matches finite differences of log q") {
  // log q as a function of the tangent coordinates eps (the chart in which
  // the perturbation is Gaussian): log q(eps) = -|eps|^2 / (2 sigma^2).
  rng::Stream rs(15, "lie-score-fd");
  const double sigma = 0.7;
  auto logq = [&](const Pose& h, const Vec6& eps) {
    (void)h;
    return -eps.squaredNorm() / (2.0 * sigma * sigma);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const Pose h = random_pose(rs, 2.0);
    const Twist eps = random_twist(rs, 1.5);
    const Pose h_hat = h * expmap(eps);
    const Twist s = gaussian_score(h_hat, h, sigma);
    const double step = 1e-5;
    for (int i = 0; i < 6; ++i) {
      Vec6 lo = eps.vec(), hi = eps.vec();
      lo[i] -= step;
      hi[i] += step;
      const double fd = (logq(h, hi) - logq(h, lo)) / (2.0 * step);
      const double denom = std::max(1e-8, std::abs(fd));
      REQUIRE(std::abs(s.vec()[i] - fd) / denom < 1e-4);
    }
  }
}

TEST_CASE("pose quaternion serialization round trips") {
  rng::Stream rs(16, "lie-qt");
  for (int i = 0; i < 200; ++i) {
    const Pose p = random_pose(rs, M_PI - 0.05);
    const Pose back = pose_from_qt(pose_to_qt(p));
    REQUIRE((back.matrix() - p.matrix()).norm() < 1e-12);
  }
}
