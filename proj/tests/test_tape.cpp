#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "adcs/lie.hpp"
#include "adcs/rng.hpp"
#include "adcs/tape.hpp"
#include "adcs/tape_geometry.hpp"

using namespace adcs;
using namespace adcs::ad;

namespace {

Mat random_mat(rng::Stream& rs, int r, int c, double scale = 1.0) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = scale * rs.normal();
  return m;
}

// Central finite differences of a scalar output w.r.t. one leaf, compared
// entrywise against the reverse-mode gradient.
void check_grad(Tape& t, Var leaf, Var out, double tol = 1e-4, double step = 1e-5) {
  t.backward(out);
  const Mat analytic = t.grad(leaf);
  const Mat base = t.val(leaf);
  for (int i = 0; i < base.rows(); ++i) {
    for (int j = 0; j < base.cols(); ++j) {
      Mat hi = base, lo = base;
      hi(i, j) += step;
      lo(i, j) -= step;
      t.set_value(leaf, hi);
      t.recompute();
      const double fhi = t.scalar(out);
      t.set_value(leaf, lo);
      t.recompute();
      const double flo = t.scalar(out);
      t.set_value(leaf, base);
      t.recompute();
      const double fd = (fhi - flo) / (2.0 * step);
      const double denom = std::max({1e-6, std::abs(fd), std::abs(analytic(i, j))});
      INFO("entry (" << i << "," << j << "): analytic " << analytic(i, j)
                     << " fd " << fd);
      REQUIRE(std::abs(analytic(i, j) - fd) / denom < tol);
    }
  }
}

// Wraps an arbitrary-shaped node into a scalar with a fixed random cotangent.
Var scalarize(Tape& t, Var v, rng::Stream& rs) {
  const Mat w = random_mat(rs, static_cast<int>(t.val(v).rows()),
                           static_cast<int>(t.val(v).cols()));
  return t.sum(t.hadamard(v, t.leaf(w)));
}

}  // namespace

TEST_CASE("grad of x^2 at 3 is 6") {
  Tape t;
  Var x = t.leaf(3.0);
  Var y = t.hadamard(x, x);
  t.backward(y);
  CHECK(t.grad(x)(0, 0) == Catch::Approx(6.0).margin(1e-14));
}

TEST_CASE("grad of a constant subgraph is 0") {
  Tape t;
  Var x = t.leaf(2.0);
  Var c = t.leaf(5.0);
  Var y = t.add(t.hadamard(c, c), t.hadamard(x, t.leaf(0.0)));
  t.backward(y);
  CHECK(t.grad(x)(0, 0) == 0.0);
}

TEST_CASE("fan-out accumulates gradients by summation") {
  Tape t;
  Var x = t.leaf(1.5);
  Var y = t.add(t.hadamard(x, x), x);  // x^2 + x -> 2x + 1
  t.backward(y);
  CHECK(t.grad(x)(0, 0) == Catch::Approx(4.0).margin(1e-14));
}

TEST_CASE("backward requires a scalar output") {
  Tape t;
  Var x = t.leaf(Mat::Ones(2, 2));
  Var y = t.tanh(x);
  CHECK_THROWS_AS(t.backward(y), NonScalarOutput);
}

TEST_CASE("detach blocks gradient flow") {
  Tape t;
  Var x = t.leaf(2.0);
  Var y = t.hadamard(t.detach(x), x);  // d/dx = detached(x) = 2
  t.backward(y);
  CHECK(t.grad(x)(0, 0) == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("backward is deterministic on identical tapes") {
  auto build = [] {
    Tape t;
    Var x = t.leaf(Mat::Constant(3, 1, 0.37));
    Var w = t.leaf(Mat::Constant(3, 3, 0.11));
    Var y = t.sum(t.tanh(t.matmul(w, x)));
    t.backward(y);
    return t.grad(x);
  };
  const Mat a = build(), b = build();
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("every primitive passes finite-difference checks") {
  rng::Stream rs(101, "tape-fd");
  for (int trial = 0; trial < 100; ++trial) {
    Tape t;
    Var a3 = t.leaf(random_mat(rs, 3, 2));
    Var b3 = t.leaf(random_mat(rs, 3, 2));
    Var sq = t.leaf(random_mat(rs, 3, 3));
    Var v3 = t.leaf(random_mat(rs, 3, 1));
    Var s = t.leaf(0.5 + rs.uniform());
    Var pos = t.leaf((random_mat(rs, 2, 2).array().abs() + 0.5).matrix());
    Var row = t.leaf(random_mat(rs, 1, 2));
    Var u = t.leaf(0.1 + 2.0 * rs.uniform());
    Var trc = t.leaf(-0.5 + 3.4 * rs.uniform());  // trace in (-0.5, 2.9)

    Var acc = scalarize(t, t.add(a3, b3), rs);
    acc = t.add(acc, scalarize(t, t.sub(a3, b3), rs));
    acc = t.add(acc, scalarize(t, t.neg(a3), rs));
    acc = t.add(acc, scalarize(t, t.hadamard(a3, b3), rs));
    acc = t.add(acc, scalarize(t, t.scale(a3, s), rs));
    acc = t.add(acc, scalarize(t, t.matmul(sq, v3), rs));
    acc = t.add(acc, scalarize(t, t.transpose(a3), rs));
    acc = t.add(acc, t.entry(sq, 1, 2));
    acc = t.add(acc, scalarize(t, t.vcat(v3, v3), rs));
    acc = t.add(acc, scalarize(t, t.add_rowvec(a3, row), rs));
    acc = t.add(acc, t.sum(a3));
    acc = t.add(acc, scalarize(t, t.tanh(a3), rs));
    acc = t.add(acc, scalarize(t, t.softplus(a3), rs));
    acc = t.add(acc, scalarize(t, t.sin(a3), rs));
    acc = t.add(acc, scalarize(t, t.cos(a3), rs));
    acc = t.add(acc, scalarize(t, t.exp(a3), rs));
    acc = t.add(acc, scalarize(t, t.sqrt(pos), rs));
    acc = t.add(acc, scalarize(t, t.recip(pos), rs));
    acc = t.add(acc, scalarize(t, t.softmax_rows(a3), rs));
    acc = t.add(acc, t.exp_coeff_a(u));
    acc = t.add(acc, t.exp_coeff_b(u));
    acc = t.add(acc, t.exp_coeff_c(u));
    acc = t.add(acc, t.vinv_coeff(u));
    acc = t.add(acc, t.rotlog_coeff(trc));

    check_grad(t, a3, acc);
    check_grad(t, b3, acc);
    check_grad(t, sq, acc);
    check_grad(t, v3, acc);
    check_grad(t, s, acc);
    check_grad(t, pos, acc);
    check_grad(t, row, acc);
    check_grad(t, u, acc);
    check_grad(t, trc, acc);
  }
}

TEST_CASE("relu and max_rows pass finite differences away from kinks") {
  rng::Stream rs(102, "tape-fd-kink");
  for (int trial = 0; trial < 100; ++trial) {
    Tape t;
    // Keep entries away from zero (relu kink) and in disjoint per-row bands
    // (max_rows argmax switch) so the derivative exists.
    Mat m(4, 3);
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) {
        const double sign = rs.uniform() < 0.5 ? -1.0 : 1.0;
        m(i, j) = sign * (0.1 + 0.5 * rs.uniform() + 1.0 * i);
      }
    Var x = t.leaf(m);
    Var acc = scalarize(t, t.relu(x), rs);
    acc = t.add(acc, scalarize(t, t.max_rows(x), rs));
    check_grad(t, x, acc);
  }
}

TEST_CASE("coefficient primitives pass finite differences near zero angle") {
  rng::Stream rs(103, "tape-fd-small");
  for (int trial = 0; trial < 100; ++trial) {
    Tape t;
    Var u = t.leaf(rs.uniform() * 1e-5);
    Var trc = t.leaf(3.0 - rs.uniform() * 1e-5);
    Var acc = t.add(t.exp_coeff_a(u), t.exp_coeff_b(u));
    acc = t.add(acc, t.exp_coeff_c(u));
    acc = t.add(acc, t.vinv_coeff(u));
    acc = t.add(acc, t.rotlog_coeff(trc));
    check_grad(t, u, acc, 1e-4, 1e-7);
    check_grad(t, trc, acc, 1e-4, 1e-7);
  }
}

TEST_CASE("three-layer MLP gradients match finite differences") {
  rng::Stream rs(104, "tape-mlp");
  for (int trial = 0; trial < 10; ++trial) {
    Tape t;
    Var x = t.leaf(random_mat(rs, 4, 1));
    Var w1 = t.leaf(random_mat(rs, 8, 4, 0.5));
    Var b1 = t.leaf(random_mat(rs, 8, 1, 0.1));
    Var w2 = t.leaf(random_mat(rs, 8, 8, 0.5));
    Var b2 = t.leaf(random_mat(rs, 8, 1, 0.1));
    Var w3 = t.leaf(random_mat(rs, 1, 8, 0.5));
    Var h1 = t.tanh(t.add(t.matmul(w1, x), b1));
    Var h2 = t.softplus(t.add(t.matmul(w2, h1), b2));
    Var y = t.matmul(w3, h2);
    check_grad(t, x, y);
    check_grad(t, w1, y);
    check_grad(t, b1, y);
    check_grad(t, w2, y);
    check_grad(t, w3, y);
  }
}

TEST_CASE("jvp equals gradient dotted with the tangent") {
  rng::Stream rs(105, "tape-jvp");
  for (int trial = 0; trial < 20; ++trial) {
    Tape t;
    Var x = t.leaf(random_mat(rs, 5, 1));
    Var w = t.leaf(random_mat(rs, 5, 5, 0.4));
    Var y = t.sum(t.tanh(t.matmul(w, x)));
    t.backward(y);
    const Mat g = t.grad(x);
    const Mat dir = random_mat(rs, 5, 1);
    Tape::Jvp jvp(t);
    jvp.run(x, dir);
    REQUIRE(std::abs(jvp.at(y) - (g.transpose() * dir)(0, 0)) < 1e-12);
  }
}

TEST_CASE("tape expmap matches the closed-form map") {
  rng::Stream rs(106, "tape-exp");
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    Mat xi = random_mat(rs, 6, 1);
    Var v = t.leaf(xi);
    TapePose p = tp_expmap(v);
    lie::Twist tw = lie::Twist::FromVec(xi);
    const lie::Pose ref = lie::expmap(tw);
    REQUIRE((t.val(p.R) - ref.R).norm() < 1e-12);
    REQUIRE((t.val(p.t) - ref.t).norm() < 1e-12);
  }
}

TEST_CASE("tape se3 log inverts tape expmap and matches closed form") {
  rng::Stream rs(107, "tape-log");
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    Mat xi = random_mat(rs, 6, 1, 0.6);
    Var v = t.leaf(xi);
    Var back = tp_se3_log(tp_expmap(v));
    REQUIRE((t.val(back) - xi).norm() < 1e-10);
  }
}

TEST_CASE("gradient through expmap-log round trip is the identity") {
  rng::Stream rs(108, "tape-geo-grad");
  for (int trial = 0; trial < 20; ++trial) {
    Tape t;
    Mat xi = random_mat(rs, 6, 1, 0.5);
    Var v = t.leaf(xi);
    Var back = tp_se3_log(tp_expmap(v));
    Var y = scalarize(t, back, rs);
    check_grad(t, v, y);
  }
}

TEST_CASE("axis rotation matches closed-form Rodrigues") {
  rng::Stream rs(109, "tape-axis");
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    Eigen::Vector3d axis = Eigen::Vector3d(rs.normal(), rs.normal(), rs.normal()).normalized();
    const double q = rs.uniform(-3.0, 3.0);
    Var angle = t.leaf(q);
    Var R = tp_axis_rotation(angle, axis);
    const lie::Mat3 ref = lie::expmap_so3(axis * q);
    REQUIRE((t.val(R) - ref).norm() < 1e-12);
    Var y = scalarize(t, R, rs);
    check_grad(t, angle, y);
  }
}

TEST_CASE("recompute after set_value tracks new leaf values") {
  Tape t;
  Var x = t.leaf(2.0);
  Var y = t.hadamard(x, x);
  CHECK(t.scalar(y) == 4.0);
  t.set_value(x, 3.0);
  t.recompute();
  CHECK(t.scalar(y) == 9.0);
}
