// Differentiable SO(3)/SE(3) building blocks expressed as tape ops: poses
// on the tape are (R, t) pairs, a twist is a stacked 6-vector [omega; v].
#pragma once

#include <Eigen/Core>

#include "adcs/lie.hpp"
#include "adcs/tape.hpp"

namespace adcs::ad {

struct TapePose {
  Var R;  // 3x3
  Var t;  // 3x1
};

// Skew matrix of a 3-vector variable, assembled from constant generators.
inline Var tp_skew(Var w) {
  Tape& t = *w.tape;
  static const Eigen::Matrix3d G[3] = {lie::skew(Eigen::Vector3d::UnitX()),
                                       lie::skew(Eigen::Vector3d::UnitY()),
                                       lie::skew(Eigen::Vector3d::UnitZ())};
  Var out = t.scale(t.leaf(Mat(G[0])), t.entry(w, 0, 0));
  out = t.add(out, t.scale(t.leaf(Mat(G[1])), t.entry(w, 1, 0)));
  out = t.add(out, t.scale(t.leaf(Mat(G[2])), t.entry(w, 2, 0)));
  return out;
}

inline Var tp_dot(Var a, Var b) { return a.tape->sum(a.tape->hadamard(a, b)); }
inline Var tp_sumsq(Var a) { return a.tape->sum(a.tape->hadamard(a, a)); }

// Rotation about a fixed axis by a scalar angle variable (Rodrigues with
// constant axis: R = I + sin(q) K + (1 - cos(q)) K^2).
inline Var tp_axis_rotation(Var angle, const Eigen::Vector3d& axis) {
  Tape& t = *angle.tape;
  const Eigen::Matrix3d K = lie::skew(axis);
  const Eigen::Matrix3d K2 = K * K;
  Var s = t.sin(angle);
  Var omc = t.sub(t.leaf(1.0), t.cos(angle));
  Var out = t.leaf(Mat(Eigen::Matrix3d::Identity()));
  out = t.add(out, t.scale(t.leaf(Mat(K)), s));
  return t.add(out, t.scale(t.leaf(Mat(K2)), omc));
}

// Full SE(3) exponential of a twist variable [omega; v].
inline TapePose tp_expmap(Var xi) {
  Tape& t = *xi.tape;
  Var omega = t.vcat(t.entry(xi, 0, 0), t.entry(xi, 1, 0));
  omega = t.vcat(omega, t.entry(xi, 2, 0));
  Var v = t.vcat(t.entry(xi, 3, 0), t.entry(xi, 4, 0));
  v = t.vcat(v, t.entry(xi, 5, 0));

  Var u = tp_sumsq(omega);
  Var A = t.exp_coeff_a(u);
  Var B = t.exp_coeff_b(u);
  Var C = t.exp_coeff_c(u);
  Var W = tp_skew(omega);
  Var W2 = t.matmul(W, W);
  Var I = t.leaf(Mat(Eigen::Matrix3d::Identity()));
  TapePose p;
  p.R = t.add(I, t.add(t.scale(W, A), t.scale(W2, B)));
  Var V = t.add(I, t.add(t.scale(W, B), t.scale(W2, C)));
  p.t = t.matmul(V, v);
  return p;
}

inline TapePose tp_mul(const TapePose& a, const TapePose& b) {
  Tape& t = *a.R.tape;
  return {t.matmul(a.R, b.R), t.add(t.matmul(a.R, b.t), a.t)};
}

inline TapePose tp_inverse(const TapePose& p) {
  Tape& t = *p.R.tape;
  Var Rt = t.transpose(p.R);
  return {Rt, t.neg(t.matmul(Rt, p.t))};
}

inline TapePose tp_const_pose(Tape& t, const lie::Pose& p) {
  return {t.leaf(Mat(p.R)), t.leaf(Mat(p.t))};
}

// SO(3) log: omega = rotlog_coeff(trace) * vee(R - R^T).
inline Var tp_rot_log(Var R) {
  Tape& t = *R.tape;
  Var tr = t.add(t.add(t.entry(R, 0, 0), t.entry(R, 1, 1)), t.entry(R, 2, 2));
  Var D = t.rotlog_coeff(tr);
  Var wx = t.sub(t.entry(R, 2, 1), t.entry(R, 1, 2));
  Var wy = t.sub(t.entry(R, 0, 2), t.entry(R, 2, 0));
  Var wz = t.sub(t.entry(R, 1, 0), t.entry(R, 0, 1));
  Var vee = t.vcat(t.vcat(wx, wy), wz);
  return t.scale(vee, D);
}

// SE(3) log of a tape pose -> 6-vector [omega; v].
inline Var tp_se3_log(const TapePose& p) {
  Tape& t = *p.R.tape;
  Var omega = tp_rot_log(p.R);
  Var u = tp_sumsq(omega);
  Var cv = t.vinv_coeff(u);
  Var W = tp_skew(omega);
  Var W2 = t.matmul(W, W);
  Var I = t.leaf(Mat(Eigen::Matrix3d::Identity()));
  Var half = t.leaf(0.5);
  Var Vinv = t.add(t.sub(I, t.scale(W, half)), t.scale(W2, cv));
  Var v = t.matmul(Vinv, p.t);
  return t.vcat(omega, v);
}

inline Var tp_norm(Var a) { return a.tape->sqrt(tp_sumsq(a)); }

}  // namespace adcs::ad
