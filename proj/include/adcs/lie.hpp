// SO(3)/SE(3) group operations, exponential/logarithm maps, and Gaussian
// perturbation in the Lie algebra.
//
// Conventions:
//   - a twist is (omega, v) with omega the rotational part; stacked as a
//     6-vector [omega; v]
//   - noise is right-multiplied (body frame): perturb(H) = H * exp(eps)
//   - the rotation log uses the principal branch and raises AngleNearPi
//     near the branch cut
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <vector>

#include "adcs/errors.hpp"
#include "adcs/rng.hpp"

namespace adcs::lie {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Angle below which trig coefficients switch to their series expansions.
inline constexpr double kSmallAngle = 1e-6;

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

inline Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  Vec6 vec() const {
    Vec6 x;
    x << omega, v;
    return x;
  }
  static Twist FromVec(const Vec6& x) { return {x.head<3>(), x.tail<3>()}; }
};

struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Pose inverse() const { return {R.transpose(), -(R.transpose() * t)}; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = R;
    m.topRightCorner<3, 1>() = t;
    return m;
  }
};

inline Pose operator*(const Pose& a, const Pose& b) {
  return {a.R * b.R, a.R * b.t + a.t};
}

// Orthonormality drift of a rotation candidate.
inline double rotation_drift(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

// Nearest rotation by polar decomposition (via SVD, det-corrected).
inline Mat3 renormalize(const Mat3& R) {
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0) {
    Mat3 d = Mat3::Identity();
    d(2, 2) = -1;
    out = svd.matrixU() * d * svd.matrixV().transpose();
  }
  return out;
}

// Composition that keeps long chains orthonormal.
inline Pose compose_checked(const Pose& a, const Pose& b) {
  Pose out = a * b;
  if (rotation_drift(out.R) > 1e-9) out.R = renormalize(out.R);
  return out;
}

// Rodrigues coefficients A = sin(t)/t, B = (1-cos(t))/t^2, C = (1-A)/t^2,
// evaluated through series below the small-angle threshold.
inline void rodrigues_coeffs(double theta, double& A, double& B, double& C) {
  const double t2 = theta * theta;
  if (theta < kSmallAngle) {
    A = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    B = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    C = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    A = std::sin(theta) / theta;
    B = (1.0 - std::cos(theta)) / t2;
    C = (1.0 - A) / t2;
  }
}

inline Mat3 expmap_so3(const Vec3& omega) {
  double A, B, C;
  rodrigues_coeffs(omega.norm(), A, B, C);
  const Mat3 W = skew(omega);
  return Mat3::Identity() + A * W + B * W * W;
}

inline Pose expmap(const Twist& xi) {
  double A, B, C;
  rodrigues_coeffs(xi.omega.norm(), A, B, C);
  const Mat3 W = skew(xi.omega);
  const Mat3 W2 = W * W;
  Pose p;
  p.R = Mat3::Identity() + A * W + B * W2;
  p.t = (Mat3::Identity() + B * W + C * W2) * xi.v;  // V * v
  return p;
}

inline Vec3 logmap_so3(const Mat3& R) {
  const double tr = R.trace();
  if (tr <= -1.0 + 1e-6) throw AngleNearPi();
  const double c = std::min(1.0, std::max(-1.0, (tr - 1.0) / 2.0));
  const double theta = std::acos(c);
  // omega = theta/(2 sin theta) * vee(R - R^T); series for small theta
  double k;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    k = 0.5 + t2 / 12.0 + 7.0 * t2 * t2 / 720.0;
  } else {
    k = theta / (2.0 * std::sin(theta));
  }
  return k * vee(R - R.transpose());
}

// Coefficient of W^2 in V^{-1} = I - W/2 + c(theta) W^2.
inline double vinv_coeff(double theta) {
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  }
  return 1.0 / (theta * theta) -
         (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
}

inline Twist logmap(const Pose& p) {
  Twist xi;
  xi.omega = logmap_so3(p.R);
  const double theta = xi.omega.norm();
  const Mat3 W = skew(xi.omega);
  const Mat3 Vinv = Mat3::Identity() - 0.5 * W + vinv_coeff(theta) * W * W;
  xi.v = Vinv * p.t;
  return xi;
}

// H_hat = H * exp(eps), eps ~ N(0, sigma^2 I) componentwise.
inline Pose perturb(const Pose& p, double sigma, rng::Stream& rs) {
  Twist eps;
  for (int i = 0; i < 3; ++i) eps.omega[i] = sigma * rs.normal();
  for (int i = 0; i < 3; ++i) eps.v[i] = sigma * rs.normal();
  return p * expmap(eps);
}

// Score of the Gaussian perturbation distribution at h_hat, expressed in
// the tangent coordinates of the local reparameterization: with
// eps = log(h^{-1} h_hat), grad log q = -eps / sigma^2.
inline Twist gaussian_score(const Pose& h_hat, const Pose& h, double sigma) {
  const Twist eps = logmap(h.inverse() * h_hat);
  Twist s;
  s.omega = -eps.omega / (sigma * sigma);
  s.v = -eps.v / (sigma * sigma);
  return s;
}

// Noise scales sigma_1 < ... < sigma_L (sigma grows with k).
struct NoiseSchedule {
  std::vector<double> sigmas;

  int levels() const { return static_cast<int>(sigmas.size()); }
  double sigma(int k) const { return sigmas.at(k - 1); }  // k in [1, L]
  double sigma_max() const { return sigmas.back(); }

  static NoiseSchedule Geometric(double sigma_min, double sigma_max, int L) {
    NoiseSchedule s;
    s.sigmas.resize(L);
    for (int i = 0; i < L; ++i) {
      const double a = L == 1 ? 1.0 : static_cast<double>(i) / (L - 1);
      s.sigmas[i] = sigma_min * std::pow(sigma_max / sigma_min, a);
    }
    return s;
  }
};

// --- pose <-> 7-number serialization (unit quaternion wxyz + translation xyz)

inline std::array<double, 7> pose_to_qt(const Pose& p) {
  Eigen::Quaterniond q(p.R);
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1;  // canonical sign
  return {q.w(), q.x(), q.y(), q.z(), p.t.x(), p.t.y(), p.t.z()};
}

inline Pose pose_from_qt(const std::array<double, 7>& a) {
  Eigen::Quaterniond q(a[0], a[1], a[2], a[3]);
  q.normalize();
  Pose p;
  p.R = q.toRotationMatrix();
  p.t = Vec3(a[4], a[5], a[6]);
  return p;
}

}  // namespace adcs::lie
