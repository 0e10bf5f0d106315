// Typed constraints, their feature functions, analytic costs, slack mapping,
// and the stacked residual used by Gauss-Newton solvers.
//
// Feature conventions:
//   - equality constraints return signed feature vectors that vanish exactly
//     on the feasible set
//   - inequality constraints return hinged (componentwise nonnegative)
//     features that vanish on the feasible set
// so the per-constraint slack is the feature norm in both cases.
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "adcs/errors.hpp"
#include "adcs/kin.hpp"
#include "adcs/lie.hpp"
#include "adcs/shapes.hpp"
#include "adcs/tape.hpp"
#include "adcs/tape_geometry.hpp"

namespace adcs::constraints {

using lie::Mat3;
using lie::Pose;
using lie::Vec3;

enum class Kind {
  RelativePose,
  AbsolutePose,
  MidpointEq,
  MidpointBox,
  MidpointOnSurface,
  OrientationAxis,
  OrientationFull,
  ObstacleSphere,
  JointLimit,
  SelfCollision,
  SurfaceNormalOrientation,
};

enum class Relation { Equality, Inequality };

inline Relation relation_of(Kind k) {
  switch (k) {
    case Kind::RelativePose:
    case Kind::AbsolutePose:
    case Kind::MidpointEq:
    case Kind::OrientationAxis:
    case Kind::OrientationFull:
    case Kind::SurfaceNormalOrientation:
      return Relation::Equality;
    default:
      return Relation::Inequality;
  }
}

inline std::string kind_tag(Kind k) {
  switch (k) {
    case Kind::RelativePose: return "relative_pose";
    case Kind::AbsolutePose: return "absolute_pose";
    case Kind::MidpointEq: return "midpoint_eq";
    case Kind::MidpointBox: return "midpoint_box";
    case Kind::MidpointOnSurface: return "midpoint_on_surface";
    case Kind::OrientationAxis: return "orientation_axis";
    case Kind::OrientationFull: return "orientation_full";
    case Kind::ObstacleSphere: return "obstacle_sphere";
    case Kind::JointLimit: return "joint_limit";
    case Kind::SelfCollision: return "self_collision";
    case Kind::SurfaceNormalOrientation: return "surface_normal_orientation";
  }
  return "?";
}

inline Kind kind_from_tag(const std::string& tag) {
  for (Kind k : {Kind::RelativePose, Kind::AbsolutePose, Kind::MidpointEq,
                 Kind::MidpointBox, Kind::MidpointOnSurface, Kind::OrientationAxis,
                 Kind::OrientationFull, Kind::ObstacleSphere, Kind::JointLimit,
                 Kind::SelfCollision, Kind::SurfaceNormalOrientation})
    if (kind_tag(k) == tag) return k;
  throw SchemaMismatch("unknown constraint kind: " + tag);
}

struct Constraint {
  Kind kind = Kind::RelativePose;
  // Parameters; only the fields relevant to the kind are read.
  Pose target;                       // RelativePose / AbsolutePose
  Vec3 t_mid = Vec3::Zero();         // MidpointEq
  Vec3 c1 = Vec3::Zero(), c2 = Vec3::Zero();  // MidpointBox corners
  shapes::Shape shape;               // *OnSurface / SurfaceNormal*
  Vec3 body_axis = Vec3::UnitX();    // OrientationAxis / SurfaceNormal*
  Vec3 world_axis = Vec3::UnitZ();   // OrientationAxis
  Mat3 r_goal = Mat3::Identity();    // OrientationFull
  Vec3 obs_center = Vec3::Zero();    // ObstacleSphere
  double obs_radius = 0.1;
  int ee = 0;                        // end effector for orientation kinds
  int ee_a = 0, ee_b = 1;            // pair for relative/midpoint kinds

  Relation relation() const { return relation_of(kind); }
};

struct ConstraintSet {
  std::vector<Constraint> items;

  const Constraint& fundamental() const {
    if (items.empty()) throw WrongArity("constraint set is empty");
    return items[0];
  }
  int size() const { return static_cast<int>(items.size()); }
};

// Learned SE(3) constraints get energy networks; the joint-space kinds are
// applied analytically at inference.
inline bool is_pose_kind(Kind k) {
  switch (k) {
    case Kind::ObstacleSphere:
    case Kind::JointLimit:
    case Kind::SelfCollision:
      return false;
    default:
      return true;
  }
}

inline bool is_sdf_kind(Kind k) {
  return k == Kind::MidpointOnSurface || k == Kind::SurfaceNormalOrientation;
}

// --- plain feature functions ----------------------------------------------

inline Eigen::VectorXd feature_pose(const Constraint& c,
                                    const std::vector<Pose>& poses) {
  auto at = [&](int i) -> const Pose& {
    if (i < 0 || i >= static_cast<int>(poses.size()))
      throw WrongArity("constraint references end effector " + std::to_string(i));
    return poses[i];
  };
  switch (c.kind) {
    case Kind::RelativePose: {
      const Pose rel = at(c.ee_a).inverse() * at(c.ee_b);
      return lie::logmap(c.target.inverse() * rel).vec();
    }
    case Kind::AbsolutePose:
      return lie::logmap(c.target.inverse() * at(c.ee)).vec();
    case Kind::MidpointEq:
      return (at(c.ee_a).t + at(c.ee_b).t) / 2.0 - c.t_mid;
    case Kind::MidpointBox: {
      const Vec3 m = (at(c.ee_a).t + at(c.ee_b).t) / 2.0;
      Vec3 f;
      for (int i = 0; i < 3; ++i)
        f[i] = std::max(0.0, c.c1[i] - m[i]) + std::max(0.0, m[i] - c.c2[i]);
      return f;
    }
    case Kind::MidpointOnSurface: {
      const Vec3 m = (at(c.ee_a).t + at(c.ee_b).t) / 2.0;
      Eigen::VectorXd f(1);
      f[0] = std::max(0.0, shapes::sdf(c.shape, m));
      return f;
    }
    case Kind::OrientationAxis: {
      Eigen::VectorXd f(1);
      f[0] = (at(c.ee).R * c.body_axis).dot(c.world_axis) - 1.0;
      return f;
    }
    case Kind::OrientationFull:
      return lie::logmap_so3(c.r_goal.transpose() * at(c.ee).R);
    case Kind::SurfaceNormalOrientation: {
      const Vec3 m = (at(c.ee_a).t + at(c.ee_b).t) / 2.0;
      const Vec3 n = shapes::normal(c.shape, m);
      Eigen::VectorXd f(1);
      f[0] = (at(c.ee).R * c.body_axis).dot(n) - 1.0;
      return f;
    }
    default:
      throw WrongArity("feature_pose called on a joint-space constraint: " +
                       kind_tag(c.kind));
  }
}

// --- analytic costs ---------------------------------------------------------

// c_SE3 = |t1 - t2|^2 + |Log(R1^T R2)|
inline double cost_se3(const Pose& h1, const Pose& h2) {
  return (h1.t - h2.t).squaredNorm() +
         lie::logmap_so3(h1.R.transpose() * h2.R).norm();
}

// Hinge on penetration depth, summed over all collision spheres of all arms.
inline double cost_obstacle(const kin::System& sys, const kin::JointConfig& q,
                            const Vec3& center, double radius) {
  double cost = 0.0;
  for (int a = 0; a < sys.n_arms(); ++a) {
    if (a >= static_cast<int>(sys.spheres.size())) break;
    const auto pos = kin::sphere_positions(sys.arms[a], q.row(a).transpose(),
                                           sys.spheres[a]);
    for (size_t i = 0; i < pos.size(); ++i) {
      const double pen =
          sys.spheres[a][i].radius + radius - (pos[i] - center).norm();
      cost += std::max(0.0, pen);
    }
  }
  return cost;
}

// Squared hinge on violation of the epsilon-shrunk joint box.
inline double cost_joint_limits(const kin::JointConfig& q,
                                const kin::JointLimits& lim) {
  double cost = 0.0;
  for (int a = 0; a < q.rows(); ++a)
    for (int j = 0; j < q.cols(); ++j) {
      const double lo = lim.lower(a, j) + lim.epsilon;
      const double hi = lim.upper(a, j) - lim.epsilon;
      const double under = std::max(0.0, lo - q(a, j));
      const double over = std::max(0.0, q(a, j) - hi);
      cost += under * under + over * over;
    }
  return cost;
}

// Hinged overlap between every pair of spheres on distinct (arm, link)s.
inline double cost_self_collision(const kin::System& sys,
                                  const kin::JointConfig& q) {
  struct Placed {
    Vec3 p;
    double r;
    int arm, link;
  };
  std::vector<Placed> all;
  for (int a = 0; a < sys.n_arms(); ++a) {
    if (a >= static_cast<int>(sys.spheres.size())) break;
    const auto pos = kin::sphere_positions(sys.arms[a], q.row(a).transpose(),
                                           sys.spheres[a]);
    for (size_t i = 0; i < pos.size(); ++i)
      all.push_back({pos[i], sys.spheres[a][i].radius, a, sys.spheres[a][i].link});
  }
  double cost = 0.0;
  for (size_t i = 0; i < all.size(); ++i)
    for (size_t j = i + 1; j < all.size(); ++j) {
      if (all[i].arm == all[j].arm && all[i].link == all[j].link) continue;
      const double pen = all[i].r + all[j].r - (all[i].p - all[j].p).norm();
      cost += std::max(0.0, pen);
    }
  return cost;
}

// Feature of a joint-space constraint (hinged, nonnegative).
inline Eigen::VectorXd feature_q(const Constraint& c, const kin::System& sys,
                                 const kin::JointConfig& q) {
  switch (c.kind) {
    case Kind::ObstacleSphere: {
      Eigen::VectorXd f(1);
      f[0] = cost_obstacle(sys, q, c.obs_center, c.obs_radius);
      return f;
    }
    case Kind::JointLimit: {
      Eigen::VectorXd f(q.size());
      int idx = 0;
      for (int a = 0; a < q.rows(); ++a)
        for (int j = 0; j < q.cols(); ++j) {
          const double lo = sys.limits.lower(a, j) + sys.limits.epsilon;
          const double hi = sys.limits.upper(a, j) - sys.limits.epsilon;
          f[idx++] = std::max(0.0, lo - q(a, j)) + std::max(0.0, q(a, j) - hi);
        }
      return f;
    }
    case Kind::SelfCollision: {
      Eigen::VectorXd f(1);
      f[0] = cost_self_collision(sys, q);
      return f;
    }
    default:
      throw WrongArity("feature_q called on a pose constraint: " + kind_tag(c.kind));
  }
}

inline Eigen::VectorXd feature(const Constraint& c, const kin::System& sys,
                               const kin::JointConfig& q,
                               const std::vector<Pose>& poses) {
  return is_pose_kind(c.kind) ? feature_pose(c, poses) : feature_q(c, sys, q);
}

// Per-constraint slack: norm of the feature vector (inequality features are
// already hinged, so this is the hinge magnitude).
inline Eigen::VectorXd slack(const ConstraintSet& cs, const kin::System& sys,
                             const kin::JointConfig& q) {
  const std::vector<Pose> poses = kin::system_ee_poses(sys, q);
  Eigen::VectorXd s(cs.size());
  for (int i = 0; i < cs.size(); ++i)
    s[i] = feature(cs.items[i], sys, q, poses).norm();
  return s;
}

// Stacked residual vector over all constraints (signed equality features,
// hinged inequality features). Zero exactly on the feasible set.
inline Eigen::VectorXd residual(const ConstraintSet& cs, const kin::System& sys,
                                const kin::JointConfig& q) {
  const std::vector<Pose> poses = kin::system_ee_poses(sys, q);
  std::vector<Eigen::VectorXd> parts;
  int total = 0;
  for (const Constraint& c : cs.items) {
    parts.push_back(feature(c, sys, q, poses));
    total += static_cast<int>(parts.back().size());
  }
  Eigen::VectorXd r(total);
  int at = 0;
  for (const auto& p : parts) {
    r.segment(at, p.size()) = p;
    at += static_cast<int>(p.size());
  }
  return r;
}

// --- tape feature functions -------------------------------------------------

namespace tp {

using ad::Tape;
using ad::TapePose;
using ad::Var;

inline Var midpoint(Tape& t, const TapePose& a, const TapePose& b) {
  return t.scale(t.add(a.t, b.t), t.leaf(0.5));
}

// max(x, 0) for a scalar or vector node
inline Var hinge(Tape& t, Var x) { return t.relu(x); }

// Analytic SDF of a shape as tape ops (for residuals; the learned-energy
// path goes through the SDF network instead).
inline Var sdf(Tape& t, const shapes::Shape& s, Var p) {
  Var d = t.sub(p, t.leaf(ad::Mat(s.center)));
  switch (s.type) {
    case shapes::Shape::Type::Sphere:
      return t.sub(ad::tp_norm(d), t.leaf(s.params.x()));
    case shapes::Shape::Type::Box: {
      // |d| - h, elementwise; outside = |max(q,0)|, inside = min(max q, 0)
      Var absd = t.add(t.relu(d), t.relu(t.neg(d)));
      Var qv = t.sub(absd, t.leaf(ad::Mat(s.params)));
      Var outside = ad::tp_norm(t.relu(qv));
      // max over 3 entries via pairwise max(a,b) = a + relu(b-a)
      Var m01 = t.add(t.entry(qv, 0, 0),
                      t.relu(t.sub(t.entry(qv, 1, 0), t.entry(qv, 0, 0))));
      Var mx = t.add(m01, t.relu(t.sub(t.entry(qv, 2, 0), m01)));
      Var inside = t.neg(t.relu(t.neg(mx)));  // min(mx, 0)
      return t.add(outside, inside);
    }
    case shapes::Shape::Type::Cylinder: {
      Var dx = t.entry(d, 0, 0), dy = t.entry(d, 1, 0), dz = t.entry(d, 2, 0);
      Var dr = t.sub(t.sqrt(t.add(t.hadamard(dx, dx), t.hadamard(dy, dy))),
                     t.leaf(s.params.x()));
      Var adz = t.add(t.relu(dz), t.relu(t.neg(dz)));
      Var dzh = t.sub(adz, t.leaf(s.params.z()));
      Var hr = t.relu(dr), hz = t.relu(dzh);
      Var outside = t.sqrt(t.add(t.hadamard(hr, hr), t.hadamard(hz, hz)));
      Var mx = t.add(dr, t.relu(t.sub(dzh, dr)));
      Var inside = t.neg(t.relu(t.neg(mx)));
      return t.add(outside, inside);
    }
  }
  throw Error("unreachable");
}

// Tape analog of feature_pose for the analytic kinds. SurfaceNormal uses the
// analytic normal held fixed at the current midpoint (good to first order).
inline std::vector<Var> feature_pose(Tape& t, const Constraint& c,
                                     const std::vector<TapePose>& poses) {
  std::vector<Var> out;
  auto push_vec = [&](Var v, int dim) {
    for (int i = 0; i < dim; ++i) out.push_back(t.entry(v, i, 0));
  };
  switch (c.kind) {
    case Kind::RelativePose: {
      TapePose rel = ad::tp_mul(ad::tp_inverse(poses[c.ee_a]), poses[c.ee_b]);
      TapePose f = ad::tp_mul(ad::tp_const_pose(t, c.target.inverse()), rel);
      push_vec(ad::tp_se3_log(f), 6);
      break;
    }
    case Kind::AbsolutePose: {
      TapePose f = ad::tp_mul(ad::tp_const_pose(t, c.target.inverse()), poses[c.ee]);
      push_vec(ad::tp_se3_log(f), 6);
      break;
    }
    case Kind::MidpointEq: {
      Var m = midpoint(t, poses[c.ee_a], poses[c.ee_b]);
      push_vec(t.sub(m, t.leaf(ad::Mat(c.t_mid))), 3);
      break;
    }
    case Kind::MidpointBox: {
      Var m = midpoint(t, poses[c.ee_a], poses[c.ee_b]);
      Var under = t.relu(t.sub(t.leaf(ad::Mat(c.c1)), m));
      Var over = t.relu(t.sub(m, t.leaf(ad::Mat(c.c2))));
      push_vec(t.add(under, over), 3);
      break;
    }
    case Kind::MidpointOnSurface: {
      Var m = midpoint(t, poses[c.ee_a], poses[c.ee_b]);
      out.push_back(hinge(t, sdf(t, c.shape, m)));
      break;
    }
    case Kind::OrientationAxis: {
      Var axis = t.matmul(poses[c.ee].R, t.leaf(ad::Mat(c.body_axis)));
      out.push_back(t.sub(ad::tp_dot(axis, t.leaf(ad::Mat(c.world_axis))), t.leaf(1.0)));
      break;
    }
    case Kind::OrientationFull: {
      Var f = t.matmul(t.leaf(ad::Mat(Mat3(c.r_goal.transpose()))), poses[c.ee].R);
      push_vec(ad::tp_rot_log(f), 3);
      break;
    }
    case Kind::SurfaceNormalOrientation: {
      // Normal held fixed at the current midpoint; callers rebuild the tape
      // per step, which refreshes it.
      Var m = midpoint(t, poses[c.ee_a], poses[c.ee_b]);
      const Vec3 mid_now(t.val(m)(0, 0), t.val(m)(1, 0), t.val(m)(2, 0));
      Var axis = t.matmul(poses[c.ee].R, t.leaf(ad::Mat(c.body_axis)));
      Var nv = t.leaf(ad::Mat(shapes::normal(c.shape, mid_now)));
      out.push_back(t.sub(ad::tp_dot(axis, nv), t.leaf(1.0)));
      break;
    }
    default:
      throw WrongArity("tape feature on joint-space constraint");
  }
  return out;
}

// Scalar hinged costs of the joint-space kinds, differentiable through the
// sphere placements.
inline Var cost_q(Tape& t, const Constraint& c, const kin::System& sys,
                  const std::vector<kin::TapeFk>& fks, Var q_vec) {
  switch (c.kind) {
    case Kind::ObstacleSphere: {
      Var total = t.leaf(0.0);
      for (int a = 0; a < sys.n_arms(); ++a) {
        if (a >= static_cast<int>(sys.spheres.size())) break;
        const auto pos = kin::tp_sphere_positions(t, fks[a], sys.spheres[a]);
        for (size_t i = 0; i < pos.size(); ++i) {
          Var dist = ad::tp_norm(t.sub(pos[i], t.leaf(ad::Mat(c.obs_center))));
          Var pen = t.sub(t.leaf(sys.spheres[a][i].radius + c.obs_radius), dist);
          total = t.add(total, t.relu(pen));
        }
      }
      return total;
    }
    case Kind::JointLimit: {
      Var total = t.leaf(0.0);
      const int d = sys.dof_per_arm();
      for (int a = 0; a < sys.n_arms(); ++a)
        for (int j = 0; j < d; ++j) {
          Var qj = t.entry(q_vec, a * d + j, 0);
          Var under = t.relu(t.sub(t.leaf(sys.limits.lower(a, j) + sys.limits.epsilon), qj));
          Var over = t.relu(t.sub(qj, t.leaf(sys.limits.upper(a, j) - sys.limits.epsilon)));
          total = t.add(total, t.add(t.hadamard(under, under), t.hadamard(over, over)));
        }
      return total;
    }
    case Kind::SelfCollision: {
      struct Placed {
        Var p;
        double r;
        int arm, link;
      };
      std::vector<Placed> all;
      for (int a = 0; a < sys.n_arms(); ++a) {
        if (a >= static_cast<int>(sys.spheres.size())) break;
        const auto pos = kin::tp_sphere_positions(t, fks[a], sys.spheres[a]);
        for (size_t i = 0; i < pos.size(); ++i)
          all.push_back({pos[i], sys.spheres[a][i].radius, a, sys.spheres[a][i].link});
      }
      Var total = t.leaf(0.0);
      for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size(); ++j) {
          if (all[i].arm == all[j].arm && all[i].link == all[j].link) continue;
          Var dist = ad::tp_norm(t.sub(all[i].p, all[j].p));
          Var pen = t.sub(t.leaf(all[i].r + all[j].r), dist);
          total = t.add(total, t.relu(pen));
        }
      return total;
    }
    default:
      throw WrongArity("cost_q on pose constraint");
  }
}

// Stacked residual entries on the tape (for Gauss-Newton Jacobians). The
// plain residual() is the value oracle for this.
inline std::vector<Var> residual(Tape& t, const ConstraintSet& cs,
                                 const kin::System& sys,
                                 const std::vector<kin::TapeFk>& fks, Var q_vec) {
  std::vector<TapePose> poses;
  poses.reserve(fks.size());
  for (const auto& f : fks) poses.push_back(f.ee());
  std::vector<Var> out;
  for (const Constraint& c : cs.items) {
    if (is_pose_kind(c.kind)) {
      for (Var v : feature_pose(t, c, poses)) out.push_back(v);
    } else if (c.kind == Kind::JointLimit) {
      const int d = sys.dof_per_arm();
      for (int a = 0; a < sys.n_arms(); ++a)
        for (int j = 0; j < d; ++j) {
          Var qj = t.entry(q_vec, a * d + j, 0);
          Var under = t.relu(t.sub(t.leaf(sys.limits.lower(a, j) + sys.limits.epsilon), qj));
          Var over = t.relu(t.sub(qj, t.leaf(sys.limits.upper(a, j) - sys.limits.epsilon)));
          out.push_back(t.add(under, over));
        }
    } else {
      out.push_back(cost_q(t, c, sys, fks, q_vec));
    }
  }
  return out;
}

}  // namespace tp

}  // namespace adcs::constraints
