// Forward kinematics for serial revolute chains, geometric Jacobians, and
// collision-sphere placement. Plain (double) evaluation for metrics and
// residuals; tape evaluation for energies that need gradients w.r.t. q.
//
// Chain convention: link j applies Rot(axis_j, q_j) then offset_j, chained
// from the base. Link pose 0 is the base frame, link pose j the frame after
// joint j.
#pragma once

#include <Eigen/Core>
#include <vector>

#include "adcs/errors.hpp"
#include "adcs/lie.hpp"
#include "adcs/tape.hpp"
#include "adcs/tape_geometry.hpp"

namespace adcs::kin {

using lie::Pose;
using lie::Vec3;

struct Joint {
  Vec3 axis = Vec3::UnitZ();  // unit rotation axis in the parent frame
  Pose offset;                // fixed transform applied after the rotation
};

struct ChainSpec {
  Pose base;
  std::vector<Joint> joints;
  int dof() const { return static_cast<int>(joints.size()); }
};

// Joint angles for an n-arm system, one row per arm.
using JointConfig = Eigen::MatrixXd;

struct JointLimits {
  Eigen::MatrixXd lower, upper;  // n x d
  double epsilon = 0.05;         // feasibility shrink, radians
};

struct CollisionSphere {
  int link = 0;  // 0 = base frame
  Vec3 local = Vec3::Zero();
  double radius = 0.05;
};
using CollisionSphereSet = std::vector<CollisionSphere>;

struct FkResult {
  std::vector<Pose> link_poses;  // size dof()+1, [0] = base
  const Pose& ee() const { return link_poses.back(); }
};

inline FkResult fk(const ChainSpec& spec, const Eigen::VectorXd& q) {
  if (q.size() != spec.dof()) throw WrongArity("fk: joint count mismatch");
  FkResult out;
  out.link_poses.reserve(spec.dof() + 1);
  out.link_poses.push_back(spec.base);
  Pose acc = spec.base;
  for (int j = 0; j < spec.dof(); ++j) {
    Pose rot;
    rot.R = lie::expmap_so3(spec.joints[j].axis * q[j]);
    acc = acc * rot * spec.joints[j].offset;
    out.link_poses.push_back(acc);
  }
  return out;
}

// Geometric Jacobian at the end effector, world frame, angular rows stacked
// over linear rows.
inline Eigen::MatrixXd jacobian(const ChainSpec& spec, const Eigen::VectorXd& q) {
  const FkResult f = fk(spec, q);
  const Vec3 p_ee = f.ee().t;
  Eigen::MatrixXd J(6, spec.dof());
  for (int j = 0; j < spec.dof(); ++j) {
    const Pose& parent = f.link_poses[j];
    const Vec3 z = parent.R * spec.joints[j].axis;
    const Vec3 p = parent.t;
    J.block<3, 1>(0, j) = z;
    J.block<3, 1>(3, j) = z.cross(p_ee - p);
  }
  return J;
}

inline std::vector<Vec3> sphere_positions(const ChainSpec& spec,
                                          const Eigen::VectorXd& q,
                                          const CollisionSphereSet& spheres) {
  const FkResult f = fk(spec, q);
  std::vector<Vec3> out;
  out.reserve(spheres.size());
  for (const CollisionSphere& s : spheres) {
    const Pose& link = f.link_poses.at(s.link);
    out.push_back(link.R * s.local + link.t);
  }
  return out;
}

// --- tape versions -------------------------------------------------------

struct TapeFk {
  std::vector<ad::TapePose> link_poses;
  const ad::TapePose& ee() const { return link_poses.back(); }
};

// q_vec is a stacked joint vector on the tape; this chain reads entries
// [offset, offset + dof).
inline TapeFk tp_fk(ad::Tape& t, const ChainSpec& spec, ad::Var q_vec, int offset) {
  TapeFk out;
  out.link_poses.push_back(ad::tp_const_pose(t, spec.base));
  ad::TapePose acc = out.link_poses[0];
  for (int j = 0; j < spec.dof(); ++j) {
    ad::Var angle = t.entry(q_vec, offset + j, 0);
    ad::TapePose rot{ad::tp_axis_rotation(angle, spec.joints[j].axis),
                     t.leaf(ad::Mat(Vec3::Zero()))};
    acc = ad::tp_mul(ad::tp_mul(acc, rot), ad::tp_const_pose(t, spec.joints[j].offset));
    out.link_poses.push_back(acc);
  }
  return out;
}

inline std::vector<ad::Var> tp_sphere_positions(ad::Tape& t, const TapeFk& f,
                                                const CollisionSphereSet& spheres) {
  std::vector<ad::Var> out;
  out.reserve(spheres.size());
  for (const CollisionSphere& s : spheres) {
    const ad::TapePose& link = f.link_poses.at(s.link);
    out.push_back(t.add(t.matmul(link.R, t.leaf(ad::Mat(s.local))), link.t));
  }
  return out;
}

// A multi-arm system: one chain per end effector plus shared limits and
// collision geometry. JointConfig rows index arms.
struct System {
  std::vector<ChainSpec> arms;
  JointLimits limits;
  std::vector<CollisionSphereSet> spheres;  // per arm, may be empty

  int n_arms() const { return static_cast<int>(arms.size()); }
  int dof_per_arm() const { return arms.empty() ? 0 : arms[0].dof(); }
  int total_dof() const {
    int d = 0;
    for (const ChainSpec& a : arms) d += a.dof();
    return d;
  }
};

inline std::vector<Pose> system_ee_poses(const System& sys, const JointConfig& q) {
  std::vector<Pose> out;
  out.reserve(sys.n_arms());
  for (int a = 0; a < sys.n_arms(); ++a)
    out.push_back(fk(sys.arms[a], q.row(a).transpose()).ee());
  return out;
}

// Convenience constructor for a planar arm: revolute z-axes, links along
// local x, base translated to base_xy in the z = 0 plane.
inline ChainSpec planar_arm(const Eigen::Vector2d& base_xy,
                            const std::vector<double>& link_lengths) {
  ChainSpec spec;
  spec.base.t = Vec3(base_xy.x(), base_xy.y(), 0.0);
  for (double len : link_lengths) {
    Joint j;
    j.axis = Vec3::UnitZ();
    j.offset.t = Vec3(len, 0, 0);
    spec.joints.push_back(j);
  }
  return spec;
}

}  // namespace adcs::kin
