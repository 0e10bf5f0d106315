// Analytic signed distance fields (sphere, box, cylinder), surface normals,
// and deterministic surface point-cloud sampling.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "adcs/errors.hpp"
#include "adcs/rng.hpp"

namespace adcs::shapes {

using Vec3 = Eigen::Vector3d;

struct Shape {
  enum class Type { Sphere, Box, Cylinder };
  Type type = Type::Sphere;
  Vec3 center = Vec3::Zero();
  // Sphere: params.x = radius.
  // Box: params = half extents.
  // Cylinder: params.x = radius, params.z = half height, axis along z.
  Vec3 params = Vec3(0.1, 0.1, 0.1);
};

inline double sdf(const Shape& s, const Vec3& p) {
  const Vec3 d = p - s.center;
  switch (s.type) {
    case Shape::Type::Sphere:
      return d.norm() - s.params.x();
    case Shape::Type::Box: {
      const Vec3 q = d.cwiseAbs() - s.params;
      const Vec3 qp = q.cwiseMax(0.0);
      return qp.norm() + std::min(q.maxCoeff(), 0.0);
    }
    case Shape::Type::Cylinder: {
      const double dr = std::hypot(d.x(), d.y()) - s.params.x();
      const double dz = std::abs(d.z()) - s.params.z();
      const double outside = std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
      return outside + std::min(std::max(dr, dz), 0.0);
    }
  }
  return 0.0;
}

// Outward unit normal; central differences keep this exact enough everywhere
// off the medial axis, which is all the constraints need.
inline Vec3 normal(const Shape& s, const Vec3& p, double h = 1e-6) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 hi = p, lo = p;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (sdf(s, hi) - sdf(s, lo)) / (2 * h);
  }
  const double n = g.norm();
  if (n < 1e-12) return Vec3::UnitZ();
  return g / n;
}

// Deterministic surface samples (area-weighted for box and cylinder).
inline std::vector<Vec3> sample_surface(const Shape& s, int n, rng::Stream& rs) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    switch (s.type) {
      case Shape::Type::Sphere: {
        Vec3 d(rs.normal(), rs.normal(), rs.normal());
        while (d.norm() < 1e-9) d = Vec3(rs.normal(), rs.normal(), rs.normal());
        pts.push_back(s.center + s.params.x() * d.normalized());
        break;
      }
      case Shape::Type::Box: {
        const Vec3& h = s.params;
        const double areas[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
        const double total = areas[0] + areas[1] + areas[2];
        double u = rs.uniform() * total;
        int face = u < areas[0] ? 0 : (u < areas[0] + areas[1] ? 1 : 2);
        Vec3 p;
        p[face] = (rs.uniform() < 0.5 ? -1.0 : 1.0) * h[face];
        const int a = (face + 1) % 3, b = (face + 2) % 3;
        p[a] = rs.uniform(-h[a], h[a]);
        p[b] = rs.uniform(-h[b], h[b]);
        pts.push_back(s.center + p);
        break;
      }
      case Shape::Type::Cylinder: {
        const double r = s.params.x(), hh = s.params.z();
        const double side = 2 * M_PI * r * 2 * hh;
        const double caps = 2 * M_PI * r * r;
        if (rs.uniform() * (side + caps) < side) {
          const double phi = rs.uniform(0, 2 * M_PI);
          pts.push_back(s.center + Vec3(r * std::cos(phi), r * std::sin(phi),
                                        rs.uniform(-hh, hh)));
        } else {
          const double phi = rs.uniform(0, 2 * M_PI);
          const double rr = r * std::sqrt(rs.uniform());
          const double z = rs.uniform() < 0.5 ? -hh : hh;
          pts.push_back(s.center +
                        Vec3(rr * std::cos(phi), rr * std::sin(phi), z));
        }
        break;
      }
    }
  }
  return pts;
}

// Point cloud for a task shape: surface samples, optionally offset and
// corrupted with Gaussian noise (robustness variants).
inline std::vector<Vec3> make_cloud(const Shape& s, int n, std::uint64_t seed,
                                    const Vec3& offset = Vec3::Zero(),
                                    double noise_sigma = 0.0) {
  rng::Stream rs(seed, "cloud");
  std::vector<Vec3> pts = sample_surface(s, n, rs);
  for (Vec3& p : pts) {
    p += offset;
    if (noise_sigma > 0)
      p += noise_sigma * Vec3(rs.normal(), rs.normal(), rs.normal());
  }
  return pts;
}

}  // namespace adcs::shapes
