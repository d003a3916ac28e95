#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "symknot/closed_curve.hpp"
#include "symknot/errors.hpp"

namespace symknot {

// Orientation-preserving isometry x -> R x + t.
struct RigidMotion {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Vec3 translation = Vec3::Zero();

    RigidMotion() = default;
    RigidMotion(const Eigen::Matrix3d& r, const Vec3& t) : rotation(r), translation(t) {
        const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
        if (ortho > 1e-12 || std::fabs(r.determinant() - 1.0) > 1e-12) {
            throw validation_error("RigidMotion: rotation must be orthogonal with determinant +1");
        }
    }

    Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
};

// Rotation by beta about the affine line through axis_point with direction
// axis_direction; every point of the line is fixed.
inline RigidMotion rotation_about_axis(double beta, const Vec3& axis_point, const Vec3& axis_direction) {
    const double norm = axis_direction.norm();
    if (!(norm > 0.0)) throw validation_error("rotation_about_axis: axis direction must be nonzero");
    const Eigen::Matrix3d r = Eigen::AngleAxisd(beta, axis_direction / norm).toRotationMatrix();
    return RigidMotion(r, axis_point - r * axis_point);
}

inline ClosedCurve transform_curve(const ClosedCurve& curve, const RigidMotion& motion) {
    std::vector<Vec3> pts = curve.points();
    for (Vec3& p : pts) p = motion.apply(p);
    return ClosedCurve(std::move(pts));
}

}  // namespace symknot
