#pragma once

#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace govi {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

/// Rigid transform p -> q * p + t.
struct Rigid3 {
    Quat q = Quat::Identity();
    Vec3 t = Vec3::Zero();

    /// Normalizes `q`; throws InvalidPose for zero or non-finite input.
    static Rigid3 from(const Quat& q, const Vec3& t);
    static Rigid3 from_matrix(const Mat3& r, const Vec3& t);

    Vec3 operator*(const Vec3& p) const { return q * p + t; }
    Rigid3 operator*(const Rigid3& o) const { return {q * o.q, q * o.t + t}; }
    Rigid3 inverse() const
    {
        Quat qi = q.conjugate();
        return {qi, -(qi * t)};
    }
    Mat3 rotation() const { return q.toRotationMatrix(); }
    Mat4 matrix() const;
};

/// Similarity transform p -> s R p + t.
struct Sim3 {
    double s = 1.0;
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    Vec3 operator*(const Vec3& p) const { return s * (R * p) + t; }
    Sim3 operator*(const Sim3& o) const { return {s * o.s, R * o.R, s * (R * o.t) + t}; }
    Sim3 inverse() const { return {1.0 / s, R.transpose(), -(R.transpose() * t) / s}; }
    Mat4 matrix() const;
    Rigid3 rigid() const { return Rigid3::from_matrix(R, t); }
};

/// Closed-form least-squares fit of dst ~ s R src + t (Umeyama). With
/// `with_scale` false the scale is held at 1. Throws
/// DegenerateConfiguration when the points are coincident or collinear.
Sim3 fit_similarity(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale);

/// Rotation angle of R in radians.
double rotation_angle(const Mat3& r);

} // namespace govi
