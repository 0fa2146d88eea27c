#include "govi/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "govi/error.hpp"

namespace govi {

Rigid3 Rigid3::from(const Quat& q, const Vec3& t)
{
    double n = q.norm();
    if (!(n > 1e-12) || !std::isfinite(n) || !t.allFinite())
        fail(Errc::InvalidPose, "pose has a zero or non-finite quaternion/translation");
    return {Quat(q.coeffs() / n), t};
}

Rigid3 Rigid3::from_matrix(const Mat3& r, const Vec3& t)
{
    return from(Quat(r), t);
}

Mat4 Rigid3::matrix() const
{
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation();
    m.topRightCorner<3, 1>() = t;
    return m;
}

Mat4 Sim3::matrix() const
{
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = s * R;
    m.topRightCorner<3, 1>() = t;
    return m;
}

Sim3 fit_similarity(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale)
{
    if (src.size() != dst.size())
        fail(Errc::InvalidArgument, "point sets differ in size");
    if (src.size() < 3)
        fail(Errc::DegenerateConfiguration, "need at least 3 point pairs, got " + std::to_string(src.size()));

    const double n = double(src.size());
    Vec3 mu_s = Vec3::Zero();
    Vec3 mu_d = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        mu_s += src[i];
        mu_d += dst[i];
    }
    mu_s /= n;
    mu_d /= n;

    Mat3 cov = Mat3::Zero();
    Mat3 src_scatter = Mat3::Zero();
    double var_s = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        Vec3 a = src[i] - mu_s;
        Vec3 b = dst[i] - mu_d;
        cov += b * a.transpose();
        src_scatter += a * a.transpose();
        var_s += a.squaredNorm();
    }
    cov /= n;
    var_s /= n;

    // Rank of the source spread decides degeneracy (collinear or coincident).
    Eigen::JacobiSVD<Mat3> spread(src_scatter);
    auto sv_s = spread.singularValues();
    if (!(sv_s(0) > 0.0) || sv_s(1) <= 1e-12 * sv_s(0))
        fail(Errc::DegenerateConfiguration, "source points are coincident or collinear");

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    Mat3 v = svd.matrixV();
    Vec3 d = svd.singularValues();
    if (d(1) <= 1e-12 * d(0))
        fail(Errc::DegenerateConfiguration, "cross-covariance is rank deficient");
    Mat3 sign = Mat3::Identity();
    if (u.determinant() * v.determinant() < 0.0)
        sign(2, 2) = -1.0;

    Sim3 out;
    out.R = u * sign * v.transpose();
    out.s = with_scale ? (d.asDiagonal() * sign).trace() / var_s : 1.0;
    out.t = mu_d - out.s * (out.R * mu_s);
    return out;
}

double rotation_angle(const Mat3& r)
{
    Quat q(r);
    return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

} // namespace govi
