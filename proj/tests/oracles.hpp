#pragma once

// Independent reference implementations used to check the library. They
// favour directness over speed and share no code with src/.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace oracle {

/// Big-endian byte assembler.
struct Bytes {
    std::vector<std::uint8_t> v;

    Bytes& u8(unsigned x)
    {
        v.push_back(std::uint8_t(x));
        return *this;
    }
    Bytes& be16(std::uint32_t x) { return u8(x >> 8).u8(x & 0xFF); }
    Bytes& be32(std::uint32_t x) { return be16(x >> 16).be16(x & 0xFFFF); }
    Bytes& be64(std::uint64_t x) { return be32(std::uint32_t(x >> 32)).be32(std::uint32_t(x)); }
    Bytes& tag(const char* s)
    {
        for (int i = 0; i < 4; ++i)
            u8(std::uint8_t(s[i]));
        return *this;
    }
    Bytes& raw(const std::vector<std::uint8_t>& b)
    {
        v.insert(v.end(), b.begin(), b.end());
        return *this;
    }
    Bytes& pad4()
    {
        while (v.size() % 4)
            u8(0);
        return *this;
    }
    std::size_t size() const { return v.size(); }
};

/// MP4 box: 32-bit size + type + body.
inline std::vector<std::uint8_t> box(const char* type, const std::vector<std::uint8_t>& body)
{
    Bytes b;
    b.be32(std::uint32_t(8 + body.size())).tag(type).raw(body);
    return b.v;
}

/// Overlapping Allan variance straight from its definition with explicit
/// cluster means: (1 / (2 (N - 2m))) sum_{k=0}^{N-2m-1} (ybar_{k+m} - ybar_k)^2.
inline double avar(const std::vector<double>& x, std::size_t m)
{
    const std::size_t n = x.size();
    auto ybar = [&](std::size_t k) {
        double s = 0.0;
        for (std::size_t i = k; i < k + m; ++i)
            s += x[i];
        return s / double(m);
    };
    double sum = 0.0;
    for (std::size_t k = 0; k < n - 2 * m; ++k) {
        double d = ybar(k + m) - ybar(k);
        sum += d * d;
    }
    return sum / (2.0 * double(n - 2 * m));
}

/// Brute-force nearest neighbor (ties: lowest index). Returns -1 when none is
/// closer than max_distance.
inline long nearest(const std::vector<Eigen::Vector3d>& pts, const Eigen::Vector3d& q, double max_distance,
                    double* dist = nullptr)
{
    long best = -1;
    double bd = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double d = (pts[i] - q).norm();
        if (d < max_distance && (best < 0 || d < bd)) {
            best = long(i);
            bd = d;
        }
    }
    if (dist)
        *dist = bd;
    return best;
}

/// Uniform random rotation from a normalized 4D gaussian.
template <typename Rng> Eigen::Quaterniond random_rotation(Rng& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
    return Eigen::Quaterniond(w, x, y, z).normalized();
}

template <typename Rng> Eigen::Vector3d random_vec(Rng& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    double x = u(rng), y = u(rng), z = u(rng);
    return {x, y, z};
}

/// Rotation angle between two rotation matrices, degrees.
inline double angle_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b)
{
    Eigen::Matrix3d r = a.transpose() * b;
    double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c) * 180.0 / 3.14159265358979323846;
}

} // namespace oracle

namespace oracle {

/// Rotation matrix from a unit quaternion written out component-wise.
inline Eigen::Matrix3d quat_matrix(double w, double x, double y, double z)
{
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

/// Homogeneous 4x4 pose matrix.
inline Eigen::Matrix4d pose_matrix(const Eigen::Quaterniond& q, const Eigen::Vector3d& t)
{
    Eigen::Quaterniond u = q.normalized();
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = quat_matrix(u.w(), u.x(), u.y(), u.z());
    m.topRightCorner<3, 1>() = t;
    return m;
}

/// One observation as the brute-force fusion sees it.
struct FuseObs {
    Eigen::Matrix4d t_wf_at_observation;
    Eigen::Matrix4d t_wf_now;
    Eigen::Vector3d p_world;
    double q;
    Eigen::Vector3d color;
};

struct FuseOut {
    Eigen::Vector3d p;
    Eigen::Vector3d c;
    double q;
};

/// Weighted means: P = sum(T_wf P_f Q_f) / sum(Q_f), C likewise, Q = sum(Q_f) / N,
/// with P_f = T_wf(at observation)^-1 P_w.
inline FuseOut fuse(const std::vector<FuseObs>& obs)
{
    Eigen::Vector3d p = Eigen::Vector3d::Zero(), c = Eigen::Vector3d::Zero();
    double wsum = 0.0;
    for (const auto& o : obs) {
        Eigen::Vector4d pw(o.p_world.x(), o.p_world.y(), o.p_world.z(), 1.0);
        Eigen::Vector4d pf = o.t_wf_at_observation.inverse() * pw;
        Eigen::Vector4d now = o.t_wf_now * pf;
        p += o.q * now.head<3>();
        c += o.q * o.color;
        wsum += o.q;
    }
    return {p / wsum, c / wsum, wsum / double(obs.size())};
}

} // namespace oracle
