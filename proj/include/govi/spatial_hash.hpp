#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "govi/geometry.hpp"

namespace govi::cloud {

/// Uniform-grid spatial hash over a fixed point set. Points are bucketed by
/// integer cell coordinates; queries visit only the cells that can hold a
/// match. All results are ordered by (distance, index).
class SpatialHash {
public:
    SpatialHash(std::span<const Vec3> points, double cell_size);

    /// Indices with |p - q| <= radius.
    std::vector<std::uint32_t> radius_search(const Vec3& query, double radius) const;

    struct Hit {
        std::uint32_t index;
        double distance;
    };
    /// Closest point with distance < max_distance (ties: lowest index).
    std::optional<Hit> nearest(const Vec3& query, double max_distance) const;

    /// The k closest points (fewer only if the set is smaller).
    std::vector<Hit> knn(const Vec3& query, std::size_t k) const;

    double cell_size() const { return cell_; }
    std::size_t size() const { return points_.size(); }

private:
    struct Cell {
        std::int64_t x, y, z;
        bool operator==(const Cell&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const Cell& c) const noexcept
        {
            std::uint64_t h = std::uint64_t(c.x) * 73856093ull ^ std::uint64_t(c.y) * 19349663ull ^
                              std::uint64_t(c.z) * 83492791ull;
            return std::size_t(h * 0x9E3779B97F4A7C15ull >> 16);
        }
    };

    Cell cell_of(const Vec3& p) const;
    template <typename Fn> void visit_shell(const Cell& center, std::int64_t ring, Fn&& fn) const;

    std::span<const Vec3> points_;
    double cell_;
    std::vector<std::uint32_t> order_;
    std::unordered_map<Cell, std::pair<std::uint32_t, std::uint32_t>, CellHash> ranges_;
    Cell min_{}, max_{};
};

} // namespace govi::cloud
