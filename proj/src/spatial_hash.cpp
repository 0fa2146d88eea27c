#include "govi/spatial_hash.hpp"

#include <algorithm>
#include <cmath>

#include "govi/error.hpp"

namespace govi::cloud {

SpatialHash::SpatialHash(std::span<const Vec3> points, double cell_size) : points_(points), cell_(cell_size)
{
    if (!(cell_size > 0.0))
        fail(Errc::InvalidArgument, "spatial hash cell size must be positive");
    std::vector<std::pair<Cell, std::uint32_t>> keyed;
    keyed.reserve(points.size());
    for (std::uint32_t i = 0; i < points.size(); ++i)
        keyed.emplace_back(cell_of(points[i]), i);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first.x, a.first.y, a.first.z, a.second) <
               std::tie(b.first.x, b.first.y, b.first.z, b.second);
    });
    order_.reserve(keyed.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        const Cell& c = keyed[i].first;
        if (i == 0 || !(c == keyed[i - 1].first))
            ranges_.emplace(c, std::pair{std::uint32_t(i), std::uint32_t(i)});
        ranges_[c].second = std::uint32_t(i + 1);
        order_.push_back(keyed[i].second);
        if (i == 0) {
            min_ = max_ = c;
        } else {
            min_ = {std::min(min_.x, c.x), std::min(min_.y, c.y), std::min(min_.z, c.z)};
            max_ = {std::max(max_.x, c.x), std::max(max_.y, c.y), std::max(max_.z, c.z)};
        }
    }
}

SpatialHash::Cell SpatialHash::cell_of(const Vec3& p) const
{
    return {std::int64_t(std::floor(p.x() / cell_)), std::int64_t(std::floor(p.y() / cell_)),
            std::int64_t(std::floor(p.z() / cell_))};
}

// Calls fn(index) for every point in cells at Chebyshev distance `ring`.
template <typename Fn> void SpatialHash::visit_shell(const Cell& c, std::int64_t ring, Fn&& fn) const
{
    auto visit = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
        auto it = ranges_.find(Cell{x, y, z});
        if (it == ranges_.end())
            return;
        for (std::uint32_t k = it->second.first; k < it->second.second; ++k)
            fn(order_[k]);
    };
    for (std::int64_t dx = -ring; dx <= ring; ++dx) {
        for (std::int64_t dy = -ring; dy <= ring; ++dy) {
            bool edge = std::abs(dx) == ring || std::abs(dy) == ring;
            if (edge) {
                for (std::int64_t dz = -ring; dz <= ring; ++dz)
                    visit(c.x + dx, c.y + dy, c.z + dz);
            } else {
                visit(c.x + dx, c.y + dy, c.z - ring);
                if (ring != 0)
                    visit(c.x + dx, c.y + dy, c.z + ring);
            }
        }
    }
}

std::vector<std::uint32_t> SpatialHash::radius_search(const Vec3& query, double radius) const
{
    std::vector<std::pair<double, std::uint32_t>> hits;
    Cell c = cell_of(query);
    auto reach = std::int64_t(std::ceil(radius / cell_));
    for (std::int64_t ring = 0; ring <= reach; ++ring) {
        visit_shell(c, ring, [&](std::uint32_t i) {
            double d = (points_[i] - query).norm();
            if (d <= radius)
                hits.emplace_back(d, i);
        });
    }
    std::sort(hits.begin(), hits.end());
    std::vector<std::uint32_t> out;
    out.reserve(hits.size());
    for (const auto& h : hits)
        out.push_back(h.second);
    return out;
}

std::optional<SpatialHash::Hit> SpatialHash::nearest(const Vec3& query, double max_distance) const
{
    std::optional<Hit> best;
    Cell c = cell_of(query);
    auto reach = std::int64_t(std::ceil(max_distance / cell_));
    for (std::int64_t ring = 0; ring <= reach; ++ring) {
        // every point in this ring or beyond is at least (ring - 1) cells away
        if (best && double(ring - 1) * cell_ > best->distance)
            break;
        visit_shell(c, ring, [&](std::uint32_t i) {
            double d = (points_[i] - query).norm();
            if (d < max_distance && (!best || d < best->distance || (d == best->distance && i < best->index)))
                best = Hit{i, d};
        });
    }
    return best;
}

std::vector<SpatialHash::Hit> SpatialHash::knn(const Vec3& query, std::size_t k) const
{
    std::vector<Hit> hits;
    if (k == 0 || points_.empty())
        return hits;
    Cell c = cell_of(query);
    std::int64_t max_ring = 0;
    for (std::int64_t v : {c.x - min_.x, max_.x - c.x, c.y - min_.y, max_.y - c.y, c.z - min_.z, max_.z - c.z})
        max_ring = std::max(max_ring, std::abs(v));
    auto by_dist = [](const Hit& a, const Hit& b) { return std::tie(a.distance, a.index) < std::tie(b.distance, b.index); };
    for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
        visit_shell(c, ring, [&](std::uint32_t i) { hits.push_back({i, (points_[i] - query).norm()}); });
        if (hits.size() >= k) {
            std::nth_element(hits.begin(), hits.begin() + std::ptrdiff_t(k - 1), hits.end(), by_dist);
            // points outside the visited rings are at least ring * cell away
            if (hits[k - 1].distance <= double(ring) * cell_)
                break;
        }
    }
    std::sort(hits.begin(), hits.end(), by_dist);
    if (hits.size() > k)
        hits.resize(k);
    return hits;
}

} // namespace govi::cloud
