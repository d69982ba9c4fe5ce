#include "sensepath/geometry.hpp"

#include <cmath>

namespace sensepath {

PointGridIndex::PointGridIndex(const std::vector<Vec3>& points, double cell_size)
    : empty_(points.empty()), cell_size_(cell_size) {
    if (!points.empty()) {
        origin_ = points.front();
        for (const auto& p : points) origin_ = origin_.cwiseMin(p);
    }
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
        cells_[cell_of(points[i])].push_back(i);
    }
}

PointGridIndex::Cell PointGridIndex::cell_of(const Vec3& p) const {
    return Cell{static_cast<int>(std::floor((p.x() - origin_.x()) / cell_size_)),
                static_cast<int>(std::floor((p.y() - origin_.y()) / cell_size_)),
                static_cast<int>(std::floor((p.z() - origin_.z()) / cell_size_))};
}

void PointGridIndex::query_box(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const {
    out.clear();
    if (empty_) return;
    const Cell clo = cell_of(lo);
    const Cell chi = cell_of(hi);
    for (int x = clo.x; x <= chi.x; ++x)
        for (int y = clo.y; y <= chi.y; ++y)
            for (int z = clo.z; z <= chi.z; ++z) {
                auto it = cells_.find(Cell{x, y, z});
                if (it == cells_.end()) continue;
                out.insert(out.end(), it->second.begin(), it->second.end());
            }
}

}  // namespace sensepath
