#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <unordered_map>
#include <vector>

namespace sensepath {

using Vec3 = Eigen::Vector3d;

// Axis-aligned box, units are centimeters throughout the library.
struct Aabb {
    Vec3 min{Vec3::Zero()};
    Vec3 max{Vec3::Zero()};

    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return 0.5 * (min + max); }
};

// Unit-cell hash over a point set for range queries (cone membership,
// nearest-neighbor candidates). Cells are cubes of size cell_size.
class PointGridIndex {
public:
    PointGridIndex() = default;
    PointGridIndex(const std::vector<Vec3>& points, double cell_size);

    // Indices of all points whose cell intersects [lo, hi].
    void query_box(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const;

private:
    struct Cell {
        int x, y, z;
        bool operator==(const Cell&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const Cell& c) const {
            std::size_t h = static_cast<std::size_t>(c.x) * 73856093u;
            h ^= static_cast<std::size_t>(c.y) * 19349663u;
            h ^= static_cast<std::size_t>(c.z) * 83492791u;
            return h;
        }
    };
    Cell cell_of(const Vec3& p) const;

    bool empty_ = true;
    double cell_size_ = 1.0;
    Vec3 origin_{Vec3::Zero()};
    std::unordered_map<Cell, std::vector<int>, CellHash> cells_;
};

}  // namespace sensepath
