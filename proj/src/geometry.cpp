#include "primo/geometry.hpp"

#include "primo/errors.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <string>

namespace primo {

namespace {

constexpr double kCubeTolerance = 1e-9;

void require_cube(const Aabb& box, const char* what) {
    if (!box.is_cube()) {
        throw ContractError(std::string(what) + ": box is not a cube");
    }
}

}  // namespace

Aabb Aabb::cube(Vec3 center, double side) {
    const Vec3 half{0.5 * side, 0.5 * side, 0.5 * side};
    return {center - half, center + half};
}

double Aabb::volume() const {
    const Vec3 e = extent();
    return e.x * e.y * e.z;
}

bool Aabb::is_cube() const {
    const Vec3 e = extent();
    if (!(e.x >= 0.0 && e.y >= 0.0 && e.z >= 0.0)) return false;
    const double largest = std::max({e.x, e.y, e.z});
    const double smallest = std::min({e.x, e.y, e.z});
    return largest - smallest <= kCubeTolerance * largest;
}

bool Aabb::contains(Vec3 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
}

bool Aabb::contains(const Aabb& other) const { return contains(other.min) && contains(other.max); }

OctantIndex::OctantIndex(int value) {
    if (value < 0 || value > 7) {
        throw ContractError("octant index out of range: " + std::to_string(value));
    }
    value_ = static_cast<std::uint8_t>(value);
}

OctPath make_path(std::initializer_list<int> indices) {
    OctPath path;
    path.reserve(indices.size());
    for (int i : indices) path.emplace_back(i);
    return path;
}

Ray Ray::make(Vec3 origin, Vec3 direction) {
    const double len = length(direction);
    if (!(len > 0.0) || !std::isfinite(len) || !is_finite(origin)) {
        throw ContractError("ray direction must be finite and non-zero");
    }
    return {origin, (1.0 / len) * direction};
}

Similarity Similarity::inverse() const {
    const double inv = 1.0 / scale;
    return {inv, -inv * translation};
}

Similarity Similarity::compose(const Similarity& inner) const {
    return {scale * inner.scale, scale * inner.translation + translation};
}

Aabb octant_aabb(const Aabb& parent, OctantIndex index) {
    require_cube(parent, "octant_aabb");
    const Vec3 mid = parent.center();
    Aabb child;
    for (int axis = 0; axis < 3; ++axis) {
        if (index.upper(axis)) {
            child.min[axis] = mid[axis];
            child.max[axis] = parent.max[axis];
        } else {
            child.min[axis] = parent.min[axis];
            child.max[axis] = mid[axis];
        }
    }
    return child;
}

Aabb path_to_aabb(const Aabb& root, const OctPath& path) {
    Aabb box = root;
    for (OctantIndex index : path) box = octant_aabb(box, index);
    return box;
}

OctPath locate_point(const Aabb& root, int depth, Vec3 p) {
    require_cube(root, "locate_point");
    if (depth < 0) throw ContractError("locate_point: negative depth");
    if (!root.contains(p)) throw OutOfBoundsError("locate_point: point outside root");

    OctPath path;
    path.reserve(static_cast<std::size_t>(depth));
    Aabb box = root;
    for (int level = 0; level < depth; ++level) {
        const Vec3 mid = box.center();
        const OctantIndex index = OctantIndex::from_bits(p.x > mid.x, p.y > mid.y, p.z > mid.z);
        path.push_back(index);
        box = octant_aabb(box, index);
    }
    return path;
}

std::optional<RayInterval> ray_aabb(const Ray& ray, const Aabb& box) {
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
        const double o = ray.origin[axis];
        const double d = ray.direction[axis];
        if (d == 0.0) {
            // Parallel to this slab: either always inside or never.
            if (o < box.min[axis] || o > box.max[axis]) return std::nullopt;
            continue;
        }
        const double inv = 1.0 / d;
        double t0 = (box.min[axis] - o) * inv;
        double t1 = (box.max[axis] - o) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
    }
    if (t_exit < std::max(t_enter, 0.0)) return std::nullopt;
    return RayInterval{t_enter, t_exit};
}

std::optional<OctantIndex> pick_child_octant(const Ray& ray, const Aabb& focus) {
    require_cube(focus, "pick_child_octant");
    std::optional<OctantIndex> best;
    double best_enter = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 8; ++i) {
        const OctantIndex index(i);
        const auto hit = ray_aabb(ray, octant_aabb(focus, index));
        // Strict comparison keeps the lowest index on exact ties.
        if (hit && hit->t_enter < best_enter) {
            best_enter = hit->t_enter;
            best = index;
        }
    }
    return best;
}

Similarity focus_to_stage(const Aabb& focus, const Aabb& stage) {
    require_cube(focus, "focus_to_stage");
    require_cube(stage, "focus_to_stage");
    const double side = focus.side();
    if (!(side > 0.0)) throw ContractError("focus_to_stage: degenerate focus");
    const double scale = stage.side() / side;
    return {scale, stage.min - scale * focus.min};
}

Similarity interpolate(const Similarity& a, const Similarity& b, double u) {
    if (!(u >= 0.0 && u <= 1.0)) {
#ifndef NDEBUG
        std::cerr << "primo: interpolate parameter " << u << " clamped to [0,1]\n";
#endif
        u = std::isnan(u) ? 0.0 : std::clamp(u, 0.0, 1.0);
    }
    if (u == 0.0) return a;
    if (u == 1.0) return b;
    const double scale = std::exp((1.0 - u) * std::log(a.scale) + u * std::log(b.scale));
    return {scale, (1.0 - u) * a.translation + u * b.translation};
}

}  // namespace primo
