#pragma once

// Spatial kernel: vectors, cubes, octant addressing, rays and the
// rotation-free similarities that map a focus cube onto the stage.
//
// Conventions:
//  * object space and the stage are both the unit cube [0,1]^3, so a
//    depth-k focus is mapped with scale exactly 2^k;
//  * octant bit 0 selects the upper x half, bit 1 upper y, bit 2 upper z.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace primo {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
    friend constexpr Vec3 operator*(Vec3 v, double s) { return s * v; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(Vec3 v) { return std::sqrt(dot(v, v)); }
inline bool is_finite(Vec3 v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

struct Aabb {
    Vec3 min;
    Vec3 max;

    static constexpr Aabb unit() { return {{0, 0, 0}, {1, 1, 1}}; }
    static Aabb cube(Vec3 center, double side);

    Vec3 extent() const { return max - min; }
    Vec3 center() const { return 0.5 * (min + max); }
    // Side length of a cube; the x extent for general boxes.
    double side() const { return max.x - min.x; }
    double volume() const;
    bool is_cube() const;
    // Inclusive containment.
    bool contains(Vec3 p) const;
    bool contains(const Aabb& other) const;

    friend bool operator==(const Aabb&, const Aabb&) = default;
};

// Strongly typed octant number in [0,7].
class OctantIndex {
public:
    constexpr OctantIndex() = default;
    explicit OctantIndex(int value);

    static constexpr OctantIndex from_bits(bool x_upper, bool y_upper, bool z_upper) {
        OctantIndex o;
        o.value_ = static_cast<std::uint8_t>((x_upper ? 1 : 0) | (y_upper ? 2 : 0) | (z_upper ? 4 : 0));
        return o;
    }

    constexpr int value() const { return value_; }
    constexpr bool upper(int axis) const { return (value_ >> axis) & 1; }

    friend constexpr bool operator==(OctantIndex, OctantIndex) = default;
    friend constexpr auto operator<=>(OctantIndex, OctantIndex) = default;

private:
    std::uint8_t value_ = 0;
};

// Root-first sequence of octants.
using OctPath = std::vector<OctantIndex>;

OctPath make_path(std::initializer_list<int> indices);

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length

    // Normalizes `direction`; throws ContractError on a zero or non-finite direction.
    static Ray make(Vec3 origin, Vec3 direction);
    Vec3 at(double t) const { return origin + t * direction; }
};

struct Plane1D {
    double height = 1.0;  // stage-space y in [0,1]

    friend bool operator==(const Plane1D&, const Plane1D&) = default;
};

// world = scale * object + translation
struct Similarity {
    double scale = 1.0;
    Vec3 translation;

    static constexpr Similarity identity() { return {}; }

    Vec3 apply(Vec3 p) const { return scale * p + translation; }
    Aabb apply(const Aabb& box) const { return {apply(box.min), apply(box.max)}; }
    Vec3 apply_inverse(Vec3 p) const { return (1.0 / scale) * (p - translation); }
    // Maps a world-space ray into object space; the direction is unchanged, so
    // parameters scale by 1/scale.
    Ray apply_inverse(const Ray& ray) const { return {apply_inverse(ray.origin), ray.direction}; }

    Similarity inverse() const;
    // (this ∘ inner)(p) = this(inner(p))
    Similarity compose(const Similarity& inner) const;

    friend bool operator==(const Similarity&, const Similarity&) = default;
};

struct RayInterval {
    double t_enter;
    double t_exit;

    double entry() const { return t_enter > 0.0 ? t_enter : 0.0; }
};

// Child cube of a cube parent. Throws ContractError on non-cube parents.
Aabb octant_aabb(const Aabb& parent, OctantIndex index);

// Folds octant_aabb along `path`.
Aabb path_to_aabb(const Aabb& root, const OctPath& path);

// Depth-length path whose cell contains `p`. A coordinate exactly on a
// midpoint resolves to the lower half. Throws OutOfBoundsError when `p` is
// outside `root`.
OctPath locate_point(const Aabb& root, int depth, Vec3 p);

// Slab test. The returned t_enter is not clamped; a hit requires
// t_exit >= max(t_enter, 0).
std::optional<RayInterval> ray_aabb(const Ray& ray, const Aabb& box);

// The child of `focus` first entered by the ray (smallest t_enter). Equal
// entries resolve to the lowest index.
std::optional<OctantIndex> pick_child_octant(const Ray& ray, const Aabb& focus);

// Rotation-free similarity taking `focus` onto `stage`.
Similarity focus_to_stage(const Aabb& focus, const Aabb& stage);

// Log-space scale, linear translation; u is clamped to [0,1] and the
// endpoints are returned exactly.
Similarity interpolate(const Similarity& a, const Similarity& b, double u);

}  // namespace primo
