#include "primo/navigation.hpp"

#include "primo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace primo {

void NavConfig::validate() const {
    if (max_depth < 1) throw ContractError("nav config: max_depth must be >= 1");
    if (!(animation_ms > 0.0) || !std::isfinite(animation_ms)) {
        throw ContractError("nav config: animation_ms must be positive");
    }
    if (!(scale_factor > 1.0) || !std::isfinite(scale_factor)) {
        throw ContractError("nav config: scale_factor must be > 1");
    }
    if (style == NavStyle::Structured && scale_factor != 2.0) {
        throw ContractError("nav config: structured navigation subdivides into octants (scale factor 2)");
    }
}

Similarity NavState::rest_transform() const { return focus_to_stage(focus(), kStage); }

std::string_view to_string(Rejection r) {
    switch (r) {
        case Rejection::None: return "none";
        case Rejection::Animating: return "animating";
        case Rejection::InvalidCursor: return "invalid_cursor";
        case Rejection::MaxDepth: return "max_depth";
        case Rejection::TopLevel: return "top_level";
    }
    return "unknown";
}

NavState new_session(const NavConfig& config, std::shared_ptr<const SessionObject> object) {
    config.validate();
    if (!object) throw ContractError("new_session: missing object");
    NavState state;
    state.config = config;
    state.object = std::move(object);
    state.transform = Similarity::identity();
    state.clip = Plane1D{1.0};
    return state;
}

namespace {

// Cube of `side` centred as close to `center` as the focus allows.
Aabb clamped_cube(const Aabb& focus, Vec3 center, double side) {
    const double half = 0.5 * side;
    Vec3 c;
    for (int axis = 0; axis < 3; ++axis) {
        c[axis] = std::clamp(center[axis], focus.min[axis] + half, focus.max[axis] - half);
    }
    return Aabb::cube(c, side);
}

// Möller-Trumbore without backface culling.
std::optional<double> ray_triangle(const Ray& ray, Vec3 a, Vec3 b, Vec3 c) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 p = cross(ray.direction, e2);
    const double det = dot(e1, p);
    if (det == 0.0) return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 s = ray.origin - a;
    const double u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 q = cross(s, e1);
    const double v = dot(ray.direction, q) * inv;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    const double t = dot(e2, q) * inv;
    if (t < 0.0) return std::nullopt;
    return t;
}

// Entry parameter of the ray into sphere ∩ {y <= plane_y} ∩ box.
std::optional<double> ray_clipped_sphere(const Ray& ray, const DefectRegion& d, double plane_y, const Aabb& box) {
    const Vec3 oc = ray.origin - d.center;
    const double b = dot(oc, ray.direction);
    const double c = dot(oc, oc) - d.radius * d.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    double enter = -b - root;
    double exit = -b + root;

    const double dy = ray.direction.y;
    if (dy == 0.0) {
        if (ray.origin.y > plane_y) return std::nullopt;
    } else {
        const double t_plane = (plane_y - ray.origin.y) / dy;
        if (dy > 0.0) exit = std::min(exit, t_plane);
        else enter = std::max(enter, t_plane);
    }

    const auto slab = ray_aabb(ray, box);
    if (!slab) return std::nullopt;
    enter = std::max(enter, slab->t_enter);
    exit = std::min(exit, slab->t_exit);
    if (enter > exit || exit < 0.0) return std::nullopt;
    return std::max(enter, 0.0);
}

}  // namespace

std::optional<double> pick_visible_geometry(const NavState& state, const Ray& object_ray) {
    const Aabb focus = state.focus();
    const double scale = state.transform.scale;
    const double offset = state.transform.translation.y;
    const double h = state.clip.height;
    const double plane_y = (h - offset) / scale;
    auto below_clip = [&](Vec3 p) { return scale * p.y + offset <= h + 1e-12; };

    std::optional<double> best;
    if (!ray_aabb(object_ray, focus)) return best;

    const TriangleMesh& mesh = state.object->mesh;
    for (const auto& tri : mesh.triangles) {
        const auto t = ray_triangle(object_ray, mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
        if (!t || (best && *t >= *best)) continue;
        const Vec3 p = object_ray.at(*t);
        if (focus.contains(p) && below_clip(p)) best = t;
    }
    for (const auto& defect : state.object->defects) {
        const auto t = ray_clipped_sphere(object_ray, defect, plane_y, focus);
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

NavStep aim(const NavState& state, const Ray& world_ray) {
    if (state.animating()) return {state, Rejection::Animating};

    NavState next = state;
    const Aabb focus = state.focus();
    const Ray object_ray = state.transform.apply_inverse(world_ray);
    AimResult result;
    if (state.config.style == NavStyle::Structured) {
        result.kind = AimResult::Kind::OctantHighlight;
        if (const auto octant = pick_child_octant(object_ray, focus)) {
            result.valid = true;
            result.octant = *octant;
        }
    } else {
        result.kind = AimResult::Kind::CursorCube;
        if (const auto t = pick_visible_geometry(state, object_ray)) {
            result.valid = true;
            result.aim_point = object_ray.at(*t);
            result.cube = clamped_cube(focus, result.aim_point, focus.side() / state.config.scale_factor);
        }
    }
    next.cursor = result;
    return {std::move(next), Rejection::None};
}

NavStep confirm(const NavState& state) {
    if (state.animating()) return {state, Rejection::Animating};
    if (!state.cursor || !state.cursor->valid) return {state, Rejection::InvalidCursor};
    if (state.depth() >= state.config.max_depth) return {state, Rejection::MaxDepth};

    NavState next = state;
    const AimResult& cursor = *state.cursor;
    if (cursor.kind == AimResult::Kind::OctantHighlight) {
        next.stack.push_back({octant_aabb(state.focus(), cursor.octant), cursor.octant});
        next.cursor.reset();
    } else {
        next.stack.push_back({cursor.cube, cursor.cube.center()});
        AimResult retained = cursor;
        retained.cube = clamped_cube(cursor.cube, cursor.aim_point, cursor.cube.side() / state.config.scale_factor);
        next.cursor = retained;
    }
    next.animation = Animation{state.transform, next.rest_transform(), 0.0};
    return {std::move(next), Rejection::None};
}

NavStep ascend(const NavState& state) {
    if (state.animating()) return {state, Rejection::Animating};
    if (state.stack.empty()) return {state, Rejection::TopLevel};

    NavState next = state;
    next.stack.pop_back();
    if (next.cursor && next.cursor->valid && next.cursor->kind == AimResult::Kind::CursorCube) {
        const Aabb focus = next.focus();
        next.cursor->cube = clamped_cube(focus, next.cursor->aim_point, focus.side() / state.config.scale_factor);
    } else {
        next.cursor.reset();
    }
    next.animation = Animation{state.transform, next.rest_transform(), 0.0};
    return {std::move(next), Rejection::None};
}

NavState set_clip_height(const NavState& state, double height) {
    NavState next = state;
    next.clip.height = std::isnan(height) ? state.clip.height : std::clamp(height, 0.0, 1.0);
    return next;
}

NavState tick(const NavState& state, double dt_ms) {
    if (!state.animating() || !(dt_ms > 0.0)) return state;
    NavState next = state;
    Animation& anim = *next.animation;
    anim.elapsed_ms += dt_ms;
    if (anim.elapsed_ms >= state.config.animation_ms) {
        next.transform = anim.to;
        next.animation.reset();
    } else {
        next.transform = interpolate(anim.from, anim.to, anim.elapsed_ms / state.config.animation_ms);
    }
    return next;
}

const std::array<Rgb, 8>& octant_colors() {
    static const std::array<Rgb, 8> palette = [] {
        std::array<Rgb, 8> colors;
        for (int i = 0; i < 8; ++i) {
            colors[i] = Rgb{(i & 1) ? 1.0 : 0.0, (i & 2) ? 1.0 : 0.0, (i & 4) ? 1.0 : 0.0};
        }
        colors[0] = Rgb{0.35, 0.35, 0.35};
        colors[7] = Rgb{1.0, 0.6, 0.1};
        return colors;
    }();
    return palette;
}

RenderSet visible_set(const NavState& state, const TriangleMesh& object) {
    RenderSet out;
    auto add_piece = [&](const Aabb& region, const TriangleMesh& source, std::optional<Rgb> tint) {
        ClippedMesh parts = clip_mesh(source, state.clip, state.transform);
        out.pieces.push_back({region, std::move(parts.visible), tint, !parts.hidden.empty()});
    };

    if (state.depth() == 0) {
        const auto& palette = octant_colors();
        for (int i = 0; i < 8; ++i) {
            const Aabb octant = octant_aabb(Aabb::unit(), OctantIndex(i));
            add_piece(octant, crop_mesh(object, octant), palette[i]);
        }
        return out;
    }
    if (state.config.display == DisplayMode::Selection) {
        add_piece(state.focus(), crop_mesh(object, state.focus()), std::nullopt);
    } else {
        add_piece(Aabb::unit(), object, std::nullopt);
    }
    return out;
}

std::optional<int> reveal_defect(const NavState& state, const std::vector<DefectRegion>& defects) {
    if (state.depth() != state.config.max_depth) return std::nullopt;
    // Slack absorbs rounding in aim points carried through several descents.
    const Aabb focus = state.focus();
    const double slack = 1e-9 * focus.side();
    const Aabb tolerant{focus.min - Vec3{slack, slack, slack}, focus.max + Vec3{slack, slack, slack}};
    for (const auto& d : defects) {
        if (tolerant.contains(Aabb::cube(d.center, 2.0 * d.radius))) return d.id;
    }
    return std::nullopt;
}

}  // namespace primo
