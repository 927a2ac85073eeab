#pragma once

// Progressive-refinement navigation: a stack of focus cubes, each half the
// side of its parent, mapped onto the fixed stage with an animated
// scale-and-translate transform. Every transition is a pure function of
// the previous state.

#include "primo/geometry.hpp"
#include "primo/object_model.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace primo {

enum class NavStyle { Structured, Unstructured };
enum class DisplayMode { Selection, Everything };

struct NavConfig {
    NavStyle style = NavStyle::Structured;
    DisplayMode display = DisplayMode::Selection;
    int max_depth = 3;
    double scale_factor = 2.0;
    double animation_ms = 500.0;

    // Throws ContractError. Octants halve their parent, so STRUCTURED
    // navigation only supports a factor of 2.
    void validate() const;

    friend bool operator==(const NavConfig&, const NavConfig&) = default;
};

// The dense object and its marked regions, shared immutably by every state
// of a session.
struct SessionObject {
    TriangleMesh mesh;
    std::vector<DefectRegion> defects;
};

struct FocusFrame {
    Aabb box;
    // Octant chosen in STRUCTURED style, cube center in UNSTRUCTURED.
    std::variant<OctantIndex, Vec3> origin;

    friend bool operator==(const FocusFrame&, const FocusFrame&) = default;
};

struct AimResult {
    enum class Kind { OctantHighlight, CursorCube };

    Kind kind = Kind::OctantHighlight;
    bool valid = false;
    OctantIndex octant;     // OctantHighlight
    Aabb cube;              // CursorCube, always inside the focus box
    Vec3 aim_point;         // CursorCube: unclamped hit, kept across descents

    friend bool operator==(const AimResult&, const AimResult&) = default;
};

struct Animation {
    Similarity from;
    Similarity to;
    double elapsed_ms = 0.0;

    friend bool operator==(const Animation&, const Animation&) = default;
};

struct NavState {
    NavConfig config;
    std::shared_ptr<const SessionObject> object;
    std::vector<FocusFrame> stack;
    Similarity transform;
    std::optional<Animation> animation;
    Plane1D clip;
    std::optional<AimResult> cursor;

    int depth() const { return static_cast<int>(stack.size()); }
    bool animating() const { return animation.has_value(); }
    Aabb focus() const { return stack.empty() ? Aabb::unit() : stack.back().box; }
    // Transform the state settles on once any animation finishes.
    Similarity rest_transform() const;

    // Compares every field; the object is compared by identity.
    friend bool operator==(const NavState&, const NavState&) = default;
};

enum class Rejection { None, Animating, InvalidCursor, MaxDepth, TopLevel };

std::string_view to_string(Rejection r);

struct NavStep {
    NavState state;
    Rejection rejection = Rejection::None;

    bool accepted() const { return rejection == Rejection::None; }
};

struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    friend bool operator==(Rgb, Rgb) = default;
};

struct RenderPiece {
    Aabb region;                 // object-space box the piece was cut from
    TriangleMesh mesh;           // visible geometry, object space
    std::optional<Rgb> tint;
    bool clipped = false;        // the clip plane removed part of this region
};

struct RenderSet {
    std::vector<RenderPiece> pieces;
};

// The stage the focus is mapped onto, in world space.
inline constexpr Aabb kStage = Aabb::unit();

NavState new_session(const NavConfig& config, std::shared_ptr<const SessionObject> object);

NavStep aim(const NavState& state, const Ray& world_ray);
NavStep confirm(const NavState& state);
NavStep ascend(const NavState& state);
NavState set_clip_height(const NavState& state, double height);
NavState tick(const NavState& state, double dt_ms);

RenderSet visible_set(const NavState& state, const TriangleMesh& object);

const std::array<Rgb, 8>& octant_colors();

std::optional<int> reveal_defect(const NavState& state, const std::vector<DefectRegion>& defects);

// First hit of an object-space ray with the pickable geometry of the focus:
// mesh triangles and solid defect spheres, restricted to the focus box and
// to the part at or below the clip plane. Returns the ray parameter.
std::optional<double> pick_visible_geometry(const NavState& state, const Ray& object_ray);

}  // namespace primo
