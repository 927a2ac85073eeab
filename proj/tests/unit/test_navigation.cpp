#include "primo/errors.hpp"
#include "primo/navigation.hpp"
#include "primo/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace primo {
namespace {

std::shared_ptr<const SessionObject> lattice_object(int depth = 3) {
    auto object = std::make_shared<SessionObject>();
    object->mesh = generate_lattice({4, 0.03, LatticePattern::GridStruts, 8});
    object->defects = place_defects(17, depth, 4);
    return object;
}

NavConfig config(NavStyle style, DisplayMode display = DisplayMode::Selection, int depth = 3) {
    NavConfig c;
    c.style = style;
    c.display = display;
    c.max_depth = depth;
    return c;
}

NavState settle(NavState s) { return tick(s, 1e9); }

// World-space ray that enters the focus through the outer corner of `octant`.
Ray ray_into_octant(const NavState& s, OctantIndex octant) {
    const Aabb focus = s.focus();
    const Aabb child = octant_aabb(focus, octant);
    const Vec3 outward = child.center() - focus.center();
    return Ray::make(s.transform.apply(child.center() + 4.0 * outward), -1.0 * outward);
}

NavState descend(const NavState& s, OctantIndex octant) {
    NavStep aimed = aim(s, ray_into_octant(s, octant));
    EXPECT_TRUE(aimed.accepted());
    NavStep confirmed = confirm(aimed.state);
    EXPECT_TRUE(confirmed.accepted());
    return settle(confirmed.state);
}

TEST(NavConfig, Validation) {
    NavConfig c;
    EXPECT_NO_THROW(c.validate());
    c.max_depth = 0;
    EXPECT_THROW(c.validate(), ContractError);
    c = NavConfig{};
    c.scale_factor = 3.0;
    EXPECT_THROW(c.validate(), ContractError);  // octants fix the factor at 2
    c.style = NavStyle::Unstructured;
    EXPECT_NO_THROW(c.validate());
    c.animation_ms = 0.0;
    EXPECT_THROW(c.validate(), ContractError);
}

TEST(NewSession, StartsAtTopWithNothingHidden) {
    const NavState s = new_session(config(NavStyle::Structured), lattice_object());
    EXPECT_EQ(s.depth(), 0);
    EXPECT_EQ(s.transform, Similarity::identity());
    EXPECT_EQ(s.clip.height, 1.0);
    EXPECT_FALSE(s.cursor);
    EXPECT_FALSE(s.animating());
    EXPECT_THROW(new_session(config(NavStyle::Structured), nullptr), ContractError);
}

TEST(Structured, ScaleLawOverFiveLevels) {
    Rng rng(3);
    NavState s = new_session(config(NavStyle::Structured, DisplayMode::Selection, 5), lattice_object());
    for (int k = 1; k <= 5; ++k) {
        s = descend(s, OctantIndex(static_cast<int>(rng.below(8))));
        EXPECT_EQ(s.depth(), k);
        EXPECT_EQ(s.transform.scale, std::ldexp(1.0, k));
        EXPECT_EQ(s.transform, s.rest_transform());
        const Vec3 lo = s.transform.apply(s.focus().min);
        const Vec3 hi = s.transform.apply(s.focus().max);
        for (int a = 0; a < 3; ++a) {
            EXPECT_NEAR(lo[a], 0.0, 1e-9);
            EXPECT_NEAR(hi[a], 1.0, 1e-9);
        }
    }
}

TEST(Structured, AimHighlightsOctantAndConfirmClearsCursor) {
    const NavState s = new_session(config(NavStyle::Structured), lattice_object());
    const NavStep aimed = aim(s, ray_into_octant(s, OctantIndex(6)));
    ASSERT_TRUE(aimed.state.cursor);
    EXPECT_TRUE(aimed.state.cursor->valid);
    EXPECT_EQ(aimed.state.cursor->octant.value(), 6);
    const NavStep confirmed = confirm(aimed.state);
    ASSERT_TRUE(confirmed.accepted());
    EXPECT_FALSE(confirmed.state.cursor);
    EXPECT_TRUE(confirmed.state.animating());
    EXPECT_EQ(confirmed.state.focus(), octant_aabb(Aabb::unit(), OctantIndex(6)));
}

TEST(Structured, MissProducesInvalidCursor) {
    const NavState s = new_session(config(NavStyle::Structured), lattice_object());
    const NavStep aimed = aim(s, Ray::make({5, 5, 5}, {1, 0, 0}));
    ASSERT_TRUE(aimed.state.cursor);
    EXPECT_FALSE(aimed.state.cursor->valid);
    EXPECT_EQ(confirm(aimed.state).rejection, Rejection::InvalidCursor);
}

TEST(Transitions, RejectionsLeaveStateUntouched) {
    const NavState top = new_session(config(NavStyle::Structured, DisplayMode::Selection, 1), lattice_object(1));
    EXPECT_EQ(confirm(top).rejection, Rejection::InvalidCursor);
    EXPECT_EQ(ascend(top).rejection, Rejection::TopLevel);
    EXPECT_EQ(ascend(top).state, top);

    NavStep aimed = aim(top, ray_into_octant(top, OctantIndex(1)));
    NavStep moving = confirm(aimed.state);
    ASSERT_TRUE(moving.state.animating());
    EXPECT_EQ(aim(moving.state, ray_into_octant(moving.state, OctantIndex(0))).rejection, Rejection::Animating);
    EXPECT_EQ(confirm(moving.state).rejection, Rejection::Animating);
    EXPECT_EQ(ascend(moving.state).rejection, Rejection::Animating);

    const NavState bottom = settle(moving.state);
    const NavStep again = aim(bottom, ray_into_octant(bottom, OctantIndex(0)));
    EXPECT_EQ(confirm(again.state).rejection, Rejection::MaxDepth);
}

TEST(Transitions, ConfirmThenAscendRestoresRestState) {
    Rng rng(12);
    for (auto style : {NavStyle::Structured, NavStyle::Unstructured}) {
        NavState s = new_session(config(style, DisplayMode::Selection, 4), lattice_object());
        s = set_clip_height(s, 0.6);
        for (int step = 0; step < 30; ++step) {
            const Vec3 target{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.95)};
            const Vec3 world = s.transform.apply(s.focus().center() + 0.3 * (target - Vec3{0.5, 0.5, 0.5}));
            const NavStep aimed = aim(s, Ray::make(world + Vec3{0, 3, 0}, {0, -1, 0}));
            const NavStep down = confirm(aimed.state);
            if (!down.accepted()) continue;
            const NavStep up = ascend(settle(down.state));
            ASSERT_TRUE(up.accepted());
            const NavState back = settle(up.state);
            EXPECT_EQ(back.stack, aimed.state.stack);
            EXPECT_EQ(back.transform, aimed.state.rest_transform());
            EXPECT_EQ(back.clip.height, aimed.state.clip.height);
            s = settle(down.state);
            if (s.depth() == 4) s = settle(ascend(s).state);
        }
    }
}

TEST(Clip, ClampsAndPersistsAcrossScaleChanges) {
    NavState s = new_session(config(NavStyle::Structured), lattice_object());
    EXPECT_EQ(set_clip_height(s, 1.7).clip.height, 1.0);
    EXPECT_EQ(set_clip_height(s, -0.2).clip.height, 0.0);
    EXPECT_EQ(set_clip_height(s, std::nan("")).clip.height, 1.0);
    s = set_clip_height(s, 0.42);
    s = descend(s, OctantIndex(3));
    EXPECT_EQ(s.clip.height, 0.42);
    s = settle(ascend(s).state);
    EXPECT_EQ(s.clip.height, 0.42);
}

TEST(Tick, InterpolatesThenSnaps) {
    const NavState top = new_session(config(NavStyle::Structured), lattice_object());
    NavState s = confirm(aim(top, ray_into_octant(top, OctantIndex(7))).state).state;
    s = tick(s, 250.0);
    ASSERT_TRUE(s.animating());
    EXPECT_NEAR(s.transform.scale, std::sqrt(2.0), 1e-12);
    s = tick(s, 249.0);
    EXPECT_TRUE(s.animating());
    s = tick(s, 1.0);
    EXPECT_FALSE(s.animating());
    EXPECT_EQ(s.transform, s.rest_transform());
    EXPECT_EQ(tick(s, 10.0), s);
}

TEST(Unstructured, CubeFollowsAimPointAndStaysInsideFocus) {
    NavState s = new_session(config(NavStyle::Unstructured), lattice_object());
    // Straight down through a vertical strut near the x = z = 0 corner.
    const NavStep aimed = aim(s, Ray::make({0.015, 3, 0.015}, {0, -1, 0}));
    ASSERT_TRUE(aimed.state.cursor);
    ASSERT_TRUE(aimed.state.cursor->valid);
    const AimResult& c = *aimed.state.cursor;
    EXPECT_NEAR(c.aim_point.y, 1.0, 1e-12);
    EXPECT_NEAR(c.cube.side(), 0.5, 1e-15);
    EXPECT_TRUE(s.focus().contains(c.cube));
    EXPECT_EQ(c.cube.min, (Vec3{0, 0.5, 0}));  // clamped into the corner
}

TEST(Unstructured, GeometryAboveClipIsNotPickable) {
    NavState s = new_session(config(NavStyle::Unstructured), lattice_object());
    s = set_clip_height(s, 0.5);
    const NavStep aimed = aim(s, Ray::make({0.015, 3, 0.015}, {0, -1, 0}));
    ASSERT_TRUE(aimed.state.cursor->valid);
    EXPECT_LE(aimed.state.cursor->aim_point.y, 0.5 + 1e-12);
}

TEST(Unstructured, EmptySpaceGivesInvalidCursor) {
    auto object = std::make_shared<SessionObject>();
    object->mesh = TriangleMesh{{{0.1, 0.1, 0.1}, {0.2, 0.1, 0.1}, {0.1, 0.2, 0.1}}, {{0, 1, 2}}};
    const NavState s = new_session(config(NavStyle::Unstructured), object);
    const NavStep aimed = aim(s, Ray::make({0.8, 3, 0.8}, {0, -1, 0}));
    ASSERT_TRUE(aimed.state.cursor);
    EXPECT_FALSE(aimed.state.cursor->valid);
    EXPECT_EQ(confirm(aimed.state).rejection, Rejection::InvalidCursor);
}

TEST(Unstructured, CursorRetainedAcrossDescents) {
    const auto object = lattice_object();
    const DefectRegion& target = object->defects[0];
    NavState s = new_session(config(NavStyle::Unstructured), object);
    s = set_clip_height(s, target.center.y);
    s = aim(s, Ray::make({target.center.x, 2, target.center.z}, {0, -1, 0})).state;
    for (int level = 1; level <= 3; ++level) {
        const NavStep step = confirm(s);
        ASSERT_TRUE(step.accepted()) << "level " << level;
        s = settle(step.state);
        ASSERT_TRUE(s.cursor && s.cursor->valid);
        EXPECT_TRUE(s.focus().contains(s.cursor->cube));
        EXPECT_NEAR(s.focus().side(), std::ldexp(1.0, -level), 1e-15);
        EXPECT_NEAR(s.transform.scale, std::ldexp(1.0, level), 1e-12);
    }
    EXPECT_EQ(reveal_defect(s, object->defects), target.id);
}

TEST(VisibleSet, TopLevelHasEightTintedOctants) {
    const auto object = lattice_object();
    const NavState s = new_session(config(NavStyle::Structured), object);
    const RenderSet r = visible_set(s, object->mesh);
    ASSERT_EQ(r.pieces.size(), 8u);
    std::set<std::tuple<double, double, double>> tints;
    double area = 0.0;
    for (const auto& p : r.pieces) {
        ASSERT_TRUE(p.tint);
        tints.insert({p.tint->r, p.tint->g, p.tint->b});
        for (const auto& v : p.mesh.vertices) EXPECT_TRUE(p.region.contains(v));
        area += p.mesh.area();
        EXPECT_FALSE(p.clipped);
    }
    EXPECT_EQ(tints.size(), 8u);
    EXPECT_GE(area, object->mesh.area() * (1 - 1e-12));
}

TEST(VisibleSet, SelectionStaysInsideFocus) {
    const auto object = lattice_object();
    NavState s = new_session(config(NavStyle::Structured), object);
    s = descend(descend(s, OctantIndex(5)), OctantIndex(2));
    const RenderSet r = visible_set(s, object->mesh);
    ASSERT_EQ(r.pieces.size(), 1u);
    EXPECT_FALSE(r.pieces[0].tint);
    EXPECT_FALSE(r.pieces[0].mesh.empty());
    for (const auto& v : r.pieces[0].mesh.vertices) EXPECT_TRUE(s.focus().contains(v));
}

TEST(VisibleSet, EverythingShowsWholeObjectBelowClip) {
    const auto object = lattice_object();
    NavState s = new_session(config(NavStyle::Structured, DisplayMode::Everything), object);
    s = set_clip_height(descend(descend(s, OctantIndex(0)), OctantIndex(0)), 0.4);
    const RenderSet r = visible_set(s, object->mesh);
    ASSERT_EQ(r.pieces.size(), 1u);
    EXPECT_TRUE(r.pieces[0].clipped);
    for (const auto& t : r.pieces[0].mesh.triangles) {
        for (auto i : t) EXPECT_LE(s.transform.apply(r.pieces[0].mesh.vertices[i]).y, 0.4 + 1e-12);
    }
    // Geometry outside the focus but below the plane is still drawn.
    bool outside = false;
    for (const auto& v : r.pieces[0].mesh.vertices) outside |= !s.focus().contains(v);
    EXPECT_TRUE(outside);
}

TEST(Palette, DistinctColors) {
    const auto& colors = octant_colors();
    std::set<std::tuple<double, double, double>> unique;
    for (const auto& c : colors) unique.insert({c.r, c.g, c.b});
    EXPECT_EQ(unique.size(), 8u);
}

TEST(Reveal, OnlyAtMaxDepthOverTheTarget) {
    const auto object = lattice_object();
    const DefectRegion& d = object->defects[2];
    NavState s = new_session(config(NavStyle::Structured), object);
    for (std::size_t level = 0; level < d.cell_path.size(); ++level) {
        EXPECT_FALSE(reveal_defect(s, object->defects));
        s = descend(s, d.cell_path[level]);
    }
    EXPECT_EQ(reveal_defect(s, object->defects), d.id);
}

}  // namespace
}  // namespace primo
