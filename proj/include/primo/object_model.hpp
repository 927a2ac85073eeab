#pragma once

#include "primo/geometry.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace primo {

struct TriangleMesh {
    using Triangle = std::array<std::uint32_t, 3>;

    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;

    bool empty() const { return triangles.empty(); }
    std::size_t triangle_count() const { return triangles.size(); }
    double triangle_area(std::size_t i) const;
    double area() const;
    // Bounds of the referenced vertices; unit cube for an empty mesh.
    Aabb bounds() const;
    // Every triangle references an existing vertex.
    bool indices_valid() const;

    friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;
};

enum class LatticePattern { GridStruts, GyroidApprox };

struct LatticeSpec {
    int cells_per_axis = 4;
    // Absolute strut thickness in object units; must lie in (0, 0.5 / cells_per_axis).
    double strut_thickness = 0.03;
    LatticePattern pattern = LatticePattern::GridStruts;
    // Marching-tetrahedra samples per cell edge, gyroid pattern only.
    int gyroid_resolution = 8;
};

struct Segment {
    Vec3 a;
    Vec3 b;
};

struct ClippedMesh {
    TriangleMesh visible;
    TriangleMesh hidden;
    std::vector<Segment> cross_section_edges;  // object space
};

struct DefectRegion {
    int id = 0;
    Vec3 center;
    double radius = 0.0;
    OctPath cell_path;

    Aabb cell() const { return path_to_aabb(Aabb::unit(), cell_path); }
};

enum class Axis { X = 0, Y = 1, Z = 2 };

struct RodMarker {
    Axis axis = Axis::X;
    Vec3 through;

    // The rod spans [0,1] along its axis.
    Segment span() const;
    bool contains(Vec3 p, double tolerance = 1e-12) const;
};

// Radius of a defect sphere relative to its cell side.
inline constexpr double kDefectRadiusFraction = 0.3;

// Deterministic synthetic lattice fitted inside [0,1]^3. Grid struts are one
// box per cell edge (3 n (n+1)^2 boxes). Throws ContractError on invalid specs.
TriangleMesh generate_lattice(const LatticeSpec& spec);

// Splits the mesh against the horizontal plane world-y = plane.height, where
// world = to_world(object). Triangles at or below the plane are visible,
// those above are hidden, crossing triangles are cut at the plane. Output
// vertices stay in object space.
ClippedMesh clip_mesh(const TriangleMesh& mesh, Plane1D plane, const Similarity& to_world);

// Part of the mesh inside `box`, cut exactly against its six faces.
TriangleMesh crop_mesh(const TriangleMesh& mesh, const Aabb& box);

// `count` defects in distinct depth-`depth` cells of the unit cube, each
// centred in its cell. Throws DomainError when count exceeds 8^depth.
std::vector<DefectRegion> place_defects(std::uint64_t seed, int depth, int count);

std::array<RodMarker, 3> rods_for_target(Vec3 target);

}  // namespace primo
