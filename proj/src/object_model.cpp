#include "primo/object_model.hpp"

#include "primo/errors.hpp"
#include "primo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace primo {

double TriangleMesh::triangle_area(std::size_t i) const {
    const auto& t = triangles[i];
    const Vec3 a = vertices[t[0]];
    return 0.5 * length(cross(vertices[t[1]] - a, vertices[t[2]] - a));
}

double TriangleMesh::area() const {
    double total = 0.0;
    for (std::size_t i = 0; i < triangles.size(); ++i) total += triangle_area(i);
    return total;
}

Aabb TriangleMesh::bounds() const {
    if (triangles.empty()) return Aabb::unit();
    constexpr double inf = std::numeric_limits<double>::infinity();
    Aabb box{{inf, inf, inf}, {-inf, -inf, -inf}};
    for (const auto& t : triangles) {
        for (std::uint32_t idx : t) {
            const Vec3 p = vertices[idx];
            for (int axis = 0; axis < 3; ++axis) {
                box.min[axis] = std::min(box.min[axis], p[axis]);
                box.max[axis] = std::max(box.max[axis], p[axis]);
            }
        }
    }
    return box;
}

bool TriangleMesh::indices_valid() const {
    const auto n = vertices.size();
    return std::all_of(triangles.begin(), triangles.end(), [n](const Triangle& t) {
        return t[0] < n && t[1] < n && t[2] < n;
    });
}

Segment RodMarker::span() const {
    Segment s{through, through};
    const int a = static_cast<int>(axis);
    s.a[a] = 0.0;
    s.b[a] = 1.0;
    return s;
}

bool RodMarker::contains(Vec3 p, double tolerance) const {
    const int a = static_cast<int>(axis);
    for (int other = 0; other < 3; ++other) {
        if (other == a) continue;
        if (std::abs(p[other] - through[other]) > tolerance) return false;
    }
    return p[a] >= -tolerance && p[a] <= 1.0 + tolerance;
}

//---------------------------------------------------------------------------//
// Lattice generation
//---------------------------------------------------------------------------//

namespace {

void append_box(TriangleMesh& mesh, Vec3 lo, Vec3 hi) {
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int i = 0; i < 8; ++i) {
        mesh.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
    }
    // Outward-facing quads, corner numbering follows the octant bit convention.
    static constexpr std::array<std::array<std::uint32_t, 4>, 6> faces{{
        {0, 4, 6, 2},  // -x
        {1, 3, 7, 5},  // +x
        {0, 1, 5, 4},  // -y
        {2, 6, 7, 3},  // +y
        {0, 2, 3, 1},  // -z
        {4, 5, 7, 6},  // +z
    }};
    for (const auto& f : faces) {
        mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
        mesh.triangles.push_back({base + f[0], base + f[2], base + f[3]});
    }
}

TriangleMesh grid_struts(const LatticeSpec& spec) {
    const int n = spec.cells_per_axis;
    const double t = spec.strut_thickness;
    const double half = 0.5 * t;
    const double pitch = (1.0 - t) / n;
    auto node = [&](int i) { return half + i * pitch; };

    TriangleMesh mesh;
    const auto struts = static_cast<std::size_t>(3) * n * (n + 1) * (n + 1);
    mesh.vertices.reserve(struts * 8);
    mesh.triangles.reserve(struts * 12);
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3;
        const int v = (axis + 2) % 3;
        for (int j = 0; j <= n; ++j) {
            for (int k = 0; k <= n; ++k) {
                for (int i = 0; i < n; ++i) {
                    Vec3 lo, hi;
                    lo[axis] = node(i) - half;
                    hi[axis] = node(i + 1) + half;
                    lo[u] = node(j) - half;
                    hi[u] = node(j) + half;
                    lo[v] = node(k) - half;
                    hi[v] = node(k) + half;
                    append_box(mesh, lo, hi);
                }
            }
        }
    }
    return mesh;
}

// Sheet |g| <= tau around the gyroid g = sin X cos Y + sin Y cos Z + sin Z cos X,
// extracted with marching tetrahedra on the zero set of g^2 - tau^2.
TriangleMesh gyroid_sheet(const LatticeSpec& spec) {
    const int n = spec.cells_per_axis;
    const int samples = n * spec.gyroid_resolution;
    const double tau = 3.0 * spec.strut_thickness * n;
    const double freq = 2.0 * std::numbers::pi * n;
    const int stride = samples + 1;

    auto grid_index = [&](int i, int j, int k) {
        return static_cast<std::uint32_t>((k * stride + j) * stride + i);
    };
    auto grid_point = [&](std::uint32_t idx) {
        const int i = static_cast<int>(idx % stride);
        const int j = static_cast<int>((idx / stride) % stride);
        const int k = static_cast<int>(idx / (static_cast<std::uint32_t>(stride) * stride));
        return Vec3{static_cast<double>(i) / samples, static_cast<double>(j) / samples,
                    static_cast<double>(k) / samples};
    };

    std::vector<double> field(static_cast<std::size_t>(stride) * stride * stride);
    for (std::uint32_t idx = 0; idx < field.size(); ++idx) {
        const Vec3 p = grid_point(idx);
        const double X = freq * p.x, Y = freq * p.y, Z = freq * p.z;
        const double g = std::sin(X) * std::cos(Y) + std::sin(Y) * std::cos(Z) + std::sin(Z) * std::cos(X);
        field[idx] = g * g - tau * tau;
    }

    TriangleMesh mesh;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
    auto crossing = [&](std::uint32_t a, std::uint32_t b) {
        if (a > b) std::swap(a, b);
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
        auto [it, inserted] = edge_vertex.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) {
            const double fa = field[a], fb = field[b];
            const double s = fa / (fa - fb);
            const Vec3 pa = grid_point(a), pb = grid_point(b);
            mesh.vertices.push_back(pa + s * (pb - pa));
        }
        return it->second;
    };
    auto emit = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, Vec3 toward_outside) {
        const Vec3 pa = mesh.vertices[a], pb = mesh.vertices[b], pc = mesh.vertices[c];
        const Vec3 normal = cross(pb - pa, pc - pa);
        if (dot(normal, normal) == 0.0) return;
        if (dot(normal, toward_outside) < 0.0) std::swap(b, c);
        mesh.triangles.push_back({a, b, c});
    };

    // Six tetrahedra around the 0-7 diagonal of each voxel.
    static constexpr std::array<std::array<int, 4>, 6> tets{{
        {0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7},
    }};
    for (int k = 0; k < samples; ++k) {
        for (int j = 0; j < samples; ++j) {
            for (int i = 0; i < samples; ++i) {
                std::array<std::uint32_t, 8> corner;
                for (int c = 0; c < 8; ++c) corner[c] = grid_index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                for (const auto& tet : tets) {
                    std::array<std::uint32_t, 4> in, out;
                    int n_in = 0, n_out = 0;
                    for (int c : tet) {
                        if (field[corner[c]] < 0.0) {
                            in[n_in++] = corner[c];
                        } else {
                            out[n_out++] = corner[c];
                        }
                    }
                    if (n_in == 0 || n_out == 0) continue;
                    Vec3 in_mean{}, out_mean{};
                    for (int q = 0; q < n_in; ++q) in_mean = in_mean + grid_point(in[q]);
                    for (int q = 0; q < n_out; ++q) out_mean = out_mean + grid_point(out[q]);
                    const Vec3 outward = (1.0 / n_out) * out_mean - (1.0 / n_in) * in_mean;
                    if (n_in == 1 || n_out == 1) {
                        const bool lone_inside = n_in == 1;
                        const std::uint32_t lone = lone_inside ? in[0] : out[0];
                        const auto& others = lone_inside ? out : in;
                        emit(crossing(lone, others[0]), crossing(lone, others[1]), crossing(lone, others[2]), outward);
                    } else {
                        const std::uint32_t a = crossing(in[0], out[0]);
                        const std::uint32_t b = crossing(in[0], out[1]);
                        const std::uint32_t c = crossing(in[1], out[1]);
                        const std::uint32_t d = crossing(in[1], out[0]);
                        emit(a, b, c, outward);
                        emit(a, c, d, outward);
                    }
                }
            }
        }
    }
    return mesh;
}

}  // namespace

TriangleMesh generate_lattice(const LatticeSpec& spec) {
    if (spec.cells_per_axis < 1) throw ContractError("lattice: cells_per_axis must be >= 1");
    const double cell = 1.0 / spec.cells_per_axis;
    if (!(spec.strut_thickness > 0.0) || !(spec.strut_thickness < 0.5 * cell)) {
        throw ContractError("lattice: strut thickness " + std::to_string(spec.strut_thickness) +
                            " outside (0, " + std::to_string(0.5 * cell) + ")");
    }
    switch (spec.pattern) {
        case LatticePattern::GridStruts:
            return grid_struts(spec);
        case LatticePattern::GyroidApprox:
            if (spec.gyroid_resolution < 2) throw ContractError("lattice: gyroid resolution must be >= 2");
            return gyroid_sheet(spec);
    }
    throw ContractError("lattice: unknown pattern");
}

//---------------------------------------------------------------------------//
// Plane splitting
//---------------------------------------------------------------------------//

namespace {

// Signed distance d(v) = scale * v[axis] + offset - threshold. "Below" holds
// triangles with every d <= 0 (including triangles lying in the plane).
struct PlaneSplit {
    int axis;
    double scale;
    double offset;
    double threshold;

    double plane_coordinate() const { return (threshold - offset) / scale; }
};

constexpr std::uint32_t kUnused = std::numeric_limits<std::uint32_t>::max();

// Triangles are emitted with provisional indices: [0, n) refer to the input
// vertices, n + k to the k-th generated vertex. compact() renumbers the used
// ones preserving order.
struct SideBuilder {
    std::vector<TriangleMesh::Triangle> triangles;
    std::vector<Vec3> extra;

    TriangleMesh compact(const std::vector<Vec3>& source) const {
        const std::size_t n = source.size();
        std::vector<std::uint32_t> remap(n + extra.size(), kUnused);
        for (const auto& t : triangles) {
            for (std::uint32_t idx : t) remap[idx] = 0;
        }
        TriangleMesh out;
        std::uint32_t next = 0;
        for (std::size_t i = 0; i < remap.size(); ++i) {
            if (remap[i] == kUnused) continue;
            remap[i] = next++;
            out.vertices.push_back(i < n ? source[i] : extra[i - n]);
        }
        out.triangles.reserve(triangles.size());
        for (const auto& t : triangles) out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
        return out;
    }
};

struct SplitResult {
    SideBuilder below;
    SideBuilder above;
    std::vector<Segment> segments;
};

SplitResult split_mesh(const TriangleMesh& mesh, const PlaneSplit& plane, bool keep_above, bool keep_segments) {
    const auto n = static_cast<std::uint32_t>(mesh.vertices.size());
    std::vector<double> dist(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        dist[i] = plane.scale * mesh.vertices[i][plane.axis] + plane.offset - plane.threshold;
    }
    const double plane_coord = plane.plane_coordinate();

    SplitResult out;
    out.below.triangles.reserve(mesh.triangles.size());
    if (keep_above) out.above.triangles.reserve(mesh.triangles.size());

    // Both sides index the same generated vertex list offset by n.
    std::vector<Vec3> generated;
    auto cut = [&](std::uint32_t i, std::uint32_t j) {
        if (i > j) std::swap(i, j);  // identical point for both triangles sharing the edge
        const double s = dist[i] / (dist[i] - dist[j]);
        const Vec3 a = mesh.vertices[i], b = mesh.vertices[j];
        Vec3 p = a + s * (b - a);
        p[plane.axis] = plane_coord;
        generated.push_back(p);
        return n + static_cast<std::uint32_t>(generated.size() - 1);
    };
    auto point = [&](std::uint32_t idx) { return idx < n ? mesh.vertices[idx] : generated[idx - n]; };

    for (const auto& tri : mesh.triangles) {
        const double d0 = dist[tri[0]], d1 = dist[tri[1]], d2 = dist[tri[2]];
        const bool any_neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
        const bool any_pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
        if (!any_pos) {
            out.below.triangles.push_back(tri);
            continue;
        }
        if (!any_neg) {
            if (keep_above) out.above.triangles.push_back(tri);
            continue;
        }

        const std::array<double, 3> d{d0, d1, d2};
        const int zero = d0 == 0.0 ? 0 : (d1 == 0.0 ? 1 : (d2 == 0.0 ? 2 : -1));
        if (zero >= 0) {
            // One vertex on the plane, the other two on opposite sides.
            const std::uint32_t a = tri[zero];
            const std::uint32_t b = tri[(zero + 1) % 3];
            const std::uint32_t c = tri[(zero + 2) % 3];
            const std::uint32_t p = cut(b, c);
            const bool b_below = d[(zero + 1) % 3] < 0.0;
            const TriangleMesh::Triangle first{a, b, p}, second{a, p, c};
            (b_below ? out.below : out.above).triangles.push_back(first);
            (b_below ? out.above : out.below).triangles.push_back(second);
            if (keep_segments) out.segments.push_back({point(a), point(p)});
            continue;
        }

        // Lone vertex on one side, the other two on the other.
        int lone = 0;
        if ((d0 < 0.0) == (d1 < 0.0)) lone = 2;
        else if ((d0 < 0.0) == (d2 < 0.0)) lone = 1;
        const std::uint32_t v0 = tri[lone];
        const std::uint32_t v1 = tri[(lone + 1) % 3];
        const std::uint32_t v2 = tri[(lone + 2) % 3];
        const std::uint32_t p01 = cut(v0, v1);
        const std::uint32_t p02 = cut(v0, v2);
        const bool lone_below = d[lone] < 0.0;
        SideBuilder& lone_side = lone_below ? out.below : out.above;
        SideBuilder& pair_side = lone_below ? out.above : out.below;
        lone_side.triangles.push_back({v0, p01, p02});
        pair_side.triangles.push_back({p01, v1, v2});
        pair_side.triangles.push_back({p01, v2, p02});
        if (keep_segments) out.segments.push_back({point(p01), point(p02)});
    }

    out.below.extra = generated;
    if (keep_above) out.above.extra = std::move(generated);
    if (!keep_above) out.above.triangles.clear();
    return out;
}

}  // namespace

ClippedMesh clip_mesh(const TriangleMesh& mesh, Plane1D plane, const Similarity& to_world) {
    const PlaneSplit split{1, to_world.scale, to_world.translation.y, plane.height};
    SplitResult parts = split_mesh(mesh, split, true, true);
    ClippedMesh out;
    out.visible = parts.below.compact(mesh.vertices);
    out.hidden = parts.above.compact(mesh.vertices);
    out.cross_section_edges = std::move(parts.segments);
    return out;
}

TriangleMesh crop_mesh(const TriangleMesh& mesh, const Aabb& box) {
    TriangleMesh current = mesh;
    for (int axis = 0; axis < 3; ++axis) {
        // Keep v[axis] <= max, then keep v[axis] >= min written as -v[axis] <= -min.
        const std::array<PlaneSplit, 2> faces{
            PlaneSplit{axis, 1.0, 0.0, box.max[axis]},
            PlaneSplit{axis, -1.0, 0.0, -box.min[axis]},
        };
        for (const auto& face : faces) {
            SplitResult parts = split_mesh(current, face, false, false);
            current = parts.below.compact(current.vertices);
        }
    }
    return current;
}

//---------------------------------------------------------------------------//
// Defects and markers
//---------------------------------------------------------------------------//

namespace {

constexpr int kMaxDefectDepth = 20;

OctPath cell_path_from_index(std::uint64_t cell, int depth) {
    OctPath path(static_cast<std::size_t>(depth));
    for (int level = depth - 1; level >= 0; --level) {
        path[static_cast<std::size_t>(level)] = OctantIndex(static_cast<int>(cell & 7u));
        cell >>= 3;
    }
    return path;
}

}  // namespace

std::vector<DefectRegion> place_defects(std::uint64_t seed, int depth, int count) {
    if (depth < 0 || depth > kMaxDefectDepth) {
        throw ContractError("place_defects: depth must lie in [0, " + std::to_string(kMaxDefectDepth) + "]");
    }
    if (count < 0) throw ContractError("place_defects: negative count");
    const std::uint64_t capacity = std::uint64_t{1} << (3 * depth);
    if (static_cast<std::uint64_t>(count) > capacity) {
        throw DomainError("place_defects: " + std::to_string(count) + " defects exceed the " +
                          std::to_string(capacity) + " cells available at depth " + std::to_string(depth));
    }

    Rng rng(seed);
    std::vector<std::uint64_t> cells;
    cells.reserve(static_cast<std::size_t>(count));
    if (capacity <= (std::uint64_t{1} << 16)) {
        std::vector<std::uint64_t> pool(capacity);
        for (std::uint64_t i = 0; i < capacity; ++i) pool[i] = i;
        for (int i = 0; i < count; ++i) {
            const std::uint64_t j = i + rng.below(capacity - i);
            std::swap(pool[i], pool[j]);
            cells.push_back(pool[i]);
        }
    } else {
        std::unordered_set<std::uint64_t> taken;
        while (cells.size() < static_cast<std::size_t>(count)) {
            const std::uint64_t c = rng.below(capacity);
            if (taken.insert(c).second) cells.push_back(c);
        }
    }

    std::vector<DefectRegion> defects;
    defects.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        DefectRegion d;
        d.id = static_cast<int>(i) + 1;
        d.cell_path = cell_path_from_index(cells[i], depth);
        const Aabb cell = d.cell();
        d.center = cell.center();
        d.radius = kDefectRadiusFraction * cell.side();
        defects.push_back(std::move(d));
    }
    return defects;
}

std::array<RodMarker, 3> rods_for_target(Vec3 target) {
    if (!Aabb::unit().contains(target)) throw OutOfBoundsError("rods_for_target: target outside the unit cube");
    return {RodMarker{Axis::X, target}, RodMarker{Axis::Y, target}, RodMarker{Axis::Z, target}};
}

}  // namespace primo
