#include "primo/mesh_io.hpp"

#include "primo/errors.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace primo {

namespace {

static_assert(std::endian::native == std::endian::little, "binary STL reader assumes a little-endian host");

struct RawMesh {
    std::vector<Vec3> vertices;
    std::vector<TriangleMesh::Triangle> triangles;
};

double parse_real(std::string_view token, std::size_t line) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw ParseError("invalid number '" + std::string(token) + "' on line " + std::to_string(line), line);
    }
    return value;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

RawMesh parse_obj(std::string_view text) {
    RawMesh raw;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tokens = split_ws(line);
        if (tokens.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (tokens[0] == "v") {
            if (tokens.size() < 4) throw ParseError("vertex needs 3 coordinates on line " + std::to_string(line_no), line_no);
            raw.vertices.push_back({parse_real(tokens[1], line_no), parse_real(tokens[2], line_no),
                                    parse_real(tokens[3], line_no)});
        } else if (tokens[0] == "f") {
            if (tokens.size() < 4) throw ParseError("face needs 3 vertices on line " + std::to_string(line_no), line_no);
            std::vector<std::uint32_t> polygon;
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                const std::string_view ref = tokens[i].substr(0, tokens[i].find('/'));
                long long index = 0;
                const auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), index);
                if (ec != std::errc{} || ptr != ref.data() + ref.size() || index == 0) {
                    throw ParseError("invalid face index '" + std::string(tokens[i]) + "' on line " +
                                         std::to_string(line_no), line_no);
                }
                const auto count = static_cast<long long>(raw.vertices.size());
                const long long resolved = index > 0 ? index - 1 : count + index;
                if (resolved < 0 || resolved >= count) {
                    throw ParseError("face index out of range on line " + std::to_string(line_no), line_no);
                }
                polygon.push_back(static_cast<std::uint32_t>(resolved));
            }
            for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
                raw.triangles.push_back({polygon[0], polygon[i], polygon[i + 1]});
            }
        }
        if (end == text.size()) break;
    }
    return raw;
}

// Merges bit-identical corners so STL facets share vertices.
class VertexWelder {
public:
    explicit VertexWelder(RawMesh& mesh) : mesh_(mesh) {}

    std::uint32_t add(Vec3 p) {
        auto [it, inserted] = index_.try_emplace(std::make_tuple(p.x, p.y, p.z),
                                                 static_cast<std::uint32_t>(mesh_.vertices.size()));
        if (inserted) mesh_.vertices.push_back(p);
        return it->second;
    }

private:
    RawMesh& mesh_;
    std::map<std::tuple<double, double, double>, std::uint32_t> index_;
};

RawMesh parse_stl_binary(std::span<const std::byte> bytes) {
    constexpr std::size_t kHeader = 80;
    constexpr std::size_t kFacet = 50;
    if (bytes.size() < kHeader + 4) throw ParseError("binary STL shorter than its header", bytes.size());
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + kHeader, sizeof(count));
    const std::size_t needed = kHeader + 4 + static_cast<std::size_t>(count) * kFacet;
    if (bytes.size() < needed) {
        throw ParseError("binary STL truncated: " + std::to_string(count) + " facets declared", bytes.size());
    }
    RawMesh raw;
    VertexWelder weld(raw);
    for (std::uint32_t f = 0; f < count; ++f) {
        const std::byte* facet = bytes.data() + kHeader + 4 + static_cast<std::size_t>(f) * kFacet;
        std::array<float, 12> values;
        std::memcpy(values.data(), facet, sizeof(values));
        TriangleMesh::Triangle tri;
        for (int c = 0; c < 3; ++c) {
            const Vec3 p{values[3 + 3 * c], values[4 + 3 * c], values[5 + 3 * c]};
            if (!is_finite(p)) {
                throw ParseError("non-finite vertex in facet " + std::to_string(f),
                                 static_cast<std::size_t>(facet - bytes.data()));
            }
            tri[c] = weld.add(p);
        }
        raw.triangles.push_back(tri);
    }
    return raw;
}

RawMesh parse_stl_ascii(std::string_view text) {
    struct Token {
        std::string_view text;
        std::size_t line;
    };
    std::vector<Token> tokens;
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '\n') ++line;
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        tokens.push_back({text.substr(start, i - start), line});
    }

    std::size_t at = 0;
    auto fail = [&](const std::string& what) -> ParseError {
        const std::size_t where = at < tokens.size() ? tokens[at].line : line;
        return ParseError(what + " on line " + std::to_string(where), where);
    };
    auto expect = [&](std::string_view word) {
        if (at >= tokens.size() || tokens[at].text != word) throw fail("expected '" + std::string(word) + "'");
        ++at;
    };
    auto real = [&]() {
        if (at >= tokens.size()) throw fail("unexpected end of file");
        const Token& t = tokens[at++];
        return parse_real(t.text, t.line);
    };

    expect("solid");
    // Optional name: anything up to the first facet/endsolid keyword.
    while (at < tokens.size() && tokens[at].text != "facet" && tokens[at].text != "endsolid") ++at;

    RawMesh raw;
    VertexWelder weld(raw);
    while (at < tokens.size() && tokens[at].text == "facet") {
        ++at;
        expect("normal");
        real();
        real();
        real();
        expect("outer");
        expect("loop");
        TriangleMesh::Triangle tri;
        for (int c = 0; c < 3; ++c) {
            expect("vertex");
            const double x = real();
            const double y = real();
            const double z = real();
            tri[c] = weld.add({x, y, z});
        }
        expect("endloop");
        expect("endfacet");
        raw.triangles.push_back(tri);
    }
    expect("endsolid");
    return raw;
}

LoadedMesh normalize(RawMesh raw) {
    if (raw.triangles.empty()) throw DomainError("mesh contains no triangles");

    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi = -1.0 * lo;
    for (const auto& t : raw.triangles) {
        for (std::uint32_t idx : t) {
            for (int axis = 0; axis < 3; ++axis) {
                lo[axis] = std::min(lo[axis], raw.vertices[idx][axis]);
                hi[axis] = std::max(hi[axis], raw.vertices[idx][axis]);
            }
        }
    }
    const Vec3 extent = hi - lo;
    const double largest = std::max({extent.x, extent.y, extent.z});

    LoadedMesh out;
    std::vector<TriangleMesh::Triangle> kept;
    kept.reserve(raw.triangles.size());
    const double area_floor = 1e-12 * largest * largest;
    for (const auto& t : raw.triangles) {
        const Vec3 a = raw.vertices[t[0]];
        const double twice_area = length(cross(raw.vertices[t[1]] - a, raw.vertices[t[2]] - a));
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || !(0.5 * twice_area > area_floor)) {
            ++out.dropped_degenerate;
        } else {
            kept.push_back(t);
        }
    }
    if (kept.empty()) throw DomainError("mesh contains only degenerate triangles");

    const double scale = (1.0 - 2.0 * kLoadMargin) / largest;
    const Vec3 center = 0.5 * (lo + hi);
    out.normalization = {scale, Vec3{0.5, 0.5, 0.5} - scale * center};

    std::vector<std::uint32_t> remap(raw.vertices.size(), std::numeric_limits<std::uint32_t>::max());
    for (const auto& t : kept) {
        for (std::uint32_t idx : t) remap[idx] = 0;
    }
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < remap.size(); ++i) {
        if (remap[i] != 0) continue;
        remap[i] = next++;
        out.mesh.vertices.push_back(out.normalization.apply(raw.vertices[i]));
    }
    out.mesh.triangles.reserve(kept.size());
    for (const auto& t : kept) out.mesh.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    return out;
}

std::string_view as_text(std::span<const std::byte> bytes) {
    return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace

LoadedMesh load_mesh(std::span<const std::byte> bytes, MeshFormat format) {
    switch (format) {
        case MeshFormat::Obj:
            return normalize(parse_obj(as_text(bytes)));
        case MeshFormat::StlBinary:
            return normalize(parse_stl_binary(bytes));
        case MeshFormat::StlAscii:
            return normalize(parse_stl_ascii(as_text(bytes)));
    }
    throw ContractError("load_mesh: unknown format");
}

LoadedMesh load_mesh(std::string_view text, MeshFormat format) {
    return load_mesh(std::as_bytes(std::span<const char>(text.data(), text.size())), format);
}

std::optional<MeshFormat> detect_mesh_format(std::string_view path, std::span<const std::byte> bytes) {
    auto ends_with = [&](std::string_view suffix) {
        if (path.size() < suffix.size()) return false;
        return std::equal(suffix.rbegin(), suffix.rend(), path.rbegin(), [](char a, char b) {
            return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
        });
    };
    const std::string_view text = as_text(bytes);
    const bool starts_solid = text.substr(0, 5) == "solid";
    bool binary_size_matches = false;
    if (bytes.size() >= 84) {
        std::uint32_t count = 0;
        std::memcpy(&count, bytes.data() + 80, sizeof(count));
        binary_size_matches = bytes.size() == 84 + static_cast<std::size_t>(count) * 50;
    }
    if (ends_with(".obj")) return MeshFormat::Obj;
    if (ends_with(".stl") || starts_solid || binary_size_matches) {
        if (starts_solid && !binary_size_matches && text.substr(0, 1024).find("facet") != std::string_view::npos) {
            return MeshFormat::StlAscii;
        }
        return MeshFormat::StlBinary;
    }
    if (text.find("\nv ") != std::string_view::npos || text.substr(0, 2) == "v ") return MeshFormat::Obj;
    return std::nullopt;
}

std::string write_obj(const TriangleMesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 48 + mesh.triangles.size() * 24);
    char buffer[32];
    auto put_real = [&](double v) {
        const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
        out.append(buffer, ptr);
    };
    for (const Vec3& v : mesh.vertices) {
        out += "v ";
        put_real(v.x);
        out += ' ';
        put_real(v.y);
        out += ' ';
        put_real(v.z);
        out += '\n';
    }
    for (const auto& t : mesh.triangles) {
        out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' + std::to_string(t[2] + 1) + '\n';
    }
    return out;
}

std::string write_stl_binary(const TriangleMesh& mesh) {
    std::string out(80, '\0');
    const std::string header = "primo binary stl";
    std::copy(header.begin(), header.end(), out.begin());
    const auto count = static_cast<std::uint32_t>(mesh.triangles.size());
    out.append(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& t : mesh.triangles) {
        const Vec3 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
        Vec3 normal = cross(b - a, c - a);
        const double len = length(normal);
        if (len > 0.0) normal = (1.0 / len) * normal;
        std::array<float, 12> values{};
        const std::array<Vec3, 4> points{normal, a, b, c};
        for (int p = 0; p < 4; ++p) {
            for (int axis = 0; axis < 3; ++axis) values[3 * p + axis] = static_cast<float>(points[p][axis]);
        }
        out.append(reinterpret_cast<const char*>(values.data()), sizeof(values));
        out.append(2, '\0');
    }
    return out;
}

}  // namespace primo
