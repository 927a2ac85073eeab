#pragma once

#include "primo/object_model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace primo {

enum class MeshFormat { Obj, StlBinary, StlAscii };

struct LoadedMesh {
    TriangleMesh mesh;              // fitted into [0,1]^3
    Similarity normalization;       // source coordinates -> object space
    std::size_t dropped_degenerate = 0;
};

// Fraction of the unit cube left free on every side after normalization.
inline constexpr double kLoadMargin = 0.02;

// Parses and normalizes a mesh. Throws ParseError (line for OBJ/ASCII STL,
// byte offset for binary STL) and DomainError when no usable triangle remains.
LoadedMesh load_mesh(std::span<const std::byte> bytes, MeshFormat format);
LoadedMesh load_mesh(std::string_view text, MeshFormat format);

// Guess from extension, falling back to the content.
std::optional<MeshFormat> detect_mesh_format(std::string_view path, std::span<const std::byte> bytes);

std::string write_obj(const TriangleMesh& mesh);
std::string write_stl_binary(const TriangleMesh& mesh);

}  // namespace primo
