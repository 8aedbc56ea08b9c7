#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "synthforge/geometry.hpp"

namespace synthforge {

/// Wavefront OBJ text. Vertices are `v x y z` (or `v x y z r g b` when the
/// mesh carries albedo), faces `f i j k ...` with 1-based indices. Numbers
/// use fixed notation with 6 fractional digits, so equal meshes always
/// serialize to equal bytes.
std::string to_obj(const Mesh& mesh);
void write_obj(std::ostream& out, const Mesh& mesh);
void save_obj(const std::filesystem::path& path, const Mesh& mesh);

/// Reads `v` and `f` records; texture/normal references in face tokens and all
/// other record types are ignored. Throws FormatError on malformed input or if
/// only some vertices carry colors.
Mesh read_obj(std::istream& in);
Mesh load_obj(const std::filesystem::path& path);

}  // namespace synthforge
