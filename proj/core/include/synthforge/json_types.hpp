#pragma once

#include <nlohmann/json.hpp>

#include "synthforge/geometry.hpp"
#include "synthforge/vec.hpp"

// JSON mappings for the geometric value types. Vectors and quaternions are
// arrays; doubles round-trip exactly through nlohmann's shortest formatting.
namespace synthforge {

void to_json(nlohmann::json& j, const Vec3& v);
void from_json(const nlohmann::json& j, Vec3& v);
void to_json(nlohmann::json& j, const Quat& q);
void from_json(const nlohmann::json& j, Quat& q);
void to_json(nlohmann::json& j, const Rgb& c);
void from_json(const nlohmann::json& j, Rgb& c);
void to_json(nlohmann::json& j, const Aabb& box);
void from_json(const nlohmann::json& j, Aabb& box);
void to_json(nlohmann::json& j, const PrimitiveSpec& spec);
void from_json(const nlohmann::json& j, PrimitiveSpec& spec);
void to_json(nlohmann::json& j, const ModifierSpec& modifier);
void from_json(const nlohmann::json& j, ModifierSpec& modifier);

}  // namespace synthforge
