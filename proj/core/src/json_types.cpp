#include "synthforge/json_types.hpp"

#include "synthforge/errors.hpp"

namespace synthforge {

void to_json(nlohmann::json& j, const Vec3& v) { j = nlohmann::json::array({v.x, v.y, v.z}); }

void from_json(const nlohmann::json& j, Vec3& v) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected [x, y, z]");
  v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(nlohmann::json& j, const Quat& q) { j = nlohmann::json::array({q.w, q.x, q.y, q.z}); }

void from_json(const nlohmann::json& j, Quat& q) {
  if (!j.is_array() || j.size() != 4) throw FormatError("expected [w, x, y, z]");
  q = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

void to_json(nlohmann::json& j, const Rgb& c) { j = nlohmann::json::array({c.r, c.g, c.b}); }

void from_json(const nlohmann::json& j, Rgb& c) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected [r, g, b]");
  c = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(nlohmann::json& j, const Aabb& box) { j = {{"min", box.min}, {"max", box.max}}; }

void from_json(const nlohmann::json& j, Aabb& box) {
  box.min = j.at("min").get<Vec3>();
  box.max = j.at("max").get<Vec3>();
}

void to_json(nlohmann::json& j, const PrimitiveSpec& spec) {
  j = {{"kind", std::string(to_string(spec.kind))},
       {"size_a", spec.size_a},
       {"size_b", spec.size_b},
       {"radial_segments", spec.radial_segments},
       {"axial_segments", spec.axial_segments},
       {"translation", spec.placement.translation},
       {"rotation", spec.placement.rotation},
       {"scale", spec.placement.scale}};
}

void from_json(const nlohmann::json& j, PrimitiveSpec& spec) {
  spec.kind = primitive_kind_from_string(j.at("kind").get<std::string>());
  spec.size_a = j.at("size_a").get<double>();
  spec.size_b = j.at("size_b").get<double>();
  spec.radial_segments = j.at("radial_segments").get<int>();
  spec.axial_segments = j.at("axial_segments").get<int>();
  spec.placement.translation = j.at("translation").get<Vec3>();
  spec.placement.rotation = j.at("rotation").get<Quat>();
  spec.placement.scale = j.at("scale").get<double>();
}

void to_json(nlohmann::json& j, const ModifierSpec& modifier) {
  if (const auto* w = std::get_if<Wireframe>(&modifier)) {
    j = {{"type", "wireframe"}, {"thickness", w->thickness}};
  } else {
    j = {{"type", "subdivide"}, {"levels", std::get<Subdivide>(modifier).levels}};
  }
}

void from_json(const nlohmann::json& j, ModifierSpec& modifier) {
  const auto type = j.at("type").get<std::string>();
  if (type == "wireframe") {
    modifier = Wireframe{j.at("thickness").get<double>()};
  } else if (type == "subdivide") {
    modifier = Subdivide{j.at("levels").get<int>()};
  } else {
    throw FormatError("unknown modifier type: " + type);
  }
}

}  // namespace synthforge
