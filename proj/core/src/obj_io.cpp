#include "synthforge/obj_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "synthforge/errors.hpp"

namespace synthforge {

namespace {

void append_fixed(std::string& out, double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 6);
  if (ec != std::errc{}) throw FormatError("cannot format coordinate");
  std::string_view text(buf, static_cast<std::size_t>(end - buf));
  if (text == "-0.000000") text = "0.000000";
  out.append(text);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

double parse_double(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": bad number '" + std::string(token) + "'");
  }
  return value;
}

long parse_index(std::string_view token, std::size_t line_no) {
  const auto slash = token.find('/');
  if (slash != std::string_view::npos) token = token.substr(0, slash);
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value == 0) {
    throw FormatError("line " + std::to_string(line_no) + ": bad face index '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::string to_obj(const Mesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 24);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& p = mesh.vertices[i];
    out += "v ";
    append_fixed(out, p.x);
    out += ' ';
    append_fixed(out, p.y);
    out += ' ';
    append_fixed(out, p.z);
    if (mesh.albedo) {
      const Rgb& c = (*mesh.albedo)[i];
      out += ' ';
      append_fixed(out, c.r);
      out += ' ';
      append_fixed(out, c.g);
      out += ' ';
      append_fixed(out, c.b);
    }
    out += '\n';
  }
  for (const Face& face : mesh.faces) {
    out += 'f';
    for (std::uint32_t idx : face) {
      out += ' ';
      out += std::to_string(idx + 1);
    }
    out += '\n';
  }
  return out;
}

void write_obj(std::ostream& out, const Mesh& mesh) { out << to_obj(mesh); }

void save_obj(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  const std::string text = to_obj(mesh);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Mesh read_obj(std::istream& in) {
  Mesh mesh;
  std::vector<Rgb> colors;
  std::size_t colored = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens[0] == "v") {
      if (tokens.size() != 4 && tokens.size() != 5 && tokens.size() != 7) {
        throw FormatError("line " + std::to_string(line_no) + ": vertex needs 3 or 6 components");
      }
      mesh.vertices.push_back(
          {parse_double(tokens[1], line_no), parse_double(tokens[2], line_no), parse_double(tokens[3], line_no)});
      if (tokens.size() == 7) {
        colors.push_back(
            {parse_double(tokens[4], line_no), parse_double(tokens[5], line_no), parse_double(tokens[6], line_no)});
        ++colored;
      } else {
        colors.push_back({});
      }
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) throw FormatError("line " + std::to_string(line_no) + ": face needs 3+ vertices");
      Face face;
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        long idx = parse_index(tokens[t], line_no);
        idx = idx > 0 ? idx - 1 : static_cast<long>(mesh.vertices.size()) + idx;
        if (idx < 0 || static_cast<std::size_t>(idx) >= mesh.vertices.size()) {
          throw FormatError("line " + std::to_string(line_no) + ": face index out of range");
        }
        face.push_back(static_cast<std::uint32_t>(idx));
      }
      mesh.faces.push_back(std::move(face));
    }
  }
  if (colored != 0 && colored != mesh.vertices.size()) {
    throw FormatError("only some vertices carry colors");
  }
  if (colored != 0) mesh.albedo = std::move(colors);
  try {
    validate(mesh);
  } catch (const ParameterError& e) {
    throw FormatError(std::string("invalid mesh: ") + e.what());
  }
  return mesh;
}

Mesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_obj(in);
}

}  // namespace synthforge
