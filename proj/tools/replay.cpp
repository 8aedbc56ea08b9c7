#include <fstream>
#include <map>

#include "cli.hpp"
#include "synthforge/errors.hpp"
#include "synthforge/obj_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace synthforge::cli {

Image replay_entry(const ManifestEntry& entry, const fs::path& source_root) {
  const fs::path root = source_root.empty() ? fs::path(entry.origin) : source_root;
  if (root.empty()) throw ParameterError("manifest entry has no origin; pass the source database root");
  std::ifstream in(root / "spec.json", std::ios::binary);
  if (!in) throw FormatError("no spec.json in " + root.string());
  const json spec = json::parse(in);
  const std::string command = spec.at("command").get<std::string>();
  const json& options = spec.at("options");
  const auto cls = entry.seed_chain.at("class").get<std::size_t>();
  const auto image = entry.seed_chain.at("image").get<std::size_t>();

  if (command == "gen-fractal") {
    const FractalClass fc = generate_fractal_class(fractal_config(options), cls);
    return fc.images.at(image).image;
  }
  if (command == "render") {
    auto jobs = sample_render_plan(render_class_seed(options.at("seed").get<std::uint64_t>(), cls), image + 1,
                                   options.value("flat", false), render_plan_config(options));
    RenderJob job = jobs.back();
    job.mesh = std::make_shared<const Mesh>(load_obj(entry.reference));
    job.mesh_ref = entry.reference;
    job.class_index = cls;
    return rasterize(job).image;
  }
  throw ParameterError("cannot replay images produced by '" + command + "'");
}

Image contact_sheet(const fs::path& root, std::size_t n, int tile, const WorkerPool& pool) {
  if (n < 1) throw ParameterError("preview needs n >= 1");
  if (tile < 8) throw ParameterError("preview tile must be >= 8 pixels");
  constexpr std::size_t kColumns = 4;

  std::map<std::size_t, std::map<std::size_t, std::string>> by_class;
  for (const auto& e : read_manifest(root)) by_class[e.class_id][e.image_index] = e.path;
  if (by_class.empty()) throw EmptyInputError("dataset at " + root.string() + " is empty");
  const std::size_t rows = std::min(n, by_class.size());

  std::vector<std::string> cells(rows * kColumns);
  auto cls = by_class.begin();
  for (std::size_t r = 0; r < rows; ++r, ++cls) {
    auto img = cls->second.begin();
    for (std::size_t c = 0; c < kColumns && img != cls->second.end(); ++c, ++img) cells[r * kColumns + c] = img->second;
  }
  const auto images = pool.map(cells.size(), [&](std::size_t i) {
    return cells[i].empty() ? Image{} : read_png(root / cells[i]);
  });
  int channels = 1;
  for (const auto& img : images) channels = std::max(channels, img.channels);

  Image sheet(static_cast<int>(kColumns) * tile, static_cast<int>(rows) * tile, channels);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& src = images[i];
    if (src.width == 0) continue;
    const int ox = static_cast<int>(i % kColumns) * tile;
    const int oy = static_cast<int>(i / kColumns) * tile;
    for (int y = 0; y < tile; ++y) {
      const int sy = static_cast<int>((2L * y + 1) * src.height / (2L * tile));
      for (int x = 0; x < tile; ++x) {
        const int sx = static_cast<int>((2L * x + 1) * src.width / (2L * tile));
        for (int k = 0; k < channels; ++k) {
          sheet.at(ox + x, oy + y, k) = src.at(sx, sy, src.channels == 1 ? 0 : k);
        }
      }
    }
  }
  return sheet;
}

}  // namespace synthforge::cli
