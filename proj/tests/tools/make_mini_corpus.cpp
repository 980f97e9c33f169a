// Regenerates the pinned mini-corpus under tests/data/mini_corpus.
//
//   make_mini_corpus <dir>            images, ground truth, deep maps, manifest
//   make_mini_corpus <dir> --golden   also rewrites golden_rbd_report.json

#include <cstring>
#include <filesystem>
#include <iostream>

#include "salfuse/bench.hpp"
#include "salfuse/rbd.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace salfuse;

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_mini_corpus <dir> [--golden]\n";
    return 1;
  }
  const fs::path dir = argv[1];
  const bool golden = argc > 2 && std::strcmp(argv[2], "--golden") == 0;
  for (const char* sub : {"images", "gt", "deep"}) fs::create_directories(dir / sub);

  DatasetManifest m{"mini", {}};
  for (int i = 0; i < 8; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "mini%02d", i);
    const auto scene = i < 6 ? synth::blob_scene(72, 96, 500 + i)
                             : synth::two_object_scene(72, 96, 500 + i);
    save_rgb(scene.image, dir / "images" / (std::string(id) + ".png"));
    save_map(scene.gt, dir / "gt" / (std::string(id) + ".png"));
    save_map(synth::half_informative(scene.gt, true, 900 + i, Provenance::deep),
             dir / "deep" / (std::string(id) + ".png"));
    m.entries.push_back({id, dir / "images" / (std::string(id) + ".png"),
                         dir / "gt" / (std::string(id) + ".png"),
                         dir / "deep" / (std::string(id) + ".png")});
  }
  save_manifest(m, dir / "manifest.json");

  if (golden) {
    const DatasetManifest loaded = load_manifest(dir / "manifest.json");
    const fs::path pred = fs::temp_directory_path() / "salfuse_mini_golden";
    fs::remove_all(pred);
    fs::create_directories(pred);
    for (const auto& e : loaded.entries) {
      save_map(rbd_map(load_image(e.image)), pred / (e.id + ".png"));
    }
    write_report_json(evaluate_dataset(loaded, pred, "rbd"), dir / "golden_rbd_report.json");
    std::cout << "wrote golden report\n";
  }
  return 0;
}
