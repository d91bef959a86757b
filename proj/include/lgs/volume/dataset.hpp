#pragma once

#include "lgs/core/camera.hpp"
#include "lgs/core/image.hpp"
#include "lgs/format/ply_io.hpp"
#include "lgs/io/png.hpp"
#include "lgs/volume/point_cloud.hpp"
#include "lgs/volume/raymarch.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgs {

struct View {
  Camera camera;
  Image<float> image;  // RGBA, straight alpha
  int layer = 0;
  int index = 0;  // position within its split
};

struct Dataset {
  int layer_count = 1;
  std::vector<View> views;
  std::vector<ColoredPoint> init_points;

  std::vector<const View*> layer_views(int layer) const {
    std::vector<const View*> out;
    for (const auto& v : views)
      if (v.layer == layer) out.push_back(&v);
    return out;
  }
  std::vector<ColoredPoint> layer_points(int layer) const {
    std::vector<ColoredPoint> out;
    for (const auto& p : init_points)
      if (p.layer == layer) out.push_back(p);
    return out;
  }
  std::size_t layer_view_count(int layer) const { return layer_views(layer).size(); }

  void validate() const {
    for (const auto& v : views) {
      if (v.layer < 0 || v.layer >= layer_count)
        throw std::invalid_argument("dataset view has a layer index out of range");
      if (v.image.width != v.camera.width || v.image.height != v.camera.height)
        throw std::invalid_argument("dataset image size differs from its camera");
    }
  }
};

struct DatasetSplit {
  Dataset train;
  Dataset test;
};

/// Renders every layer from every camera; views whose index is a multiple of
/// `holdout_every` go to the test split.
inline DatasetSplit render_dataset(const VoxelVolume& vol, const std::vector<TransferFunction>& tfs,
                                   const std::vector<Camera>& cams, double step,
                                   int holdout_every = 8, int supersample = 1) {
  if (tfs.empty()) throw std::invalid_argument("render_dataset: no layers");
  if (cams.empty()) throw std::invalid_argument("render_dataset: no cameras");
  if (holdout_every < 1) throw std::invalid_argument("render_dataset: holdout_every must be >= 1");
  std::size_t test_count = 0;
  for (std::size_t i = 0; i < cams.size(); ++i)
    if (i % static_cast<std::size_t>(holdout_every) == 0) ++test_count;
  if (test_count == cams.size())
    throw std::invalid_argument("render_dataset: holdout leaves no training views");

  DatasetSplit out;
  out.train.layer_count = out.test.layer_count = static_cast<int>(tfs.size());
  for (int k = 0; k < static_cast<int>(tfs.size()); ++k) {
    const ClassifiedVolume classified(vol, tfs[static_cast<std::size_t>(k)]);
    int train_i = 0, test_i = 0;
    for (std::size_t i = 0; i < cams.size(); ++i) {
      const bool test = i % static_cast<std::size_t>(holdout_every) == 0;
      View v{cams[i], raymarch(classified, cams[i], step, supersample), k,
             test ? test_i++ : train_i++};
      (test ? out.test : out.train).views.push_back(std::move(v));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// On-disk layout: manifest.txt, layer_<k>/{train,test}/<i>.png, init_points.ply

inline void write_points_ply(const std::filesystem::path& path, const std::vector<ColoredPoint>& pts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "ply\nformat ascii 1.0\nelement vertex " << pts.size()
    << "\nproperty float x\nproperty float y\nproperty float z\n"
       "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar layer\nend_header\n";
  char buf[160];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %d %d %d %d\n", static_cast<float>(p.position.x()),
                  static_cast<float>(p.position.y()), static_cast<float>(p.position.z()),
                  io::to_byte(static_cast<float>(p.color.x())), io::to_byte(static_cast<float>(p.color.y())),
                  io::to_byte(static_cast<float>(p.color.z())), p.layer);
    f << buf;
  }
}

/// Reads x,y,z,red,green,blue[,layer]; missing layer means layer 0.
inline std::vector<ColoredPoint> read_points_ply(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const ply::Header h = ply::parse_header(bytes);
  const ply::Table t = ply::read_element(bytes, h, "vertex");
  const auto* x = t.column("x");
  const auto* y = t.column("y");
  const auto* z = t.column("z");
  const auto* r = t.column("red");
  const auto* g = t.column("green");
  const auto* b = t.column("blue");
  if (!x || !y || !z || !r || !g || !b) throw ply::FormatError("point PLY lacks x,y,z,red,green,blue");
  const auto* layer = t.column("layer");
  std::vector<ColoredPoint> pts(x->size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i].position = Vec3d((*x)[i], (*y)[i], (*z)[i]);
    pts[i].color = Vec3d((*r)[i], (*g)[i], (*b)[i]) / 255.0;
    pts[i].layer = layer ? static_cast<int>((*layer)[i]) : 0;
  }
  return pts;
}

inline std::filesystem::path view_path(const std::filesystem::path& dir, int layer, bool test, int index) {
  return dir / ("layer_" + std::to_string(layer)) / (test ? "test" : "train") / (std::to_string(index) + ".png");
}

inline void write_dataset(const std::filesystem::path& dir, const DatasetSplit& ds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream m(dir / "manifest.txt", std::ios::binary);
  if (!m) throw std::runtime_error("cannot write manifest in " + dir.string());
  m << "lgs-dataset 1\n";
  m << "layers " << ds.train.layer_count << "\n";
  m << "# view <split> <layer> <index> px py pz qw qx qy qz focal width height near\n";
  char buf[512];
  for (int split = 0; split < 2; ++split) {
    const Dataset& d = split == 0 ? ds.train : ds.test;
    for (const auto& v : d.views) {
      const fs::path p = view_path(dir, v.layer, split == 1, v.index);
      fs::create_directories(p.parent_path());
      io::write_png(p, v.image);
      const Camera& c = v.camera;
      std::snprintf(buf, sizeof buf, "view %s %d %d %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %d %d %.17g\n",
                    split == 0 ? "train" : "test", v.layer, v.index, c.position.x(), c.position.y(),
                    c.position.z(), c.rotation.w(), c.rotation.x(), c.rotation.y(), c.rotation.z(), c.focal,
                    c.width, c.height, c.near);
      m << buf;
    }
  }
  write_points_ply(dir / "init_points.ply", ds.train.init_points);
}

inline DatasetSplit read_dataset(const std::filesystem::path& dir) {
  std::ifstream m(dir / "manifest.txt");
  if (!m) throw std::runtime_error("missing manifest.txt in " + dir.string());
  std::string magic;
  int version = 0;
  m >> magic >> version;
  if (magic != "lgs-dataset" || version != 1) throw std::runtime_error("unrecognised dataset manifest");
  DatasetSplit ds;
  std::string line;
  while (std::getline(m, line)) {
    std::istringstream ss(line);
    std::string kw;
    if (!(ss >> kw) || kw[0] == '#') continue;
    if (kw == "layers") {
      ss >> ds.train.layer_count;
      ds.test.layer_count = ds.train.layer_count;
    } else if (kw == "view") {
      std::string split;
      View v;
      double qw, qx, qy, qz;
      ss >> split >> v.layer >> v.index >> v.camera.position.x() >> v.camera.position.y() >>
          v.camera.position.z() >> qw >> qx >> qy >> qz >> v.camera.focal >> v.camera.width >>
          v.camera.height >> v.camera.near;
      if (ss.fail() || (split != "train" && split != "test"))
        throw std::runtime_error("malformed manifest line: " + line);
      v.camera.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
      v.image = io::read_png(view_path(dir, v.layer, split == "test", v.index));
      (split == "test" ? ds.test : ds.train).views.push_back(std::move(v));
    } else {
      throw std::runtime_error("unknown manifest keyword: " + kw);
    }
  }
  if (std::filesystem::exists(dir / "init_points.ply"))
    ds.train.init_points = read_points_ply(dir / "init_points.ply");
  ds.test.init_points = ds.train.init_points;
  ds.train.validate();
  ds.test.validate();
  return ds;
}

}  // namespace lgs
