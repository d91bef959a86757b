#include "lgs/lgs.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace lgs;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

Vec3d to_vec3(const std::vector<double>& v, const char* what) {
  if (v.size() != 3) throw UsageError(std::string(what) + " needs three comma-separated values");
  return Vec3d(v[0], v[1], v[2]);
}

LayerMask to_mask(const std::vector<int>& layers, int layer_count) {
  if (layers.empty()) return LayerMask::all(layer_count);
  LayerMask m;
  for (int l : layers) {
    if (l < 0 || l >= layer_count) throw UsageError("layer " + std::to_string(l) + " is out of range");
    m.set(l);
  }
  return m;
}

bool is_lspl(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  char magic[4] = {};
  f.read(magic, 4);
  return f.gcount() == 4 && std::string(magic, 4) == "LSPL";
}

// Global options, then the subcommand's options in its own section, so the
// file can be passed back through --config. Unset lists are left out.
void write_config(const CLI::App& app, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const CLI::App* root = app.get_parent();
  auto emit = [&](const std::string& text) {
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
      if (line.find("=\"{}\"") == std::string::npos && line.substr(0, line.find('=')).find('.') == std::string::npos)
        f << line << "\n";
  };
  emit(root->config_to_str(true, false));
  f << "[" << app.get_name() << "]\n";
  emit(app.config_to_str(true, false));
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

std::string kib(std::size_t bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f KiB", static_cast<double>(bytes) / 1024.0);
  return buf;
}

// Eight cameras on a ring around the cloud, used when no dataset is given.
std::vector<Camera> ring_cameras(const GaussianCloud<float>& cloud, int count, int size) {
  Vec3d c = Vec3d::Zero();
  for (const auto& g : cloud.gaussians) c += g.position.cast<double>();
  if (!cloud.empty()) c /= static_cast<double>(cloud.size());
  double r = 0.1;
  for (const auto& g : cloud.gaussians) r = std::max(r, (g.position.cast<double>() - c).norm());
  std::vector<Camera> cams;
  for (int i = 0; i < count; ++i) {
    const double az = 2 * std::numbers::pi * i / count, el = 0.3;
    const Vec3d eye = c + 2.5 * r * Vec3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    cams.push_back(Camera::look_at(eye, c, Vec3d::UnitZ(), 0.5 * size / std::tan(0.4), size, size));
  }
  return cams;
}

struct GenArgs {
  std::string scene, out;
  GenerateOptions opt;
};

int run_gen(const CLI::App& app, const GenArgs& a) {
  const Scene scene = build_scene(parse_scene_id(a.scene));
  const auto ds = generate_dataset(scene, a.opt);
  write_dataset(a.out, ds);
  write_config(app, fs::path(a.out) / "config.ini");
  std::printf("scene %s: %d layers\n", a.scene.c_str(), ds.train.layer_count);
  for (int l = 0; l < ds.train.layer_count; ++l)
    std::printf("layer %d: %zu train, %zu test, %zu init points\n", l, ds.train.layer_view_count(l),
                ds.test.layer_view_count(l), ds.train.layer_points(l).size());
  return 0;
}

struct TrainArgs {
  std::string data, out, preset = "default", log, background = "random";
  std::vector<int> layers;
  std::vector<double> bg_color;
  int iterations = 0, sh_degree = -1;
  double densify_threshold = 0, lambda_alpha = -1;
  bool no_inactive_pruning = false;
  std::uint64_t seed = 0;
};

int run_train(const CLI::App& app, const TrainArgs& a) {
  TrainConfig cfg = TrainConfig::preset(a.preset);
  if (a.iterations > 0) cfg.iterations = a.iterations;
  if (a.sh_degree >= 0) cfg.sh_degree = a.sh_degree;
  if (a.densify_threshold > 0) cfg.densify_grad_threshold = a.densify_threshold;
  if (a.lambda_alpha >= 0) cfg.lambda_alpha = a.lambda_alpha;
  if (a.no_inactive_pruning) cfg.inactive_pruning = false;
  cfg.background_mode = a.background == "fixed" ? BackgroundMode::fixed : BackgroundMode::random;
  if (!a.bg_color.empty()) cfg.background = to_vec3(a.bg_color, "--bg");
  cfg.seed = a.seed;
  cfg.validate();

  const auto ds = read_dataset(a.data);
  int top = ds.train.layer_count - 1;
  if (!a.layers.empty()) {
    top = *std::max_element(a.layers.begin(), a.layers.end());
    if (top < 0 || top >= ds.train.layer_count) throw UsageError("--layers names a layer the dataset lacks");
  }
  const auto result = train_layered(ds.train, cfg, top + 1);
  write_gaussian_ply(a.out, result.cloud);
  write_train_log(a.log.empty() ? sibling(a.out, "_log.csv") : fs::path(a.log), result.log);
  write_config(app, sibling(a.out, "_config.ini"));

  std::printf("layer,initial,final,cloned,split,opacity_pruned,inactive_pruned,seconds\n");
  for (const auto& r : result.layers)
    std::printf("%d,%zu,%zu,%zu,%zu,%zu,%zu,%.1f\n", r.layer, r.initial_count, r.final_count, r.cloned, r.split,
                r.opacity_pruned, r.inactive_pruned, r.seconds);
  std::printf("wrote %s: %zu Gaussians, %d layers, %s\n", a.out.c_str(), result.cloud.size(),
              result.cloud.layer_count, kib(fs::file_size(a.out)).c_str());
  return 0;
}

struct CompressArgs {
  std::string in, out, profile = "clustered", data;
  int codebook = 0;
  std::uint64_t seed = 0;
};

int run_compress(const CLI::App& app, const CompressArgs& a) {
  const auto cloud = read_gaussian_ply(a.in);
  CompressOptions opt;
  opt.codebook_size = a.codebook;
  opt.seed = a.seed;
  opt.profile = QuantProfile::low;
  const auto low = compress(cloud, opt);
  opt.profile = QuantProfile::clustered;
  const auto clustered = compress(cloud, opt);
  const auto& chosen = parse_quant_profile(a.profile) == QuantProfile::low ? low : clustered;
  write_lspl(a.out, chosen);
  write_config(app, sibling(a.out, "_config.ini"));

  std::printf("layer,gaussians\n");
  for (int l = 0; l < cloud.layer_count; ++l) std::printf("%d,%zu\n", l, cloud.count_in_layer(l));
  std::printf("raw %s | low %s | clustered %s (%zu codebook entries, %zu shared across layers)\n",
              kib(fs::file_size(a.in)).c_str(), kib(encode_lspl(low).size()).c_str(),
              kib(encode_lspl(clustered).size()).c_str(), clustered.codebook_size(),
              shared_codebook_entries(clustered));

  std::vector<Camera> cams;
  if (!a.data.empty()) {
    for (const auto& v : read_dataset(a.data).test.views)
      if (cams.size() < 8) cams.push_back(v.camera);
  } else {
    cams = ring_cameras(cloud, 8, 128);
  }
  double total = 0;
  for (const auto& cam : cams) {
    ViewRequest req;
    req.camera = cam;
    total += MetricReport::capped(psnr(render_view(cloud, req).rgb, render_view(chosen, req).rgb));
  }
  std::printf("round-trip render PSNR (%s, %zu views): %.2f dB\n", to_string(chosen.profile), cams.size(),
              cams.empty() ? 0.0 : total / static_cast<double>(cams.size()));
  return 0;
}

struct RenderArgs {
  std::string in, out, timing;
  std::vector<int> layers, cut_layers;
  std::vector<double> eye, target, up{0, 0, 1}, cut, bg{0, 0, 0};
  double azimuth = 30, elevation = 20, distance = 0, fov = 40, offset = 0.064, convergence = 0;
  int width = 256, height = 0;
  bool stereo = false, shared_sort = false;
};

int run_render(const CLI::App& app, const RenderArgs& a) {
  const GaussianCloud<float> cloud = is_lspl(a.in) ? decompress(read_lspl(a.in)) : read_gaussian_ply(a.in);
  const int h = a.height > 0 ? a.height : a.width;
  Vec3d target = Vec3d::Zero();
  if (!a.target.empty()) {
    target = to_vec3(a.target, "--target");
  } else if (!cloud.empty()) {
    for (const auto& g : cloud.gaussians) target += g.position.cast<double>();
    target /= static_cast<double>(cloud.size());
  }
  Vec3d eye;
  if (!a.eye.empty()) {
    eye = to_vec3(a.eye, "--eye");
  } else {
    double dist = a.distance;
    if (dist <= 0) {
      double r = 0.1;
      for (const auto& g : cloud.gaussians) r = std::max(r, (g.position.cast<double>() - target).norm());
      dist = 2.5 * r;
    }
    const double az = a.azimuth * std::numbers::pi / 180, el = a.elevation * std::numbers::pi / 180;
    eye = target + dist * Vec3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  }
  const double focal = 0.5 * a.width / std::tan(0.5 * a.fov * std::numbers::pi / 180);

  ViewRequest req;
  req.camera = Camera::look_at(eye, target, to_vec3(a.up, "--up"), focal, a.width, h);
  req.layers = to_mask(a.layers, cloud.layer_count);
  req.background = to_vec3(a.bg, "--bg").cast<float>();
  if (!a.cut.empty()) {
    if (a.cut.size() != 4) throw UsageError("--cut needs nx,ny,nz,d");
    const Vec3d n(a.cut[0], a.cut[1], a.cut[2]);
    if (!(n.norm() > 0)) throw UsageError("--cut normal must be non-zero");
    req.cut = CutPlane{n.normalized(), a.cut[3] / n.norm(), to_mask(a.cut_layers, cloud.layer_count)};
  }

  std::vector<TimingRow> rows;
  const fs::path out(a.out);
  if (a.stereo) {
    StereoRequest sr{req, a.offset, a.convergence, a.shared_sort};
    const auto res = render_stereo(cloud, sr);
    io::write_png(sibling(out, "_left.png"), res.left.rgb);
    io::write_png(sibling(out, "_right.png"), res.right.rgb);
    rows = {{"left", res.left_timing}, {"right", res.right_timing}};
  } else {
    ViewTiming t;
    const auto img = render_view(cloud, req, &t);
    io::write_png(out, img.rgb);
    rows = {{"mono", t}};
  }
  if (!a.timing.empty()) write_timing_csv(a.timing, rows);
  write_config(app, sibling(out, "_config.ini"));
  for (const auto& r : rows)
    std::printf("%s: %zu splats, sort %.3f ms, raster %.3f ms\n", r.view.c_str(), r.timing.splats, r.timing.sort_ms,
                r.timing.raster_ms);
  return 0;
}

struct EvalArgs {
  std::string in, data, out;
  std::vector<int> layers;
};

int run_eval(const CLI::App& app, const EvalArgs& a) {
  const auto cloud = read_gaussian_ply(a.in);
  const auto ds = read_dataset(a.data);
  std::vector<int> layers = a.layers;
  if (layers.empty())
    for (int l = 0; l < std::min(cloud.layer_count, ds.test.layer_count); ++l) layers.push_back(l);
  MetricReport all;
  for (int l : layers) {
    if (l < 0 || l >= ds.test.layer_count || l >= cloud.layer_count) throw UsageError("--layers names a missing layer");
    const auto rep = evaluate_layer(cloud, ds.test, l);
    std::printf("layer %d: PSNR %.2f +- %.2f, SSIM %.4f (%zu views)\n", l, rep.mean_psnr(), rep.std_psnr(),
                rep.mean_ssim(), rep.rows.size());
    all.rows.insert(all.rows.end(), rep.rows.begin(), rep.rows.end());
  }
  all.write_csv(a.out);
  write_config(app, sibling(a.out, "_config.ini"));
  return 0;
}

struct ExportArgs {
  std::string in, out, profile = "clustered";
  int codebook = 0;
  std::uint64_t seed = 0;
};

int run_export(const CLI::App& app, const ExportArgs& a) {
  CompressOptions opt;
  opt.profile = parse_quant_profile(a.profile);
  opt.codebook_size = a.codebook;
  opt.seed = a.seed;
  const auto c = compress(read_gaussian_ply(a.in), opt);
  write_lspl(a.out, c);
  write_config(app, sibling(a.out, "_config.ini"));
  std::printf("wrote %s: %zu splats in %d layer sections, %s\n", a.out.c_str(), c.size(), c.layer_count,
              kib(fs::file_size(a.out)).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered Gaussian splatting pipeline"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Read options from an INI/TOML file; flags override it");
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "Worker threads (0 = all cores)")->envname("LGS_WORKERS")->check(CLI::NonNegativeNumber);

  const std::vector<std::string> scenes = {"two_layer", "three_layer", "transparency", "anatomy_analog"};
  const std::vector<std::string> profiles = {"low", "clustered"};

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Render a scene's layered dataset");
  g->add_option("--scene", gen.scene)->required()->check(CLI::IsMember(scenes));
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--views", gen.opt.views)->check(CLI::PositiveNumber);
  g->add_option("--size", gen.opt.size)->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.opt.seed);
  g->add_option("--holdout-every", gen.opt.holdout_every)->check(CLI::PositiveNumber);
  g->add_option("--ray-budget", gen.opt.ray_budget, "Initial-point rays per layer")->check(CLI::NonNegativeNumber);
  g->add_option("--supersample", gen.opt.supersample, "Sub-pixel rays per axis")->check(CLI::PositiveNumber);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train every layer in order into a layered PLY");
  t->add_option("--data", train.data, "Dataset directory")->required();
  t->add_option("--out", train.out, "Output PLY")->required();
  t->add_option("--preset", train.preset)->check(CLI::IsMember({"default", "hq"}));
  t->add_option("--layers", train.layers, "Train layers up to the highest one listed")->delimiter(',');
  t->add_option("--iterations", train.iterations, "Iterations per layer (0 = preset)")->check(CLI::NonNegativeNumber);
  t->add_option("--sh-degree", train.sh_degree, "-1 = preset")->check(CLI::Range(-1, 3));
  t->add_option("--densify-threshold", train.densify_threshold, "0 = preset")->check(CLI::NonNegativeNumber);
  t->add_option("--lambda-alpha", train.lambda_alpha, "-1 = preset")->check(CLI::Range(-1.0, 1.0));
  t->add_option("--background", train.background)->check(CLI::IsMember({"random", "fixed"}));
  t->add_option("--bg", train.bg_color, "Fixed background r,g,b")->delimiter(',');
  t->add_flag("--no-inactive-pruning", train.no_inactive_pruning);
  t->add_option("--seed", train.seed);
  t->add_option("--log", train.log, "Training log CSV (default: next to the PLY)");

  CompressArgs comp;
  auto* c = app.add_subcommand("compress", "Quantize a PLY and report sizes");
  c->add_option("--in", comp.in)->required()->check(CLI::ExistingFile);
  c->add_option("--out", comp.out)->required();
  c->add_option("--profile", comp.profile)->check(CLI::IsMember(profiles));
  c->add_option("--codebook", comp.codebook, "SH codebook size (0 = auto)")->check(CLI::Range(0, 65536));
  c->add_option("--data", comp.data, "Dataset whose held-out cameras are used for the PSNR check");
  c->add_option("--seed", comp.seed);

  RenderArgs ren;
  auto* r = app.add_subcommand("render", "Render a PLY or .lspl file");
  r->add_option("--in", ren.in)->required()->check(CLI::ExistingFile);
  r->add_option("--out", ren.out, "Output PNG")->required();
  r->add_option("--eye", ren.eye, "Camera position x,y,z (overrides the orbit)")->delimiter(',');
  r->add_option("--target", ren.target, "Look-at point (default: cloud centroid)")->delimiter(',');
  r->add_option("--up", ren.up)->delimiter(',');
  r->add_option("--azimuth", ren.azimuth, "Degrees");
  r->add_option("--elevation", ren.elevation, "Degrees");
  r->add_option("--distance", ren.distance, "0 = fit the cloud");
  r->add_option("--fov", ren.fov, "Horizontal field of view, degrees")->check(CLI::Range(1.0, 170.0));
  r->add_option("--width", ren.width)->check(CLI::PositiveNumber);
  r->add_option("--height", ren.height, "0 = width")->check(CLI::NonNegativeNumber);
  r->add_option("--layers", ren.layers, "Active layers (default: all)")->delimiter(',');
  r->add_option("--cut", ren.cut, "Cut plane nx,ny,nz,d; removes centers with n.p > d")->delimiter(',');
  r->add_option("--cut-layers", ren.cut_layers, "Layers the cut applies to (default: all)")->delimiter(',');
  r->add_option("--bg", ren.bg)->delimiter(',');
  r->add_flag("--stereo", ren.stereo);
  r->add_flag("--shared-sort", ren.shared_sort);
  r->add_option("--offset", ren.offset, "Eye separation")->check(CLI::NonNegativeNumber);
  r->add_option("--convergence", ren.convergence, "Eye convergence distance (0 = parallel)")->check(CLI::NonNegativeNumber);
  r->add_option("--timing", ren.timing, "Timing CSV");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Per-layer PSNR/SSIM on held-out views");
  e->add_option("--in", ev.in)->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data)->required();
  e->add_option("--layers", ev.layers)->delimiter(',');
  e->add_option("--out", ev.out, "Metric CSV")->required();

  ExportArgs ex;
  auto* x = app.add_subcommand("export-viewer", "Write a .lspl viewer asset");
  x->add_option("--in", ex.in)->required()->check(CLI::ExistingFile);
  x->add_option("--out", ex.out)->required();
  x->add_option("--profile", ex.profile)->check(CLI::IsMember(profiles));
  x->add_option("--codebook", ex.codebook)->check(CLI::Range(0, 65536));
  x->add_option("--seed", ex.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    set_worker_count(workers);
    if (g->parsed()) return run_gen(*g, gen);
    if (t->parsed()) return run_train(*t, train);
    if (c->parsed()) return run_compress(*c, comp);
    if (r->parsed()) return run_render(*r, ren);
    if (e->parsed()) return run_eval(*e, ev);
    if (x->parsed()) return run_export(*x, ex);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
