#pragma once

// Command-line front end. Kept in a header so the test suites can drive the
// same entry point in-process.
//
//   salwarp saliency  --prior instance|static|geometric ... --out S.sgr
//   salwarp warp      --image I.png (--saliency S.sgr | --annotations A.json) --out W.png
//   salwarp warp      --annotations A.json --all --out-dir D [--jobs N]
//   salwarp unwarp    --input F.sgr --grid G.csv --out U.sgr
//   salwarp stats     --annotations A.json [--grids D] --out R.json [--hist-out H.csv]
//   salwarp synth     --kind scene|corpus --out-dir D
//
// Exit codes: 0 success, 1 usage error, 2 input/format error, 3 internal
// invariant violation.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "salwarp/config.hpp"
#include "salwarp/dataset.hpp"
#include "salwarp/error.hpp"
#include "salwarp/grid.hpp"
#include "salwarp/io.hpp"
#include "salwarp/png_io.hpp"
#include "salwarp/resample.hpp"
#include "salwarp/saliency.hpp"
#include "salwarp/synthetic.hpp"

namespace salwarp::cli {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;

  Config load() const {
    Config c = config_path.empty() ? Config{} : Config::load(config_path);
    for (const auto& kv : overrides) c.apply_override(kv);
    c.validate();
    return c;
  }
};

struct SaliencyRequest {
  std::string prior;  // empty: take from config
  std::string annotations;
  std::optional<long> image_id;
  std::string mask;
  std::vector<int> foreground;
  std::vector<double> vp;
  std::optional<double> spread;
  std::optional<int> width;
  std::optional<int> height;
};

struct SaliencyResult {
  SaliencyMap map;
  Prior prior = Prior::Instance;
  double f = 1.0;
  double s = 0.0;
};

inline RasterF read_any_raster(const std::string& path) {
  return io::has_png_extension(path) ? io::read_png(path) : io::read_raster(path);
}

inline void write_any_raster(const std::string& path, const RasterF& r) {
  if (io::has_png_extension(path)) io::write_png(path, r);
  else io::write_raster(path, r);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Image to use from a set: the requested id, or the only image.
inline const ImageInfo& pick_image(const AnnotationSet& set, std::optional<long> id) {
  if (id) {
    if (!set.has_image(*id)) throw InputError("image id " + std::to_string(*id) + " not in annotations");
    return set.image(*id);
  }
  if (set.images().size() != 1) {
    throw ConfigError("annotations hold " + std::to_string(set.images().size()) +
                      " images; pass --image-id");
  }
  return set.images().front();
}

/// Boxes from another image mapped into a (height x width) frame.
inline BBox rescale_box(const BBox& b, int from_h, int from_w, int to_h, int to_w) {
  const double sx = static_cast<double>(to_w) / from_w;
  const double sy = static_cast<double>(to_h) / from_h;
  return BBox{(b.cx + 0.5) * sx - 0.5, (b.cy + 0.5) * sy - 0.5, b.w * sx, b.h * sy, b.class_id};
}

inline SaliencyResult compute_saliency(const Config& cfg, const SaliencyRequest& req) {
  SaliencyResult res;
  res.prior = req.prior.empty() ? cfg.prior : parse_prior(req.prior);
  const SaliencyParams& p = cfg.saliency;

  std::optional<AnnotationSet> ann;
  if (!req.annotations.empty()) ann = load_annotations(req.annotations);

  // Boxes of the target image plus the dataset-level distribution driving f.
  std::vector<BBox> boxes;
  std::vector<BBox> dataset_boxes;
  int H = req.height.value_or(0);
  int W = req.width.value_or(0);
  if (!req.mask.empty()) {
    const RasterF mask = read_any_raster(req.mask);
    if (mask.channels() != 1) throw ShapeError("mask must be single-channel, got " + mask.shape_string());
    const std::set<int> fg(req.foreground.begin(), req.foreground.end());
    if (fg.empty()) throw ConfigError("--mask needs --foreground class ids");
    boxes = boxes_from_segmentation(mask, fg);
    dataset_boxes = boxes;
    H = mask.height();
    W = mask.width();
  } else if (ann) {
    const bool need_image = res.prior != Prior::Geometric || req.image_id || (!req.width && !req.height);
    if (need_image) {
      const ImageInfo& im = pick_image(*ann, req.image_id);
      H = im.height;
      W = im.width;
      boxes = ann->boxes(im.id);
    }
    for (const auto& other : ann->images()) {
      for (const auto& b : ann->boxes(other.id)) {
        dataset_boxes.push_back(H > 0 && W > 0 ? rescale_box(b, other.height, other.width, H, W) : b);
      }
    }
  } else if (res.prior != Prior::Geometric) {
    throw InputError(std::string(to_string(res.prior)) + " prior needs --annotations or --mask");
  }
  if (H < 1 || W < 1) throw ConfigError("image dims unknown: pass --width/--height or --image-id");

  if (!dataset_boxes.empty() || ann) {
    res.f = expansion_factor_or_identity(scale_distribution(dataset_boxes, cfg.thresholds));
  }
  res.s = saliency_scale(p.P, res.f);

  switch (res.prior) {
    case Prior::Instance:
      res.map = instance_saliency(boxes, res.s, p, H, W);
      break;
    case Prior::Static:
      res.map = static_prior_saliency(dataset_boxes, res.s, p, H, W);
      break;
    case Prior::Geometric: {
      std::optional<std::array<double, 2>> vp = cfg.vp;
      if (!req.vp.empty()) {
        if (req.vp.size() != 2) throw ConfigError("--vp takes x,y");
        vp = std::array<double, 2>{req.vp[0], req.vp[1]};
      }
      if (!vp) throw ConfigError("geometric prior requires --vp x,y (or \"vp\" in config)");
      res.map = geometric_prior_saliency((*vp)[0], (*vp)[1], req.spread.value_or(cfg.spread), p, H, W);
      break;
    }
  }
  return res;
}

inline nlohmann::json saliency_sidecar(const Config& cfg, const SaliencyResult& r) {
  return {{"schema", 1},
          {"prior", to_string(r.prior)},
          {"P", cfg.saliency.P},
          {"U", cfg.saliency.U},
          {"f", r.f},
          {"s", r.s},
          {"image_h", r.map.image_h()},
          {"image_w", r.map.image_w()}};
}

// ---------------------------------------------------------------------------

struct WarpOptions {
  std::string image;
  std::string saliency;
  std::string out;
  std::string grid_out;
  std::string grid_raster;
  std::string interp = "bilinear";
  bool test_time = false;
  bool force = false;
  bool all = false;
  std::string out_dir;
  std::string images_dir;
  int jobs = 1;
};

inline WarpGrid grid_for_image(const Config& cfg, const SaliencyRequest& req,
                               const std::string& saliency_path, int H, int W) {
  if (!saliency_path.empty()) {
    const SaliencyMap s = SaliencyMap::from_raster(io::read_raster(saliency_path), H, W);
    return build_grid(s, cfg.grid);
  }
  SaliencyRequest r = req;
  if (!r.width) r.width = W;
  if (!r.height) r.height = H;
  if (req.annotations.empty() && req.mask.empty() && cfg.prior != Prior::Geometric && req.prior != "geometric") {
    throw InputError("warp needs --saliency, --annotations or --mask");
  }
  const SaliencyResult sal = compute_saliency(cfg, r);
  if (sal.map.image_h() != H || sal.map.image_w() != W) {
    throw ShapeError("image is " + std::to_string(H) + "x" + std::to_string(W) +
                     " but annotations describe " + std::to_string(sal.map.image_h()) + "x" +
                     std::to_string(sal.map.image_w()));
  }
  return build_grid(sal.map, cfg.grid);
}

inline void run_batch(const Config& cfg, const SaliencyRequest& req, const WarpOptions& opt,
                      std::ostream& log) {
  if (req.annotations.empty()) throw ConfigError("--all needs --annotations");
  if (opt.out_dir.empty()) throw ConfigError("--all needs --out-dir");
  const AnnotationSet ann = load_annotations(req.annotations);
  fs::create_directories(opt.out_dir);
  const Interp interp = parse_interp(opt.interp);
  const double f = expansion_factor_or_identity(scale_distribution(ann.all_boxes(), cfg.thresholds));
  const double s = saliency_scale(cfg.saliency.P, f);

  const auto& images = ann.images();
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::size_t warped_images = 0;
  std::mutex count_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++) {
      try {
        const ImageInfo& im = images[i];
        const SaliencyMap sal = instance_saliency(ann.boxes(im.id), s, cfg.saliency, im.height, im.width);
        const WarpGrid g = build_grid(sal, cfg.grid);
        const std::string stem = (fs::path(opt.out_dir) / std::to_string(im.id)).string();
        io::write_grid_csv(stem + ".csv", g);
        if (!opt.images_dir.empty() && !im.file_name.empty()) {
          const fs::path src = fs::path(opt.images_dir) / im.file_name;
          if (fs::exists(src)) {
            const RasterF img = read_any_raster(src.string());
            const std::string ext = io::has_png_extension(src.string()) ? ".png" : ".sgr";
            write_any_raster(stem + "_warped" + ext, warp_raster(img, g, interp));
            std::lock_guard lock(count_mutex);
            ++warped_images;
          }
        }
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(images.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  log << "wrote " << images.size() << " grids (" << warped_images << " warped images) to "
      << opt.out_dir << "\n";
}

inline void run_warp(const Config& cfg, const SaliencyRequest& req, const WarpOptions& opt,
                     std::ostream& log) {
  if (opt.test_time && !opt.force) {
    throw ConfigError("test-time warping is disabled; pass --force to warp target/test images");
  }
  if (opt.all) return run_batch(cfg, req, opt, log);
  if (opt.image.empty()) throw ConfigError("warp needs --image (or --all)");
  if (opt.out.empty()) throw ConfigError("warp needs --out");
  const RasterF img = read_any_raster(opt.image);
  const WarpGrid g = grid_for_image(cfg, req, opt.saliency, img.height(), img.width());
  write_any_raster(opt.out, warp_raster(img, g, parse_interp(opt.interp)));
  if (!opt.grid_out.empty()) io::write_grid_csv(opt.grid_out, g);
  if (!opt.grid_raster.empty()) io::write_raster(opt.grid_raster, io::grid_to_raster(g));
}

struct UnwarpOptions {
  std::string input;
  std::string grid;
  std::string out;
  std::string interp = "bilinear";
};

inline void run_unwarp(const UnwarpOptions& opt) {
  const RasterF in = read_any_raster(opt.input);
  const WarpGrid g = io::read_grid_csv(opt.grid);
  if (!stride_compatible(g.image_h(), g.image_w(), in.height(), in.width())) {
    throw ShapeError("raster is " + std::to_string(in.height()) + "x" + std::to_string(in.width()) +
                     " but grid describes a " + std::to_string(g.image_h()) + "x" +
                     std::to_string(g.image_w()) + " image");
  }
  write_any_raster(opt.out, unwarp_raster(in, invert_grid(g), parse_interp(opt.interp)));
}

struct StatsOptions {
  std::string annotations;
  std::string grids;
  std::string out;
  std::string hist_out;
};

inline std::string size_histogram_csv(const AnnotationSet& ann, const SizeThresholds& t) {
  std::map<int, std::array<std::size_t, 3>> hist;
  for (const auto& b : ann.all_boxes()) ++hist[b.class_id][static_cast<int>(classify_size(b, t))];
  std::string out = "class_id,name,small,medium,large\n";
  for (const auto& [cls, h] : hist) {
    out += std::to_string(cls) + "," + ann.category_name(cls) + "," + std::to_string(h[0]) + "," +
           std::to_string(h[1]) + "," + std::to_string(h[2]) + "\n";
  }
  return out;
}

inline void run_stats(const Config& cfg, const StatsOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.annotations.empty()) throw ConfigError("stats needs --annotations");
  const AnnotationSet ann = load_annotations(opt.annotations);
  nlohmann::json report;
  if (opt.grids.empty()) {
    const ScaleDistribution d = scale_distribution(ann.all_boxes(), cfg.thresholds);
    report["schema"] = 1;
    report["thresholds"] = {{"t1", cfg.thresholds.t1}, {"t2", cfg.thresholds.t2}};
    report["before"] = to_json(d);
    try {
      report["f"] = expansion_factor(d);
    } catch (const DegenerateDistributionError& e) {
      err << "warning: " << e.what() << "; f omitted\n";
    }
    report["dropped_boxes"] = ann.report().dropped_boxes;
  } else {
    std::map<long, WarpGrid> grids;
    for (const auto& im : ann.images()) {
      const fs::path p = fs::path(opt.grids) / (std::to_string(im.id) + ".csv");
      if (fs::exists(p)) grids.emplace(im.id, io::read_grid_csv(p.string()));
    }
    const ShiftReport rep = shift_report(ann, grids, cfg.thresholds);
    report = to_json(rep);
    if (!rep.f) {
      report.erase("f");
      err << "warning: scale distribution is empty or degenerate; f omitted\n";
    }
  }
  if (ann.box_count() == 0) err << "warning: annotations contain no boxes\n";
  const std::string text = dump_json(report);
  if (opt.out.empty()) out << text;
  else write_text(opt.out, text);
  if (!opt.hist_out.empty()) write_text(opt.hist_out, size_histogram_csv(ann, cfg.thresholds));
}

struct SynthOptions {
  std::string kind = "scene";
  std::string out_dir;
  int scenes = 100;
  std::uint64_t seed = synthetic::CorpusSpec{}.seed;
};

inline void run_synth(const SynthOptions& opt) {
  if (opt.out_dir.empty()) throw ConfigError("synth needs --out-dir");
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  if (opt.kind == "scene") {
    const AnnotationSet set = synthetic::three_box_scene();
    write_text((dir / "annotations.json").string(), dump_json(annotations_to_json(set)));
    io::write_png((dir / "gradient.png").string(), synthetic::gradient_image(256, 256));
    const auto mask = synthetic::box_mask(set.boxes(1), 256, 256);
    RasterF mask_img(mask.height(), mask.width(), 1);
    for (std::size_t i = 0; i < mask.size(); ++i) mask_img.data()[i] = static_cast<float>(mask.data()[i]);
    io::write_png((dir / "mask.png").string(), mask_img);
  } else if (opt.kind == "corpus") {
    synthetic::CorpusSpec spec;
    spec.scenes = opt.scenes;
    spec.seed = opt.seed;
    write_text((dir / "annotations.json").string(),
               dump_json(annotations_to_json(synthetic::make_corpus(spec))));
  } else {
    throw ConfigError("unknown synth kind '" + opt.kind + "' (expected scene|corpus)");
  }
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App* cmd, CommonOptions& c) {
  cmd->add_option("--config", c.config_path, "JSON config file");
  cmd->add_option("--set", c.overrides, "Override a config key (key=value), repeatable");
}

inline void add_saliency_source(CLI::App* cmd, SaliencyRequest& r) {
  cmd->add_option("--prior", r.prior, "instance | static | geometric (default: config)");
  cmd->add_option("--annotations", r.annotations, "COCO-style annotation JSON");
  cmd->add_option("--image-id", r.image_id, "Image id within the annotations");
  cmd->add_option("--mask", r.mask, "Segmentation mask (PNG or .sgr) for from-seg boxes");
  cmd->add_option("--foreground", r.foreground, "Foreground class ids for --mask")->delimiter(',');
  cmd->add_option("--vp", r.vp, "Vanishing point x,y (geometric prior)")->delimiter(',')->expected(2);
  cmd->add_option("--spread", r.spread, "Geometric prior spread in pixels");
  cmd->add_option("--width", r.width, "Image width when no annotations are given");
  cmd->add_option("--height", r.height, "Image height when no annotations are given");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Saliency-guided in-place image warping"};
  app.require_subcommand(1);

  CommonOptions common;
  SaliencyRequest sal_req;
  std::string sal_out;
  auto* sal = app.add_subcommand("saliency", "Generate a saliency map and JSON sidecar");
  add_common(sal, common);
  add_saliency_source(sal, sal_req);
  sal->add_option("--out", sal_out, "Output float raster (.sgr); sidecar at <out>.json")->required();

  WarpOptions warp_opt;
  auto* warp = app.add_subcommand("warp", "Warp an image with a saliency-derived grid");
  add_common(warp, common);
  add_saliency_source(warp, sal_req);
  warp->add_option("--image", warp_opt.image, "Input image (PNG or .sgr)");
  warp->add_option("--saliency", warp_opt.saliency, "Precomputed saliency raster (.sgr)");
  warp->add_option("--out", warp_opt.out, "Warped output (PNG or .sgr)");
  warp->add_option("--grid-out", warp_opt.grid_out, "Write the warp grid as CSV");
  warp->add_option("--grid-raster", warp_opt.grid_raster, "Write per-pixel source coordinates (.sgr)");
  warp->add_option("--interp", warp_opt.interp, "bilinear | nearest (use nearest for label maps)");
  warp->add_flag("--test-time", warp_opt.test_time, "Input is a target/test image");
  warp->add_flag("--force", warp_opt.force, "Allow test-time warping");
  warp->add_flag("--all", warp_opt.all, "Batch: one grid per annotated image");
  warp->add_option("--out-dir", warp_opt.out_dir, "Batch output directory");
  warp->add_option("--images-dir", warp_opt.images_dir, "Batch: directory holding the images");
  warp->add_option("--jobs", warp_opt.jobs, "Batch worker count")->check(CLI::PositiveNumber);

  UnwarpOptions unwarp_opt;
  auto* unwarp = app.add_subcommand("unwarp", "Unwarp a raster with the inverse of a grid");
  add_common(unwarp, common);
  unwarp->add_option("--input", unwarp_opt.input, "Warped raster (PNG or .sgr)")->required();
  unwarp->add_option("--grid", unwarp_opt.grid, "Grid CSV written by warp")->required();
  unwarp->add_option("--out", unwarp_opt.out, "Output raster")->required();
  unwarp->add_option("--interp", unwarp_opt.interp, "bilinear | nearest");

  StatsOptions stats_opt;
  auto* stats = app.add_subcommand("stats", "Scale distribution, f and before/after shift report");
  add_common(stats, common);
  stats->add_option("--annotations", stats_opt.annotations, "COCO-style annotation JSON")->required();
  stats->add_option("--grids", stats_opt.grids, "Directory of <image_id>.csv grids");
  stats->add_option("--out", stats_opt.out, "Report JSON (default: stdout)");
  stats->add_option("--hist-out", stats_opt.hist_out, "Per-class size histogram CSV");

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "Write the bundled synthetic scene or corpus");
  synth->add_option("--kind", synth_opt.kind, "scene | corpus");
  synth->add_option("--out-dir", synth_opt.out_dir, "Output directory")->required();
  synth->add_option("--scenes", synth_opt.scenes, "Corpus size");
  synth->add_option("--seed", synth_opt.seed, "Corpus seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*synth) {
      run_synth(synth_opt);
      return 0;
    }
    const Config cfg = common.load();
    if (*sal) {
      const SaliencyResult r = compute_saliency(cfg, sal_req);
      io::write_raster(sal_out, r.map.to_raster());
      write_text(sal_out + ".json", dump_json(saliency_sidecar(cfg, r)));
    } else if (*warp) {
      run_warp(cfg, sal_req, warp_opt, err);
    } else if (*unwarp) {
      run_unwarp(unwarp_opt);
    } else if (*stats) {
      run_stats(cfg, stats_opt, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv;
  argv.push_back("salwarp");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace salwarp::cli
