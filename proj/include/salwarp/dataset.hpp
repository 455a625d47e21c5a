#pragma once

// Annotation ingestion (minimal COCO-style JSON), "from-seg" boxes via
// connected components of a semantic mask, and before/after scale statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "salwarp/error.hpp"
#include "salwarp/geometry.hpp"
#include "salwarp/resample.hpp"
#include "salwarp/saliency.hpp"

namespace salwarp {

struct ImageInfo {
  long id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;
};

struct LoadReport {
  std::size_t dropped_boxes = 0;  // degenerate after clipping
  std::size_t clipped_boxes = 0;
};

/// Images, their boxes and category names. Boxes are clipped to the image
/// rectangle on insertion; anything under 1 px on a side afterwards is
/// dropped and counted in report().
class AnnotationSet {
 public:
  void add_image(ImageInfo info) {
    if (info.width < 1 || info.height < 1) {
      throw InputError("image " + std::to_string(info.id) + " has non-positive dims");
    }
    if (index_.count(info.id)) {
      throw InputError("duplicate image id " + std::to_string(info.id));
    }
    index_[info.id] = images_.size();
    images_.push_back(std::move(info));
    boxes_.emplace_back();
  }

  void add_category(int id, std::string name) { categories_[id] = std::move(name); }

  /// Returns false if the box was dropped.
  bool add_box(long image_id, BBox box) {
    const auto it = index_.find(image_id);
    if (it == index_.end()) {
      throw InputError("annotation references unknown image id " + std::to_string(image_id));
    }
    const ImageInfo& img = images_[it->second];
    const double x0 = std::max(box.x0(), -0.5);
    const double y0 = std::max(box.y0(), -0.5);
    const double x1 = std::min(box.x1(), img.width - 0.5);
    const double y1 = std::min(box.y1(), img.height - 0.5);
    if (!(x1 - x0 >= 1.0) || !(y1 - y0 >= 1.0)) {
      ++report_.dropped_boxes;
      return false;
    }
    if (x0 != box.x0() || y0 != box.y0() || x1 != box.x1() || y1 != box.y1()) {
      ++report_.clipped_boxes;
      box = BBox::from_corners(x0, y0, x1, y1, box.class_id);
    }
    boxes_[it->second].push_back(box);
    return true;
  }

  const std::vector<ImageInfo>& images() const { return images_; }
  const std::map<int, std::string>& categories() const { return categories_; }
  const LoadReport& report() const { return report_; }

  const ImageInfo& image(long id) const { return images_[slot(id)]; }
  bool has_image(long id) const { return index_.count(id) != 0; }
  const std::vector<BBox>& boxes(long image_id) const { return boxes_[slot(image_id)]; }

  std::vector<BBox> all_boxes() const {
    std::vector<BBox> out;
    for (const auto& b : boxes_) out.insert(out.end(), b.begin(), b.end());
    return out;
  }
  std::size_t box_count() const {
    std::size_t n = 0;
    for (const auto& b : boxes_) n += b.size();
    return n;
  }

  std::string category_name(int id) const {
    const auto it = categories_.find(id);
    return it == categories_.end() ? std::to_string(id) : it->second;
  }

 private:
  std::size_t slot(long id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown image id " + std::to_string(id));
    return it->second;
  }

  std::vector<ImageInfo> images_;
  std::vector<std::vector<BBox>> boxes_;
  std::map<long, std::size_t> index_;
  std::map<int, std::string> categories_;
  LoadReport report_;
};

// ---------------------------------------------------------------------------
// COCO-style JSON: {images:[{id,width,height,file_name}],
//                   annotations:[{image_id,bbox:[x,y,w,h],category_id}],
//                   categories:[{id,name}]}
// bbox uses COCO's frame where pixel i covers [i, i+1).
// ---------------------------------------------------------------------------

inline AnnotationSet annotations_from_json(const nlohmann::json& j) {
  AnnotationSet set;
  try {
    if (!j.is_object()) throw InputError("annotation JSON must be an object");
    if (j.contains("categories")) {
      for (const auto& c : j.at("categories")) {
        set.add_category(c.at("id").get<int>(), c.value("name", std::string{}));
      }
    }
    for (const auto& im : j.at("images")) {
      set.add_image(ImageInfo{im.at("id").get<long>(), im.at("width").get<int>(),
                              im.at("height").get<int>(),
                              im.value("file_name", std::string{})});
    }
    if (j.contains("annotations")) {
      for (const auto& a : j.at("annotations")) {
        const auto& bb = a.at("bbox");
        if (!bb.is_array() || bb.size() != 4) {
          throw InputError("annotation bbox must be [x, y, w, h]");
        }
        const double x = bb[0].get<double>(), y = bb[1].get<double>();
        const double w = bb[2].get<double>(), h = bb[3].get<double>();
        const BBox box = BBox::from_corners(x - 0.5, y - 0.5, x + w - 0.5, y + h - 0.5,
                                            a.value("category_id", 0));
        set.add_box(a.at("image_id").get<long>(), box);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed annotation JSON: ") + e.what());
  }
  return set;
}

inline nlohmann::json annotations_to_json(const AnnotationSet& set) {
  nlohmann::json j;
  j["images"] = nlohmann::json::array();
  j["annotations"] = nlohmann::json::array();
  j["categories"] = nlohmann::json::array();
  long ann_id = 1;
  for (const auto& im : set.images()) {
    j["images"].push_back({{"id", im.id}, {"width", im.width}, {"height", im.height},
                           {"file_name", im.file_name}});
    for (const auto& b : set.boxes(im.id)) {
      j["annotations"].push_back({{"id", ann_id++},
                                  {"image_id", im.id},
                                  {"category_id", b.class_id},
                                  {"bbox", {b.x0() + 0.5, b.y0() + 0.5, b.w, b.h}}});
    }
  }
  for (const auto& [id, name] : set.categories()) {
    j["categories"].push_back({{"id", id}, {"name", name}});
  }
  return j;
}

inline AnnotationSet load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open annotations '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse annotations '" + path + "': " + e.what());
  }
  return annotations_from_json(j);
}

// ---------------------------------------------------------------------------
// From-seg boxes
// ---------------------------------------------------------------------------

struct Component {
  int class_id = 0;
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  std::size_t pixels = 0;

  /// Minimum enclosing rectangle in the pixel-center frame.
  BBox box() const {
    return BBox::from_corners(x_min - 0.5, y_min - 0.5, x_max + 0.5, y_max + 0.5, class_id);
  }
};

struct ComponentLabels {
  Raster<int> labels;  // -1 for background, else index into components
  std::vector<Component> components;
};

/// 4-connected components of same-class foreground pixels, numbered in
/// raster-scan order of their first pixel.
template <typename T>
ComponentLabels label_components(const Raster<T>& mask, const std::set<int>& foreground) {
  if (mask.channels() != 1) throw ShapeError("segmentation mask must be single-channel");
  const int H = mask.height(), W = mask.width();
  ComponentLabels out{Raster<int>(H, W, 1, -1), {}};
  auto class_at = [&](int y, int x) {
    return static_cast<int>(std::lround(static_cast<double>(mask(y, x))));
  };
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (out.labels(y, x) >= 0) continue;
      const int cls = class_at(y, x);
      if (!foreground.count(cls)) continue;
      const int id = static_cast<int>(out.components.size());
      Component comp{cls, x, y, x, y, 0};
      out.labels(y, x) = id;
      stack.assign(1, {y, x});
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        ++comp.pixels;
        comp.x_min = std::min(comp.x_min, cx);
        comp.x_max = std::max(comp.x_max, cx);
        comp.y_min = std::min(comp.y_min, cy);
        comp.y_max = std::max(comp.y_max, cy);
        constexpr int dy[4] = {-1, 1, 0, 0};
        constexpr int dx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int ny = cy + dy[k], nx = cx + dx[k];
          if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
          if (out.labels(ny, nx) >= 0 || class_at(ny, nx) != cls) continue;
          out.labels(ny, nx) = id;
          stack.push_back({ny, nx});
        }
      }
      out.components.push_back(comp);
    }
  }
  return out;
}

template <typename T>
std::vector<BBox> boxes_from_segmentation(const Raster<T>& mask, const std::set<int>& foreground) {
  const auto labeled = label_components(mask, foreground);
  std::vector<BBox> boxes;
  boxes.reserve(labeled.components.size());
  for (const auto& c : labeled.components) boxes.push_back(c.box());
  return boxes;
}

// ---------------------------------------------------------------------------
// Scale-shift statistics
// ---------------------------------------------------------------------------

struct ClassRatio {
  int class_id = 0;
  std::string name;
  std::size_t count = 0;
  double mean_area_ratio = 0.0;  // warped area / original area
};

struct ShiftReport {
  SizeThresholds thresholds;
  ScaleDistribution before;
  ScaleDistribution after;
  std::optional<double> f;  // expansion factor of `before`; unset when degenerate
  std::vector<ClassRatio> per_class_ratios;
  /// Mean area ratio grouped by the box's original size class.
  std::array<std::optional<double>, 3> per_size_class_ratios;
  std::size_t dropped_boxes = 0;
  std::size_t skipped_boxes = 0;
};

/// Before = Ψ over the raw boxes, after = Ψ over their warped counterparts.
inline ShiftReport shift_report(const AnnotationSet& ann,
                                const std::map<long, WarpGrid>& grids,
                                const SizeThresholds& thresholds) {
  thresholds.validate();
  std::vector<long> missing;
  for (const auto& im : ann.images())
    if (!grids.count(im.id)) missing.push_back(im.id);
  if (!missing.empty()) {
    std::string ids;
    for (long id : missing) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
    throw InputError("shift_report: missing warp grid for image id(s): " + ids);
  }

  ShiftReport rep;
  rep.thresholds = thresholds;
  rep.dropped_boxes = ann.report().dropped_boxes;

  std::vector<BBox> before_boxes, after_boxes;
  std::map<int, std::pair<double, std::size_t>> by_class;
  std::array<std::pair<double, std::size_t>, 3> by_size{};
  for (const auto& im : ann.images()) {
    const auto& boxes = ann.boxes(im.id);
    const WarpGrid& g = grids.at(im.id);
    if (g.image_w() != im.width || g.image_h() != im.height) {
      throw ShapeError("shift_report: grid for image " + std::to_string(im.id) + " is " +
                       g.shape_string() + " but image is " + std::to_string(im.height) +
                       "x" + std::to_string(im.width));
    }
    before_boxes.insert(before_boxes.end(), boxes.begin(), boxes.end());
    const WarpedBoxes warped = warp_boxes(boxes, g);
    rep.skipped_boxes += warped.skipped;
    for (std::size_t k = 0; k < warped.boxes.size(); ++k) {
      const BBox& orig = boxes[warped.source_index[k]];
      const double ratio = warped.boxes[k].area() / orig.area();
      auto& c = by_class[orig.class_id];
      c.first += ratio;
      ++c.second;
      auto& s = by_size[static_cast<int>(classify_size(orig, thresholds))];
      s.first += ratio;
      ++s.second;
      after_boxes.push_back(warped.boxes[k]);
    }
  }
  rep.before = scale_distribution(before_boxes, thresholds);
  rep.after = scale_distribution(after_boxes, thresholds);
  try {
    rep.f = expansion_factor(rep.before);
  } catch (const DegenerateDistributionError&) {
    rep.f.reset();
  }
  for (const auto& [cls, acc] : by_class) {
    rep.per_class_ratios.push_back(
        {cls, ann.category_name(cls), acc.second, acc.first / static_cast<double>(acc.second)});
  }
  for (int k = 0; k < 3; ++k) {
    if (by_size[k].second) {
      rep.per_size_class_ratios[k] = by_size[k].first / static_cast<double>(by_size[k].second);
    }
  }
  return rep;
}

inline nlohmann::json to_json(const ScaleDistribution& d) {
  nlohmann::json j;
  j["empty"] = d.empty();
  j["counts"] = {{"small", d.count(SizeClass::Small)},
                 {"medium", d.count(SizeClass::Medium)},
                 {"large", d.count(SizeClass::Large)}};
  if (d.empty()) {
    j["psi"] = nullptr;
  } else {
    j["psi"] = {{"small", d.small()}, {"medium", d.medium()}, {"large", d.large()}};
  }
  return j;
}

inline nlohmann::json to_json(const ShiftReport& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["thresholds"] = {{"t1", r.thresholds.t1}, {"t2", r.thresholds.t2}};
  j["before"] = to_json(r.before);
  j["after"] = to_json(r.after);
  j["f"] = r.f ? nlohmann::json(*r.f) : nlohmann::json(nullptr);
  j["per_class_ratios"] = nlohmann::json::array();
  for (const auto& c : r.per_class_ratios) {
    j["per_class_ratios"].push_back({{"class_id", c.class_id},
                                     {"name", c.name},
                                     {"count", c.count},
                                     {"mean_area_ratio", c.mean_area_ratio}});
  }
  nlohmann::json sizes;
  for (int k = 0; k < 3; ++k) {
    const auto& v = r.per_size_class_ratios[k];
    sizes[to_string(static_cast<SizeClass>(k))] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  j["per_size_class_ratios"] = sizes;
  j["dropped_boxes"] = r.dropped_boxes;
  j["skipped_boxes"] = r.skipped_boxes;
  return j;
}

}  // namespace salwarp
