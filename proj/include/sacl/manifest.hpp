#pragma once

// Dataset manifest: UTF-8 line-delimited JSON, one slice per line.
// Known line fields:
//   slice_id (string), patient_id (string), image_path (string),
//   width_px (int), height_px (int), spacing_mm (float),
//   boxes (array of {x_px,y_px,w_px,h_px} ints),
//   optional quality {laplacian_var, contrast, lung_coverage},
//   optional complexity (float),
//   optional factors {f_cnt,f_size,f_shape,f_qual} (written by `score`).
// Unknown fields are rejected in strict mode.

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sacl/errors.hpp"
#include "sacl/imagemetrics.hpp"

namespace sacl {

struct NoduleBox {
  int x_px = 0;
  int y_px = 0;
  int w_px = 0;
  int h_px = 0;

  // Diameter proxy: longest box side in millimetres.
  double diameter_mm(double spacing_mm) const {
    return static_cast<double>(std::max(w_px, h_px)) * spacing_mm;
  }
  long long area_px() const { return static_cast<long long>(w_px) * h_px; }
  double aspect_ratio() const {
    const double w = static_cast<double>(w_px);
    const double h = static_cast<double>(h_px);
    return std::max(w / h, h / w);
  }
};

struct ComplexityFactors {
  double f_cnt = 0.0;
  double f_size = 0.0;
  double f_shape = 0.0;
  double f_qual = 0.0;
};

struct SliceRecord {
  std::string slice_id;
  std::string patient_id;
  std::string image_path;
  int width_px = 0;
  int height_px = 0;
  double spacing_mm = 0.0;
  std::vector<NoduleBox> boxes;
  std::optional<QualityFeatures> quality;
  std::optional<double> complexity;
  std::optional<ComplexityFactors> factors;

  bool has_nodules() const { return !boxes.empty(); }
};

struct DatasetManifest {
  std::vector<SliceRecord> slices;
  std::string source_tag;  // provenance only, not persisted in the JSONL
};

namespace manifest_detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      throw ValidationError(where + ": unknown field \"" + it.key() + "\"");
    }
  }
}

inline void validate_record(const SliceRecord& s, const std::string& where) {
  if (s.slice_id.empty()) throw ValidationError(where + ": empty slice_id");
  if (s.patient_id.empty()) throw ValidationError(where + ": slice " + s.slice_id + ": empty patient_id");
  if (s.width_px <= 0 || s.height_px <= 0) {
    throw ValidationError(where + ": slice " + s.slice_id + ": non-positive image dimensions");
  }
  if (!(s.spacing_mm > 0.0)) {
    throw ValidationError(where + ": slice " + s.slice_id + ": spacing_mm must be > 0");
  }
  for (const auto& b : s.boxes) {
    if (b.w_px <= 0) throw ValidationError(where + ": slice " + s.slice_id + ": box field w_px must be > 0");
    if (b.h_px <= 0) throw ValidationError(where + ": slice " + s.slice_id + ": box field h_px must be > 0");
    if (b.x_px < 0 || b.y_px < 0 || b.x_px + b.w_px > s.width_px || b.y_px + b.h_px > s.height_px) {
      throw ValidationError(where + ": slice " + s.slice_id + ": box out of image bounds");
    }
  }
  if (s.quality) {
    if (s.quality->laplacian_var < 0.0 || s.quality->contrast < 0.0 || s.quality->lung_coverage < 0.0 ||
        s.quality->lung_coverage > 1.0) {
      throw ValidationError(where + ": slice " + s.slice_id + ": quality features out of range");
    }
  }
  if (s.complexity && *s.complexity < 0.0) {
    throw ValidationError(where + ": slice " + s.slice_id + ": negative complexity");
  }
}

inline SliceRecord parse_record(const nlohmann::json& obj, bool strict, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": record is not an object");
  static const std::set<std::string> known = {"slice_id",   "patient_id", "image_path", "width_px",
                                              "height_px",  "spacing_mm", "boxes",      "quality",
                                              "complexity", "factors"};
  static const std::set<std::string> known_box = {"x_px", "y_px", "w_px", "h_px"};
  static const std::set<std::string> known_quality = {"laplacian_var", "contrast", "lung_coverage"};
  static const std::set<std::string> known_factors = {"f_cnt", "f_size", "f_shape", "f_qual"};
  if (strict) reject_unknown_keys(obj, known, where);

  SliceRecord s;
  try {
    s.slice_id = obj.at("slice_id").get<std::string>();
    s.patient_id = obj.at("patient_id").get<std::string>();
    s.image_path = obj.at("image_path").get<std::string>();
    s.width_px = obj.at("width_px").get<int>();
    s.height_px = obj.at("height_px").get<int>();
    s.spacing_mm = obj.at("spacing_mm").get<double>();
    for (const auto& jb : obj.at("boxes")) {
      if (strict) reject_unknown_keys(jb, known_box, where);
      NoduleBox b;
      b.x_px = jb.at("x_px").get<int>();
      b.y_px = jb.at("y_px").get<int>();
      b.w_px = jb.at("w_px").get<int>();
      b.h_px = jb.at("h_px").get<int>();
      s.boxes.push_back(b);
    }
    if (obj.contains("quality") && !obj.at("quality").is_null()) {
      const auto& jq = obj.at("quality");
      if (strict) reject_unknown_keys(jq, known_quality, where);
      QualityFeatures q;
      q.laplacian_var = jq.at("laplacian_var").get<double>();
      q.contrast = jq.at("contrast").get<double>();
      q.lung_coverage = jq.at("lung_coverage").get<double>();
      s.quality = q;
    }
    if (obj.contains("complexity") && !obj.at("complexity").is_null()) {
      s.complexity = obj.at("complexity").get<double>();
    }
    if (obj.contains("factors") && !obj.at("factors").is_null()) {
      const auto& jf = obj.at("factors");
      if (strict) reject_unknown_keys(jf, known_factors, where);
      ComplexityFactors f;
      f.f_cnt = jf.at("f_cnt").get<double>();
      f.f_size = jf.at("f_size").get<double>();
      f.f_shape = jf.at("f_shape").get<double>();
      f.f_qual = jf.at("f_qual").get<double>();
      s.factors = f;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": malformed record: " + e.what());
  }
  validate_record(s, where);
  return s;
}

inline nlohmann::json record_to_json(const SliceRecord& s) {
  nlohmann::json obj;
  obj["slice_id"] = s.slice_id;
  obj["patient_id"] = s.patient_id;
  obj["image_path"] = s.image_path;
  obj["width_px"] = s.width_px;
  obj["height_px"] = s.height_px;
  obj["spacing_mm"] = s.spacing_mm;
  obj["boxes"] = nlohmann::json::array();
  for (const auto& b : s.boxes) {
    obj["boxes"].push_back({{"x_px", b.x_px}, {"y_px", b.y_px}, {"w_px", b.w_px}, {"h_px", b.h_px}});
  }
  if (s.quality) {
    obj["quality"] = {{"laplacian_var", s.quality->laplacian_var},
                      {"contrast", s.quality->contrast},
                      {"lung_coverage", s.quality->lung_coverage}};
  }
  if (s.complexity) obj["complexity"] = *s.complexity;
  if (s.factors) {
    obj["factors"] = {{"f_cnt", s.factors->f_cnt},
                      {"f_size", s.factors->f_size},
                      {"f_shape", s.factors->f_shape},
                      {"f_qual", s.factors->f_qual}};
  }
  return obj;
}

}  // namespace manifest_detail

// Parse a manifest from a stream; `where_prefix` names the source in errors.
inline DatasetManifest parse_manifest(std::istream& in, bool strict, const std::string& where_prefix) {
  DatasetManifest m;
  m.source_tag = where_prefix;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = where_prefix + ":" + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": invalid JSON: " + e.what());
    }
    SliceRecord s = manifest_detail::parse_record(obj, strict, where);
    if (!seen_ids.insert(s.slice_id).second) {
      throw ValidationError(where + ": duplicate slice_id \"" + s.slice_id + "\"");
    }
    m.slices.push_back(std::move(s));
  }
  return m;
}

inline DatasetManifest load_manifest(const std::string& path, bool strict = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  return parse_manifest(in, strict, path);
}

inline void save_manifest(std::ostream& out, const DatasetManifest& m) {
  for (const auto& s : m.slices) {
    out << manifest_detail::record_to_json(s).dump() << "\n";
  }
}

inline void save_manifest(const std::string& path, const DatasetManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  save_manifest(out, m);
}

// Drop boxes whose diameter (longest side x spacing) is below the cutoff.
// Slices are never dropped; slices whose boxes are all removed become
// negatives.
inline DatasetManifest filter_small_nodules(const DatasetManifest& m, double min_diameter_mm = 3.0) {
  DatasetManifest out;
  out.source_tag = m.source_tag;
  out.slices.reserve(m.slices.size());
  for (const auto& s : m.slices) {
    SliceRecord copy = s;
    copy.boxes.clear();
    for (const auto& b : s.boxes) {
      if (b.diameter_mm(s.spacing_mm) >= min_diameter_mm) copy.boxes.push_back(b);
    }
    out.slices.push_back(std::move(copy));
  }
  return out;
}

// Keep all nodule slices; per patient keep at most bg_ratio background
// slices per nodule slice (bg_ratio total for nodule-free patients),
// choosing the best by lung_coverage * contrast, ties broken by ascending
// slice_id. Output preserves manifest order.
inline DatasetManifest select_slices(const DatasetManifest& m, std::size_t bg_ratio = 2) {
  struct Background {
    double score;
    const std::string* slice_id;
    std::size_t index;
  };
  std::map<std::string, std::size_t> nodule_count;
  std::map<std::string, std::vector<Background>> backgrounds;

  for (std::size_t i = 0; i < m.slices.size(); ++i) {
    const auto& s = m.slices[i];
    if (s.has_nodules()) {
      nodule_count[s.patient_id] += 1;
    } else {
      if (!s.quality) {
        throw ValidationError("select_slices: slice " + s.slice_id + " is missing quality features");
      }
      backgrounds[s.patient_id].push_back(
          {s.quality->lung_coverage * s.quality->contrast, &s.slice_id, i});
    }
  }

  std::vector<bool> keep(m.slices.size(), false);
  for (std::size_t i = 0; i < m.slices.size(); ++i) {
    if (m.slices[i].has_nodules()) keep[i] = true;
  }
  for (auto& [patient, bgs] : backgrounds) {
    const std::size_t nodules = nodule_count.count(patient) ? nodule_count[patient] : 0;
    const std::size_t cap = bg_ratio * std::max<std::size_t>(nodules, 1);
    std::sort(bgs.begin(), bgs.end(), [](const Background& a, const Background& b) {
      if (a.score != b.score) return a.score > b.score;
      return *a.slice_id < *b.slice_id;
    });
    for (std::size_t k = 0; k < bgs.size() && k < cap; ++k) keep[bgs[k].index] = true;
  }

  DatasetManifest out;
  out.source_tag = m.source_tag;
  for (std::size_t i = 0; i < m.slices.size(); ++i) {
    if (keep[i]) out.slices.push_back(m.slices[i]);
  }
  return out;
}

}  // namespace sacl
