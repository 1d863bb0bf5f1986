#pragma once

// Per-slice difficulty: four factor scores summed into a complexity score,
// then bucketed into Easy / Medium / Hard tiers.

#include <algorithm>
#include <string>

#include "sacl/errors.hpp"
#include "sacl/imagemetrics.hpp"
#include "sacl/manifest.hpp"

namespace sacl {

enum class DifficultyTier { Easy, Medium, Hard };

inline const char* to_string(DifficultyTier t) {
  switch (t) {
    case DifficultyTier::Easy: return "Easy";
    case DifficultyTier::Medium: return "Medium";
    default: return "Hard";
  }
}

inline DifficultyTier difficulty_tier_from_string(const std::string& s) {
  if (s == "Easy") return DifficultyTier::Easy;
  if (s == "Medium") return DifficultyTier::Medium;
  if (s == "Hard") return DifficultyTier::Hard;
  throw ValidationError("unknown difficulty tier: " + s);
}

// Factor-table boundaries and tier thresholds. Defaults reproduce the
// published tables; everything is overridable through the run config and
// recorded in emitted plans.
struct ScoreConfig {
  // f_size bands on smallest-box area in px^2; boundary values fall in the
  // middle band (closed interval [size_small, size_large]).
  long long size_large_px = 1000;
  long long size_small_px = 400;
  // A box is irregular when max(w/h, h/w) exceeds this.
  double aspect_tau = 1.5;
  QualityThresholds quality;
  // Tier partition: Easy c <= easy_max, Medium easy_max < c <= medium_max,
  // Hard above.
  double easy_max = 4.0;
  double medium_max = 7.5;
};

inline double count_factor(std::size_t nodules) {
  if (nodules == 0) return 0.5;
  if (nodules == 1) return 1.0;
  if (nodules <= 3) return 2.5;
  return 4.0;
}

inline double size_factor(const SliceRecord& s, const ScoreConfig& cfg) {
  if (s.boxes.empty()) return 0.5;  // vacuously best for nodule-free slices
  long long smallest = s.boxes.front().area_px();
  for (const auto& b : s.boxes) smallest = std::min(smallest, b.area_px());
  if (smallest > cfg.size_large_px) return 0.5;
  if (smallest >= cfg.size_small_px) return 1.0;
  return 3.0;
}

inline double shape_factor(const SliceRecord& s, const ScoreConfig& cfg) {
  if (s.boxes.empty()) return 0.5;
  std::size_t irregular = 0;
  for (const auto& b : s.boxes) {
    if (b.aspect_ratio() > cfg.aspect_tau) ++irregular;
  }
  if (irregular == 0) return 0.5;
  if (irregular == 1) return 1.0;
  return 2.0;
}

inline double quality_factor(const QualityFeatures& q, const ScoreConfig& cfg) {
  switch (quality_tier(q, cfg.quality)) {
    case QualityTier::High: return 0.5;
    case QualityTier::Medium: return 1.0;
    default: return 2.0;
  }
}

inline ComplexityFactors complexity_factors(const SliceRecord& s, const ScoreConfig& cfg = {}) {
  if (!s.quality) {
    throw ValidationError("complexity_factors: slice " + s.slice_id + " is missing quality features");
  }
  ComplexityFactors f;
  f.f_cnt = count_factor(s.boxes.size());
  f.f_size = size_factor(s, cfg);
  f.f_shape = shape_factor(s, cfg);
  f.f_qual = quality_factor(*s.quality, cfg);
  return f;
}

inline double complexity_score(const ComplexityFactors& f) {
  return f.f_cnt + f.f_size + f.f_shape + f.f_qual;
}

inline DifficultyTier difficulty_tier(double c, const ScoreConfig& cfg = {}) {
  if (c <= cfg.easy_max) return DifficultyTier::Easy;
  if (c <= cfg.medium_max) return DifficultyTier::Medium;
  return DifficultyTier::Hard;
}

// Annotate every slice with factors and score. Returns a new manifest.
inline DatasetManifest score_manifest(const DatasetManifest& m, const ScoreConfig& cfg = {}) {
  DatasetManifest out = m;
  for (auto& s : out.slices) {
    const ComplexityFactors f = complexity_factors(s, cfg);
    s.factors = f;
    s.complexity = complexity_score(f);
  }
  return out;
}

inline DifficultyTier slice_tier(const SliceRecord& s, const ScoreConfig& cfg = {}) {
  if (!s.complexity) {
    throw ValidationError("slice " + s.slice_id + " has no complexity score");
  }
  return difficulty_tier(*s.complexity, cfg);
}

}  // namespace sacl
