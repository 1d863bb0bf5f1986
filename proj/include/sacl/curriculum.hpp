#pragma once

// Three-stage curriculum plan: stage constants, eligibility rules and the
// plan document format consumed by the sampler, the simulation harness and
// external trainers.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sacl/complexity.hpp"
#include "sacl/errors.hpp"
#include "sacl/manifest.hpp"
#include "sacl/params.hpp"
#include "sacl/version.hpp"

namespace sacl {

struct LossWeights {
  double box = 0.0;
  double cls = 0.0;
  double dfl = 0.0;
};

struct AugmentationPolicy {
  double rotation_deg = 0.0;
  double translate_frac = 0.0;
  double scale_frac = 0.0;
};

struct StagePlan {
  int index = 1;  // 1-based
  int resolution_px = 512;
  int epochs = 1;
  double lr = 0.001;
  LossWeights loss;
  AugmentationPolicy aug;
  std::set<DifficultyTier> eligible_tiers;
  std::set<QualityTier> eligible_neg_quality;
  double min_hard_ratio = 0.1;
};

struct PlanProvenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string generator_version = kGeneratorVersion;
};

struct CurriculumPlan {
  std::string kind = "cl";  // "cl" (static) or "sacl" (scale-adapted)
  double rho = 1.0;
  std::vector<StagePlan> stages;
  double weight_decay = 0.0005;
  double dropout = 0.0;
  SaclParams params;
  PlanProvenance provenance;
};

inline void validate(const StagePlan& s) {
  if (s.epochs < 1) throw ValidationError("StagePlan: epochs must be >= 1");
  if (!(s.lr > 0.0)) throw ValidationError("StagePlan: lr must be > 0");
  if (s.resolution_px != 512 && s.resolution_px != 640 && s.resolution_px != 768) {
    throw ValidationError("StagePlan: resolution must be one of 512/640/768");
  }
  if (s.loss.box < 0.0 || s.loss.cls < 0.0 || s.loss.dfl < 0.0) {
    throw ValidationError("StagePlan: loss weights must be >= 0");
  }
  if (s.aug.rotation_deg < 0.0 || s.aug.translate_frac < 0.0 || s.aug.translate_frac > 1.0 ||
      s.aug.scale_frac < 0.0 || s.aug.scale_frac > 1.0) {
    throw ValidationError("StagePlan: augmentation policy out of range");
  }
  if (s.min_hard_ratio < 0.0 || s.min_hard_ratio > 1.0) {
    throw ValidationError("StagePlan: min_hard_ratio must be in [0, 1]");
  }
}

inline void validate(const CurriculumPlan& p) {
  if (p.stages.empty()) throw ValidationError("CurriculumPlan: no stages");
  for (std::size_t i = 0; i < p.stages.size(); ++i) {
    if (p.stages[i].index != static_cast<int>(i) + 1) {
      throw ValidationError("CurriculumPlan: stage indices must be 1..S in order");
    }
    validate(p.stages[i]);
  }
  if (!(p.rho > 0.0) || p.rho > 1.0) throw ValidationError("CurriculumPlan: rho must be in (0, 1]");
  validate(p.params);
}

// The fixed three-stage schedule. Stage constants are part of the contract;
// the config only supplies the hard-ratio baseline, regularization baselines
// and (downstream) tier thresholds.
inline CurriculumPlan build_static_plan(const SaclParams& params = {}) {
  validate(params);
  CurriculumPlan plan;
  plan.kind = "cl";
  plan.rho = 1.0;
  plan.params = params;
  plan.weight_decay = params.wd_base;
  plan.dropout = params.p_drop_base;

  StagePlan s1;
  s1.index = 1;
  s1.resolution_px = 512;
  s1.epochs = 50;
  s1.lr = 0.003;
  s1.loss = {2.0, 4.0, 0.1};
  s1.aug = {3.0, 0.05, 0.10};
  s1.eligible_tiers = {DifficultyTier::Easy};
  s1.eligible_neg_quality = {QualityTier::High};
  s1.min_hard_ratio = params.r0;

  StagePlan s2;
  s2.index = 2;
  s2.resolution_px = 640;
  s2.epochs = 100;
  s2.lr = 0.002;
  s2.loss = {5.0, 2.0, 0.5};
  s2.aug = {8.0, 0.10, 0.20};
  s2.eligible_tiers = {DifficultyTier::Easy, DifficultyTier::Medium};
  s2.eligible_neg_quality = {QualityTier::High, QualityTier::Medium};
  s2.min_hard_ratio = params.r0;

  StagePlan s3;
  s3.index = 3;
  s3.resolution_px = 768;
  s3.epochs = 100;
  s3.lr = 0.001;
  s3.loss = {7.0, 1.5, 1.0};
  s3.aug = {12.0, 0.15, 0.30};
  s3.eligible_tiers = {DifficultyTier::Easy, DifficultyTier::Medium, DifficultyTier::Hard};
  s3.eligible_neg_quality = {QualityTier::High, QualityTier::Medium, QualityTier::Low};
  s3.min_hard_ratio = params.r0;

  plan.stages = {s1, s2, s3};
  validate(plan);
  return plan;
}

struct StagePools {
  std::vector<std::string> eligible;   // input order
  std::vector<std::string> hard_pool;  // input order
};

// Eligibility for one stage over scored slices. Labeled slices are gated by
// difficulty tier, negatives by quality tier. The hard pool is every labeled
// Hard slice in the subset regardless of stage eligibility, which is what
// makes hard-sample injection meaningful before the final stage.
inline StagePools stage_pool(const StagePlan& stage, const std::vector<const SliceRecord*>& slices,
                             const ScoreConfig& cfg = {}) {
  StagePools pools;
  for (const auto* s : slices) {
    if (s->has_nodules()) {
      if (!s->complexity) {
        throw ValidationError("stage_pool: slice " + s->slice_id + " is not scored");
      }
      const DifficultyTier tier = difficulty_tier(*s->complexity, cfg);
      if (stage.eligible_tiers.count(tier)) pools.eligible.push_back(s->slice_id);
      if (tier == DifficultyTier::Hard) pools.hard_pool.push_back(s->slice_id);
    } else {
      if (!s->quality) {
        throw ValidationError("stage_pool: slice " + s->slice_id + " is missing quality features");
      }
      if (stage.eligible_neg_quality.count(quality_tier(*s->quality, cfg.quality))) {
        pools.eligible.push_back(s->slice_id);
      }
    }
  }
  return pools;
}

// --- plan document ---------------------------------------------------------

inline nlohmann::json to_json(const StagePlan& s) {
  nlohmann::json j;
  j["index"] = s.index;
  j["resolution_px"] = s.resolution_px;
  j["epochs"] = s.epochs;
  j["lr"] = s.lr;
  j["loss"] = {{"box", s.loss.box}, {"cls", s.loss.cls}, {"dfl", s.loss.dfl}};
  j["aug"] = {{"rotation_deg", s.aug.rotation_deg},
              {"translate_frac", s.aug.translate_frac},
              {"scale_frac", s.aug.scale_frac}};
  j["eligible_tiers"] = nlohmann::json::array();
  for (auto t : s.eligible_tiers) j["eligible_tiers"].push_back(to_string(t));
  j["eligible_neg_quality"] = nlohmann::json::array();
  for (auto t : s.eligible_neg_quality) j["eligible_neg_quality"].push_back(to_string(t));
  j["min_hard_ratio"] = s.min_hard_ratio;
  return j;
}

inline nlohmann::json to_json(const SaclParams& p) {
  return {{"beta", p.beta},         {"gamma", p.gamma},     {"e_min", p.e_min},
          {"r0", p.r0},             {"delta_r", p.delta_r}, {"lr_shrink", p.lr_shrink},
          {"wd_base", p.wd_base},   {"p_drop_base", p.p_drop_base}};
}

inline nlohmann::json to_json(const CurriculumPlan& p) {
  nlohmann::json j;
  j["kind"] = p.kind;
  j["rho"] = p.rho;
  j["weight_decay"] = p.weight_decay;
  j["dropout"] = p.dropout;
  j["params"] = to_json(p.params);
  j["prng"] = kPrngName;
  j["seed"] = p.provenance.seed;
  j["generator_version"] = p.provenance.generator_version;
  if (!p.provenance.config_hash.empty()) j["config_hash"] = p.provenance.config_hash;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : p.stages) j["stages"].push_back(to_json(s));
  return j;
}

inline StagePlan stage_from_json(const nlohmann::json& j) {
  StagePlan s;
  s.index = j.at("index").get<int>();
  s.resolution_px = j.at("resolution_px").get<int>();
  s.epochs = j.at("epochs").get<int>();
  s.lr = j.at("lr").get<double>();
  s.loss = {j.at("loss").at("box").get<double>(), j.at("loss").at("cls").get<double>(),
            j.at("loss").at("dfl").get<double>()};
  s.aug = {j.at("aug").at("rotation_deg").get<double>(), j.at("aug").at("translate_frac").get<double>(),
           j.at("aug").at("scale_frac").get<double>()};
  for (const auto& t : j.at("eligible_tiers")) {
    s.eligible_tiers.insert(difficulty_tier_from_string(t.get<std::string>()));
  }
  for (const auto& t : j.at("eligible_neg_quality")) {
    s.eligible_neg_quality.insert(quality_tier_from_string(t.get<std::string>()));
  }
  s.min_hard_ratio = j.at("min_hard_ratio").get<double>();
  return s;
}

inline SaclParams params_from_json(const nlohmann::json& j) {
  SaclParams p;
  p.beta = j.at("beta").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.e_min = j.at("e_min").get<int>();
  p.r0 = j.at("r0").get<double>();
  p.delta_r = j.at("delta_r").get<double>();
  p.lr_shrink = j.at("lr_shrink").get<double>();
  p.wd_base = j.at("wd_base").get<double>();
  p.p_drop_base = j.at("p_drop_base").get<double>();
  return p;
}

inline CurriculumPlan plan_from_json(const nlohmann::json& j) {
  CurriculumPlan p;
  try {
    p.kind = j.at("kind").get<std::string>();
    p.rho = j.at("rho").get<double>();
    p.weight_decay = j.at("weight_decay").get<double>();
    p.dropout = j.at("dropout").get<double>();
    p.params = params_from_json(j.at("params"));
    p.provenance.seed = j.at("seed").get<std::uint64_t>();
    p.provenance.generator_version = j.at("generator_version").get<std::string>();
    if (j.contains("config_hash")) p.provenance.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& js : j.at("stages")) p.stages.push_back(stage_from_json(js));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed plan document: ") + e.what());
  }
  validate(p);
  return p;
}

// Field-by-field equality of everything the plan prescribes for training;
// rho, kind and provenance metadata are deliberately excluded.
inline bool plans_structurally_equal(const CurriculumPlan& a, const CurriculumPlan& b) {
  if (a.stages.size() != b.stages.size()) return false;
  for (std::size_t i = 0; i < a.stages.size(); ++i) {
    const auto& x = a.stages[i];
    const auto& y = b.stages[i];
    if (x.index != y.index || x.resolution_px != y.resolution_px || x.epochs != y.epochs || x.lr != y.lr ||
        x.loss.box != y.loss.box || x.loss.cls != y.loss.cls || x.loss.dfl != y.loss.dfl ||
        x.aug.rotation_deg != y.aug.rotation_deg || x.aug.translate_frac != y.aug.translate_frac ||
        x.aug.scale_frac != y.aug.scale_frac || x.eligible_tiers != y.eligible_tiers ||
        x.eligible_neg_quality != y.eligible_neg_quality || x.min_hard_ratio != y.min_hard_ratio) {
      return false;
    }
  }
  return a.weight_decay == b.weight_decay && a.dropout == b.dropout;
}

}  // namespace sacl
