#pragma once

// Desk-scale execution harness: runs an emitted curriculum plan against a
// synthetic binary task with a logistic learner, logging every applied
// hyperparameter, then verifies that the schedule was executed exactly as
// planned. This verifies plan fidelity, not detection quality.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sacl/complexity.hpp"
#include "sacl/curriculum.hpp"
#include "sacl/errors.hpp"
#include "sacl/rng.hpp"
#include "sacl/sampler.hpp"

namespace sacl {

inline constexpr std::size_t kSyntheticDims = 8;

// Label-flip noise per difficulty tier, applied as exact quotas.
inline constexpr std::array<double, 3> kTierNoiseRate = {0.0, 0.10, 0.25};

struct SyntheticSample {
  std::string id;
  std::string patient_id;
  std::array<double, kSyntheticDims> features{};
  int label = 0;         // observed label, possibly flipped
  bool flipped = false;  // generator metadata
  DifficultyTier difficulty = DifficultyTier::Easy;
};

struct SyntheticDataset {
  std::vector<SyntheticSample> samples;
  std::uint64_t seed = 0;
};

// Two unit-variance gaussian blobs at +/-1 per dimension; difficulty is
// realized by flipping an exact quota of labels per tier (Easy 0%, Medium
// 10%, Hard 25%), so tier composition is testable without sampling noise.
inline SyntheticDataset generate_synthetic_dataset(std::size_t n, const std::array<double, 3>& mix,
                                                   std::uint64_t seed) {
  if (n < 1) throw ValidationError("generate_synthetic_dataset: n must be >= 1");
  const double mix_sum = mix[0] + mix[1] + mix[2];
  if (mix[0] < 0.0 || mix[1] < 0.0 || mix[2] < 0.0 || mix_sum < 1.0 - 1e-9 || mix_sum > 1.0 + 1e-9) {
    throw ValidationError("generate_synthetic_dataset: mix must be non-negative and sum to 1");
  }

  const auto counts = apportion(n, {mix[0], mix[1], mix[2]});
  SplitMix64 rng = derive_rng(seed, "synth");

  SyntheticDataset data;
  data.seed = seed;
  data.samples.reserve(n);
  constexpr std::array<DifficultyTier, 3> tiers = {DifficultyTier::Easy, DifficultyTier::Medium,
                                                   DifficultyTier::Hard};
  std::size_t index = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t k = 0; k < counts[t]; ++k, ++index) {
      SyntheticSample s;
      char buf[24];
      std::snprintf(buf, sizeof(buf), "s%05zu", index);
      s.id = buf;
      std::snprintf(buf, sizeof(buf), "p%04zu", index / 8);  // 8 slices per synthetic patient
      s.patient_id = buf;
      s.difficulty = tiers[t];
      s.label = static_cast<int>(rng.bounded(2));
      const double mu = s.label == 1 ? 1.0 : -1.0;
      for (auto& f : s.features) f = mu + rng.gaussian();
      data.samples.push_back(std::move(s));
    }
  }

  // Quota-based flips, chosen by shuffling each tier's index list.
  std::size_t offset = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    std::vector<std::size_t> idx(counts[t]);
    for (std::size_t k = 0; k < counts[t]; ++k) idx[k] = offset + k;
    rng.shuffle(idx);
    const auto quota = static_cast<std::size_t>(
        std::llround(kTierNoiseRate[t] * static_cast<double>(counts[t])));
    for (std::size_t k = 0; k < quota; ++k) {
      auto& s = data.samples[idx[k]];
      s.label = 1 - s.label;
      s.flipped = true;
    }
    offset += counts[t];
  }
  return data;
}

struct BatchLogRecord {
  int stage_index = 0;
  int epoch_index = 0;
  int batch_index = 0;
  double lr = 0.0;
  std::size_t hard_count = 0;
  std::size_t size = 0;
  bool floor_met = true;
};

struct EpochLogRecord {
  int stage_index = 0;
  int epoch_index = 0;
  std::size_t batches = 0;
  std::size_t displaced = 0;
  bool floor_met = true;
  double mean_loss = 0.0;
};

struct StageLogRecord {
  int stage_index = 0;
  int epochs_executed = 0;
  std::size_t eligible_count = 0;
  std::size_t hard_pool_count = 0;
};

struct TrainLog {
  std::uint64_t seed = 0;
  std::size_t batch_size = 1;
  double weight_decay = 0.0;
  std::string plan_kind;
  std::string plan_config_hash;
  std::vector<StageLogRecord> stages;
  std::vector<EpochLogRecord> epochs;
  std::vector<BatchLogRecord> batches;
};

namespace sim_detail {

struct Learner {
  std::array<double, kSyntheticDims> w{};
  double bias = 0.0;

  // One SGD step on the batch mean of the logistic loss, with an L2
  // weight-decay term on the weights. Returns the pre-update mean loss.
  double step(const std::vector<const SyntheticSample*>& batch, double lr, double weight_decay) {
    std::array<double, kSyntheticDims> grad{};
    double grad_bias = 0.0;
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto* s : batch) {
      double z = bias;
      for (std::size_t d = 0; d < kSyntheticDims; ++d) z += w[d] * s->features[d];
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double y = static_cast<double>(s->label);
      // stable -[y log p + (1-y) log(1-p)]
      loss += (z > 0.0 ? z * (1.0 - y) + std::log1p(std::exp(-z)) : -z * y + std::log1p(std::exp(z)));
      const double err = (p - y) * inv_n;
      for (std::size_t d = 0; d < kSyntheticDims; ++d) grad[d] += err * s->features[d];
      grad_bias += err;
    }
    for (std::size_t d = 0; d < kSyntheticDims; ++d) w[d] -= lr * (grad[d] + weight_decay * w[d]);
    bias -= lr * grad_bias;
    return loss * inv_n;
  }
};

}  // namespace sim_detail

// Execute a plan end to end: per stage, per epoch, batches come from the
// sampler with the stage's hard floor, and every batch takes one SGD step at
// the stage's learning rate with the plan's weight decay.
inline TrainLog run_plan(const CurriculumPlan& plan, const SyntheticDataset& data,
                         std::size_t batch_size, std::uint64_t seed) {
  validate(plan);
  if (batch_size < 1) throw ValidationError("run_plan: batch size must be >= 1");
  if (data.samples.empty()) throw ValidationError("run_plan: empty dataset");

  std::map<std::string, const SyntheticSample*> by_id;
  for (const auto& s : data.samples) by_id[s.id] = &s;

  TrainLog log;
  log.seed = seed;
  log.batch_size = batch_size;
  log.weight_decay = plan.weight_decay;
  log.plan_kind = plan.kind;
  log.plan_config_hash = plan.provenance.config_hash;

  sim_detail::Learner learner;
  for (const auto& stage : plan.stages) {
    std::vector<std::string> eligible;
    std::vector<std::string> hard_pool;
    for (const auto& s : data.samples) {
      if (stage.eligible_tiers.count(s.difficulty)) eligible.push_back(s.id);
      if (s.difficulty == DifficultyTier::Hard) hard_pool.push_back(s.id);
    }
    if (eligible.empty()) {
      throw ValidationError("run_plan: stage " + std::to_string(stage.index) +
                            " has no eligible samples");
    }
    // An empty hard pool with a positive floor is a logged mismatch, not an
    // error: batches simply carry floor_met = false.
    StageLogRecord stage_rec;
    stage_rec.stage_index = stage.index;
    stage_rec.eligible_count = eligible.size();
    stage_rec.hard_pool_count = hard_pool.size();

    for (int epoch = 0; epoch < stage.epochs; ++epoch) {
      const BatchPlan batches = build_epoch_batches(eligible, hard_pool, batch_size,
                                                    stage.min_hard_ratio, seed, stage.index, epoch);
      EpochLogRecord epoch_rec;
      epoch_rec.stage_index = stage.index;
      epoch_rec.epoch_index = epoch;
      epoch_rec.batches = batches.batches.size();
      epoch_rec.displaced = batches.displaced_count;
      epoch_rec.floor_met = batches.floor_met;
      double loss_sum = 0.0;
      for (std::size_t b = 0; b < batches.batches.size(); ++b) {
        const auto& batch = batches.batches[b];
        std::vector<const SyntheticSample*> members;
        members.reserve(batch.slice_ids.size());
        for (const auto& id : batch.slice_ids) members.push_back(by_id.at(id));
        const double mean_loss = learner.step(members, stage.lr, plan.weight_decay);
        loss_sum += mean_loss;

        BatchLogRecord rec;
        rec.stage_index = stage.index;
        rec.epoch_index = epoch;
        rec.batch_index = static_cast<int>(b);
        rec.lr = stage.lr;
        rec.hard_count = batch.hard_count();
        rec.size = batch.slice_ids.size();
        rec.floor_met = batch.floor_met;
        log.batches.push_back(rec);
      }
      epoch_rec.mean_loss = loss_sum / static_cast<double>(batches.batches.size());
      log.epochs.push_back(epoch_rec);
      stage_rec.epochs_executed += 1;
    }
    log.stages.push_back(stage_rec);
  }
  return log;
}

struct FidelityCheck {
  std::string name;
  bool pass = true;
  std::string detail;  // first counterexample, empty when passing
};

struct FidelityReport {
  std::vector<FidelityCheck> checks;
  bool pass = true;
};

// Checks, against the plan that produced the log:
//  (a) per-stage executed epoch counts equal the plan's epochs;
//  (b) every logged lr equals the stage lr to 1e-12 relative;
//  (c) every batch meets ceil(r_min * size) hard members or is flagged;
//  (d) the log contains exactly the batches the sampler emitted: the total
//      equals the sum of per-epoch counts, and each epoch has at least
//      ceil(|eligible| / B) batches, exactly that many when nothing was
//      displaced (hard injection grows an epoch beyond the bare partition).
inline FidelityReport verify_execution(const TrainLog& log, const CurriculumPlan& plan) {
  FidelityReport report;

  FidelityCheck a{"stage-epochs", true, ""};
  if (log.stages.size() != plan.stages.size()) {
    a.pass = false;
    a.detail = "log has " + std::to_string(log.stages.size()) + " stages, plan has " +
               std::to_string(plan.stages.size());
  } else {
    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
      if (log.stages[i].epochs_executed != plan.stages[i].epochs) {
        a.pass = false;
        a.detail = "stage " + std::to_string(plan.stages[i].index) + ": executed " +
                   std::to_string(log.stages[i].epochs_executed) + " epochs, planned " +
                   std::to_string(plan.stages[i].epochs);
        break;
      }
    }
  }
  report.checks.push_back(a);

  std::map<int, const StagePlan*> stage_by_index;
  for (const auto& s : plan.stages) stage_by_index[s.index] = &s;

  FidelityCheck b{"learning-rate", true, ""};
  for (const auto& rec : log.batches) {
    const auto it = stage_by_index.find(rec.stage_index);
    if (it == stage_by_index.end()) {
      b.pass = false;
      b.detail = "batch references unknown stage " + std::to_string(rec.stage_index);
      break;
    }
    const double expected = it->second->lr;
    if (std::abs(rec.lr - expected) > 1e-12 * std::abs(expected)) {
      b.pass = false;
      char buf[160];
      std::snprintf(buf, sizeof(buf), "stage %d epoch %d batch %d: lr %.17g, plan %.17g",
                    rec.stage_index, rec.epoch_index, rec.batch_index, rec.lr, expected);
      b.detail = buf;
      break;
    }
  }
  report.checks.push_back(b);

  FidelityCheck c{"hard-floor", true, ""};
  for (const auto& rec : log.batches) {
    const auto it = stage_by_index.find(rec.stage_index);
    if (it == stage_by_index.end()) continue;
    const std::size_t required = hard_floor_count(it->second->min_hard_ratio, rec.size);
    if (rec.hard_count < required && rec.floor_met) {
      c.pass = false;
      c.detail = "stage " + std::to_string(rec.stage_index) + " epoch " +
                 std::to_string(rec.epoch_index) + " batch " + std::to_string(rec.batch_index) +
                 ": " + std::to_string(rec.hard_count) + " hard of " + std::to_string(rec.size) +
                 " without floor-unmet flag";
      break;
    }
  }
  report.checks.push_back(c);

  FidelityCheck d{"batch-count", true, ""};
  std::size_t epoch_total = 0;
  for (const auto& e : log.epochs) epoch_total += e.batches;
  if (log.batches.size() != epoch_total) {
    d.pass = false;
    d.detail = "log holds " + std::to_string(log.batches.size()) + " batch records, epochs claim " +
               std::to_string(epoch_total);
  } else {
    std::map<int, std::size_t> eligible_by_stage;
    for (const auto& s : log.stages) eligible_by_stage[s.stage_index] = s.eligible_count;
    std::map<std::pair<int, int>, std::size_t> seen;
    for (const auto& rec : log.batches) seen[{rec.stage_index, rec.epoch_index}] += 1;
    for (const auto& e : log.epochs) {
      const std::size_t base = (eligible_by_stage[e.stage_index] + log.batch_size - 1) / log.batch_size;
      const std::size_t actual = seen[{e.stage_index, e.epoch_index}];
      const bool ok = actual == e.batches && e.batches >= base &&
                      (e.displaced > 0 || e.batches == base);
      if (!ok) {
        d.pass = false;
        d.detail = "stage " + std::to_string(e.stage_index) + " epoch " +
                   std::to_string(e.epoch_index) + ": " + std::to_string(actual) + " batches, claimed " +
                   std::to_string(e.batches) + ", partition lower bound " + std::to_string(base);
        break;
      }
    }
  }
  report.checks.push_back(d);

  report.pass = true;
  for (const auto& check : report.checks) report.pass = report.pass && check.pass;
  return report;
}

// --- documents --------------------------------------------------------------

inline nlohmann::json to_json(const TrainLog& log) {
  nlohmann::json j;
  j["seed"] = log.seed;
  j["batch_size"] = log.batch_size;
  j["weight_decay"] = log.weight_decay;
  j["plan_kind"] = log.plan_kind;
  j["plan_config_hash"] = log.plan_config_hash;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : log.stages) {
    j["stages"].push_back({{"stage_index", s.stage_index},
                           {"epochs_executed", s.epochs_executed},
                           {"eligible_count", s.eligible_count},
                           {"hard_pool_count", s.hard_pool_count}});
  }
  j["epochs"] = nlohmann::json::array();
  for (const auto& e : log.epochs) {
    j["epochs"].push_back({{"stage_index", e.stage_index},
                           {"epoch_index", e.epoch_index},
                           {"batches", e.batches},
                           {"displaced", e.displaced},
                           {"floor_met", e.floor_met},
                           {"mean_loss", e.mean_loss}});
  }
  j["batches"] = nlohmann::json::array();
  for (const auto& b : log.batches) {
    j["batches"].push_back({{"stage_index", b.stage_index},
                            {"epoch_index", b.epoch_index},
                            {"batch_index", b.batch_index},
                            {"lr", b.lr},
                            {"hard_count", b.hard_count},
                            {"size", b.size},
                            {"floor_met", b.floor_met}});
  }
  return j;
}

inline TrainLog train_log_from_json(const nlohmann::json& j) {
  TrainLog log;
  try {
    log.seed = j.at("seed").get<std::uint64_t>();
    log.batch_size = j.at("batch_size").get<std::size_t>();
    log.weight_decay = j.at("weight_decay").get<double>();
    log.plan_kind = j.at("plan_kind").get<std::string>();
    log.plan_config_hash = j.at("plan_config_hash").get<std::string>();
    for (const auto& js : j.at("stages")) {
      StageLogRecord s;
      s.stage_index = js.at("stage_index").get<int>();
      s.epochs_executed = js.at("epochs_executed").get<int>();
      s.eligible_count = js.at("eligible_count").get<std::size_t>();
      s.hard_pool_count = js.at("hard_pool_count").get<std::size_t>();
      log.stages.push_back(s);
    }
    for (const auto& je : j.at("epochs")) {
      EpochLogRecord e;
      e.stage_index = je.at("stage_index").get<int>();
      e.epoch_index = je.at("epoch_index").get<int>();
      e.batches = je.at("batches").get<std::size_t>();
      e.displaced = je.at("displaced").get<std::size_t>();
      e.floor_met = je.at("floor_met").get<bool>();
      e.mean_loss = je.at("mean_loss").get<double>();
      log.epochs.push_back(e);
    }
    for (const auto& jb : j.at("batches")) {
      BatchLogRecord b;
      b.stage_index = jb.at("stage_index").get<int>();
      b.epoch_index = jb.at("epoch_index").get<int>();
      b.batch_index = jb.at("batch_index").get<int>();
      b.lr = jb.at("lr").get<double>();
      b.hard_count = jb.at("hard_count").get<std::size_t>();
      b.size = jb.at("size").get<std::size_t>();
      b.floor_met = jb.at("floor_met").get<bool>();
      log.batches.push_back(b);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed train log document: ") + e.what());
  }
  return log;
}

inline nlohmann::json to_json(const FidelityReport& r) {
  nlohmann::json j;
  j["pass"] = r.pass;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return j;
}

}  // namespace sacl
