#pragma once

// Deterministic per-epoch batch composition with a hard-sample floor.
//
// The eligible pool is shuffled into a base stream (one PRNG stream per
// (seed, stage, epoch)) and cut into batches of B. Each batch needs
// h = ceil(r_min * size) hard members; members of the base stream that are
// already in the hard pool count first, and any shortfall is filled from a
// separately shuffled hard cycle (reshuffled when exhausted). Injected hard
// samples replace the batch's lowest-priority (latest) non-hard members,
// which are re-queued to later batches of the same epoch so that every
// eligible member still appears at least once. Hard injections may repeat
// across batches within an epoch; within a batch ids are unique.
//
// Termination and floor edge cases:
//  - at most size-1 members of a batch are displaced, so the pending stream
//    always shrinks; this only binds for r_min > (B-1)/B where the floor and
//    full coverage are mutually unsatisfiable, and such batches are flagged;
//  - the final short batch appends hard samples (up to B) instead of
//    displacing, since there is no later batch to re-queue into;
//  - an empty hard pool with r_min > 0 yields a plain partition with the
//    floor reported unmet in the plan metadata, not an exception.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "sacl/errors.hpp"
#include "sacl/rng.hpp"
#include "sacl/version.hpp"

namespace sacl {

struct Batch {
  std::vector<std::string> slice_ids;
  std::vector<bool> hard_flags;  // true iff the member is in the hard pool
  bool floor_met = true;

  std::size_t hard_count() const {
    return static_cast<std::size_t>(std::count(hard_flags.begin(), hard_flags.end(), true));
  }
};

struct BatchPlan {
  int stage_index = 1;
  int epoch_index = 0;
  std::size_t batch_size = 1;
  double r_min = 0.0;
  std::uint64_t seed = 0;
  std::size_t eligible_count = 0;
  std::size_t hard_pool_count = 0;
  std::size_t displaced_count = 0;
  std::size_t injected_count = 0;
  bool floor_met = true;  // true iff every batch met its floor
  std::vector<Batch> batches;
};

// ceil(r * n) with a guard against upward drift of exact decimal products
// (e.g. 0.37 * 100 evaluating to 37.000000000000004).
inline std::size_t hard_floor_count(double r_min, std::size_t n) {
  if (r_min <= 0.0 || n == 0) return 0;
  const double h = std::ceil(r_min * static_cast<double>(n) - 1e-9);
  return std::min<std::size_t>(n, static_cast<std::size_t>(h < 0.0 ? 0.0 : h));
}

// Lazily yields the batches of one epoch. The materialized BatchPlan and a
// stream consumed batch-by-batch produce the same sequence.
class EpochBatchStream {
 public:
  EpochBatchStream(const std::vector<std::string>& eligible, const std::vector<std::string>& hard_pool,
                   std::size_t batch_size, double r_min, std::uint64_t seed, int stage_index,
                   int epoch_index)
      : batch_size_(batch_size),
        r_min_(r_min),
        base_rng_(derive_rng(seed, "sample", static_cast<std::uint64_t>(stage_index),
                             static_cast<std::uint64_t>(epoch_index))),
        hard_rng_(derive_rng(seed, "hard", static_cast<std::uint64_t>(stage_index),
                             static_cast<std::uint64_t>(epoch_index))) {
    if (batch_size < 1) throw ValidationError("sampler: batch size must be >= 1");
    if (r_min < 0.0 || r_min > 1.0) throw ValidationError("sampler: r_min must be in [0, 1]");
    if (eligible.empty()) throw ValidationError("sampler: eligible pool is empty");
    hard_set_ = std::unordered_set<std::string>(hard_pool.begin(), hard_pool.end());
    if (hard_set_.size() != hard_pool.size()) {
      throw ValidationError("sampler: duplicate ids in hard pool");
    }
    {
      std::unordered_set<std::string> unique(eligible.begin(), eligible.end());
      if (unique.size() != eligible.size()) throw ValidationError("sampler: duplicate ids in eligible pool");
    }

    std::vector<std::string> base = eligible;
    base_rng_.shuffle(base);
    pending_.assign(base.begin(), base.end());
    hard_cycle_ = hard_pool;
    hard_rng_.shuffle(hard_cycle_);
  }

  bool next(Batch& out) {
    if (pending_.empty()) return false;
    Batch batch;
    const std::size_t m = std::min(batch_size_, pending_.size());
    for (std::size_t i = 0; i < m; ++i) {
      batch.slice_ids.push_back(std::move(pending_.front()));
      pending_.pop_front();
    }
    batch.hard_flags.resize(m);
    std::size_t hard_count = 0;
    for (std::size_t i = 0; i < m; ++i) {
      batch.hard_flags[i] = hard_set_.count(batch.slice_ids[i]) > 0;
      if (batch.hard_flags[i]) ++hard_count;
    }

    const std::size_t h = hard_floor_count(r_min_, m);
    if (hard_count < h && !hard_cycle_.empty()) {
      if (!pending_.empty()) {
        // mid-epoch: keep at least one taken member so pending shrinks
        replace_fill(batch, hard_count, h, m - 1);
      } else {
        // terminal take: grow a short batch toward B first, then displace
        // non-hard members (keeping one, so successor batches shrink) if
        // the floor still fails at full size
        if (m < batch_size_) append_fill(batch, hard_count);
        const std::size_t size_now = batch.slice_ids.size();
        const std::size_t hard_now = batch.hard_count();
        const std::size_t h_now = hard_floor_count(r_min_, size_now);
        if (hard_now < h_now && size_now == batch_size_) {
          const std::size_t non_hard = size_now - hard_now;
          if (non_hard > 1) replace_fill(batch, hard_now, h_now, non_hard - 1);
        }
      }
    }

    batch.floor_met = batch.hard_count() >= hard_floor_count(r_min_, batch.slice_ids.size());
    if (!batch.floor_met) floor_met_ = false;
    out = std::move(batch);
    return true;
  }

  bool floor_met() const { return floor_met_; }
  std::size_t displaced_count() const { return displaced_count_; }
  std::size_t injected_count() const { return injected_count_; }

 private:
  // Next hard-cycle candidate not yet in the batch; empty when the whole
  // cycle is already present.
  bool next_hard(const std::unordered_set<std::string>& in_batch, std::string& out) {
    for (std::size_t scanned = 0; scanned < hard_cycle_.size(); ++scanned) {
      if (hard_pos_ == hard_cycle_.size()) {
        hard_rng_.shuffle(hard_cycle_);
        hard_pos_ = 0;
      }
      const std::string& candidate = hard_cycle_[hard_pos_++];
      if (!in_batch.count(candidate)) {
        out = candidate;
        return true;
      }
    }
    return false;
  }

  // Replace the batch's latest non-hard members with hard-cycle candidates
  // and re-queue the displaced members to later batches.
  void replace_fill(Batch& batch, std::size_t hard_count, std::size_t h, std::size_t max_displace) {
    const std::size_t m = batch.slice_ids.size();
    std::size_t shortfall = std::min(h - hard_count, max_displace);
    std::unordered_set<std::string> in_batch(batch.slice_ids.begin(), batch.slice_ids.end());
    std::vector<std::pair<std::size_t, std::string>> displaced;
    for (std::size_t i = m; i-- > 0 && shortfall > 0;) {
      if (batch.hard_flags[i]) continue;
      std::string candidate;
      if (!next_hard(in_batch, candidate)) break;
      displaced.push_back({i, batch.slice_ids[i]});
      in_batch.insert(candidate);
      batch.slice_ids[i] = std::move(candidate);
      batch.hard_flags[i] = true;
      --shortfall;
      ++injected_count_;
    }
    std::sort(displaced.begin(), displaced.end());
    for (auto& [pos, id] : displaced) {
      pending_.push_back(std::move(id));
      ++displaced_count_;
    }
  }

  // Terminal short batch: grow toward B with hard samples until the floor
  // holds for the grown size. Nothing is displaced.
  void append_fill(Batch& batch, std::size_t hard_count) {
    std::unordered_set<std::string> in_batch(batch.slice_ids.begin(), batch.slice_ids.end());
    while (batch.slice_ids.size() < batch_size_ &&
           hard_count < hard_floor_count(r_min_, batch.slice_ids.size())) {
      std::string candidate;
      if (!next_hard(in_batch, candidate)) break;
      in_batch.insert(candidate);
      batch.slice_ids.push_back(std::move(candidate));
      batch.hard_flags.push_back(true);
      ++hard_count;
      ++injected_count_;
    }
  }

  std::size_t batch_size_;
  double r_min_;
  SplitMix64 base_rng_;
  SplitMix64 hard_rng_;
  std::deque<std::string> pending_;
  std::vector<std::string> hard_cycle_;
  std::size_t hard_pos_ = 0;
  std::unordered_set<std::string> hard_set_;
  bool floor_met_ = true;
  std::size_t displaced_count_ = 0;
  std::size_t injected_count_ = 0;
};

inline BatchPlan build_epoch_batches(const std::vector<std::string>& eligible,
                                     const std::vector<std::string>& hard_pool, std::size_t batch_size,
                                     double r_min, std::uint64_t seed, int stage_index, int epoch_index) {
  EpochBatchStream stream(eligible, hard_pool, batch_size, r_min, seed, stage_index, epoch_index);
  BatchPlan plan;
  plan.stage_index = stage_index;
  plan.epoch_index = epoch_index;
  plan.batch_size = batch_size;
  plan.r_min = r_min;
  plan.seed = seed;
  plan.eligible_count = eligible.size();
  plan.hard_pool_count = hard_pool.size();
  Batch batch;
  while (stream.next(batch)) plan.batches.push_back(std::move(batch));
  plan.floor_met = stream.floor_met();
  plan.displaced_count = stream.displaced_count();
  plan.injected_count = stream.injected_count();
  return plan;
}

inline nlohmann::json to_json(const BatchPlan& p) {
  nlohmann::json j;
  j["stage_index"] = p.stage_index;
  j["epoch_index"] = p.epoch_index;
  j["batch_size"] = p.batch_size;
  j["r_min"] = p.r_min;
  j["seed"] = p.seed;
  j["prng"] = kPrngName;
  j["eligible_count"] = p.eligible_count;
  j["hard_pool_count"] = p.hard_pool_count;
  j["displaced_count"] = p.displaced_count;
  j["injected_count"] = p.injected_count;
  j["floor_met"] = p.floor_met;
  j["batches"] = nlohmann::json::array();
  for (const auto& b : p.batches) {
    nlohmann::json jb;
    jb["slice_ids"] = b.slice_ids;
    jb["hard_flags"] = b.hard_flags;
    jb["floor_met"] = b.floor_met;
    j["batches"].push_back(std::move(jb));
  }
  return j;
}

inline BatchPlan batch_plan_from_json(const nlohmann::json& j) {
  BatchPlan p;
  try {
    p.stage_index = j.at("stage_index").get<int>();
    p.epoch_index = j.at("epoch_index").get<int>();
    p.batch_size = j.at("batch_size").get<std::size_t>();
    p.r_min = j.at("r_min").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.eligible_count = j.at("eligible_count").get<std::size_t>();
    p.hard_pool_count = j.at("hard_pool_count").get<std::size_t>();
    p.displaced_count = j.at("displaced_count").get<std::size_t>();
    p.injected_count = j.at("injected_count").get<std::size_t>();
    p.floor_met = j.at("floor_met").get<bool>();
    for (const auto& jb : j.at("batches")) {
      Batch b;
      b.slice_ids = jb.at("slice_ids").get<std::vector<std::string>>();
      b.hard_flags = jb.at("hard_flags").get<std::vector<bool>>();
      b.floor_met = jb.at("floor_met").get<bool>();
      p.batches.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed batch plan document: ") + e.what());
  }
  return p;
}

}  // namespace sacl
