#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "sacl/adapt.hpp"
#include "sacl/simharness.hpp"

using sacl::CurriculumPlan;
using sacl::DifficultyTier;
using sacl::FidelityReport;
using sacl::SyntheticDataset;
using sacl::TrainLog;

TEST_CASE("all-easy dataset has zero flipped labels") {
  const SyntheticDataset data = sacl::generate_synthetic_dataset(100, {1.0, 0.0, 0.0}, 5);
  REQUIRE(data.samples.size() == 100);
  for (const auto& s : data.samples) {
    REQUIRE(s.difficulty == DifficultyTier::Easy);
    REQUIRE(!s.flipped);
  }
}

TEST_CASE("all-hard dataset flips exactly the 25% quota") {
  const SyntheticDataset data = sacl::generate_synthetic_dataset(100, {0.0, 0.0, 1.0}, 5);
  std::size_t flips = 0;
  for (const auto& s : data.samples) flips += s.flipped ? 1 : 0;
  REQUIRE(flips == 25);
}

TEST_CASE("mixed dataset: tier quotas and per-tier flip quotas are exact") {
  const SyntheticDataset data = sacl::generate_synthetic_dataset(240, {0.5, 0.3, 0.2}, 9);
  std::map<DifficultyTier, std::size_t> tier_count;
  std::map<DifficultyTier, std::size_t> flip_count;
  for (const auto& s : data.samples) {
    tier_count[s.difficulty] += 1;
    if (s.flipped) flip_count[s.difficulty] += 1;
  }
  REQUIRE(tier_count[DifficultyTier::Easy] == 120);
  REQUIRE(tier_count[DifficultyTier::Medium] == 72);
  REQUIRE(tier_count[DifficultyTier::Hard] == 48);
  REQUIRE(flip_count[DifficultyTier::Easy] == 0);
  REQUIRE(flip_count[DifficultyTier::Medium] == 7);  // round(0.10 * 72)
  REQUIRE(flip_count[DifficultyTier::Hard] == 12);   // round(0.25 * 48)
}

TEST_CASE("generator is deterministic and ids are unique") {
  const auto a = sacl::generate_synthetic_dataset(64, {0.4, 0.4, 0.2}, 123);
  const auto b = sacl::generate_synthetic_dataset(64, {0.4, 0.4, 0.2}, 123);
  REQUIRE(a.samples.size() == b.samples.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    REQUIRE(a.samples[i].id == b.samples[i].id);
    REQUIRE(a.samples[i].label == b.samples[i].label);
    REQUIRE(a.samples[i].features == b.samples[i].features);
    ids.insert(a.samples[i].id);
  }
  REQUIRE(ids.size() == a.samples.size());
  const auto c = sacl::generate_synthetic_dataset(64, {0.4, 0.4, 0.2}, 124);
  REQUIRE(a.samples[0].features != c.samples[0].features);
}

TEST_CASE("generator rejects bad mixes") {
  REQUIRE_THROWS_AS(sacl::generate_synthetic_dataset(10, {0.5, 0.2, 0.2}, 1), sacl::ValidationError);
  REQUIRE_THROWS_AS(sacl::generate_synthetic_dataset(0, {1.0, 0.0, 0.0}, 1), sacl::ValidationError);
}

TEST_CASE("sacl plan at rho 0.1 executes stage epochs (20, 30, 30)") {
  const CurriculumPlan plan = sacl::build_sacl_plan(sacl::build_static_plan(), 0.1);
  const SyntheticDataset data = sacl::generate_synthetic_dataset(200, {0.5, 0.3, 0.2}, 3);
  const TrainLog log = sacl::run_plan(plan, data, 16, 3);
  REQUIRE(log.stages.size() == 3);
  REQUIRE(log.stages[0].epochs_executed == 20);
  REQUIRE(log.stages[1].epochs_executed == 30);
  REQUIRE(log.stages[2].epochs_executed == 30);
}

TEST_CASE("static plan logs only the stage learning rates") {
  const CurriculumPlan plan = sacl::build_static_plan();
  const SyntheticDataset data = sacl::generate_synthetic_dataset(60, {0.5, 0.3, 0.2}, 4);
  const TrainLog log = sacl::run_plan(plan, data, 16, 4);
  const std::set<double> allowed = {0.003, 0.002, 0.001};
  for (const auto& rec : log.batches) REQUIRE(allowed.count(rec.lr) == 1);
}

TEST_CASE("run_plan is deterministic") {
  const CurriculumPlan plan = sacl::build_sacl_plan(sacl::build_static_plan(), 0.2);
  const SyntheticDataset data = sacl::generate_synthetic_dataset(120, {0.5, 0.3, 0.2}, 8);
  const TrainLog a = sacl::run_plan(plan, data, 8, 8);
  const TrainLog b = sacl::run_plan(plan, data, 8, 8);
  REQUIRE(sacl::to_json(a).dump() == sacl::to_json(b).dump());
}

TEST_CASE("verification passes on a well-formed run") {
  const CurriculumPlan plan = sacl::build_sacl_plan(sacl::build_static_plan(), 0.5);
  const SyntheticDataset data = sacl::generate_synthetic_dataset(150, {0.5, 0.3, 0.2}, 6);
  const TrainLog log = sacl::run_plan(plan, data, 16, 6);
  const FidelityReport report = sacl::verify_execution(log, plan);
  REQUIRE(report.pass);
  REQUIRE(report.checks.size() == 4);
  for (const auto& c : report.checks) {
    INFO(c.name << ": " << c.detail);
    REQUIRE(c.pass);
  }
}

TEST_CASE("a perturbed lr fails check (b) naming the batch") {
  const CurriculumPlan plan = sacl::build_static_plan();
  const SyntheticDataset data = sacl::generate_synthetic_dataset(60, {0.6, 0.2, 0.2}, 2);
  TrainLog log = sacl::run_plan(plan, data, 16, 2);
  log.batches[5].lr += 1e-6;
  const FidelityReport report = sacl::verify_execution(log, plan);
  REQUIRE(!report.pass);
  REQUIRE(report.checks[1].name == "learning-rate");
  REQUIRE(!report.checks[1].pass);
  const std::string expected = "stage " + std::to_string(log.batches[5].stage_index) + " epoch " +
                               std::to_string(log.batches[5].epoch_index) + " batch " +
                               std::to_string(log.batches[5].batch_index);
  REQUIRE(report.checks[1].detail.find(expected) != std::string::npos);
}

TEST_CASE("a truncated log fails check (d)") {
  const CurriculumPlan plan = sacl::build_static_plan();
  const SyntheticDataset data = sacl::generate_synthetic_dataset(60, {0.6, 0.2, 0.2}, 2);
  TrainLog log = sacl::run_plan(plan, data, 16, 2);
  log.batches.pop_back();
  const FidelityReport report = sacl::verify_execution(log, plan);
  REQUIRE(!report.pass);
  REQUIRE(report.checks[3].name == "batch-count");
  REQUIRE(!report.checks[3].pass);
}

TEST_CASE("a dropped epoch fails check (a)") {
  const CurriculumPlan plan = sacl::build_static_plan();
  const SyntheticDataset data = sacl::generate_synthetic_dataset(60, {0.6, 0.2, 0.2}, 2);
  TrainLog log = sacl::run_plan(plan, data, 16, 2);
  log.stages[1].epochs_executed -= 1;
  const FidelityReport report = sacl::verify_execution(log, plan);
  REQUIRE(!report.checks[0].pass);
}

TEST_CASE("an unflagged floor violation fails check (c)") {
  const CurriculumPlan plan = sacl::build_static_plan();
  const SyntheticDataset data = sacl::generate_synthetic_dataset(60, {0.6, 0.2, 0.2}, 2);
  TrainLog log = sacl::run_plan(plan, data, 16, 2);
  log.batches[0].hard_count = 0;
  log.batches[0].floor_met = true;
  const FidelityReport report = sacl::verify_execution(log, plan);
  REQUIRE(!report.checks[2].pass);
}

TEST_CASE("the learner's loss decreases across stage 1 on an all-easy dataset") {
  CurriculumPlan plan = sacl::build_static_plan();
  plan.stages.resize(1);
  plan.stages[0].epochs = 10;
  const SyntheticDataset data = sacl::generate_synthetic_dataset(200, {1.0, 0.0, 0.0}, 12);
  const TrainLog log = sacl::run_plan(plan, data, 16, 12);
  REQUIRE(log.epochs.front().mean_loss > log.epochs.back().mean_loss);
}

TEST_CASE("no hard samples with a positive floor is logged, not fatal") {
  const CurriculumPlan plan = sacl::build_sacl_plan(sacl::build_static_plan(), 0.1);
  const SyntheticDataset data = sacl::generate_synthetic_dataset(80, {0.7, 0.3, 0.0}, 3);
  const TrainLog log = sacl::run_plan(plan, data, 8, 3);
  bool any_unmet = false;
  for (const auto& rec : log.batches) any_unmet = any_unmet || !rec.floor_met;
  REQUIRE(any_unmet);
  // verification still passes: violations carry the flag
  const FidelityReport report = sacl::verify_execution(log, plan);
  REQUIRE(report.pass);
}

TEST_CASE("train log document round trips") {
  const CurriculumPlan plan = sacl::build_sacl_plan(sacl::build_static_plan(), 0.5);
  const SyntheticDataset data = sacl::generate_synthetic_dataset(60, {0.5, 0.3, 0.2}, 6);
  const TrainLog log = sacl::run_plan(plan, data, 16, 6);
  const auto doc = sacl::to_json(log);
  const TrainLog back = sacl::train_log_from_json(doc);
  REQUIRE(sacl::to_json(back) == doc);
  const FidelityReport report = sacl::verify_execution(back, plan);
  REQUIRE(report.pass);
}
