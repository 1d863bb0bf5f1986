#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sacl/adapt.hpp"
#include "sacl/rng.hpp"

using sacl::CurriculumPlan;
using sacl::SaclParams;

namespace {

// Direct evaluation of the epoch rule, independent of adapt_epochs.
int oracle_epochs(int e, double rho) {
  const double v = std::max({std::pow(rho, 0.7) * e, 0.3 * e, 20.0});
  return static_cast<int>(std::llround(v));
}

}  // namespace

TEST_CASE("epoch adaptation: pinned values") {
  REQUIRE(sacl::adapt_epochs(100, 1.0) == 100);
  REQUIRE(sacl::adapt_epochs(100, 0.1) == 30);  // max{19.95, 30, 20}
  REQUIRE(sacl::adapt_epochs(50, 0.1) == 20);   // max{9.98, 15, 20}
  REQUIRE(sacl::adapt_epochs(100, 0.5) == 62);  // 61.557... rounded
  REQUIRE(sacl::adapt_epochs(50, 0.5) == 31);   // 30.778... rounded
}

TEST_CASE("epoch adaptation matches the oracle over a grid") {
  for (int e : {20, 50, 100, 200}) {
    for (double rho : {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      REQUIRE(sacl::adapt_epochs(e, rho) == oracle_epochs(e, rho));
    }
  }
}

TEST_CASE("epoch adaptation properties") {
  sacl::SplitMix64 rng(404);
  for (int i = 0; i < 300; ++i) {
    const int e = 20 + static_cast<int>(rng.bounded(200));
    const double rho = 0.01 + 0.99 * rng.unit();
    const int adapted = sacl::adapt_epochs(e, rho);
    REQUIRE(adapted <= e);
    REQUIRE(adapted >= 1);
    // monotone in rho
    const double rho2 = rho + (1.0 - rho) * rng.unit();
    REQUIRE(sacl::adapt_epochs(e, rho2) >= adapted);
  }
  for (int e : {20, 50, 100, 137}) REQUIRE(sacl::adapt_epochs(e, 1.0) == e);
}

TEST_CASE("hard ratio floor: pinned values and range") {
  REQUIRE(sacl::min_hard_ratio(1.0) == Catch::Approx(0.10).epsilon(1e-12));
  REQUIRE(sacl::min_hard_ratio(0.5) == Catch::Approx(0.25).epsilon(1e-12));
  REQUIRE(sacl::min_hard_ratio(0.1) == Catch::Approx(0.37).epsilon(1e-12));
  sacl::SplitMix64 rng(405);
  double prev = 1.0;
  for (double rho = 0.01; rho <= 1.0; rho += 0.01) {
    const double r = sacl::min_hard_ratio(rho);
    REQUIRE(r >= 0.1 - 1e-12);
    REQUIRE(r <= 0.4 + 1e-12);
    REQUIRE(r <= prev + 1e-12);  // non-increasing in rho
    prev = r;
  }
}

TEST_CASE("lr adaptation: pinned values") {
  REQUIRE(sacl::adapt_lr(0.003, 1.0, 1, 3) == 0.003);
  REQUIRE(sacl::adapt_lr(0.003, 0.1, 1, 3) == Catch::Approx(0.00273).epsilon(1e-12));
  REQUIRE(sacl::adapt_lr(0.001, 0.5, 3, 3) == Catch::Approx(0.00085).epsilon(1e-12));
}

TEST_CASE("lr adaptation is strictly decreasing in stage for rho < 1") {
  for (double rho : {0.1, 0.3, 0.7}) {
    double prev = 1e9;
    for (int s = 1; s <= 3; ++s) {
      const double lr = sacl::adapt_lr(0.002, rho, s, 3);
      REQUIRE(lr < prev);
      REQUIRE(lr > 0.0);
      prev = lr;
    }
  }
  REQUIRE_THROWS_AS(sacl::adapt_lr(0.002, 0.5, 4, 3), sacl::ValidationError);
  REQUIRE_THROWS_AS(sacl::adapt_lr(0.002, 0.5, 0, 3), sacl::ValidationError);
}

TEST_CASE("regularization adaptation: pinned values and cap") {
  const auto base = sacl::adapt_regularization(1.0);
  REQUIRE(base.weight_decay == 0.0005);
  REQUIRE(base.dropout == 0.0);

  SaclParams p;
  const auto r02 = sacl::adapt_regularization(0.2, p);
  REQUIRE(r02.weight_decay == Catch::Approx(0.0009).epsilon(1e-12));
  const auto r01 = sacl::adapt_regularization(0.1, p);
  REQUIRE(r01.dropout == Catch::Approx(0.18).epsilon(1e-12));

  // dropout cap at 0.3 regardless of baseline
  SaclParams high;
  high.p_drop_base = 0.25;
  for (double rho = 0.01; rho <= 1.0; rho += 0.01) {
    REQUIRE(sacl::adapt_regularization(rho, high).dropout <= 0.3 + 1e-15);
  }
}

TEST_CASE("sacl plan at rho 0.1: epochs (20,30,30), stage-3 lr, floor 0.37") {
  const CurriculumPlan plan = sacl::build_sacl_plan(sacl::build_static_plan(), 0.1);
  REQUIRE(plan.stages[0].epochs == 20);
  REQUIRE(plan.stages[1].epochs == 30);
  REQUIRE(plan.stages[2].epochs == 30);
  REQUIRE(plan.stages[2].lr == Catch::Approx(0.00073).epsilon(1e-12));
  for (const auto& s : plan.stages) {
    REQUIRE(s.min_hard_ratio == Catch::Approx(0.37).epsilon(1e-12));
  }
  REQUIRE(plan.kind == "sacl");
  REQUIRE(plan.rho == 0.1);
}

TEST_CASE("sacl plan at rho 0.5: epochs follow the epoch oracle (31, 62, 62)") {
  const CurriculumPlan plan = sacl::build_sacl_plan(sacl::build_static_plan(), 0.5);
  REQUIRE(plan.stages[0].epochs == 31);
  REQUIRE(plan.stages[1].epochs == 62);
  REQUIRE(plan.stages[2].epochs == 62);
  for (const auto& s : plan.stages) {
    REQUIRE(s.min_hard_ratio == Catch::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("sacl plan at rho 1 collapses to the static plan") {
  const CurriculumPlan static_plan = sacl::build_static_plan();
  const CurriculumPlan adapted = sacl::build_sacl_plan(static_plan, 1.0);
  REQUIRE(sacl::plans_structurally_equal(static_plan, adapted));
  REQUIRE(adapted.rho == 1.0);
  for (const auto& s : adapted.stages) REQUIRE(s.min_hard_ratio == 0.1);

  // sanity: the comparison is not vacuous
  REQUIRE(!sacl::plans_structurally_equal(static_plan, sacl::build_sacl_plan(static_plan, 0.5)));
}

TEST_CASE("build_sacl_plan is pure: input plan unmodified, repeat calls equal") {
  const CurriculumPlan static_plan = sacl::build_static_plan();
  const auto before = sacl::to_json(static_plan);
  const CurriculumPlan a = sacl::build_sacl_plan(static_plan, 0.2);
  const CurriculumPlan b = sacl::build_sacl_plan(static_plan, 0.2);
  REQUIRE(sacl::to_json(static_plan) == before);
  REQUIRE(sacl::to_json(a) == sacl::to_json(b));
  // untouched fields copied through
  for (std::size_t i = 0; i < a.stages.size(); ++i) {
    REQUIRE(a.stages[i].resolution_px == static_plan.stages[i].resolution_px);
    REQUIRE(a.stages[i].loss.box == static_plan.stages[i].loss.box);
    REQUIRE(a.stages[i].eligible_tiers == static_plan.stages[i].eligible_tiers);
  }
}
