#pragma once

// Scale-adaptive curriculum rules. Given the data scale rho = |subset| /
// |full| (measured in slices), the static plan's stage lengths, hard-sample
// floors and optimization parameters become functions of rho:
//
//   epochs:      E'  = max{rho^beta * E, gamma * E, E_min}, rounded half
//                away from zero
//   hard floor:  r   = r0 + (1 - rho) * delta_r
//   lr:          lr' = lr * (1 - lr_shrink * (1 - rho) * s / S), s 1-based
//   weight decay wd' = wd_base * (2 - rho)
//   dropout:     p'  = min{0.3, p_drop_base + 0.2 * (1 - rho)}
//
// All rules are pure; at rho = 1 every rule collapses to the baseline.

#include <cmath>

#include "sacl/curriculum.hpp"
#include "sacl/errors.hpp"
#include "sacl/params.hpp"

namespace sacl {

inline int adapt_epochs(int baseline_epochs, double rho, const SaclParams& p = {}) {
  if (baseline_epochs < 1) throw ValidationError("adapt_epochs: baseline epochs must be >= 1");
  if (!(rho > 0.0) || rho > 1.0) throw ValidationError("adapt_epochs: rho must be in (0, 1]");
  const double e = static_cast<double>(baseline_epochs);
  const double scaled = std::max(std::pow(rho, p.beta) * e,
                                 std::max(p.gamma * e, static_cast<double>(p.e_min)));
  return static_cast<int>(std::llround(scaled));  // round half away from zero
}

inline double min_hard_ratio(double rho, const SaclParams& p = {}) {
  if (!(rho > 0.0) || rho > 1.0) throw ValidationError("min_hard_ratio: rho must be in (0, 1]");
  return p.r0 + (1.0 - rho) * p.delta_r;
}

inline double adapt_lr(double lr, double rho, int stage_index, int stage_count,
                       const SaclParams& p = {}) {
  if (!(lr > 0.0)) throw ValidationError("adapt_lr: lr must be > 0");
  if (!(rho > 0.0) || rho > 1.0) throw ValidationError("adapt_lr: rho must be in (0, 1]");
  if (stage_index < 1 || stage_index > stage_count) {
    throw ValidationError("adapt_lr: stage index out of range");
  }
  return lr * (1.0 - p.lr_shrink * (1.0 - rho) * static_cast<double>(stage_index) /
                         static_cast<double>(stage_count));
}

struct Regularization {
  double weight_decay = 0.0;
  double dropout = 0.0;
};

inline Regularization adapt_regularization(double rho, const SaclParams& p = {}) {
  if (!(rho > 0.0) || rho > 1.0) throw ValidationError("adapt_regularization: rho must be in (0, 1]");
  Regularization r;
  r.weight_decay = p.wd_base * (2.0 - rho);
  r.dropout = std::min(0.3, p.p_drop_base + 0.2 * (1.0 - rho));
  return r;
}

// Apply all adaptation rules to a static plan. The input plan is not
// modified; every field the rules do not touch is copied unchanged.
inline CurriculumPlan build_sacl_plan(const CurriculumPlan& static_plan, double rho,
                                      const SaclParams& p = {}) {
  validate(static_plan);
  validate(p);
  if (!(rho > 0.0) || rho > 1.0) throw ValidationError("build_sacl_plan: rho must be in (0, 1]");

  CurriculumPlan plan = static_plan;
  plan.kind = "sacl";
  plan.rho = rho;
  plan.params = p;
  const int stage_count = static_cast<int>(plan.stages.size());
  for (auto& stage : plan.stages) {
    stage.epochs = adapt_epochs(stage.epochs, rho, p);
    stage.lr = adapt_lr(stage.lr, rho, stage.index, stage_count, p);
    stage.min_hard_ratio = min_hard_ratio(rho, p);
  }
  const Regularization reg = adapt_regularization(rho, p);
  plan.weight_decay = reg.weight_decay;
  plan.dropout = reg.dropout;
  validate(plan);
  return plan;
}

}  // namespace sacl
