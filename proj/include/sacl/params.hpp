#pragma once

#include "sacl/errors.hpp"

namespace sacl {

// Scale-adaptation constants. Defaults are the published values; baselines
// for weight decay and dropout are conventional detector settings and are
// recorded in every emitted plan.
struct SaclParams {
  double beta = 0.7;        // epoch scaling sensitivity
  double gamma = 0.3;       // minimum epoch retention
  int e_min = 20;           // epoch floor
  double r0 = 0.1;          // baseline hard-sample ratio
  double delta_r = 0.3;     // hard-ratio adjustment
  double lr_shrink = 0.3;   // learning-rate shrink coefficient
  double wd_base = 0.0005;  // baseline weight decay
  double p_drop_base = 0.0; // baseline dropout probability
};

inline void validate(const SaclParams& p) {
  if (!(p.beta > 0.0) || p.beta > 1.0) throw ValidationError("SaclParams: beta must be in (0, 1]");
  if (!(p.gamma > 0.0) || !(p.gamma < 1.0)) throw ValidationError("SaclParams: gamma must be in (0, 1)");
  if (p.e_min < 1) throw ValidationError("SaclParams: e_min must be >= 1");
  if (p.r0 < 0.0 || p.delta_r < 0.0 || p.r0 + p.delta_r > 1.0) {
    throw ValidationError("SaclParams: need r0 >= 0, delta_r >= 0 and r0 + delta_r <= 1");
  }
  if (p.lr_shrink < 0.0 || p.lr_shrink >= 1.0) throw ValidationError("SaclParams: lr_shrink must be in [0, 1)");
  if (p.wd_base < 0.0) throw ValidationError("SaclParams: wd_base must be >= 0");
  if (p.p_drop_base < 0.0 || p.p_drop_base > 1.0) throw ValidationError("SaclParams: p_drop_base must be in [0, 1]");
}

}  // namespace sacl
