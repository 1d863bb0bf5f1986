#pragma once

// Patient-level splitting and patient-closed scale subsetting. Both are
// deterministic functions of (manifest order, seed): patients are listed by
// first occurrence, shuffled with a derived splitmix64 stream, and assigned
// single-threaded so the shuffle replays identically everywhere.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sacl/errors.hpp"
#include "sacl/manifest.hpp"
#include "sacl/rng.hpp"

namespace sacl {

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
};

struct ScaleSubset {
  double rho = 1.0;           // requested fraction
  double achieved_rho = 1.0;  // selected slices / total slices
  std::vector<std::string> slice_ids;
  std::uint64_t seed = 0;
};

namespace split_detail {

// Patients in first-occurrence order with their slice ids (manifest order).
inline std::vector<std::pair<std::string, std::vector<std::string>>> patients_of(
    const std::vector<const SliceRecord*>& slices) {
  std::vector<std::pair<std::string, std::vector<std::string>>> patients;
  std::map<std::string, std::size_t> index;
  for (const auto* s : slices) {
    auto it = index.find(s->patient_id);
    if (it == index.end()) {
      index.emplace(s->patient_id, patients.size());
      patients.push_back({s->patient_id, {s->slice_id}});
    } else {
      patients[it->second].second.push_back(s->slice_id);
    }
  }
  return patients;
}

}  // namespace split_detail

inline DatasetSplit patient_split(const DatasetManifest& m, const std::array<double, 3>& ratios,
                                  std::uint64_t seed) {
  if (m.slices.empty()) throw ValidationError("patient_split: empty manifest");
  if (ratios[0] < 0.0 || ratios[1] < 0.0 || ratios[2] < 0.0) {
    throw ValidationError("patient_split: ratios must be non-negative");
  }
  const double ratio_sum = ratios[0] + ratios[1] + ratios[2];
  if (ratio_sum < 1.0 - 1e-9 || ratio_sum > 1.0 + 1e-9) {
    throw ValidationError("patient_split: ratios must sum to 1");
  }

  std::vector<const SliceRecord*> slices;
  slices.reserve(m.slices.size());
  for (const auto& s : m.slices) slices.push_back(&s);
  auto patients = split_detail::patients_of(slices);
  if (patients.size() < 3) throw ValidationError("patient_split: fewer than 3 patients");

  SplitMix64 rng = derive_rng(seed, "split");
  rng.shuffle(patients);

  const auto counts = apportion(patients.size(), {ratios[0], ratios[1], ratios[2]});

  // Slice ids are emitted in manifest order within each subset.
  std::map<std::string, int> subset_of;
  std::size_t p = 0;
  for (int subset = 0; subset < 3; ++subset) {
    for (std::size_t k = 0; k < counts[subset]; ++k, ++p) subset_of[patients[p].first] = subset;
  }

  DatasetSplit split;
  split.seed = seed;
  split.ratios = ratios;
  for (const auto& s : m.slices) {
    switch (subset_of[s.patient_id]) {
      case 0: split.train.push_back(s.slice_id); break;
      case 1: split.val.push_back(s.slice_id); break;
      default: split.test.push_back(s.slice_id); break;
    }
  }
  return split;
}

inline DatasetSplit patient_split(const DatasetManifest& m, std::uint64_t seed) {
  return patient_split(m, {0.8, 0.1, 0.1}, seed);
}

// Greedy patient-closed subset of the training slices: shuffled patients are
// accumulated while the running slice count stays within rho * total, then
// one more patient is taken iff that lands strictly closer to rho. The
// shuffle order does not depend on rho, so subsets are nested across rho for
// a fixed seed.
inline ScaleSubset subsample_scale(const DatasetManifest& m, const std::vector<std::string>& train_ids,
                                   double rho, std::uint64_t seed) {
  if (!(rho > 0.0) || rho > 1.0) throw ValidationError("subsample_scale: rho must be in (0, 1]");
  if (train_ids.empty()) throw ValidationError("subsample_scale: empty train set");

  std::map<std::string, const SliceRecord*> by_id;
  for (const auto& s : m.slices) by_id[s.slice_id] = &s;
  std::vector<const SliceRecord*> slices;
  slices.reserve(train_ids.size());
  for (const auto& id : train_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("subsample_scale: unknown slice_id " + id);
    slices.push_back(it->second);
  }

  auto patients = split_detail::patients_of(slices);
  SplitMix64 rng = derive_rng(seed, "subset");
  rng.shuffle(patients);

  const double total = static_cast<double>(train_ids.size());
  const double target = rho * total;
  std::set<std::string> chosen;
  double cum = 0.0;
  std::size_t p = 0;
  for (; p < patients.size(); ++p) {
    const double next = cum + static_cast<double>(patients[p].second.size());
    if (next > target) break;
    chosen.insert(patients[p].first);
    cum = next;
  }
  if (p < patients.size()) {
    const double with_next = cum + static_cast<double>(patients[p].second.size());
    if (std::abs(with_next / total - rho) < std::abs(cum / total - rho)) {
      chosen.insert(patients[p].first);
    }
  }

  ScaleSubset subset;
  subset.rho = rho;
  subset.seed = seed;
  for (const auto& id : train_ids) {
    if (chosen.count(by_id[id]->patient_id)) subset.slice_ids.push_back(id);
  }
  subset.achieved_rho = static_cast<double>(subset.slice_ids.size()) / total;
  return subset;
}

}  // namespace sacl
