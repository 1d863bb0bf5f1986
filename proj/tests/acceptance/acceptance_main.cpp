// Acceptance suite: one check per release criterion, one pass/fail line
// each. Oracles here are deliberately written out independently of the
// library code they check. Exit status is the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sacl/adapt.hpp"
#include "sacl/cli.hpp"
#include "sacl/complexity.hpp"
#include "sacl/curriculum.hpp"
#include "sacl/imagemetrics.hpp"
#include "sacl/manifest.hpp"
#include "sacl/rng.hpp"
#include "sacl/sampler.hpp"
#include "sacl/simharness.hpp"
#include "sacl/splitter.hpp"

namespace {

struct Criterion {
  int id;
  std::string name;
  double time_budget_s;
  std::function<bool(std::string&)> run;
};

bool nearly(double a, double b, double rel = 1e-12) {
  if (a == b) return true;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel * scale;
}

// --- 1: adaptive epoch oracle -----------------------------------------------

bool check_epochs(std::string& detail) {
  const struct {
    int e;
    double rho;
    int expected;
  } pinned[] = {{100, 0.1, 30}, {50, 0.1, 20}};
  for (const auto& p : pinned) {
    if (sacl::adapt_epochs(p.e, p.rho) != p.expected) {
      detail = "pinned (" + std::to_string(p.e) + ", " + std::to_string(p.rho) + ") != " +
               std::to_string(p.expected);
      return false;
    }
  }
  for (int e : {50, 100}) {
    for (double rho : {0.1, 0.2, 0.5, 1.0}) {
      const double direct =
          std::max(std::pow(rho, 0.7) * static_cast<double>(e),
                   std::max(0.3 * static_cast<double>(e), 20.0));
      const int expected = static_cast<int>(std::llround(direct));
      const int got = sacl::adapt_epochs(e, rho);
      if (got != expected) {
        detail = "E=" + std::to_string(e) + " rho=" + std::to_string(rho) + ": got " +
                 std::to_string(got) + ", oracle " + std::to_string(expected);
        return false;
      }
    }
  }
  return true;
}

// --- 2: hard ratio, lr, regularization oracles --------------------------------

bool check_scale_rules(std::string& detail) {
  if (!nearly(sacl::min_hard_ratio(0.5), 0.25) || !nearly(sacl::min_hard_ratio(0.1), 0.37) ||
      !nearly(sacl::adapt_lr(0.003, 0.1, 1, 3), 0.00273)) {
    detail = "pinned value mismatch";
    return false;
  }
  const double baselines[][3] = {{0.003, 0.0005, 0.0}, {0.002, 0.001, 0.1}, {0.0005, 0.0002, 0.25}};
  for (int i = 0; i < 10; ++i) {
    const double rho = 0.1 + 0.09 * i;  // 10 scales in (0, 1]
    for (int s = 1; s <= 3; ++s) {
      for (const auto& base : baselines) {
        sacl::SaclParams p;
        p.wd_base = base[1];
        p.p_drop_base = base[2];
        const double lr_direct = base[0] * (1.0 - 0.3 * (1.0 - rho) * s / 3.0);
        const double r_direct = 0.1 + (1.0 - rho) * 0.3;
        const double wd_direct = base[1] * (2.0 - rho);
        const double drop_direct = std::min(0.3, base[2] + 0.2 * (1.0 - rho));
        const auto reg = sacl::adapt_regularization(rho, p);
        if (!nearly(sacl::adapt_lr(base[0], rho, s, 3), lr_direct) ||
            !nearly(sacl::min_hard_ratio(rho, p), r_direct) || !nearly(reg.weight_decay, wd_direct) ||
            !nearly(reg.dropout, drop_direct)) {
          detail = "rho=" + std::to_string(rho) + " s=" + std::to_string(s);
          return false;
        }
      }
    }
  }
  return true;
}

// --- 3: identity-scale collapse -----------------------------------------------

bool check_identity_collapse(std::string& detail) {
  const sacl::CurriculumPlan cl = sacl::build_static_plan();
  const sacl::CurriculumPlan sa = sacl::build_sacl_plan(cl, 1.0);
  if (!sacl::plans_structurally_equal(cl, sa)) {
    detail = "plans differ structurally at rho = 1";
    return false;
  }
  for (const auto& plan : {cl, sa}) {
    for (const auto& stage : plan.stages) {
      if (stage.min_hard_ratio != 0.1) {
        detail = "hard floor != 0.1 in " + plan.kind;
        return false;
      }
    }
  }
  if (sa.rho != 1.0) {
    detail = "rho metadata missing";
    return false;
  }
  return true;
}

// --- 4: static plan fidelity ----------------------------------------------------

bool check_static_plan(std::string& detail) {
  const sacl::CurriculumPlan plan = sacl::build_static_plan();
  const int res[] = {512, 640, 768};
  const int epochs[] = {50, 100, 100};
  const double lrs[] = {0.003, 0.002, 0.001};
  const double loss[][3] = {{2.0, 4.0, 0.1}, {5.0, 2.0, 0.5}, {7.0, 1.5, 1.0}};
  const double aug[][3] = {{3.0, 0.05, 0.10}, {8.0, 0.10, 0.20}, {12.0, 0.15, 0.30}};
  if (plan.stages.size() != 3) {
    detail = "stage count";
    return false;
  }
  for (int i = 0; i < 3; ++i) {
    const auto& s = plan.stages[i];
    if (s.resolution_px != res[i] || s.epochs != epochs[i] || s.lr != lrs[i] ||
        s.loss.box != loss[i][0] || s.loss.cls != loss[i][1] || s.loss.dfl != loss[i][2] ||
        s.aug.rotation_deg != aug[i][0] || s.aug.translate_frac != aug[i][1] ||
        s.aug.scale_frac != aug[i][2]) {
      detail = "stage " + std::to_string(i + 1) + " constants";
      return false;
    }
  }
  return true;
}

// --- 5: complexity scorer vs brute-force factor tables ----------------------------

bool check_complexity(std::string& detail) {
  sacl::SplitMix64 rng(20250810);
  for (int trial = 0; trial < 200; ++trial) {
    sacl::SliceRecord s;
    s.slice_id = "c" + std::to_string(trial);
    s.patient_id = "p";
    s.image_path = "c.png";
    s.width_px = 512;
    s.height_px = 512;
    s.spacing_mm = 0.7;
    const std::size_t n_boxes = rng.bounded(6);
    for (std::size_t b = 0; b < n_boxes; ++b) {
      const int w = 1 + static_cast<int>(rng.bounded(60));
      const int h = 1 + static_cast<int>(rng.bounded(60));
      s.boxes.push_back({static_cast<int>(rng.bounded(400)), static_cast<int>(rng.bounded(400)), w, h});
    }
    s.quality = sacl::QualityFeatures{static_cast<double>(rng.bounded(1200)),
                                      static_cast<double>(rng.bounded(60)), 1.0};

    // brute-force factor tables, written out directly
    double f_cnt;
    if (n_boxes == 0) f_cnt = 0.5;
    else if (n_boxes == 1) f_cnt = 1.0;
    else if (n_boxes <= 3) f_cnt = 2.5;
    else f_cnt = 4.0;

    double f_size = 0.5;
    if (n_boxes > 0) {
      long long smallest = static_cast<long long>(s.boxes[0].w_px) * s.boxes[0].h_px;
      for (const auto& b : s.boxes) {
        smallest = std::min(smallest, static_cast<long long>(b.w_px) * b.h_px);
      }
      if (smallest > 1000) f_size = 0.5;
      else if (smallest >= 400) f_size = 1.0;
      else f_size = 3.0;
    }

    double f_shape = 0.5;
    if (n_boxes > 0) {
      int irregular = 0;
      for (const auto& b : s.boxes) {
        const double w = b.w_px, h = b.h_px;
        if (std::max(w / h, h / w) > 1.5) ++irregular;
      }
      f_shape = irregular == 0 ? 0.5 : (irregular == 1 ? 1.0 : 2.0);
    }

    double f_qual;
    if (s.quality->laplacian_var > 500.0 && s.quality->contrast > 30.0) f_qual = 0.5;
    else if (s.quality->laplacian_var < 100.0 || s.quality->contrast < 10.0) f_qual = 2.0;
    else f_qual = 1.0;

    const double expected = f_cnt + f_size + f_shape + f_qual;
    const auto factors = sacl::complexity_factors(s);
    const double got = sacl::complexity_score(factors);
    if (got != expected) {
      detail = s.slice_id + ": got " + std::to_string(got) + ", oracle " + std::to_string(expected);
      return false;
    }
    if (got < 2.0 || got > 11.0) {
      detail = s.slice_id + ": score out of [2, 11]";
      return false;
    }
  }
  if (sacl::difficulty_tier(3.0) != sacl::DifficultyTier::Easy ||
      sacl::difficulty_tier(6.0) != sacl::DifficultyTier::Medium ||
      sacl::difficulty_tier(10.0) != sacl::DifficultyTier::Hard) {
    detail = "tier anchors (3, 6, 10) misassigned";
    return false;
  }
  return true;
}

// --- 6: sampler floor property -----------------------------------------------------

bool check_sampler(std::string& detail) {
  sacl::SplitMix64 rng(616);
  const double ratios[] = {0.1, 0.25, 0.37};
  const std::size_t batch_sizes[] = {4, 8, 16};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n_eligible = 10 + rng.bounded(491);
    const std::size_t n_hard = 10 + rng.bounded(491);
    std::vector<std::string> eligible(n_eligible);
    for (std::size_t i = 0; i < n_eligible; ++i) eligible[i] = "e" + std::to_string(i);
    std::vector<std::string> hard;
    if (rng.bounded(2) == 1) {
      for (std::size_t i = 0; i < std::min(n_hard, n_eligible); ++i) hard.push_back(eligible[i]);
    } else {
      for (std::size_t i = 0; i < n_hard; ++i) hard.push_back("h" + std::to_string(i));
    }
    const std::size_t b = batch_sizes[rng.bounded(3)];
    const double r = ratios[rng.bounded(3)];
    const auto plan = sacl::build_epoch_batches(eligible, hard, b, r, rng.next(), 1, 0);

    std::set<std::string> seen;
    for (const auto& batch : plan.batches) {
      const std::size_t floor =
          static_cast<std::size_t>(std::ceil(r * static_cast<double>(batch.slice_ids.size()) - 1e-9));
      if (batch.hard_count() < floor) {
        detail = "trial " + std::to_string(trial) + ": floor violated";
        return false;
      }
      std::set<std::string> unique(batch.slice_ids.begin(), batch.slice_ids.end());
      if (unique.size() != batch.slice_ids.size()) {
        detail = "trial " + std::to_string(trial) + ": duplicate in batch";
        return false;
      }
      seen.insert(unique.begin(), unique.end());
    }
    for (const auto& id : eligible) {
      if (!seen.count(id)) {
        detail = "trial " + std::to_string(trial) + ": " + id + " missing from epoch";
        return false;
      }
    }
  }
  return true;
}

// --- 7: split leakage ---------------------------------------------------------------

bool check_split(std::string& detail) {
  sacl::SplitMix64 rng(717);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t patients = 3 + rng.bounded(60);
    sacl::DatasetManifest m;
    std::size_t idx = 0;
    std::size_t max_patient = 0;
    for (std::size_t p = 0; p < patients; ++p) {
      const std::size_t n = 1 + rng.bounded(14);
      max_patient = std::max(max_patient, n);
      for (std::size_t i = 0; i < n; ++i) {
        sacl::SliceRecord s;
        s.slice_id = "s" + std::to_string(idx++);
        s.patient_id = "p" + std::to_string(p);
        s.image_path = s.slice_id + ".png";
        s.width_px = 64;
        s.height_px = 64;
        s.spacing_mm = 0.7;
        m.slices.push_back(std::move(s));
      }
    }
    const std::uint64_t seed = rng.next();
    const auto split = sacl::patient_split(m, seed);

    std::map<std::string, std::string> patient_of;
    for (const auto& s : m.slices) patient_of[s.slice_id] = s.patient_id;
    std::map<std::string, int> where;
    std::set<std::string> train_p, val_p, test_p;
    for (const auto& id : split.train) train_p.insert(patient_of[id]);
    for (const auto& id : split.val) val_p.insert(patient_of[id]);
    for (const auto& id : split.test) test_p.insert(patient_of[id]);
    for (const auto& p : train_p) {
      if (val_p.count(p) || test_p.count(p)) {
        detail = "trial " + std::to_string(trial) + ": patient " + p + " leaks";
        return false;
      }
    }
    for (const auto& p : val_p) {
      if (test_p.count(p)) {
        detail = "trial " + std::to_string(trial) + ": patient " + p + " leaks";
        return false;
      }
    }
    const double t = static_cast<double>(patients);
    if (std::abs(static_cast<double>(train_p.size()) - 0.8 * t) > 1.0 ||
        std::abs(static_cast<double>(val_p.size()) - 0.1 * t) > 1.0 ||
        std::abs(static_cast<double>(test_p.size()) - 0.1 * t) > 1.0) {
      detail = "trial " + std::to_string(trial) + ": counts off target";
      return false;
    }

    // subsample: patient-closed and within max patient share of rho
    if (!split.train.empty()) {
      const double rho = 0.05 + 0.9 * rng.unit();
      const auto subset = sacl::subsample_scale(m, split.train, rho, seed);
      std::map<std::string, std::size_t> total_count, chosen_count;
      for (const auto& id : split.train) total_count[patient_of[id]] += 1;
      for (const auto& id : subset.slice_ids) chosen_count[patient_of[id]] += 1;
      for (const auto& [p, c] : chosen_count) {
        if (c != total_count[p]) {
          detail = "trial " + std::to_string(trial) + ": subset not patient-closed";
          return false;
        }
      }
      const double share =
          static_cast<double>(max_patient) / static_cast<double>(split.train.size());
      if (std::abs(subset.achieved_rho - rho) > share + 1e-12) {
        detail = "trial " + std::to_string(trial) + ": achieved_rho too far from target";
        return false;
      }
    }
  }
  return true;
}

// --- 8: image metric oracles -----------------------------------------------------------

bool check_image_metrics(std::string& detail) {
  sacl::SplitMix64 rng(818);
  for (int trial = 0; trial < 50; ++trial) {
    sacl::GrayImage img(16, 16);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.bounded(256));

    // brute-force laplacian variance
    std::vector<double> responses;
    for (int y = 1; y < 15; ++y) {
      for (int x = 1; x < 15; ++x) {
        responses.push_back(static_cast<double>(img.at(x, y - 1)) + img.at(x, y + 1) +
                            img.at(x - 1, y) + img.at(x + 1, y) - 4.0 * img.at(x, y));
      }
    }
    double mean = 0.0;
    for (double r : responses) mean += r;
    mean /= static_cast<double>(responses.size());
    double var = 0.0;
    for (double r : responses) var += (r - mean) * (r - mean);
    var /= static_cast<double>(responses.size());

    double pmean = 0.0;
    for (auto p : img.pixels) pmean += p;
    pmean /= static_cast<double>(img.pixels.size());
    double pvar = 0.0;
    for (auto p : img.pixels) pvar += (p - pmean) * (p - pmean);
    const double stddev = std::sqrt(pvar / static_cast<double>(img.pixels.size()));

    if (std::abs(sacl::laplacian_variance(img) - var) > 1e-9 ||
        std::abs(sacl::contrast_stddev(img) - stddev) > 1e-9) {
      detail = "trial " + std::to_string(trial) + ": oracle mismatch";
      return false;
    }
  }

  const sacl::GrayImage flat(16, 16, 77);
  if (sacl::laplacian_variance(flat) != 0.0 || sacl::contrast_stddev(flat) != 0.0) {
    detail = "constant image metrics non-zero";
    return false;
  }

  sacl::GrayImage board(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) board.set(x, y, ((x + y) % 2 == 0) ? 0 : 255);
  }
  if (std::abs(sacl::laplacian_variance(board) - 1020.0 * 1020.0) > 1e-6) {
    detail = "checkerboard variance != 1020^2";
    return false;
  }
  return true;
}

// --- 9: end-to-end fidelity matrix ---------------------------------------------------------

bool check_fidelity_matrix(std::string& detail) {
  for (const bool adapted : {false, true}) {
    for (const double rho : {0.1, 0.5, 1.0}) {
      for (const std::uint64_t seed : {11ull, 22ull, 33ull}) {
        sacl::CurriculumPlan plan = sacl::build_static_plan();
        if (adapted) plan = sacl::build_sacl_plan(plan, rho);
        const auto data = sacl::generate_synthetic_dataset(240, {0.5, 0.3, 0.2}, seed);
        const auto log = sacl::run_plan(plan, data, 16, seed);
        const auto report = sacl::verify_execution(log, plan);
        if (!report.pass) {
          for (const auto& c : report.checks) {
            if (!c.pass) {
              detail = std::string(adapted ? "sacl" : "cl") + " rho=" + std::to_string(rho) +
                       " seed=" + std::to_string(seed) + ": " + c.name + ": " + c.detail;
              return false;
            }
          }
        }
      }
    }
  }
  return true;
}

// --- 10: byte-identical artifacts ------------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool check_determinism(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sacl_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto at = [&dir](const std::string& name) { return (dir / name).string(); };

  // demo manifest
  {
    std::ofstream out(at("m.jsonl"));
    sacl::SplitMix64 rng(1001);
    for (int i = 0; i < 80; ++i) {
      nlohmann::json j;
      j["slice_id"] = "s" + std::to_string(i);
      j["patient_id"] = "p" + std::to_string(i / 5);
      j["image_path"] = "s.png";
      j["width_px"] = 256;
      j["height_px"] = 256;
      j["spacing_mm"] = 0.7;
      j["boxes"] = nlohmann::json::array();
      if (i % 2 == 0) {
        j["boxes"].push_back({{"x_px", 5},
                              {"y_px", 5},
                              {"w_px", 5 + static_cast<int>(rng.bounded(50))},
                              {"h_px", 5 + static_cast<int>(rng.bounded(50))}});
      }
      j["quality"] = {{"laplacian_var", static_cast<double>(rng.bounded(1200))},
                      {"contrast", static_cast<double>(rng.bounded(60))},
                      {"lung_coverage", 0.8}};
      out << j.dump() << "\n";
    }
  }

  std::ostringstream sink;
  const auto cli = [&sink](std::vector<std::string> args) {
    return sacl::run_cli(std::move(args), sink, sink);
  };

  if (cli({"score", "--manifest", at("m.jsonl"), "--out", at("scored.jsonl")}) != 0) {
    detail = "score failed";
    return false;
  }

  // each step reruns the identical invocation into the same path and
  // compares against a snapshot of the first run
  struct Step {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> outputs;
  };
  const std::vector<Step> steps = {
      {"split",
       {"split", "--manifest", at("scored.jsonl"), "--seed", "5", "--out", at("sp.json")},
       {at("sp.json")}},
      {"subset",
       {"subset", "--manifest", at("scored.jsonl"), "--split", at("sp.json"), "--rho", "0.5",
        "--seed", "5", "--out", at("su.json")},
       {at("su.json")}},
      {"plan-sacl",
       {"plan-sacl", "--rho", "0.1", "--seed", "5", "--out", at("pl.json")},
       {at("pl.json")}},
      {"sample",
       {"sample", "--plan", at("pl.json"), "--manifest", at("scored.jsonl"), "--stage", "3",
        "--epoch", "1", "--batch", "8", "--seed", "5", "--out", at("ba.json")},
       {at("ba.json")}},
      {"simulate",
       {"simulate", "--plan", at("pl.json"), "--n", "100", "--batch", "8", "--seed", "5",
        "--out-log", at("lg.json"), "--out-report", at("re.json"), "--out-csv", at("cs.csv")},
       {at("lg.json"), at("re.json"), at("cs.csv")}},
  };

  for (const auto& step : steps) {
    if (cli(step.args) != 0) {
      detail = step.name + " failed";
      return false;
    }
    std::vector<std::string> snapshot;
    for (const auto& path : step.outputs) snapshot.push_back(slurp(path));
    if (cli(step.args) != 0) {
      detail = step.name + " failed on rerun";
      return false;
    }
    for (std::size_t i = 0; i < step.outputs.size(); ++i) {
      if (snapshot[i].empty() || snapshot[i] != slurp(step.outputs[i])) {
        detail = step.name + ": artifacts differ between reruns";
        return false;
      }
    }
  }
  fs::remove_all(dir);
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "adaptive epoch schedule matches direct evaluation", 1.0, check_epochs},
      {2, "hard-ratio, lr and regularization rules match direct evaluation", 1.0, check_scale_rules},
      {3, "identity-scale plan collapses onto the static plan", 5.0, check_identity_collapse},
      {4, "static plan equals the published stage constants", 5.0, check_static_plan},
      {5, "complexity scorer matches brute-force factor tables", 5.0, check_complexity},
      {6, "sampler floor, coverage and uniqueness over 1000 random epochs", 30.0, check_sampler},
      {7, "patient splits leak-free with ratio and subset guarantees", 30.0, check_split},
      {8, "image metrics match brute-force oracles", 5.0, check_image_metrics},
      {9, "end-to-end fidelity across plan kind, scale and seed", 120.0, check_fidelity_matrix},
      {10, "repeated runs emit byte-identical artifacts", 60.0, check_determinism},
  };

  int failures = 0;
  for (auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > c.time_budget_s) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    std::printf("[%s] %2d. %s (%.3fs)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(), elapsed,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
