#pragma once

// Command-line front end. Every subcommand is deterministic and scriptable:
// all randomness flows from --seed through named PRNG streams, and every
// emitted document embeds the fully resolved config plus its hash. Exit
// codes: 0 success, 1 validation error, 2 I/O error, 64 usage.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sacl/adapt.hpp"
#include "sacl/complexity.hpp"
#include "sacl/curriculum.hpp"
#include "sacl/errors.hpp"
#include "sacl/imagemetrics.hpp"
#include "sacl/manifest.hpp"
#include "sacl/params.hpp"
#include "sacl/png_io.hpp"
#include "sacl/provenance.hpp"
#include "sacl/sampler.hpp"
#include "sacl/simharness.hpp"
#include "sacl/splitter.hpp"
#include "sacl/version.hpp"

namespace sacl {
namespace cli_detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

inline void write_document(const std::string& path, nlohmann::json doc, const nlohmann::json& config) {
  stamp_artifact(doc, config);
  write_text_file(path, doc.dump(2) + "\n");
}

inline nlohmann::json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
}

// CSV artifacts carry the config hash as a leading comment line.
inline std::string csv_header(const nlohmann::json& config) {
  return "# config_hash=" + config_hash(config) + "\n";
}

struct ScoreConfigFlags {
  ScoreConfig cfg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--easy-max", cfg.easy_max, "Difficulty tier boundary: Easy when score <= this");
    cmd->add_option("--medium-max", cfg.medium_max, "Difficulty tier boundary: Medium when score <= this");
    cmd->add_option("--aspect-tau", cfg.aspect_tau, "Aspect ratio above which a box counts as irregular");
    cmd->add_option("--size-small", cfg.size_small_px, "Smallest-box area (px^2) below which f_size = 3.0");
    cmd->add_option("--size-large", cfg.size_large_px, "Smallest-box area (px^2) above which f_size = 0.5");
    cmd->add_option("--lap-high", cfg.quality.laplacian_high, "Laplacian variance bound for High quality");
    cmd->add_option("--contrast-high", cfg.quality.contrast_high, "Contrast bound for High quality");
    cmd->add_option("--lap-low", cfg.quality.laplacian_low, "Laplacian variance bound for Low quality");
    cmd->add_option("--contrast-low", cfg.quality.contrast_low, "Contrast bound for Low quality");
  }

  nlohmann::json to_config() const {
    return {{"easy_max", cfg.easy_max},
            {"medium_max", cfg.medium_max},
            {"aspect_tau", cfg.aspect_tau},
            {"size_small_px", cfg.size_small_px},
            {"size_large_px", cfg.size_large_px},
            {"laplacian_high", cfg.quality.laplacian_high},
            {"contrast_high", cfg.quality.contrast_high},
            {"laplacian_low", cfg.quality.laplacian_low},
            {"contrast_low", cfg.quality.contrast_low}};
  }
};

struct SaclParamFlags {
  SaclParams params;

  void attach(CLI::App* cmd) {
    cmd->add_option("--beta", params.beta, "Epoch scaling sensitivity");
    cmd->add_option("--gamma", params.gamma, "Minimum epoch retention fraction");
    cmd->add_option("--e-min", params.e_min, "Epoch floor");
    cmd->add_option("--r0", params.r0, "Baseline hard-sample ratio");
    cmd->add_option("--delta-r", params.delta_r, "Hard-ratio adjustment factor");
    cmd->add_option("--lr-shrink", params.lr_shrink, "Learning-rate shrink coefficient");
    cmd->add_option("--wd-base", params.wd_base, "Baseline weight decay");
    cmd->add_option("--p-drop-base", params.p_drop_base, "Baseline dropout probability");
  }

  nlohmann::json to_config() const { return to_json(params); }
};

inline std::vector<std::string> ids_from_doc(const nlohmann::json& doc, const std::string& key,
                                             const std::string& path) {
  if (!doc.contains(key)) throw ValidationError(path + ": missing \"" + key + "\" array");
  return doc.at(key).get<std::vector<std::string>>();
}

// Restrict a manifest to an id set, preserving manifest order.
inline DatasetManifest restrict_manifest(const DatasetManifest& m, const std::vector<std::string>& ids) {
  std::set<std::string> wanted(ids.begin(), ids.end());
  DatasetManifest out;
  out.source_tag = m.source_tag;
  for (const auto& s : m.slices) {
    if (wanted.count(s.slice_id)) out.slices.push_back(s);
  }
  return out;
}

inline std::string histogram_csv(const DatasetManifest& m, const ScoreConfig& cfg,
                                 const nlohmann::json& config) {
  std::size_t easy = 0, medium = 0, hard = 0;
  for (const auto& s : m.slices) {
    switch (slice_tier(s, cfg)) {
      case DifficultyTier::Easy: ++easy; break;
      case DifficultyTier::Medium: ++medium; break;
      default: ++hard; break;
    }
  }
  std::string csv = csv_header(config);
  csv += "tier,count\n";
  csv += "Easy," + std::to_string(easy) + "\n";
  csv += "Medium," + std::to_string(medium) + "\n";
  csv += "Hard," + std::to_string(hard) + "\n";
  return csv;
}

inline std::string format_double(double v) {
  nlohmann::json j = v;
  return j.dump();
}

}  // namespace cli_detail

// Parse and run. `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using nlohmann::json;
  namespace detail = cli_detail;

  CLI::App app{"Curriculum scheduling engine for CT-slice detection training"};
  app.require_subcommand(1);

  // --- ingest ---------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Validate, filter and select manifest slices");
  struct {
    std::string manifest, out_path, images_root, masks_root, clahe_out;
    bool lenient = false, no_select = false;
    double min_diameter_mm = 3.0;
    std::size_t bg_ratio = 2;
    double clahe_clip = 2.0;
    int clahe_tiles = 8;
  } ing;
  ingest->add_option("--manifest", ing.manifest, "Input manifest (JSONL)")->required();
  ingest->add_option("--out", ing.out_path, "Output manifest path")->required();
  ingest->add_flag("--lenient", ing.lenient, "Accept unknown manifest fields");
  ingest->add_option("--min-diameter-mm", ing.min_diameter_mm, "Drop boxes below this diameter");
  ingest->add_option("--bg-ratio", ing.bg_ratio, "Background slices kept per nodule slice");
  ingest->add_flag("--no-select", ing.no_select, "Skip background slice selection");
  auto* images_root_opt =
      ingest->add_option("--images-root", ing.images_root,
                         "Directory of slice PNGs; recomputes quality features when given");
  ingest->add_option("--masks-root", ing.masks_root,
                     "Directory of binary lung-mask PNGs (else lung_coverage = 1.0)")
      ->needs(images_root_opt);
  ingest->add_option("--clahe-out", ing.clahe_out, "Write CLAHE-enhanced PNGs under this directory")
      ->needs(images_root_opt);
  ingest->add_option("--clahe-clip", ing.clahe_clip, "CLAHE clip limit");
  ingest->add_option("--clahe-tiles", ing.clahe_tiles, "CLAHE tile grid per side");

  // --- score ------------------------------------------------------------------
  auto* score = app.add_subcommand("score", "Annotate slices with complexity factors and score");
  struct {
    std::string manifest, out_path, tier_csv;
    bool lenient = false;
  } sc;
  detail::ScoreConfigFlags score_cfg;
  score->add_option("--manifest", sc.manifest, "Input manifest (JSONL)")->required();
  score->add_option("--out", sc.out_path, "Output manifest path (default: in place)");
  score->add_option("--tier-csv", sc.tier_csv, "Write a tier histogram CSV here");
  score->add_flag("--lenient", sc.lenient, "Accept unknown manifest fields");
  score_cfg.attach(score);

  // --- split ------------------------------------------------------------------
  auto* split = app.add_subcommand("split", "Patient-level train/val/test split");
  struct {
    std::string manifest, out_path;
    std::uint64_t seed = 0;
    std::vector<double> ratios{0.8, 0.1, 0.1};
    bool lenient = false;
  } sp;
  split->add_option("--manifest", sp.manifest, "Input manifest (JSONL)")->required();
  split->add_option("--out", sp.out_path, "Output split document")->required();
  split->add_option("--seed", sp.seed, "PRNG seed")->envname("SACL_SEED")->required();
  split->add_option("--ratios", sp.ratios, "Train,val,test patient ratios")->delimiter(',')->expected(3);
  split->add_flag("--lenient", sp.lenient, "Accept unknown manifest fields");

  // --- subset -----------------------------------------------------------------
  auto* subset = app.add_subcommand("subset", "Patient-closed scale subset of the training split");
  struct {
    std::string manifest, split_path, out_path;
    double rho = 1.0;
    std::uint64_t seed = 0;
    bool lenient = false;
  } su;
  subset->add_option("--manifest", su.manifest, "Input manifest (JSONL)")->required();
  subset->add_option("--split", su.split_path, "Split document from `split`")->required();
  subset->add_option("--rho", su.rho, "Target slice fraction in (0,1]")->envname("SACL_RHO")->required();
  subset->add_option("--seed", su.seed, "PRNG seed")->envname("SACL_SEED")->required();
  subset->add_option("--out", su.out_path, "Output subset document")->required();
  subset->add_flag("--lenient", su.lenient, "Accept unknown manifest fields");

  // --- plan-cl / plan-sacl ------------------------------------------------------
  auto* plan_cl = app.add_subcommand("plan-cl", "Emit the static three-stage curriculum plan");
  struct {
    std::string out_path;
    std::uint64_t seed = 0;
  } pc;
  detail::SaclParamFlags pc_params;
  plan_cl->add_option("--out", pc.out_path, "Output plan document")->required();
  plan_cl->add_option("--seed", pc.seed, "Seed recorded in plan provenance")->envname("SACL_SEED");
  pc_params.attach(plan_cl);

  auto* plan_sacl = app.add_subcommand("plan-sacl", "Emit a scale-adapted curriculum plan");
  struct {
    std::string out_path, manifest, subset_path;
    double rho = -1.0;
    std::uint64_t seed = 0;
    bool lenient = false;
  } ps;
  detail::SaclParamFlags ps_params;
  plan_sacl->add_option("--out", ps.out_path, "Output plan document")->required();
  plan_sacl->add_option("--rho", ps.rho, "Data scale in (0,1]")->envname("SACL_RHO");
  plan_sacl->add_option("--subset", ps.subset_path, "Subset document; its achieved_rho is used");
  plan_sacl->add_option("--manifest", ps.manifest, "Manifest recorded for provenance (optional)");
  plan_sacl->add_option("--seed", ps.seed, "Seed recorded in plan provenance")->envname("SACL_SEED");
  plan_sacl->add_flag("--lenient", ps.lenient, "Accept unknown manifest fields");
  ps_params.attach(plan_sacl);

  // --- sample -------------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "Emit the batch plan for one (stage, epoch)");
  struct {
    std::string plan_path, manifest, out_path, split_path, subset_path;
    int stage = 1;
    int epoch = 0;
    std::size_t batch = 16;
    std::uint64_t seed = 0;
    bool lenient = false;
  } sa;
  detail::ScoreConfigFlags sample_cfg;
  sample->add_option("--plan", sa.plan_path, "Plan document")->required();
  sample->add_option("--manifest", sa.manifest, "Scored manifest (JSONL)")->required();
  sample->add_option("--stage", sa.stage, "Stage index (1-based)")->required();
  sample->add_option("--epoch", sa.epoch, "Epoch index (0-based)")->required();
  sample->add_option("--batch", sa.batch, "Batch size")->required();
  sample->add_option("--seed", sa.seed, "PRNG seed")->envname("SACL_SEED")->required();
  sample->add_option("--out", sa.out_path, "Output batch plan document")->required();
  sample->add_option("--split", sa.split_path, "Restrict to the train subset of this split document");
  sample->add_option("--subset", sa.subset_path, "Restrict to this subset document");
  sample->add_flag("--lenient", sa.lenient, "Accept unknown manifest fields");
  sample_cfg.attach(sample);

  // --- simulate -------------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "Run a plan on a synthetic task and verify fidelity");
  struct {
    std::string plan_path;
    std::size_t n = 200;
    std::size_t batch = 16;
    std::uint64_t seed = 0;
    std::vector<double> mix{0.5, 0.3, 0.2};
    std::string out_log = "trainlog.json", out_report = "fidelity.json", out_csv = "loss.csv";
  } si;
  simulate->add_option("--plan", si.plan_path, "Plan document")->required();
  simulate->add_option("--n", si.n, "Synthetic sample count")->required();
  simulate->add_option("--batch", si.batch, "Batch size")->required();
  simulate->add_option("--seed", si.seed, "PRNG seed")->envname("SACL_SEED")->required();
  simulate->add_option("--mix", si.mix, "Easy,Medium,Hard proportions")->delimiter(',')->expected(3);
  simulate->add_option("--out-log", si.out_log, "Train log document path");
  simulate->add_option("--out-report", si.out_report, "Fidelity report document path");
  simulate->add_option("--out-csv", si.out_csv, "Per-epoch mean loss CSV path");

  // --- report ---------------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Summary tables for a scored manifest");
  struct {
    std::string scored, out_dir;
    std::vector<double> rho_grid{0.1, 0.2, 0.5, 1.0};
    bool lenient = false;
  } re;
  detail::ScoreConfigFlags report_cfg;
  detail::SaclParamFlags report_params;
  report->add_option("--scored", re.scored, "Scored manifest (JSONL)")->required();
  report->add_option("--out-dir", re.out_dir, "Directory for CSV outputs")->required();
  report->add_option("--rho-grid", re.rho_grid, "Scales for the adapted-parameter table")->delimiter(',');
  report->add_flag("--lenient", re.lenient, "Accept unknown manifest fields");
  report_cfg.attach(report);
  report_params.attach(report);

  // --- parse ----------------------------------------------------------------------
  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 64;
  }

  try {
    if (app.got_subcommand(ingest)) {
      json config = {{"subcommand", "ingest"},
                     {"manifest", ing.manifest},
                     {"out", ing.out_path},
                     {"lenient", ing.lenient},
                     {"min_diameter_mm", ing.min_diameter_mm},
                     {"bg_ratio", ing.bg_ratio},
                     {"no_select", ing.no_select},
                     {"images_root", ing.images_root},
                     {"masks_root", ing.masks_root},
                     {"clahe_out", ing.clahe_out},
                     {"clahe_clip", ing.clahe_clip},
                     {"clahe_tiles", ing.clahe_tiles}};
      DatasetManifest m = load_manifest(ing.manifest, !ing.lenient);
      if (!ing.images_root.empty()) {
        for (auto& s : m.slices) {
          const auto img_path = std::filesystem::path(ing.images_root) / s.image_path;
          const GrayImage img = read_gray8_png(img_path.string());
          GrayImage mask;
          const GrayImage* mask_ptr = nullptr;
          if (!ing.masks_root.empty()) {
            mask = read_gray8_png((std::filesystem::path(ing.masks_root) / s.image_path).string());
            mask_ptr = &mask;
          }
          s.quality = compute_quality(img, mask_ptr);
          if (!ing.clahe_out.empty()) {
            const auto out_path = std::filesystem::path(ing.clahe_out) / s.image_path;
            std::error_code ec;
            std::filesystem::create_directories(out_path.parent_path(), ec);
            write_gray8_png(out_path.string(), clahe(img, ing.clahe_clip, ing.clahe_tiles));
          }
        }
      }
      m = filter_small_nodules(m, ing.min_diameter_mm);
      if (!ing.no_select) m = select_slices(m, ing.bg_ratio);
      save_manifest(ing.out_path, m);
      out << "ingest: " << m.slices.size() << " slices -> " << ing.out_path << "\n";
      return 0;
    }

    if (app.got_subcommand(score)) {
      const std::string out_path = sc.out_path.empty() ? sc.manifest : sc.out_path;
      json config = {{"subcommand", "score"},
                     {"manifest", sc.manifest},
                     {"out", out_path},
                     {"tier_csv", sc.tier_csv},
                     {"lenient", sc.lenient},
                     {"score", score_cfg.to_config()}};
      DatasetManifest m = load_manifest(sc.manifest, !sc.lenient);
      m = score_manifest(m, score_cfg.cfg);
      save_manifest(out_path, m);
      if (!sc.tier_csv.empty()) {
        detail::write_text_file(sc.tier_csv, detail::histogram_csv(m, score_cfg.cfg, config));
      }
      out << "score: " << m.slices.size() << " slices -> " << out_path << "\n";
      return 0;
    }

    if (app.got_subcommand(split)) {
      json config = {{"subcommand", "split"}, {"manifest", sp.manifest},      {"out", sp.out_path},
                     {"seed", sp.seed},       {"ratios", sp.ratios},          {"lenient", sp.lenient}};
      const DatasetManifest m = load_manifest(sp.manifest, !sp.lenient);
      const DatasetSplit result =
          patient_split(m, {sp.ratios[0], sp.ratios[1], sp.ratios[2]}, sp.seed);
      json doc;
      doc["seed"] = result.seed;
      doc["prng"] = kPrngName;
      doc["ratios"] = {result.ratios[0], result.ratios[1], result.ratios[2]};
      doc["train"] = result.train;
      doc["val"] = result.val;
      doc["test"] = result.test;
      detail::write_document(sp.out_path, doc, config);
      out << "split: " << result.train.size() << "/" << result.val.size() << "/" << result.test.size()
          << " slices -> " << sp.out_path << "\n";
      return 0;
    }

    if (app.got_subcommand(subset)) {
      json config = {{"subcommand", "subset"}, {"manifest", su.manifest}, {"split", su.split_path},
                     {"rho", su.rho},          {"seed", su.seed},         {"out", su.out_path},
                     {"lenient", su.lenient}};
      const DatasetManifest m = load_manifest(su.manifest, !su.lenient);
      const json split_doc = detail::read_document(su.split_path);
      const auto train_ids = detail::ids_from_doc(split_doc, "train", su.split_path);
      const ScaleSubset result = subsample_scale(m, train_ids, su.rho, su.seed);
      json doc;
      doc["rho"] = result.rho;
      doc["achieved_rho"] = result.achieved_rho;
      doc["seed"] = result.seed;
      doc["prng"] = kPrngName;
      doc["slice_ids"] = result.slice_ids;
      detail::write_document(su.out_path, doc, config);
      out << "subset: " << result.slice_ids.size() << " slices (achieved_rho "
          << detail::format_double(result.achieved_rho) << ") -> " << su.out_path << "\n";
      return 0;
    }

    if (app.got_subcommand(plan_cl)) {
      json config = {{"subcommand", "plan-cl"},
                     {"out", pc.out_path},
                     {"seed", pc.seed},
                     {"params", pc_params.to_config()}};
      CurriculumPlan plan = build_static_plan(pc_params.params);
      plan.provenance.seed = pc.seed;
      plan.provenance.config_hash = config_hash(config);
      detail::write_document(pc.out_path, to_json(plan), config);
      out << "plan-cl: " << plan.stages.size() << " stages -> " << pc.out_path << "\n";
      return 0;
    }

    if (app.got_subcommand(plan_sacl)) {
      double rho = ps.rho;
      if (!ps.subset_path.empty()) {
        const json subset_doc = detail::read_document(ps.subset_path);
        if (!subset_doc.contains("achieved_rho")) {
          throw ValidationError(ps.subset_path + ": missing achieved_rho");
        }
        rho = subset_doc.at("achieved_rho").get<double>();
      }
      if (rho <= 0.0) {
        throw ValidationError("plan-sacl: provide --rho in (0,1] or --subset");
      }
      json config = {{"subcommand", "plan-sacl"}, {"out", ps.out_path},
                     {"rho", rho},                {"subset", ps.subset_path},
                     {"manifest", ps.manifest},   {"seed", ps.seed},
                     {"lenient", ps.lenient},     {"params", ps_params.to_config()}};
      if (!ps.manifest.empty()) {
        const DatasetManifest m = load_manifest(ps.manifest, !ps.lenient);
        config["manifest_slices"] = m.slices.size();
      }
      CurriculumPlan plan = build_sacl_plan(build_static_plan(ps_params.params), rho, ps_params.params);
      plan.provenance.seed = ps.seed;
      plan.provenance.config_hash = config_hash(config);
      detail::write_document(ps.out_path, to_json(plan), config);
      out << "plan-sacl: rho " << detail::format_double(rho) << " -> " << ps.out_path << "\n";
      return 0;
    }

    if (app.got_subcommand(sample)) {
      json config = {{"subcommand", "sample"},   {"plan", sa.plan_path}, {"manifest", sa.manifest},
                     {"stage", sa.stage},        {"epoch", sa.epoch},    {"batch", sa.batch},
                     {"seed", sa.seed},          {"out", sa.out_path},   {"split", sa.split_path},
                     {"subset", sa.subset_path}, {"lenient", sa.lenient}, {"score", sample_cfg.to_config()}};
      const CurriculumPlan plan = plan_from_json(detail::read_document(sa.plan_path));
      DatasetManifest m = load_manifest(sa.manifest, !sa.lenient);
      if (!sa.split_path.empty()) {
        const json split_doc = detail::read_document(sa.split_path);
        m = detail::restrict_manifest(m, detail::ids_from_doc(split_doc, "train", sa.split_path));
      }
      if (!sa.subset_path.empty()) {
        const json subset_doc = detail::read_document(sa.subset_path);
        m = detail::restrict_manifest(m, detail::ids_from_doc(subset_doc, "slice_ids", sa.subset_path));
      }
      if (sa.stage < 1 || sa.stage > static_cast<int>(plan.stages.size())) {
        throw ValidationError("sample: stage index out of range");
      }
      const StagePlan& stage = plan.stages[static_cast<std::size_t>(sa.stage - 1)];
      if (sa.epoch < 0 || sa.epoch >= stage.epochs) {
        throw ValidationError("sample: epoch index out of range for stage");
      }
      std::vector<const SliceRecord*> slices;
      for (const auto& s : m.slices) slices.push_back(&s);
      const StagePools pools = stage_pool(stage, slices, sample_cfg.cfg);
      const BatchPlan batches = build_epoch_batches(pools.eligible, pools.hard_pool, sa.batch,
                                                    stage.min_hard_ratio, sa.seed, sa.stage, sa.epoch);
      detail::write_document(sa.out_path, to_json(batches), config);
      out << "sample: " << batches.batches.size() << " batches -> " << sa.out_path << "\n";
      return 0;
    }

    if (app.got_subcommand(simulate)) {
      json config = {{"subcommand", "simulate"}, {"plan", si.plan_path},       {"n", si.n},
                     {"batch", si.batch},        {"seed", si.seed},            {"mix", si.mix},
                     {"out_log", si.out_log},    {"out_report", si.out_report}, {"out_csv", si.out_csv}};
      const CurriculumPlan plan = plan_from_json(detail::read_document(si.plan_path));
      const SyntheticDataset data =
          generate_synthetic_dataset(si.n, {si.mix[0], si.mix[1], si.mix[2]}, si.seed);
      const TrainLog log = run_plan(plan, data, si.batch, si.seed);
      const FidelityReport fidelity = verify_execution(log, plan);
      detail::write_document(si.out_log, to_json(log), config);
      detail::write_document(si.out_report, to_json(fidelity), config);
      std::string csv = detail::csv_header(config);
      csv += "stage,epoch,mean_loss\n";
      for (const auto& e : log.epochs) {
        csv += std::to_string(e.stage_index) + "," + std::to_string(e.epoch_index) + "," +
               detail::format_double(e.mean_loss) + "\n";
      }
      detail::write_text_file(si.out_csv, csv);
      out << "simulate: " << log.batches.size() << " batches, fidelity "
          << (fidelity.pass ? "pass" : "FAIL") << " -> " << si.out_log << "\n";
      return 0;
    }

    if (app.got_subcommand(report)) {
      json config = {{"subcommand", "report"},   {"scored", re.scored},
                     {"out_dir", re.out_dir},    {"rho_grid", re.rho_grid},
                     {"lenient", re.lenient},    {"score", report_cfg.to_config()},
                     {"params", report_params.to_config()}};
      const DatasetManifest m = load_manifest(re.scored, !re.lenient);
      std::error_code ec;
      std::filesystem::create_directories(re.out_dir, ec);

      detail::write_text_file(re.out_dir + "/complexity_histogram.csv",
                              detail::histogram_csv(m, report_cfg.cfg, config));

      const CurriculumPlan static_plan = build_static_plan(report_params.params);
      std::vector<const SliceRecord*> slices;
      for (const auto& s : m.slices) slices.push_back(&s);
      std::string pools_csv = detail::csv_header(config);
      pools_csv += "stage,eligible,hard_pool\n";
      for (const auto& stage : static_plan.stages) {
        const StagePools pools = stage_pool(stage, slices, report_cfg.cfg);
        pools_csv += std::to_string(stage.index) + "," + std::to_string(pools.eligible.size()) + "," +
                     std::to_string(pools.hard_pool.size()) + "\n";
      }
      detail::write_text_file(re.out_dir + "/stage_pools.csv", pools_csv);

      std::string grid_csv = detail::csv_header(config);
      grid_csv += "rho,stage,epochs,lr,min_hard_ratio,weight_decay,dropout\n";
      for (double rho : re.rho_grid) {
        const CurriculumPlan adapted = build_sacl_plan(static_plan, rho, report_params.params);
        for (const auto& stage : adapted.stages) {
          grid_csv += detail::format_double(rho) + "," + std::to_string(stage.index) + "," +
                      std::to_string(stage.epochs) + "," + detail::format_double(stage.lr) + "," +
                      detail::format_double(stage.min_hard_ratio) + "," +
                      detail::format_double(adapted.weight_decay) + "," +
                      detail::format_double(adapted.dropout) + "\n";
        }
      }
      detail::write_text_file(re.out_dir + "/adapted_params.csv", grid_csv);
      out << "report: 3 tables -> " << re.out_dir << "\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  err << "error: no subcommand\n";
  return 64;
}

}  // namespace sacl
