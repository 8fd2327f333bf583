#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "estkit/cli.hpp"

namespace {

using estkit::cli::kExitInputError;

std::vector<std::pair<std::string, std::filesystem::path>> parse_aux(
    const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, std::filesystem::path>> aux;
  for (const std::string& entry : raw) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
      throw CLI::ValidationError("--aux", "expected name=path, got '" + entry + "'");
    }
    aux.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return aux;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion-state-transition features and deception-classifier evaluation"};
  app.require_subcommand(1);

  // synth -------------------------------------------------------------------
  estkit::cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--clips-per-class", synth.config.clips_per_class,
                        "Clips per class (default 100)");
  synth_cmd->add_option("--frames-min", synth.config.frames_min, "Minimum frames per clip");
  synth_cmd->add_option("--frames-max", synth.config.frames_max, "Maximum frames per clip");
  synth_cmd->add_option("--separation", synth.config.separation,
                        "Class-chain separation in [0,1] (default 1)");
  synth_cmd->add_option("--audio-noise", synth.config.audio_noise,
                        "Audio corruption probability (default 0.1)");
  synth_cmd->add_option("--seed", synth.config.seed, "Generator seed");

  // extract -----------------------------------------------------------------
  estkit::cli::ExtractOptions extract;
  std::string extract_audio;
  auto* extract_cmd =
      app.add_subcommand("extract", "Compute per-clip transition features and aggregates");
  extract_cmd->add_option("--manifest", extract.manifest, "manifest.csv")->required();
  extract_cmd->add_option("--visual", extract.visual, "visual_states.csv")->required();
  extract_cmd->add_option("--audio", extract_audio, "audio_states.csv (optional)");
  extract_cmd->add_option("--out-dir", extract.out_dir, "Output directory")->required();

  // fuse --------------------------------------------------------------------
  estkit::cli::FuseOptions fuse;
  std::vector<std::string> fuse_aux;
  auto* fuse_cmd = app.add_subcommand("fuse", "Concatenate feature blocks into fused.csv");
  fuse_cmd->add_option("--manifest", fuse.manifest, "manifest.csv")->required();
  fuse_cmd->add_option("--aux", fuse_aux, "Feature block as name=path (repeatable)")
      ->required()
      ->take_all();
  fuse_cmd->add_option("--blocks", fuse.blocks, "Block order (default: --aux order)")
      ->delimiter(',');
  fuse_cmd->add_option("--out-dir", fuse.out_dir, "Output directory")->required();

  // select ------------------------------------------------------------------
  estkit::cli::SelectOptions select;
  bool select_anova = false;
  auto* select_cmd =
      app.add_subcommand("select", "Whole-dataset filter feature selection -> mask.json");
  select_cmd->add_option("--fused", select.fused, "fused.csv")->required();
  std::size_t select_k_value = 0;
  auto* select_k_opt = select_cmd->add_option("--select-k", select_k_value, "Features to keep");
  auto* select_ratio_opt = select_cmd->add_option("--select-ratio", select.select_ratio,
                                                  "Fraction to keep (default 0.1)");
  select_k_opt->excludes(select_ratio_opt);
  select_cmd->add_flag("--anova", select_anova, "Rank by ANOVA F-score instead of Pearson");
  select_cmd->add_option("--out-dir", select.out_dir, "Output directory")->required();

  // evaluate ----------------------------------------------------------------
  estkit::cli::EvaluateOptions evaluate;
  std::string eval_manifest, eval_visual, eval_audio, eval_fused;
  std::vector<std::string> eval_aux;
  bool eval_anova = false;
  bool identity_grouped = false;
  bool shuffled = false;
  bool no_standardize = false;
  std::size_t eval_select_k = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validated trials for each classifier");
  eval_cmd->add_option("--manifest", eval_manifest, "manifest.csv");
  eval_cmd->add_option("--visual", eval_visual, "visual_states.csv");
  eval_cmd->add_option("--audio", eval_audio, "audio_states.csv");
  eval_cmd->add_option("--fused", eval_fused, "Precomputed fused.csv (skips block fusion)");
  eval_cmd->add_option("--aux", eval_aux, "Feature block as name=path (repeatable)")->take_all();
  eval_cmd->add_option("--blocks", evaluate.blocks, "Blocks to fuse, in order (default: est)")
      ->delimiter(',');
  eval_cmd->add_option("--seed", evaluate.seed, "Base seed for folds and models");
  eval_cmd->add_option("--folds", evaluate.folds, "K for K-fold cross-validation (default 10)");
  eval_cmd->add_option("--trials", evaluate.trials, "Number of shuffled trials (default 100)");
  auto* eval_k_opt = eval_cmd->add_option("--select-k", eval_select_k, "Features to keep");
  auto* eval_ratio_opt = eval_cmd->add_option("--select-ratio", evaluate.select_ratio,
                                              "Fraction to keep (default 0.1)");
  eval_k_opt->excludes(eval_ratio_opt);
  eval_cmd->add_flag("--anova", eval_anova, "Rank by ANOVA F-score instead of Pearson");
  eval_cmd->add_flag("--select-global", evaluate.select_global,
                     "Fit selection on the whole dataset instead of per fold");
  eval_cmd->add_flag("--identity-grouped", identity_grouped,
                     "Keep all clips of one identity in the same fold");
  eval_cmd->add_flag("--shuffled", shuffled, "Plain shuffled folds instead of stratified");
  eval_cmd->add_flag("--no-standardize", no_standardize, "Disable per-feature z-scoring");
  eval_cmd->add_option("--classifiers", evaluate.classifiers,
                       "Subset of: lsvm,dt,rf,knn,lr (default all)")
      ->delimiter(',');
  eval_cmd->add_option("--out-dir", evaluate.out_dir, "Output directory")->required();

  // report ------------------------------------------------------------------
  estkit::cli::ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Reprint the summary table of a report.json");
  report_cmd->add_option("--report", report.report_json, "report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (synth_cmd->parsed()) {
      return estkit::cli::cmd_synth(synth);
    }
    if (extract_cmd->parsed()) {
      if (!extract_audio.empty()) extract.audio = extract_audio;
      return estkit::cli::cmd_extract(extract);
    }
    if (fuse_cmd->parsed()) {
      fuse.aux = parse_aux(fuse_aux);
      return estkit::cli::cmd_fuse(fuse);
    }
    if (select_cmd->parsed()) {
      if (select_k_opt->count() > 0) select.select_k = select_k_value;
      select.score_kind = select_anova ? estkit::ScoreKind::anova : estkit::ScoreKind::pearson;
      return estkit::cli::cmd_select(select);
    }
    if (eval_cmd->parsed()) {
      if (!eval_manifest.empty()) evaluate.manifest = eval_manifest;
      if (!eval_visual.empty()) evaluate.visual = eval_visual;
      if (!eval_audio.empty()) evaluate.audio = eval_audio;
      if (!eval_fused.empty()) evaluate.fused = eval_fused;
      evaluate.aux = parse_aux(eval_aux);
      if (eval_k_opt->count() > 0) evaluate.select_k = eval_select_k;
      evaluate.score_kind = eval_anova ? estkit::ScoreKind::anova : estkit::ScoreKind::pearson;
      if (identity_grouped && shuffled) {
        std::cerr << "error: --identity-grouped and --shuffled are mutually exclusive\n";
        return kExitInputError;
      }
      if (identity_grouped) evaluate.strategy = estkit::FoldStrategy::identity_grouped;
      if (shuffled) evaluate.strategy = estkit::FoldStrategy::shuffled;
      evaluate.standardize = !no_standardize;
      return estkit::cli::cmd_evaluate(evaluate);
    }
    if (report_cmd->parsed()) {
      return estkit::cli::cmd_report(report);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
