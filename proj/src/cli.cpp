#include "estkit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>

#include "estkit/errors.hpp"
#include "estkit/io.hpp"

namespace estkit::cli {

namespace {

std::string hash_of(const nlohmann::ordered_json& config) {
  return io::hex64(io::fnv1a64(config.dump()));
}

std::string provenance_of(const std::string& config_hash) {
  return "config_hash=" + config_hash;
}

nlohmann::ordered_json aux_to_json(
    const std::vector<std::pair<std::string, std::filesystem::path>>& aux) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [name, path] : aux) out[name] = path.string();
  return out;
}

// Input-shaped failures (bad files, bad flags) exit 2.
int report_input_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitInputError;
}

template <typename Fn>
int run_input_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const SingleClassTraining& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEvalError;
  } catch (const SingleClassTest& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEvalError;
  } catch (const std::exception& e) {
    return report_input_error(e);
  }
}

nlohmann::ordered_json chain_to_json(const EmotionChain& chain) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : chain) {
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

}  // namespace

int cmd_synth(const SynthOptions& options) {
  return run_input_guarded([&]() {
    nlohmann::ordered_json config;
    config["subcommand"] = "synth";
    config["clips_per_class"] = options.config.clips_per_class;
    config["frames_min"] = options.config.frames_min;
    config["frames_max"] = options.config.frames_max;
    config["separation"] = options.config.separation;
    config["audio_noise"] = options.config.audio_noise;
    config["seed"] = options.config.seed;
    config["deceptive_chain"] = chain_to_json(options.config.deceptive_chain);
    config["truthful_chain"] = chain_to_json(options.config.truthful_chain);
    const std::string hash = hash_of(config);

    synth_corpus(options.config, options.out_dir, provenance_of(hash));
    nlohmann::ordered_json run = config;
    run["config_hash"] = hash;
    io::write_file_atomic(options.out_dir / "synth_config.json", run.dump(2) + "\n");
    std::cout << "synth: wrote " << 2 * options.config.clips_per_class << " clips to "
              << options.out_dir.string() << " (config " << hash << ")\n";
    return kExitOk;
  });
}

int cmd_extract(const ExtractOptions& options) {
  return run_input_guarded([&]() {
    nlohmann::ordered_json config;
    config["subcommand"] = "extract";
    config["manifest"] = options.manifest.string();
    config["visual"] = options.visual.string();
    config["audio"] = options.audio ? nlohmann::ordered_json(options.audio->string())
                                    : nlohmann::ordered_json(nullptr);
    const std::string hash = hash_of(config);

    const Corpus corpus = load_corpus(options.manifest, options.visual, options.audio);

    FeatureBlock est_block;
    est_block.name = "est";
    est_block.dimension = kEstDimension;
    est_block.clip_ids.reserve(corpus.clips.size());
    est_block.values.reserve(corpus.clips.size() * kEstDimension);
    for (const CorpusClip& clip : corpus.clips) {
      const EstVector est = est_feature(revise_clip(clip));
      est_block.clip_ids.push_back(clip.info.clip_id);
      est_block.values.insert(est_block.values.end(), est.values.begin(), est.values.end());
    }
    const AggregateReport aggregates = aggregate_report(corpus);

    std::filesystem::create_directories(options.out_dir);
    write_feature_block(options.out_dir / "est.csv", est_block, provenance_of(hash));
    io::write_file_atomic(options.out_dir / "aggregate.csv",
                          "# " + provenance_of(hash) + "\n" + aggregate_to_csv(aggregates));
    std::cout << "extract: " << corpus.clips.size() << " clips -> est.csv, aggregate.csv (config "
              << hash << ")\n";
    return kExitOk;
  });
}

int cmd_fuse(const FuseOptions& options) {
  return run_input_guarded([&]() {
    nlohmann::ordered_json config;
    config["subcommand"] = "fuse";
    config["manifest"] = options.manifest.string();
    config["aux"] = aux_to_json(options.aux);
    config["blocks"] = options.blocks;
    const std::string hash = hash_of(config);

    const CorpusManifest manifest = load_manifest(options.manifest);
    std::vector<std::string> order = options.blocks;
    if (order.empty()) {
      for (const auto& [name, path] : options.aux) order.push_back(name);
    }
    std::vector<FeatureBlock> blocks;
    for (const std::string& name : order) {
      auto it = std::find_if(options.aux.begin(), options.aux.end(),
                             [&](const auto& entry) { return entry.first == name; });
      if (it == options.aux.end()) {
        throw std::invalid_argument("block '" + name + "' has no --aux source");
      }
      blocks.push_back(load_feature_block(it->second, name, &manifest));
    }
    const std::vector<FeatureRecord> records = fuse(blocks, manifest);

    std::filesystem::create_directories(options.out_dir);
    write_fused(options.out_dir / "fused.csv", records, provenance_of(hash));
    const std::size_t dim = records.empty() ? 0 : records.front().features.size();
    std::cout << "fuse: " << records.size() << " records x " << dim << " features -> fused.csv"
              << " (config " << hash << ")\n";
    return kExitOk;
  });
}

int cmd_select(const SelectOptions& options) {
  return run_input_guarded([&]() {
    nlohmann::ordered_json config;
    config["subcommand"] = "select";
    config["fused"] = options.fused.string();
    config["select_k"] = options.select_k ? nlohmann::ordered_json(*options.select_k)
                                          : nlohmann::ordered_json(nullptr);
    config["select_ratio"] = options.select_ratio;
    config["select_score"] = std::string(score_kind_name(options.score_kind));
    const std::string hash = hash_of(config);

    const std::vector<FeatureRecord> records = load_fused(options.fused);
    const DataMatrix x = to_matrix(records);
    const std::vector<int> labels = labels_of(records);
    const std::vector<double> scores = options.score_kind == ScoreKind::pearson
                                           ? pearson_scores(x, labels)
                                           : anova_f_scores(x, labels);
    std::size_t k = options.select_k ? *options.select_k
                                     : default_select_k(x.cols, options.select_ratio);
    if (k == 0 || k > x.cols) {
      throw std::invalid_argument("select: k must be in [1, " + std::to_string(x.cols) + "]");
    }
    const SelectionMask mask = select_top_k(scores, k);

    std::filesystem::create_directories(options.out_dir);
    write_mask_json(options.out_dir / "mask.json", mask,
                    score_kind_name(options.score_kind), hash);
    std::cout << "select: kept " << k << " of " << x.cols << " features -> mask.json (config "
              << hash << ")\n";
    return kExitOk;
  });
}

namespace {

std::vector<FeatureRecord> resolve_records(const EvaluateOptions& options) {
  if (options.fused) {
    std::vector<FeatureRecord> records = load_fused(*options.fused);
    if (options.manifest) {
      const CorpusManifest manifest = load_manifest(*options.manifest);
      for (FeatureRecord& record : records) {
        const ManifestRow* row = manifest.find(record.clip_id);
        if (row == nullptr) {
          throw MissingClip("fused clip '" + record.clip_id + "' is not in the manifest");
        }
        record.identity = row->identity;
        record.label = row->label;
      }
    } else if (options.strategy == FoldStrategy::identity_grouped) {
      throw std::invalid_argument("identity_grouped folds require --manifest for identities");
    }
    return records;
  }

  if (!options.manifest) {
    throw std::invalid_argument("evaluate needs either --fused or --manifest");
  }
  const CorpusManifest manifest = load_manifest(*options.manifest);

  std::vector<FeatureBlock> blocks;
  for (const std::string& name : options.blocks) {
    auto it = std::find_if(options.aux.begin(), options.aux.end(),
                           [&](const auto& entry) { return entry.first == name; });
    if (it != options.aux.end()) {
      blocks.push_back(load_feature_block(it->second, name, &manifest));
      continue;
    }
    if (name != "est") {
      throw std::invalid_argument("block '" + name + "' has no --aux source");
    }
    if (!options.visual) {
      throw std::invalid_argument("block 'est' needs --visual (and optionally --audio)");
    }
    const Corpus corpus = load_corpus(*options.manifest, *options.visual, options.audio);
    FeatureBlock est_block;
    est_block.name = "est";
    est_block.dimension = kEstDimension;
    for (const CorpusClip& clip : corpus.clips) {
      const EstVector est = est_feature(revise_clip(clip));
      est_block.clip_ids.push_back(clip.info.clip_id);
      est_block.values.insert(est_block.values.end(), est.values.begin(), est.values.end());
    }
    blocks.push_back(std::move(est_block));
  }
  return fuse(blocks, manifest);
}

}  // namespace

int cmd_evaluate(const EvaluateOptions& options) {
  nlohmann::ordered_json config;
  config["subcommand"] = "evaluate";
  config["manifest"] = options.manifest ? nlohmann::ordered_json(options.manifest->string())
                                        : nlohmann::ordered_json(nullptr);
  config["visual"] = options.visual ? nlohmann::ordered_json(options.visual->string())
                                    : nlohmann::ordered_json(nullptr);
  config["audio"] = options.audio ? nlohmann::ordered_json(options.audio->string())
                                  : nlohmann::ordered_json(nullptr);
  config["fused"] = options.fused ? nlohmann::ordered_json(options.fused->string())
                                  : nlohmann::ordered_json(nullptr);
  config["aux"] = aux_to_json(options.aux);
  config["blocks"] = options.blocks;
  config["seed"] = options.seed;
  config["folds"] = options.folds;
  config["trials"] = options.trials;
  config["select_k"] = options.select_k ? nlohmann::ordered_json(*options.select_k)
                                        : nlohmann::ordered_json(nullptr);
  config["select_ratio"] = options.select_ratio;
  config["select_score"] = std::string(score_kind_name(options.score_kind));
  config["select_global"] = options.select_global;
  config["strategy"] = std::string(fold_strategy_name(options.strategy));
  config["standardize"] = options.standardize;
  config["classifiers"] = options.classifiers;
  config["out_dir"] = options.out_dir.string();
  const std::string hash = hash_of(config);

  std::vector<FeatureRecord> records;
  std::vector<LearnerSpec> specs;
  try {
    if (options.folds < 2) {
      throw std::invalid_argument("evaluate: --folds must be at least 2");
    }
    if (options.trials < 1) {
      throw std::invalid_argument("evaluate: --trials must be at least 1");
    }
    records = resolve_records(options);
    if (records.size() < 2) {
      throw TooFewSamples("evaluate: need at least 2 records");
    }
    const std::size_t dimension = records.front().features.size();
    if (options.select_k && *options.select_k > dimension) {
      throw std::invalid_argument("select_k " + std::to_string(*options.select_k) +
                                  " exceeds fused dimension " + std::to_string(dimension));
    }
    for (const std::string& name : options.classifiers) {
      LearnerSpec spec;
      spec.kind = parse_learner(name);
      spec.seed = options.seed;
      specs.push_back(spec);
    }
  } catch (const std::exception& e) {
    return report_input_error(e);
  }

  EvalReport report;
  report.config = config;
  report.config_hash = hash;
  try {
    const std::size_t dimension = records.front().features.size();
    PipelineOptions pipeline;
    pipeline.select_k = options.select_k
                            ? *options.select_k
                            : default_select_k(dimension, options.select_ratio);
    pipeline.score_kind = options.score_kind;
    pipeline.select_global = options.select_global;
    pipeline.standardize = options.standardize;
    for (const LearnerSpec& spec : specs) {
      try {
        report.classifiers.push_back(run_trials(spec, records, options.folds, options.trials,
                                                options.seed, options.strategy, pipeline));
      } catch (const std::exception& e) {
        throw std::runtime_error("classifier " + std::string(learner_name(spec.kind)) + ": " +
                                 e.what());
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEvalError;
  }

  try {
    std::filesystem::create_directories(options.out_dir);
    io::write_file_atomic(options.out_dir / "report.json", report_to_json(report).dump(2) + "\n");
    io::write_file_atomic(options.out_dir / "report.csv",
                          "# " + provenance_of(hash) + "\n" + report_to_csv(report));
    io::write_file_atomic(options.out_dir / "confusion.csv",
                          "# " + provenance_of(hash) + "\n" + confusion_to_csv(report));
  } catch (const std::exception& e) {
    return report_input_error(e);
  }

  std::cout << "evaluate: config " << hash << "\n" << summary_table(report);
  return kExitOk;
}

int cmd_report(const ReportOptions& options) {
  return run_input_guarded([&]() {
    std::ifstream in(options.report_json);
    if (!in) {
      throw std::invalid_argument("cannot open report: " + options.report_json.string());
    }
    nlohmann::json doc = nlohmann::json::parse(in);
    std::cout << "report: config " << doc.at("config_hash").get<std::string>() << "\n";
    std::printf("classifier            best_acc  top10_acc  best_auc  top10_auc\n");
    for (const auto& c : doc.at("classifiers")) {
      const auto& agg = c.at("aggregates");
      std::printf("%-20s  %8.4f  %9.4f  %8.4f  %9.4f\n",
                  c.at("kind").get<std::string>().c_str(),
                  agg.at("accuracy").at("best").get<double>(),
                  agg.at("accuracy").at("top10_mean").get<double>(),
                  agg.at("roc_auc").at("best").get<double>(),
                  agg.at("roc_auc").at("top10_mean").get<double>());
    }
    return kExitOk;
  });
}

}  // namespace estkit::cli
