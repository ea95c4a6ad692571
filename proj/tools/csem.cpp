#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "csem/pipeline.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int tables = 0;
  int jobs = 0;
  bool dry_run = false;
};

int run_stage(const std::string& name, const Options& opt) {
  csem::pipe::PipelineConfig cfg = csem::pipe::load_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.seed_set) csem::pipe::apply_seed(cfg, opt.seed);
  if (opt.tables > 0) cfg.tables = opt.tables;
  if (opt.jobs > 0) cfg.jobs = opt.jobs;
  cfg.validate();

  auto missing = csem::pipe::missing_inputs(name, cfg);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw csem::ValidationError("missing input file(s) for '" + name + "': " + list);
  }
  if (opt.dry_run) {
    std::cout << name << ": configuration valid, inputs present (dry run)\n";
    return 0;
  }

  static const std::map<std::string, void (*)(const csem::pipe::PipelineConfig&)> stages = {
      {"synth", csem::pipe::stage_synth},
      {"insights", csem::pipe::stage_insights},
      {"train", csem::pipe::stage_train},
      {"embed", csem::pipe::stage_embed},
      {"index", csem::pipe::stage_index},
      {"bench-build", csem::pipe::stage_bench_build},
      {"queries", csem::pipe::stage_queries},
      {"eval", csem::pipe::stage_eval},
      {"ablation", csem::pipe::stage_ablation},
      {"ocr-eval", csem::pipe::stage_ocr_eval},
      {"preprocess-compare", csem::pipe::stage_preprocess_compare},
      {"all", csem::pipe::stage_all},
  };
  stages.at(name)(cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csem: synthetic chart corpus, contrastive dual-encoder training, and "
               "text-to-chart retrieval evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_path, "key = value configuration file");
  app.add_option("--out", opt.out_dir, "output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", opt.seed, "master seed for every stage");
  app.add_option("--tables", opt.tables, "number of synthetic tables (overrides config)");
  app.add_option("--jobs", opt.jobs, "worker thread cap");
  app.add_flag("--dry-run", opt.dry_run, "validate configuration and inputs, write nothing");

  const char* stage_names[] = {"synth",   "insights", "train",   "embed",
                               "index",   "bench-build", "queries", "eval",
                               "ablation", "ocr-eval", "preprocess-compare", "all"};
  const char* stage_help[] = {
      "generate tables, recommend charts, render SVG",
      "synthesize the three insight levels per chart",
      "train the contrastive dual encoder",
      "embed charts into embeddings.bin",
      "verify the stored embedding index",
      "build target-and-distractor candidate groups",
      "generate queries, apply consensus votes, assemble the benchmark",
      "run retrieval evaluation and write reports",
      "run the 8-row insight-combination ablation",
      "run the text-to-OCR retrieval baseline",
      "train and compare direct-resize vs center-crop preprocessing",
      "run the full pipeline end to end"};
  for (size_t i = 0; i < 12; ++i) app.add_subcommand(stage_names[i], stage_help[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 64;
  }

  opt.seed_set = seed_opt->count() > 0;
  std::string stage = app.get_subcommands().front()->get_name();
  try {
    return run_stage(stage, opt);
  } catch (const csem::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const csem::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
