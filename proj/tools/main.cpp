#include "cfrisk/errors.hpp"
#include "cfrisk/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char ** argv)
{
  CLI::App app{"counterfactual risk estimation and planning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed_value = 0;
  bool strict = false;

  app.add_option("--config", config_path, "run configuration JSON file");
  app.add_option("--set", overrides, "override one config key (key=value, repeatable)");
  auto * seed_opt = app.add_option("--seed", seed_value, "seed for the scene split shuffle");
  app.add_flag("--strict", strict, "reject unknown keys when parsing scenarios");

  auto * annotate_cmd =
    app.add_subcommand("annotate", "build annotation records and the dataset manifest");
  auto * split_cmd = app.add_subcommand("split", "assign the scene-level train/val split");

  auto * plan_cmd = app.add_subcommand("plan", "evaluate the action tree for one scene");
  std::string scene_path;
  double plan_time = 0.0;
  plan_cmd->add_option("scene", scene_path, "canonical scenario JSON file")->required();
  plan_cmd->add_option("-t,--time", plan_time, "analysis time [s]")->required();

  auto * simulate_cmd =
    app.add_subcommand("simulate", "closed-loop replay with the planner in the loop");
  auto * evaluate_cmd =
    app.add_subcommand("evaluate", "score the oracle or a remote model on the validation split");
  auto * prompt_cmd = app.add_subcommand("prompt", "write one prompt file per validation sample");

  auto * score_cmd =
    app.add_subcommand("score", "score a directory of response texts against the ground truth");
  std::string responses_dir;
  score_cmd->add_option("responses", responses_dir, "directory of <sample_id>.txt|.json files")
    ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? cfrisk::kExitOk : cfrisk::kExitUsage;
  }

  cfrisk::RunConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = cfrisk::load_run_config(config_path);
    }
    for (const auto & kv : overrides) {
      cfrisk::apply_config_override(cfg, kv);
    }
    if (*seed_opt) {
      cfg.seed = seed_value;
    }
    if (strict) {
      cfg.strict_parsing = true;
    }
    cfg.validate();
  } catch (const cfrisk::Error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return cfrisk::kExitUsage;
  }

  if (annotate_cmd->parsed()) {
    return cfrisk::cmd_annotate(cfg, std::cerr);
  }
  if (split_cmd->parsed()) {
    return cfrisk::cmd_split(cfg, std::cerr);
  }
  if (plan_cmd->parsed()) {
    return cfrisk::cmd_plan(cfg, scene_path, plan_time, std::cout, std::cerr);
  }
  if (simulate_cmd->parsed()) {
    return cfrisk::cmd_simulate(cfg, std::cerr);
  }
  if (evaluate_cmd->parsed()) {
    return cfrisk::cmd_evaluate(cfg, std::cerr);
  }
  if (prompt_cmd->parsed()) {
    return cfrisk::cmd_prompt(cfg, std::cerr);
  }
  if (score_cmd->parsed()) {
    return cfrisk::cmd_score(cfg, responses_dir, std::cerr);
  }
  std::cerr << "error: no command\n";
  return cfrisk::kExitUsage;
}
