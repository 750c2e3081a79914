// Copyright 2026 The pemsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pemsim/harness/commands.hpp"

namespace fs = std::filesystem;
using namespace pemsim;
using namespace pemsim::harness;

namespace {

HarnessConfig config_or_default(const std::string& path) {
  return path.empty() ? HarnessConfig{} : load_config(path);
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pemsim: perception error model simulation harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;

  auto* defaults = app.add_subcommand("defaults", "Print the default configuration as JSON");

  auto* collect_cmd = app.add_subcommand("collect", "Run detector scenarios and write train/test datasets");
  std::string collect_out;
  collect_cmd->add_option("--config", config_path, "Configuration file (JSON)");
  collect_cmd->add_option("--out", collect_out, "Output directory")->required();
  collect_cmd->add_option("--seed", seed, "Detector sampling seed");

  auto* train_cmd = app.add_subcommand("train", "Fit a surrogate model");
  std::string dataset_path, kind_name, model_out;
  train_cmd->add_option("--config", config_path, "Configuration file (JSON)");
  train_cmd->add_option("--dataset", dataset_path, "Training dataset (JSON lines)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--kind", kind_name, "Model kind: ns, lr, gf or gt")->required();
  train_cmd->add_option("--out", model_out, "Model output path")->required();
  train_cmd->add_option("--seed", seed, "Training seed");

  auto* eval_cmd = app.add_subcommand("eval-model", "Model-level metrics against ground truth and the detector");
  std::string model_path, eval_out;
  int eval_bins = 10;
  double max_range = metrics::kDefaultMaxRange;
  eval_cmd->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--dataset", dataset_path, "Test dataset (JSON lines)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "Report path (JSON)")->required();
  eval_cmd->add_option("--bins", eval_bins, "Distance bins for the breakdown");
  eval_cmd->add_option("--max-range", max_range, "Range cutoff in metres");
  eval_cmd->add_option("--seed", seed, "Sampling seed");

  auto* run_cmd = app.add_subcommand("run", "Closed-loop runs with one perception variant");
  std::string variant_name, run_out;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
  run_cmd->add_option("--config", config_path, "Configuration file (JSON)");
  run_cmd->add_option("--variant", variant_name, "detector, ns, lr, gf or gt")->required();
  run_cmd->add_option("--model", model_path, "Model file (needed except for detector and gt)");
  run_cmd->add_option("--seeds", seeds, "Perception seeds")->delimiter(',');
  run_cmd->add_option("--seed", seed, "Single perception seed when --seeds is absent");
  run_cmd->add_option("--jobs", jobs, "Parallel runs");
  run_cmd->add_option("--out", run_out, "Runs directory")->required();

  auto* compare_cmd = app.add_subcommand("compare", "Compare traces across variants");
  std::string runs_dir, compare_out, pkl_model;
  bool no_normalize = false;
  compare_cmd->add_option("--runs", runs_dir, "Runs directory written by 'run'")->required()->check(CLI::ExistingDirectory);
  compare_cmd->add_option("--out", compare_out, "Output directory")->required();
  compare_cmd->add_flag("--no-normalize", no_normalize, "Skip normalization by the (gt, detector) entry");
  compare_cmd->add_option("--pkl-model", pkl_model, "Also bound the planner divergence of this model");
  compare_cmd->add_option("--config", config_path, "Configuration file for the divergence run");
  compare_cmd->add_option("--seed", seed, "Seed for the divergence run");

  auto* report_cmd = app.add_subcommand("report", "Markdown summary of evaluations and a comparison");
  std::vector<std::string> eval_paths;
  std::string compare_json, report_out;
  report_cmd->add_option("--eval", eval_paths, "Evaluation report(s) from eval-model")->check(CLI::ExistingFile);
  report_cmd->add_option("--compare", compare_json, "compare.json from 'compare'")->check(CLI::ExistingFile);
  report_cmd->add_option("--out", report_out, "Markdown output path")->required();
  report_cmd->add_option("--seed", seed, "Unused; accepted for uniformity");

  CLI11_PARSE(app, argc, argv);

  try {
    if (defaults->parsed()) {
      std::cout << config_to_json(HarnessConfig{}).dump(2) << '\n';
    } else if (collect_cmd->parsed()) {
      const auto cfg = config_or_default(config_path);
      const auto out = collect(cfg, seed, fs::path(collect_out));
      std::cout << "train tuples " << out.train.tuples.size() << ", test tuples " << out.test.tuples.size() << '\n';
    } else if (train_cmd->parsed()) {
      const auto cfg = config_or_default(config_path);
      const auto kind = surrogates::surrogate_kind_from_string(kind_name);
      const auto data = read_dataset(dataset_path);
      const auto out = train_model(data, kind, cfg, seed);
      const fs::path path(model_out);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      surrogates::save_model(out.model, path);
      Manifest m(path.parent_path() / "manifest.json");
      m.add(path, "model", config_hash(cfg), seed, {{"dataset", dataset_path}, {"summary", out.summary}});
      m.save();
      std::cout << out.summary.dump() << '\n';
    } else if (eval_cmd->parsed()) {
      const auto model = surrogates::load_model(model_path);
      const auto data = read_dataset(dataset_path);
      const auto rep = eval_model(model, data, seed, max_range, eval_bins);
      const fs::path path(eval_out);
      write_json(rep.to_json(), path);
      Manifest m(path.parent_path() / "manifest.json");
      m.add(path, "report", fnv1a_hex(model_path + "|" + dataset_path), seed);
      m.save();
      std::cout << render_report({{rep.kind, rep.to_json()}}, std::nullopt);
    } else if (run_cmd->parsed()) {
      const auto cfg = config_or_default(config_path);
      const auto variant = perception_variant_from_string(variant_name);
      std::shared_ptr<const surrogates::SurrogateModel> model;
      if (!model_path.empty()) {
        model = std::make_shared<surrogates::SurrogateModel>(surrogates::load_model(model_path));
      } else if (variant == PerceptionVariant::gt) {
        model = std::make_shared<surrogates::SurrogateModel>(surrogates::GroundTruthModel{});
      }
      if (seeds.empty()) seeds.push_back(seed);
      const auto runs = run_behaviour(cfg, variant, model, seeds, fs::path(run_out), jobs);
      for (const auto& r : runs) {
        const auto t = r.result.timing;
        std::cout << "seed " << r.seed << ": frames " << r.result.records.size()
                  << (r.result.truncated ? " (truncated: ego left the map)" : "") << ", median perception "
                  << t.median_perception() << " ms, median observe " << t.median_observe() << " ms, median frame "
                  << t.median_total() << " ms\n";
      }
    } else if (compare_cmd->parsed()) {
      auto rep = compare(load_runs(runs_dir), !no_normalize);
      if (!pkl_model.empty()) {
        const auto cfg = config_or_default(config_path);
        auto model = std::make_shared<surrogates::SurrogateModel>(surrogates::load_model(pkl_model));
        rep.pkl = pkl_report(cfg, model, seed);
      }
      write_compare(rep, compare_out);
      Manifest m(fs::path(compare_out) / "manifest.json");
      m.add(fs::path(compare_out) / "compare.json", "report", fnv1a_hex(runs_dir), seed);
      m.save();
      std::cout << render_report({}, rep.to_json());
    } else if (report_cmd->parsed()) {
      std::vector<std::pair<std::string, nlohmann::json>> evals;
      for (const auto& p : eval_paths) {
        std::ifstream in(p);
        auto j = nlohmann::json::parse(in);
        evals.emplace_back(j.at("kind").get<std::string>(), std::move(j));
      }
      std::optional<nlohmann::json> cmp;
      if (!compare_json.empty()) {
        std::ifstream in(compare_json);
        cmp = nlohmann::json::parse(in);
      }
      const fs::path path(report_out);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      std::ofstream(path) << render_report(evals, cmp);
      Manifest m(path.parent_path() / "manifest.json");
      m.add(path, "report", fnv1a_hex(report_out), seed);
      m.save();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
