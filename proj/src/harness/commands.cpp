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

#include "pemsim/harness/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "pemsim/association.hpp"

namespace pemsim::harness {

using nlohmann::json;
namespace fs = std::filesystem;
using surrogates::SurrogateKind;
using surrogates::SurrogateModel;

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

json report_json(const metrics::ClassificationReport& r) {
  return {{"precision", r.precision}, {"recall", r.recall}, {"accuracy", r.accuracy},
          {"tp", r.counts.tp},        {"fp", r.counts.fp},      {"fn", r.counts.fn}, {"tn", r.counts.tn}};
}

json table_json(const metrics::PairwiseTable& t) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < t.values.cols(); ++j) row.push_back(t.values(i, j));
    rows.push_back(row);
  }
  return {{"labels", t.labels}, {"values", rows}};
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// collect

Dataset collect_scenario(const HarnessConfig& cfg, int index, std::uint64_t seed) {
  ScenarioSpec spec = cfg.scenario;
  spec.seed = cfg.scenario.seed + static_cast<std::uint64_t>(index);
  PerceptionStack detector = PerceptionStack::make_detector(cfg.detector, mix(seed, static_cast<std::uint64_t>(index)));
  Dataset data;
  run_closed_loop(cfg, spec, detector, [&](const FrameView& f) {
    std::vector<GroundTruthBox> gt;
    gt.reserve(f.salients.size());
    for (const auto& s : f.salients) gt.push_back({s.box(), s.cls});
    const Assignment a = associate_frame(gt, f.detections, cfg.iou_gate);
    std::vector<int> match(f.salients.size(), -1);
    for (const auto& [row, col] : a.pairs) match[static_cast<std::size_t>(row)] = col;
    for (std::size_t i = 0; i < f.salients.size(); ++i) {
      surrogates::TrainingTuple t;
      t.scenario = index;
      t.frame = f.frame;
      t.salient = f.salients[i];
      if (match[i] >= 0) {
        const Detection& d = f.detections[static_cast<std::size_t>(match[i])];
        t.detected = true;
        t.position_error = d.position - t.salient.rel_position;
        if (d.velocity) t.velocity_error = *d.velocity - t.salient.velocity();
      }
      data.tuples.push_back(std::move(t));
    }
    for (int col : a.unmatched_cols) {
      const Detection& d = f.detections[static_cast<std::size_t>(col)];
      if (!d.detected) continue;
      data.false_positives.push_back({index, f.frame, d.position, d.position.norm()});
    }
  });
  return data;
}

CollectOutput collect(const HarnessConfig& cfg, std::uint64_t seed, const std::optional<fs::path>& out_dir) {
  cfg.detector.validate();
  CollectOutput out;
  auto append = [](Dataset& into, Dataset&& from) {
    into.tuples.insert(into.tuples.end(), from.tuples.begin(), from.tuples.end());
    into.false_positives.insert(into.false_positives.end(), from.false_positives.begin(), from.false_positives.end());
  };
  for (int i : cfg.train_scenarios) append(out.train, collect_scenario(cfg, i, seed));
  for (int i : cfg.test_scenarios) append(out.test, collect_scenario(cfg, i, seed));
  if (out_dir) {
    ensure_dir(*out_dir);
    const fs::path train_path = *out_dir / "train.jsonl";
    const fs::path test_path = *out_dir / "test.jsonl";
    write_dataset(out.train, train_path);
    write_dataset(out.test, test_path);
    Manifest m(*out_dir / "manifest.json");
    const std::string hash = config_hash(cfg);
    m.add(train_path, "dataset", hash, seed,
          {{"split", "train"}, {"scenarios", cfg.train_scenarios}, {"tuples", out.train.tuples.size()}});
    m.add(test_path, "dataset", hash, seed,
          {{"split", "test"}, {"scenarios", cfg.test_scenarios}, {"tuples", out.test.tuples.size()}});
    save_config(cfg, *out_dir / "config.json");
    m.add(*out_dir / "config.json", "config", hash, seed);
    m.save();
  }
  return out;
}

// ---------------------------------------------------------------------------
// train

TrainOutput train_model(const Dataset& train, SurrogateKind kind, const HarnessConfig& cfg, std::uint64_t seed) {
  if (train.tuples.empty()) throw std::invalid_argument("train: empty dataset");
  TrainOutput out;
  out.summary = {{"kind", surrogates::to_string(kind)}, {"tuples", train.tuples.size()}};
  switch (kind) {
    case SurrogateKind::gt:
      out.model = SurrogateModel(surrogates::GroundTruthModel{});
      break;
    case SurrogateKind::gf:
      out.model = SurrogateModel(surrogates::fit_gf(train.tuples));
      break;
    case SurrogateKind::lr: {
      surrogates::FocalConfig fc = cfg.lr;
      fc.seed = cfg.lr.seed + seed;
      auto r = surrogates::train_lr_focal(train.tuples, fc);
      out.summary["final_train_loss"] = r.final_loss;
      out.summary["single_class"] = r.single_class;
      out.model = SurrogateModel(std::move(r.model));
      break;
    }
    case SurrogateKind::ns: {
      std::vector<std::size_t> order(train.tuples.size());
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(mix(seed, 0x7a11));
      std::shuffle(order.begin(), order.end(), rng);
      std::size_t n_val = static_cast<std::size_t>(std::ceil(cfg.validation_fraction * static_cast<double>(order.size())));
      if (order.size() < 2) n_val = 0;
      std::vector<surrogates::TrainingTuple> val, tr;
      for (std::size_t k = 0; k < order.size(); ++k) (k < n_val ? val : tr).push_back(train.tuples[order[k]]);
      if (val.empty()) val = tr;
      surrogates::NSHyperparams hp = cfg.ns;
      hp.seed = cfg.ns.seed + seed;
      auto r = surrogates::train_ns(tr, val, hp);
      out.summary["final_train_loss"] = r.final_train_loss;
      out.summary["best_validation_loss"] = r.best_validation_loss;
      out.summary["best_iteration"] = r.best_iteration;
      out.summary["validation_tuples"] = val.size();
      out.model = SurrogateModel(std::move(r.model));
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// eval-model

json EvalReport::to_json() const {
  json b = json::array();
  for (const auto& r : bins)
    b.push_back({{"lo", r.lo},
                 {"hi", r.hi},
                 {"rows", r.rows},
                 {"detector_recall", r.detector_recall},
                 {"surrogate_recall", r.surrogate_recall},
                 {"accuracy_vs_detector", r.accuracy_vs_detector}});
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"kind", kind},
          {"rows", rows},
          {"surrogate_vs_gt", report_json(surrogate_vs_gt)},
          {"surrogate_vs_detector", report_json(surrogate_vs_detector)},
          {"detector_vs_gt", report_json(detector_vs_gt)},
          {"surrogate_sp_mse", opt(surrogate_sp_mse)},
          {"detector_sp_mse", opt(detector_sp_mse)},
          {"bins", b}};
}

EvalReport eval_model(const SurrogateModel& model, const Dataset& test, std::uint64_t seed, double max_range,
                      int bins) {
  if (bins < 1) throw std::invalid_argument("eval_model: bins must be positive");
  EvalReport rep;
  rep.kind = surrogates::to_string(model.kind());

  std::vector<SalientVector> salients;
  for (const auto& t : test.tuples)
    if (t.salient.distance <= max_range) salients.push_back(t.salient);
  std::vector<const surrogates::TrainingTuple*> rows;
  for (const auto& t : test.tuples)
    if (t.salient.distance <= max_range) rows.push_back(&t);
  rep.rows = static_cast<long>(rows.size());
  if (rows.empty()) throw std::invalid_argument("eval_model: no test tuples within range");

  std::mt19937_64 rng(mix(seed, 0xe7a1));
  const std::vector<Detection> sampled = model.perceive(salients, rng);
  const std::vector<double> prob = model.detection_probabilities(salients);

  std::vector<metrics::DetectionOutcome> sur_gt, sur_det, det_gt;
  std::vector<metrics::PositionPair> sur_pairs, det_pairs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& t = *rows[i];
    const double d = t.salient.distance;
    sur_gt.push_back({sampled[i].detected, true, t.detected, d});
    sur_det.push_back({prob[i] >= 0.5, true, t.detected, d});
    det_gt.push_back({t.detected, true, t.detected, d});
    if (sampled[i].detected) sur_pairs.push_back({sampled[i].position, t.salient.rel_position, d});
    if (t.detected) det_pairs.push_back({t.salient.rel_position + t.position_error, t.salient.rel_position, d});
  }
  for (const auto& f : test.false_positives) det_gt.push_back({true, false, true, f.distance});

  rep.surrogate_vs_gt = metrics::classification_metrics(sur_gt, metrics::ReferenceMode::vs_gt, max_range);
  rep.surrogate_vs_detector = metrics::classification_metrics(sur_det, metrics::ReferenceMode::vs_detector, max_range);
  rep.detector_vs_gt = metrics::classification_metrics(det_gt, metrics::ReferenceMode::vs_gt, max_range);
  if (!sur_pairs.empty()) rep.surrogate_sp_mse = metrics::sp_mse(sur_pairs, max_range);
  if (!det_pairs.empty()) rep.detector_sp_mse = metrics::sp_mse(det_pairs, max_range);

  const double width = max_range / bins;
  for (int b = 0; b < bins; ++b) {
    DistanceBinRow row;
    row.lo = b * width;
    row.hi = (b + 1) * width;
    long det_hits = 0, sur_hits = 0, agree = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double d = rows[i]->salient.distance;
      const int idx = std::min(bins - 1, static_cast<int>(d / width));
      if (idx != b) continue;
      ++row.rows;
      det_hits += rows[i]->detected;
      sur_hits += sampled[i].detected;
      agree += (prob[i] >= 0.5) == rows[i]->detected;
    }
    if (row.rows > 0) {
      const double n = static_cast<double>(row.rows);
      row.detector_recall = det_hits / n;
      row.surrogate_recall = sur_hits / n;
      row.accuracy_vs_detector = agree / n;
    }
    rep.bins.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// run

std::vector<BehaviourRun> run_behaviour(const HarnessConfig& cfg, PerceptionVariant variant,
                                        std::shared_ptr<const SurrogateModel> model,
                                        const std::vector<std::uint64_t>& seeds, const std::optional<fs::path>& out_dir,
                                        int jobs) {
  if (seeds.empty()) throw std::invalid_argument("run: at least one seed is required");
  if (variant != PerceptionVariant::detector) {
    if (!model) throw std::invalid_argument("run: variant " + to_string(variant) + " needs a model");
    if (model->kind() != surrogate_kind_of(variant))
      throw std::invalid_argument("run: model kind " + surrogates::to_string(model->kind()) + " does not match variant " +
                                  to_string(variant));
  }
  const fs::path dir = out_dir ? *out_dir / to_string(variant) : fs::path();
  if (out_dir) ensure_dir(dir);

  auto one = [&](std::uint64_t seed) {
    PerceptionStack stack = variant == PerceptionVariant::detector ? PerceptionStack::make_detector(cfg.detector, seed)
                                                                   : PerceptionStack::make_surrogate(model, seed);
    BehaviourRun run{seed, run_closed_loop(cfg, cfg.scenario, stack)};
    if (out_dir) {
      write_trace(run.result.records, run.result.truncated, dir / ("seed_" + std::to_string(seed) + ".jsonl"));
      std::ofstream t(dir / ("timing_seed_" + std::to_string(seed) + ".json"));
      t << run.result.timing.summary().dump(2) << '\n';
    }
    return run;
  };

  std::vector<BehaviourRun> runs(seeds.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < seeds.size(); start += workers) {
    std::vector<std::future<BehaviourRun>> futs;
    for (std::size_t k = start; k < std::min(seeds.size(), start + workers); ++k)
      futs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, one, seeds[k]));
    for (std::size_t k = 0; k < futs.size(); ++k) runs[start + k] = futs[k].get();
  }

  if (out_dir) {
    Manifest m(*out_dir / "manifest.json");
    const std::string hash = config_hash(cfg);
    for (const auto& r : runs) {
      const std::string s = std::to_string(r.seed);
      m.add(dir / ("seed_" + s + ".jsonl"), "trace", hash, r.seed,
            {{"variant", to_string(variant)}, {"truncated", r.result.truncated}});
      m.add(dir / ("timing_seed_" + s + ".json"), "timing", hash, r.seed, {{"variant", to_string(variant)}});
    }
    m.save();
  }
  return runs;
}

// ---------------------------------------------------------------------------
// compare

VariantTraces load_runs(const fs::path& runs_dir) {
  VariantTraces out;
  const std::regex name(R"(seed_(\d+)\.jsonl)");
  for (const auto& sub : fs::directory_iterator(runs_dir)) {
    if (!sub.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(sub.path())) {
      std::smatch m;
      const std::string fname = file.path().filename().string();
      if (!std::regex_match(fname, m, name)) continue;
      out[sub.path().filename().string()][std::stoull(m[1].str())] = to_trajectory(read_trace_records(file.path()));
    }
  }
  if (out.empty()) throw std::runtime_error("no traces found under " + runs_dir.string());
  return out;
}

namespace {

std::vector<std::string> ordered_labels(const VariantTraces& traces) {
  static const std::vector<std::string> preferred = {"detector", "ns", "lr", "gf", "gt"};
  std::vector<std::string> labels;
  for (const auto& p : preferred)
    if (traces.contains(p)) labels.push_back(p);
  for (const auto& [k, v] : traces)
    if (std::find(labels.begin(), labels.end(), k) == labels.end()) labels.push_back(k);
  return labels;
}

}  // namespace

CompareReport compare(const VariantTraces& traces, bool normalize) {
  if (traces.size() < 2) throw std::invalid_argument("compare: need at least two variants");
  CompareReport rep;
  rep.labels = ordered_labels(traces);
  const auto n = static_cast<Eigen::Index>(rep.labels.size());
  for (auto* t : {&rep.mean_position, &rep.max_position, &rep.mean_velocity, &rep.max_velocity}) {
    t->labels = rep.labels;
    t->values = Eigen::MatrixXd::Zero(n, n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& a = traces.at(rep.labels[static_cast<std::size_t>(i)]);
      const auto& b = traces.at(rep.labels[static_cast<std::size_t>(j)]);
      double sums[4] = {0, 0, 0, 0};
      int count = 0;
      for (const auto& [seed, ta] : a) {
        const auto it = b.find(seed);
        if (it == b.end()) continue;
        sums[0] += metrics::mean_eucl(ta, it->second, metrics::TraceQuantity::position);
        sums[1] += metrics::max_eucl(ta, it->second, metrics::TraceQuantity::position);
        sums[2] += metrics::mean_eucl(ta, it->second, metrics::TraceQuantity::velocity);
        sums[3] += metrics::max_eucl(ta, it->second, metrics::TraceQuantity::velocity);
        ++count;
      }
      if (count == 0)
        throw std::invalid_argument("compare: variants " + rep.labels[static_cast<std::size_t>(i)] + " and " +
                                    rep.labels[static_cast<std::size_t>(j)] + " share no seeds");
      metrics::PairwiseTable* tabs[4] = {&rep.mean_position, &rep.max_position, &rep.mean_velocity, &rep.max_velocity};
      for (int q = 0; q < 4; ++q) tabs[q]->values(i, j) = tabs[q]->values(j, i) = sums[q] / count;
    }
  }
  if (normalize) {
    if (!traces.contains("detector")) throw std::invalid_argument("compare: normalization needs the detector variant");
    if (!traces.contains("gt")) throw std::invalid_argument("compare: normalization needs the gt variant");
    rep.normalized = true;
    rep.norm_mean_position = metrics::normalized_pairwise_table(rep.mean_position, "gt", "detector");
    rep.norm_max_position = metrics::normalized_pairwise_table(rep.max_position, "gt", "detector");
    rep.norm_mean_velocity = metrics::normalized_pairwise_table(rep.mean_velocity, "gt", "detector");
    rep.norm_max_velocity = metrics::normalized_pairwise_table(rep.max_velocity, "gt", "detector");
  }
  for (const auto& label : rep.labels) {
    VariantBraking vb;
    std::vector<std::vector<double>> times;
    for (const auto& [seed, tr] : traces.at(label)) {
      const auto s = metrics::mba_tmba(tr);
      vb.mba += s.mba;
      vb.tmba += s.tmba;
      vb.braked_runs += s.braked;
      ++vb.runs;
      times.push_back(tr.collision_times);
    }
    vb.mba /= vb.runs;
    vb.tmba /= vb.runs;
    rep.braking[label] = vb;
    rep.collisions[label] = metrics::collision_interval_cdf(times);
  }
  return rep;
}

json CompareReport::to_json() const {
  json j = {{"labels", labels},
            {"mean_eucl_position", table_json(mean_position)},
            {"max_eucl_position", table_json(max_position)},
            {"mean_eucl_velocity", table_json(mean_velocity)},
            {"max_eucl_velocity", table_json(max_velocity)},
            {"normalized", normalized}};
  if (normalized) {
    j["normalized_mean_eucl_position"] = table_json(norm_mean_position);
    j["normalized_max_eucl_position"] = table_json(norm_max_position);
    j["normalized_mean_eucl_velocity"] = table_json(norm_mean_velocity);
    j["normalized_max_eucl_velocity"] = table_json(norm_max_velocity);
  }
  json b = json::object();
  for (const auto& [k, v] : braking)
    b[k] = {{"mba", v.mba}, {"tmba", v.tmba}, {"runs", v.runs}, {"braked_runs", v.braked_runs}};
  j["braking"] = b;
  json c = json::object();
  for (const auto& [k, v] : collisions) c[k] = {{"gaps", v.gaps}, {"median", v.median}, {"collisions_pooled", v.gaps.size()}};
  j["collision_gaps"] = c;
  if (pkl) j["pkl"] = {{"kde_estimate", pkl->kde_estimate}, {"jensen_bound", pkl->jensen_bound}};
  return j;
}

void write_compare(const CompareReport& rep, const fs::path& out_dir) {
  ensure_dir(out_dir);
  {
    std::ofstream j(out_dir / "compare.json");
    j << rep.to_json().dump(2) << '\n';
  }
  {
    std::ofstream csv(out_dir / "pairwise.csv");
    csv << "metric,quantity,row,col,value,normalized\n";
    struct Entry {
      const char* metric;
      const char* quantity;
      const metrics::PairwiseTable* raw;
      const metrics::PairwiseTable* norm;
    };
    const Entry entries[] = {{"mean_eucl", "position", &rep.mean_position, &rep.norm_mean_position},
                             {"max_eucl", "position", &rep.max_position, &rep.norm_max_position},
                             {"mean_eucl", "velocity", &rep.mean_velocity, &rep.norm_mean_velocity},
                             {"max_eucl", "velocity", &rep.max_velocity, &rep.norm_max_velocity}};
    csv << std::setprecision(17);
    for (const auto& e : entries)
      for (std::size_t i = 0; i < rep.labels.size(); ++i)
        for (std::size_t k = 0; k < rep.labels.size(); ++k) {
          csv << e.metric << ',' << e.quantity << ',' << rep.labels[i] << ',' << rep.labels[k] << ','
              << e.raw->values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) << ',';
          if (rep.normalized) csv << e.norm->values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
          csv << '\n';
        }
  }
  {
    std::ofstream csv(out_dir / "mba.csv");
    csv << "variant,mba,tmba,runs,braked_runs\n" << std::setprecision(17);
    for (const auto& l : rep.labels) {
      const auto& b = rep.braking.at(l);
      csv << l << ',' << b.mba << ',' << b.tmba << ',' << b.runs << ',' << b.braked_runs << '\n';
    }
  }
  for (const auto& [label, cdf] : rep.collisions) {
    std::ofstream csv(out_dir / ("collision_cdf_" + label + ".csv"));
    csv << "gap_seconds,cumulative_fraction\n" << std::setprecision(17);
    for (std::size_t i = 0; i < cdf.gaps.size(); ++i) csv << cdf.gaps[i] << ',' << cdf.cumulative[i] << '\n';
  }
  std::ofstream md(out_dir / "compare.md");
  md << render_report({}, rep.to_json());
}

metrics::PklResult pkl_report(const HarnessConfig& cfg, std::shared_ptr<const SurrogateModel> model,
                              std::uint64_t seed) {
  if (!model) throw std::invalid_argument("pkl: model required");
  if (cfg.pkl.stride < 1 || cfg.pkl.samples < 2) throw std::invalid_argument("pkl: need stride >= 1 and samples >= 2");
  struct Snapshot {
    WorldState world;
    std::vector<SalientVector> salients;
    PidState pid;
  };
  std::vector<Snapshot> snaps;
  std::vector<Eigen::VectorXd> reference;
  PerceptionStack detector = PerceptionStack::make_detector(cfg.detector, seed);
  run_closed_loop(cfg, cfg.scenario, detector, [&](const FrameView& f) {
    if (f.frame % cfg.pkl.stride != 0) return;
    snaps.push_back({f.world, {f.salients.begin(), f.salients.end()}, f.pid_before});
    reference.push_back(Eigen::VectorXd::Constant(1, f.control.throttle - f.control.brake));
  });
  auto replan = [&](std::size_t t, std::mt19937_64& rng) {
    const Snapshot& s = snaps[t];
    const std::vector<Detection> dets = model->perceive(s.salients, rng);
    PidState pid = s.pid;
    const ControlCommand cmd = plan(cfg, s.world, dets, pid);
    return Eigen::VectorXd::Constant(1, cmd.throttle - cmd.brake).eval();
  };
  std::mt19937_64 rng(mix(seed, 0x9c1));
  return metrics::pkl_bound(reference, replan, cfg.pkl.samples, cfg.pkl.bandwidth, rng);
}

// ---------------------------------------------------------------------------
// report

std::string render_report(const std::vector<std::pair<std::string, json>>& evals,
                          const std::optional<json>& comparison) {
  std::ostringstream md;
  md << "# pemsim report\n\n";
  if (!evals.empty()) {
    md << "## Model-level evaluation (within range)\n\n";
    md << "| model | prec vs GT | recall vs GT | spMSE vs GT | prec vs det | recall vs det | acc vs det |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& [label, e] : evals) {
      const json& g = e.at("surrogate_vs_gt");
      const json& d = e.at("surrogate_vs_detector");
      const json& mse = e.at("surrogate_sp_mse");
      md << "| " << label << " | " << fmt(g.at("precision")) << " | " << fmt(g.at("recall")) << " | "
         << (mse.is_null() ? std::string("n/a") : fmt(mse.get<double>(), 4)) << " | " << fmt(d.at("precision")) << " | "
         << fmt(d.at("recall")) << " | " << fmt(d.at("accuracy")) << " |\n";
    }
    const json& first = evals.front().second;
    const json& dg = first.at("detector_vs_gt");
    const json& dmse = first.at("detector_sp_mse");
    md << "| detector | " << fmt(dg.at("precision")) << " | " << fmt(dg.at("recall")) << " | "
       << (dmse.is_null() ? std::string("n/a") : fmt(dmse.get<double>(), 4)) << " | | | |\n\n";
    md << "### Recall by distance\n\n| bin (m) | detector |";
    for (const auto& [label, e] : evals) md << ' ' << label << " |";
    md << "\n|---|---|";
    for (std::size_t k = 0; k < evals.size(); ++k) md << "---|";
    md << '\n';
    const json& bins = first.at("bins");
    for (std::size_t b = 0; b < bins.size(); ++b) {
      md << "| " << fmt(bins[b].at("lo"), 0) << "-" << fmt(bins[b].at("hi"), 0) << " | "
         << fmt(bins[b].at("detector_recall")) << " |";
      for (const auto& [label, e] : evals) md << ' ' << fmt(e.at("bins")[b].at("surrogate_recall")) << " |";
      md << '\n';
    }
    md << '\n';
  }
  if (comparison) {
    const json& c = *comparison;
    const auto labels = c.at("labels").get<std::vector<std::string>>();
    auto table = [&](const char* title, const json& t) {
      md << "### " << title << "\n\n|   |";
      for (const auto& l : labels) md << ' ' << l << " |";
      md << "\n|---|";
      for (std::size_t k = 0; k < labels.size(); ++k) md << "---|";
      md << '\n';
      for (std::size_t i = 0; i < labels.size(); ++i) {
        md << "| " << labels[i] << " |";
        for (std::size_t k = 0; k < labels.size(); ++k) md << ' ' << fmt(t.at("values")[i][k]) << " |";
        md << '\n';
      }
      md << '\n';
    };
    md << "## Closed-loop comparison\n\n";
    const bool norm = c.at("normalized").get<bool>();
    const char* prefix = norm ? "normalized_" : "";
    table("meanEucl, position", c.at(std::string(prefix) + "mean_eucl_position"));
    table("maxEucl, position", c.at(std::string(prefix) + "max_eucl_position"));
    table("meanEucl, velocity", c.at(std::string(prefix) + "mean_eucl_velocity"));
    table("maxEucl, velocity", c.at(std::string(prefix) + "max_eucl_velocity"));
    if (norm) md << "Entries are divided by the (gt, detector) entry.\n\n";
    md << "### Braking\n\n| variant | MBA | tMBA (s) | runs that braked | collision gaps pooled | median gap (s) |\n"
       << "|---|---|---|---|---|---|\n";
    for (const auto& l : labels) {
      const json& b = c.at("braking").at(l);
      const json& g = c.at("collision_gaps").at(l);
      md << "| " << l << " | " << fmt(b.at("mba")) << " | " << fmt(b.at("tmba"), 2) << " | " << b.at("braked_runs")
         << "/" << b.at("runs") << " | " << g.at("collisions_pooled") << " | " << fmt(g.at("median"), 2) << " |\n";
    }
    md << '\n';
    if (c.contains("pkl"))
      md << "### Planner divergence\n\nKDE estimate " << fmt(c.at("pkl").at("kde_estimate"), 4) << ", Jensen bound "
         << fmt(c.at("pkl").at("jensen_bound"), 4) << ".\n";
  }
  return md.str();
}

}  // namespace pemsim::harness
