// Command-line front end: dataset generation, single training runs, grid
// sweeps, the scaling probe, and checkpoint evaluation. Flags mirror
// ExperimentConfig one-to-one; every run writes a per-epoch metrics CSV and a
// JSON summary under --out.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lpgnn/dataset.hpp"
#include "lpgnn/experiment.hpp"
#include "lpgnn/graph.hpp"
#include "lpgnn/lagrangian.hpp"
#include "lpgnn/model.hpp"

namespace fs = std::filesystem;

namespace {

// Output paths may name directories that do not exist yet.
void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void add_config_flags(CLI::App* cmd, lpgnn::ExperimentConfig& cfg) {
  cmd->add_option("--task", cfg.task, "subgraph | clique | tu | jsonl")
      ->capture_default_str();
  cmd->add_option("--data", cfg.data_path,
                  "TU directory or JSON-lines file (tu/jsonl tasks)");
  cmd->add_option("--n-graphs", cfg.n_graphs,
                  "generated dataset size, split into equal thirds")
      ->capture_default_str();
  cmd->add_option("--graph-size", cfg.graph_size, "nodes per generated graph")
      ->capture_default_str();
  cmd->add_option("--pattern-size", cfg.pattern_size,
                  "pattern / clique order (synthetic)")
      ->capture_default_str();
  cmd->add_option("--edge-prob", cfg.edge_prob, "generator edge density")
      ->capture_default_str();
  cmd->add_option("--g", cfg.g_variant,
                  "constraint shaping: lin | lin-eps | abs | abs-eps | squared")
      ->capture_default_str();
  cmd->add_option("--eps", cfg.epsilon, "shaping tolerance band half-width")
      ->capture_default_str();
  cmd->add_option("--state-dim", cfg.state_dim, "node state dimension")
      ->capture_default_str();
  cmd->add_option("--hidden", cfg.hidden_units, "hidden units per layer")
      ->capture_default_str();
  cmd->add_option("--layers", cfg.hidden_layers, "hidden layers per net")
      ->capture_default_str();
  cmd->add_option("--agg", cfg.aggregation, "neighbor aggregation: sum | avg")
      ->capture_default_str();
  cmd->add_option("--dropout", cfg.dropout, "hidden-layer dropout rate")
      ->capture_default_str();
  cmd->add_option("--lr-theta", cfg.lr_theta, "learning rate for the nets")
      ->capture_default_str();
  cmd->add_option("--lr-states", cfg.lr_states, "learning rate for the states")
      ->capture_default_str();
  cmd->add_option("--lr-multipliers", cfg.lr_multipliers,
                  "learning rate for the multipliers (ascent)")
      ->capture_default_str();
  cmd->add_option("--epochs", cfg.epochs, "descent-ascent steps")
      ->capture_default_str();
  cmd->add_option("--patience", cfg.patience,
                  "early-stop patience in epochs (0 disables)")
      ->capture_default_str();
  cmd->add_option("--folds", cfg.folds, "cross-validation folds (graph tasks)")
      ->capture_default_str();
  cmd->add_option("--infer-steps", cfg.infer_steps,
                  "test-time state optimization budget")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "run seed")->capture_default_str();
}

void report_run(const lpgnn::MetricsRecord& rec, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  lpgnn::write_metrics_csv(rec, (out_dir / "metrics.csv").string());
  lpgnn::write_summary_json(rec, (out_dir / "summary.json").string());
  std::printf("wrote %s and %s\n", (out_dir / "metrics.csv").c_str(),
              (out_dir / "summary.json").c_str());
}

int cmd_train(const lpgnn::ExperimentConfig& cfg, const fs::path& out_dir,
              const std::string& save_model) {
  cfg.validate();

  lpgnn::MetricsRecord rec;
  if (!save_model.empty()) {
    if (cfg.task == "tu") {
      std::fprintf(stderr,
                   "--save-model needs a single trained model; "
                   "cross-validation runs do not produce one\n");
      return 2;
    }
    lpgnn::NodeTaskArtifacts artifacts;
    rec = lpgnn::run_node_task(cfg, &artifacts);
    if (!rec.failed) {
      ensure_parent_dir(save_model);
      lpgnn::save_checkpoint(artifacts.best_model, save_model);
      std::printf("checkpoint: %s\n", save_model.c_str());
    }
  } else {
    rec = lpgnn::run_any(cfg);
  }

  report_run(rec, out_dir);
  if (rec.failed) {
    std::printf("FAILED: %s\n", rec.failure_reason.c_str());
    return 1;
  }
  if (std::isnan(rec.cv_mean_accuracy)) {
    std::printf("best epoch %d, val %.4f, test accuracy %.4f, "
                "final residual %.5f (%.1fs)\n",
                rec.best_epoch, rec.best_val_accuracy, rec.test_accuracy,
                rec.final_mean_residual, rec.wall_seconds);
  } else {
    std::printf("stopping epoch %d, cv accuracy %.4f +- %.4f (%.1fs)\n",
                rec.best_epoch, rec.cv_mean_accuracy, rec.cv_std_accuracy,
                rec.wall_seconds);
  }
  return 0;
}

int cmd_generate(const lpgnn::ExperimentConfig& cfg, const std::string& out) {
  lpgnn::LabeledDataset ds;
  if (cfg.task == "subgraph") {
    lpgnn::SubgraphTaskParams p;
    p.n_graphs = cfg.n_graphs;
    p.graph_size = cfg.graph_size;
    p.pattern_size = cfg.pattern_size;
    p.edge_prob = cfg.edge_prob;
    ds = lpgnn::generate_subgraph_matching(p, cfg.seed);
  } else if (cfg.task == "clique") {
    lpgnn::CliqueTaskParams p;
    p.n_graphs = cfg.n_graphs;
    p.graph_size = cfg.graph_size;
    p.clique_size = cfg.pattern_size;
    p.edge_prob = cfg.edge_prob;
    ds = lpgnn::generate_clique(p, cfg.seed);
  } else {
    std::fprintf(stderr, "generate supports subgraph | clique, got '%s'\n",
                 cfg.task.c_str());
    return 2;
  }

  ensure_parent_dir(out);
  lpgnn::save_jsonl(ds, out);
  long positive = 0;
  long labeled = 0;
  for (const lpgnn::Graph& g : ds.graphs) {
    for (int y : g.node_targets) positive += y;
    labeled += static_cast<long>(g.node_targets.size());
  }
  std::printf("%d graphs -> %s (positive fraction %.3f)\n", ds.size(),
              out.c_str(), labeled ? double(positive) / labeled : 0.0);
  return 0;
}

int cmd_sweep(const lpgnn::GridSpace& space, int budget, int workers,
              const fs::path& out_dir) {
  space.base.validate();
  const std::vector<lpgnn::MetricsRecord> ranked =
      lpgnn::grid_search(space, budget, workers);

  fs::create_directories(out_dir);
  const fs::path csv = out_dir / "sweep.csv";
  lpgnn::write_sweep_csv(ranked, csv.string());
  std::printf("%zu cells -> %s\n", ranked.size(), csv.c_str());

  const std::size_t top = std::min<std::size_t>(5, ranked.size());
  for (std::size_t i = 0; i < top; ++i) {
    const lpgnn::MetricsRecord& r = ranked[i];
    if (r.failed) {
      std::printf("  #%zu FAILED (%s)\n", i + 1, r.failure_reason.c_str());
    } else {
      std::printf("  #%zu score %.4f  %s\n", i + 1, r.selection_score(),
                  r.config.canonical_string().c_str());
    }
  }
  return ranked.empty() ? 1 : 0;
}

int cmd_probe(const std::vector<int>& sizes, std::uint64_t seed,
              const std::string& out) {
  const lpgnn::ScalingReport report = lpgnn::scaling_probe(sizes, seed);
  std::printf("%10s %12s %16s %7s\n", "nodes", "|V|+|E|", "sec/step", "steps");
  for (const lpgnn::ScalingPoint& p : report.points) {
    std::printf("%10d %12ld %16.6e %7d%s\n", p.num_nodes, p.graph_size,
                p.seconds_per_step, p.steps_timed,
                p.noise_floor ? "  (noise floor)" : "");
  }
  std::printf("log-log slope: %.3f\n", report.loglog_slope);

  if (!out.empty()) {
    nlohmann::json j;
    j["slope"] = report.loglog_slope;
    j["points"] = nlohmann::json::array();
    for (const lpgnn::ScalingPoint& p : report.points) {
      j["points"].push_back({{"nodes", p.num_nodes},
                             {"graph_size", p.graph_size},
                             {"seconds_per_step", p.seconds_per_step},
                             {"steps_timed", p.steps_timed},
                             {"noise_floor", p.noise_floor}});
    }
    ensure_parent_dir(out);
    std::ofstream f(out);
    f << j.dump(2) << '\n';
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             int infer_steps, double lr_states, double lr_multipliers,
             const std::string& out) {
  const lpgnn::Model model = lpgnn::load_checkpoint(model_path);

  lpgnn::LabeledDataset ds;
  if (fs::is_directory(data_path)) {
    ds = lpgnn::load_tu_dataset(data_path);
  } else {
    ds = lpgnn::load_jsonl(data_path);
  }

  const lpgnn::DisjointUnion batch = lpgnn::disjoint_union(ds.graphs);
  const lpgnn::NeighborIndex idx = lpgnn::build_neighbor_index(batch.graph);
  const lpgnn::InferenceResult inference = lpgnn::infer_states(
      model, batch.graph, idx, infer_steps, lr_states, lr_multipliers);

  double accuracy = 0.0;
  if (ds.task == lpgnn::DatasetTask::GraphMulticlass) {
    std::vector<std::pair<int, int>> ranges;
    std::vector<int> targets;
    for (int i = 0; i < batch.num_components(); ++i) {
      if (batch.component_targets[i]) {
        ranges.push_back(batch.component_range(i));
        targets.push_back(*batch.component_targets[i]);
      }
    }
    accuracy = lpgnn::graph_accuracy(model, inference.states, ranges, targets);
  } else {
    accuracy = lpgnn::node_accuracy(model, batch.graph, inference.states);
  }

  std::printf("%d graphs, %d nodes: accuracy %.4f, mean residual %.5f "
              "(%d steps, %s)\n",
              ds.size(), batch.graph.num_nodes, accuracy,
              inference.mean_abs_residual, inference.steps_used,
              inference.converged ? "converged" : "budget-limited");

  if (!out.empty()) {
    nlohmann::json j;
    j["model"] = model_path;
    j["data"] = data_path;
    j["accuracy"] = accuracy;
    j["mean_residual"] = inference.mean_abs_residual;
    j["steps_used"] = inference.steps_used;
    j["converged"] = inference.converged;
    ensure_parent_dir(out);
    std::ofstream f(out);
    f << j.dump(2) << '\n';
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained graph-network training engine"};
  app.require_subcommand(1);

  lpgnn::ExperimentConfig cfg;
  std::string out_dir = "runs/latest";
  std::string out_file;
  std::string save_model;

  CLI::App* generate =
      app.add_subcommand("generate", "Generate a synthetic dataset (JSON lines)");
  add_config_flags(generate, cfg);
  generate->add_option("--out", out_file, "output .jsonl path")->required();

  CLI::App* train = app.add_subcommand("train", "Run one training config");
  add_config_flags(train, cfg);
  train->add_option("--out", out_dir, "output directory")
      ->capture_default_str();
  train->add_option("--save-model", save_model,
                    "write the validation-selected checkpoint here");

  lpgnn::GridSpace space;
  int budget = 0;
  int workers = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "Grid search over configs");
  add_config_flags(sweep, space.base);
  sweep->add_option("--grid-g", space.g_variants, "shaping variants to sweep");
  sweep->add_option("--grid-eps", space.epsilons, "eps values to sweep");
  sweep->add_option("--grid-state-dim", space.state_dims,
                    "state dims to sweep");
  sweep->add_option("--grid-hidden", space.hidden_units,
                    "hidden widths to sweep");
  sweep->add_option("--grid-agg", space.aggregations,
                    "aggregations to sweep");
  sweep->add_option("--grid-dropout", space.dropouts, "dropouts to sweep");
  sweep->add_option("--grid-lr-theta", space.lrs_theta,
                    "net learning rates to sweep");
  sweep->add_option("--grid-lr-states", space.lrs_states,
                    "state learning rates to sweep");
  sweep->add_option("--grid-lr-multipliers", space.lrs_multipliers,
                    "multiplier learning rates to sweep");
  sweep->add_option("--budget", budget, "max cells to run (0 = all)")
      ->capture_default_str();
  sweep->add_option("--workers", workers, "parallel worker threads")
      ->capture_default_str();
  sweep->add_option("--out", out_dir, "output directory")
      ->capture_default_str();

  std::vector<int> sizes = {100, 316, 1000, 3162, 10000};
  std::uint64_t probe_seed = 0;
  CLI::App* probe =
      app.add_subcommand("probe", "Time train steps across graph sizes");
  probe->add_option("--sizes", sizes, "node counts to probe")
      ->capture_default_str();
  probe->add_option("--seed", probe_seed, "probe seed")->capture_default_str();
  probe->add_option("--out", out_file, "optional JSON report path");

  std::string model_path;
  std::string data_path;
  int infer_steps = 1000;
  double lr_states = 1e-2;
  double lr_multipliers = 1e-2;
  CLI::App* eval =
      app.add_subcommand("eval", "Score a checkpoint on a dataset");
  eval->add_option("--model", model_path, "checkpoint path")->required();
  eval->add_option("--data", data_path, "JSON-lines file or TU directory")
      ->required();
  eval->add_option("--infer-steps", infer_steps,
                   "state optimization budget")
      ->capture_default_str();
  eval->add_option("--lr-states", lr_states, "state learning rate")
      ->capture_default_str();
  eval->add_option("--lr-multipliers", lr_multipliers,
                   "multiplier learning rate")
      ->capture_default_str();
  eval->add_option("--out", out_file, "optional JSON summary path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(cfg, out_file);
    if (train->parsed()) return cmd_train(cfg, out_dir, save_model);
    if (sweep->parsed()) return cmd_sweep(space, budget, workers, out_dir);
    if (probe->parsed()) return cmd_probe(sizes, probe_seed, out_file);
    if (eval->parsed()) {
      return cmd_eval(model_path, data_path, infer_steps, lr_states,
                      lr_multipliers, out_file);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
