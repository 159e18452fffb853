#include "lpgnn/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "json.hpp"

using namespace lpgnn;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.task = "subgraph";
  c.n_graphs = 3;
  c.graph_size = 6;
  c.state_dim = 3;
  c.hidden_units = 4;
  c.epochs = 8;
  c.patience = 0;
  c.infer_steps = 25;
  c.seed = 5;
  return c;
}

// Twelve tiny graphs in two classes: triangles and 3-node paths.
std::string write_graph_task_fixture() {
  LabeledDataset ds;
  ds.task = DatasetTask::GraphMulticlass;
  ds.num_classes = 2;
  ds.provenance = "{\"generator\":\"test-fixture\"}";
  for (int i = 0; i < 12; ++i) {
    Graph g;
    g.num_nodes = 3;
    if (i % 2 == 0) {
      g.arcs = {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {0, 2}, {2, 0}};
      g.graph_target = 0;
    } else {
      g.arcs = {{0, 1}, {1, 0}, {1, 2}, {2, 1}};
      g.graph_target = 1;
    }
    g.node_features = Matrix(3, 1, 1.0);
    ds.graphs.push_back(g);
  }
  const std::string path = "graph_task_fixture.tmp.jsonl";
  save_jsonl(ds, path);
  return path;
}

}  // namespace

TEST_CASE("config hashing is stable and sensitive") {
  const ExperimentConfig a = tiny_config();
  ExperimentConfig b = tiny_config();
  CHECK(a.canonical_string() == b.canonical_string());
  CHECK(a.hash() == b.hash());

  b.lr_theta = 2e-3;
  CHECK(a.hash() != b.hash());
  b = tiny_config();
  b.seed = 6;
  CHECK(a.hash() != b.hash());
  b = tiny_config();
  b.g_variant = "squared";
  CHECK(a.hash() != b.hash());
}

TEST_CASE("config validation rejects each bad field") {
  ExperimentConfig c = tiny_config();
  c.task = "mystery";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = tiny_config();
  c.task = "tu";  // no data path
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = tiny_config();
  c.g_variant = "cubic";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = tiny_config();
  c.aggregation = "max";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = tiny_config();
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = tiny_config();
  c.lr_states = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = tiny_config();
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  c = tiny_config();
  c.pattern_size = 7;  // exceeds graph_size
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  CHECK_NOTHROW(tiny_config().validate());
}

TEST_CASE("synthetic tasks generate three splits' worth of graphs") {
  ExperimentConfig c = tiny_config();
  const LabeledDataset ds = load_or_generate(c);
  CHECK(ds.size() == 3 * c.n_graphs);

  c.task = "clique";
  const LabeledDataset cds = load_or_generate(c);
  CHECK(cds.size() == 3 * c.n_graphs);
  CHECK(cds.task == DatasetTask::NodeBinary);
}

TEST_CASE("a node-task run fills the record and artifacts coherently") {
  const ExperimentConfig c = tiny_config();
  NodeTaskArtifacts artifacts;
  const MetricsRecord record = run_node_task(c, &artifacts);

  CHECK_FALSE(record.failed);
  CHECK(record.config_hash == c.hash());
  CHECK(record.epochs.size() == 8);
  CHECK(record.best_epoch >= 1);
  CHECK(record.best_epoch <= 8);
  CHECK(record.best_val_accuracy >= 0.0);
  CHECK(record.best_val_accuracy <= 1.0);
  CHECK(record.test_accuracy >= 0.0);
  CHECK(record.test_accuracy <= 1.0);
  CHECK(std::isfinite(record.final_mean_residual));
  CHECK(std::isnan(record.cv_mean_accuracy));
  CHECK(record.wall_seconds > 0.0);

  for (const EpochRow& row : record.epochs) {
    CHECK(row.fold == -1);
    CHECK(std::isfinite(row.loss));
    CHECK(row.mean_residual >= 0.0);
  }

  CHECK(artifacts.train_batch.num_components() == 3);
  CHECK(artifacts.val_batch.num_components() == 3);
  CHECK(artifacts.test_batch.num_components() == 3);
  CHECK(artifacts.final_train_states.rows ==
        artifacts.train_batch.graph.num_nodes);
  CHECK(artifacts.test_inference.states.rows ==
        artifacts.test_batch.graph.num_nodes);
  CHECK(artifacts.best_model.state_dim == c.state_dim);
}

TEST_CASE("patience cuts training short once validation stalls") {
  ExperimentConfig c = tiny_config();
  c.epochs = 200;
  c.patience = 1;
  const MetricsRecord record = run_node_task(c);
  CHECK(record.epochs.size() < 200);
  CHECK(static_cast<int>(record.epochs.size()) ==
        record.best_epoch + c.patience);
}

TEST_CASE("identical config and seed reproduce the metrics byte for byte") {
  const ExperimentConfig c = tiny_config();
  const MetricsRecord a = run_node_task(c);
  const MetricsRecord b = run_node_task(c);
  CHECK(metrics_csv(a) == metrics_csv(b));
  CHECK(a.test_accuracy == b.test_accuracy);

  ExperimentConfig other = c;
  other.seed = 1234;
  const MetricsRecord d = run_node_task(other);
  CHECK(metrics_csv(a) != metrics_csv(d));
}

TEST_CASE("cross-validation aligns folds on one stopping epoch") {
  const std::string path = write_graph_task_fixture();
  ExperimentConfig c;
  c.task = "jsonl";
  c.data_path = path;
  c.state_dim = 3;
  c.hidden_units = 4;
  c.epochs = 6;
  c.folds = 3;
  c.seed = 9;

  const MetricsRecord record = run_graph_classification(c);
  std::remove(path.c_str());

  CHECK_FALSE(record.failed);
  CHECK(record.epochs.size() == 3 * 6);
  std::set<int> folds_seen;
  for (const EpochRow& row : record.epochs) folds_seen.insert(row.fold);
  CHECK(folds_seen == std::set<int>{0, 1, 2});

  CHECK(record.best_epoch >= 1);
  CHECK(record.best_epoch <= 6);
  CHECK(record.cv_mean_accuracy >= 0.0);
  CHECK(record.cv_mean_accuracy <= 1.0);
  CHECK(record.cv_std_accuracy >= 0.0);
  CHECK(record.cv_mean_accuracy == record.best_val_accuracy);
  CHECK(std::isnan(record.test_accuracy));

  // the reported mean is the fold average at the shared epoch
  double mean = 0.0;
  for (const EpochRow& row : record.epochs) {
    if (row.epoch == record.best_epoch) mean += row.val_accuracy;
  }
  CHECK(record.cv_mean_accuracy == doctest::Approx(mean / 3.0).epsilon(1e-12));
}

TEST_CASE("grid enumeration is the exact cross product, base-filled") {
  GridSpace space;
  space.base = tiny_config();
  space.g_variants = {"abs", "squared"};
  space.lrs_theta = {1e-3, 1e-4, 1e-5};
  const std::vector<ExperimentConfig> cells = space.enumerate();
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].g_variant == "abs");
  CHECK(cells[0].lr_theta == 1e-3);
  CHECK(cells[1].lr_theta == 1e-4);
  CHECK(cells[3].g_variant == "squared");
  // untouched axes keep the base value
  CHECK(cells[0].state_dim == space.base.state_dim);
  CHECK(cells[0].seed == space.base.seed);
}

TEST_CASE("grid search ranks working cells above failed ones") {
  GridSpace space;
  space.base = tiny_config();
  space.base.epochs = 4;
  space.base.infer_steps = 5;
  space.g_variants = {"abs-eps"};
  space.lrs_theta = {1e-3, 1e-4};
  std::vector<MetricsRecord> records = grid_search(space, 0, 2);
  REQUIRE(records.size() == 2);
  CHECK_FALSE(records[0].failed);
  CHECK(records[0].selection_score() >= records[1].selection_score());

  // a cell that cannot run is reported failed, not thrown
  GridSpace broken;
  broken.base = tiny_config();
  broken.base.task = "tu";
  broken.base.data_path = "definitely_missing_dir";
  records = grid_search(broken);
  REQUIRE(records.size() == 1);
  CHECK(records[0].failed);
  CHECK_FALSE(records[0].failure_reason.empty());
  CHECK(records[0].selection_score() ==
        -std::numeric_limits<double>::infinity());

  // budget truncates deterministically
  GridSpace two;
  two.base = tiny_config();
  two.base.epochs = 2;
  two.lrs_theta = {1e-3, 1e-4};
  records = grid_search(two, 1);
  CHECK(records.size() == 1);
}

TEST_CASE("summary and sweep files are written and parse back") {
  ExperimentConfig c = tiny_config();
  c.epochs = 3;
  const MetricsRecord record = run_node_task(c);

  const std::string summary_path = "summary.tmp.json";
  write_summary_json(record, summary_path);
  {
    std::ifstream in(summary_path);
    nlohmann::json j;
    in >> j;
    CHECK(j.at("config").at("task") == "subgraph");
    CHECK(j.at("config_hash").get<std::uint64_t>() == record.config_hash);
    CHECK(j.at("epochs_run").get<int>() == 3);
    CHECK(j.at("failed").get<bool>() == false);
    CHECK(j.at("cv_mean_accuracy").is_null());  // NaN serializes as null
  }
  std::remove(summary_path.c_str());

  const std::string csv_path = "metrics.tmp.csv";
  write_metrics_csv(record, csv_path);
  {
    std::ifstream in(csv_path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 4);  // header + 3 epochs
  }
  std::remove(csv_path.c_str());

  const std::string sweep_path = "sweep.tmp.csv";
  std::vector<MetricsRecord> records = {record};
  records.push_back(record);
  records[1].failed = true;
  records[1].failure_reason = "contains, a comma";
  write_sweep_csv(records, sweep_path);
  {
    std::ifstream in(sweep_path);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[2].find("\"contains, a comma\"") != std::string::npos);
  }
  std::remove(sweep_path.c_str());
}

TEST_CASE("the scaling probe insists on a usable size ladder") {
  CHECK_THROWS_AS(scaling_probe(std::vector<int>{100, 200, 400}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(scaling_probe(std::vector<int>{100, 200, 300, 400}, 1),
                  std::invalid_argument);
}

TEST_CASE("the scaling probe measures every size") {
  const std::vector<int> sizes = {30, 60, 120, 300};
  const ScalingReport report = scaling_probe(sizes, 3);
  REQUIRE(report.points.size() == 4);
  for (const ScalingPoint& p : report.points) {
    CHECK(p.seconds_per_step > 0.0);
    CHECK(p.steps_timed > 0);
    CHECK(p.graph_size > p.num_nodes);  // edges landed
  }
  CHECK(std::isfinite(report.loglog_slope));
}
