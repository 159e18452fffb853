#include "lpgnn/model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lpgnn {

Aggregation aggregation_from_string(std::string_view name) {
  if (name == "sum") return Aggregation::Sum;
  if (name == "avg") return Aggregation::Avg;
  throw std::invalid_argument("unknown aggregation: " + std::string(name));
}

std::string_view to_string(Aggregation a) {
  return a == Aggregation::Sum ? "sum" : "avg";
}

Model Model::build(const ModelConfig& cfg, Rng& rng) {
  if (cfg.state_dim <= 0) throw NetError("state_dim must be positive");
  if (cfg.node_feature_dim < 0 || cfg.arc_feature_dim < 0) {
    throw NetError("feature dimensions must be non-negative");
  }
  if (cfg.num_classes < 2) throw NetError("need at least two classes");
  if (cfg.hidden_units <= 0 || cfg.hidden_layers <= 0) {
    throw NetError("hidden_units and hidden_layers must be positive");
  }

  const int in_w =
      2 * cfg.state_dim + 2 * cfg.node_feature_dim + 2 * cfg.arc_feature_dim;

  std::vector<int> msg_widths;
  msg_widths.push_back(in_w);
  for (int l = 0; l < cfg.hidden_layers; ++l) msg_widths.push_back(cfg.hidden_units);
  msg_widths.push_back(cfg.state_dim);

  std::vector<int> out_widths;
  out_widths.push_back(cfg.state_dim);
  for (int l = 0; l < cfg.hidden_layers; ++l) out_widths.push_back(cfg.hidden_units);
  out_widths.push_back(cfg.num_classes);

  Model m;
  m.message_net = DenseNet(std::move(msg_widths), cfg.dropout);
  m.readout_net = DenseNet(std::move(out_widths), cfg.dropout);
  m.aggregation = cfg.aggregation;
  m.constraint = cfg.constraint;
  m.state_dim = cfg.state_dim;
  m.message_net.init_params(rng);
  m.readout_net.init_params(rng);
  return m;
}

void transition_forward(const Model& m, const Graph& g, const NeighborIndex& idx,
                        const Matrix& states, int v, std::span<double> out,
                        TransitionCache* cache, Rng* dropout_rng) {
  const int s = m.state_dim;
  const int mf = g.feature_dim();
  const int d = g.arc_feature_dim();
  if (static_cast<int>(out.size()) != s) {
    throw NetError("transition output span has the wrong width");
  }

  const auto& ne = idx.neighbors[v];
  std::fill(out.begin(), out.end(), 0.0);
  if (cache != nullptr) cache->per_neighbor.assign(ne.size(), {});
  if (ne.empty()) return;  // isolated node: zero transition

  std::vector<double> input(m.message_input_width(), 0.0);
  ForwardCache local;
  for (std::size_t k = 0; k < ne.size(); ++k) {
    const int u = ne[k];
    double* p = input.data();
    std::copy_n(states.row(u), s, p);
    p += s;
    std::copy_n(g.node_features.row(u), mf, p);
    p += mf;
    if (d > 0) {
      int row_vu = idx.arc_row(v, u);
      if (row_vu >= 0) {
        std::copy_n(g.arc_features.row(row_vu), d, p);
      } else {
        std::fill_n(p, d, 0.0);
      }
      p += d;
      int row_uv = idx.arc_row(u, v);
      if (row_uv >= 0) {
        std::copy_n(g.arc_features.row(row_uv), d, p);
      } else {
        std::fill_n(p, d, 0.0);
      }
      p += d;
    }
    std::copy_n(states.row(v), s, p);
    p += s;
    std::copy_n(g.node_features.row(v), mf, p);

    ForwardCache& fc = cache != nullptr ? cache->per_neighbor[k] : local;
    m.message_net.forward(input, fc, dropout_rng);
    for (int i = 0; i < s; ++i) out[i] += fc.output[i];
  }
  if (m.aggregation == Aggregation::Avg) {
    const double inv = 1.0 / static_cast<double>(ne.size());
    for (double& x : out) x *= inv;
  }
}

void readout_node(const Model& m, std::span<const double> state,
                  std::span<double> logits) {
  ForwardCache cache;
  m.readout_net.forward(state, cache, nullptr);
  std::copy(cache.output.begin(), cache.output.end(), logits.begin());
}

void readout_graph(const Model& m, const Matrix& states,
                   std::span<const int> component, std::span<double> logits) {
  if (component.empty()) throw NetError("readout of an empty component");
  std::vector<double> mean(m.state_dim, 0.0);
  for (int v : component) {
    const double* row = states.row(v);
    for (int i = 0; i < m.state_dim; ++i) mean[i] += row[i];
  }
  const double inv = 1.0 / static_cast<double>(component.size());
  for (double& x : mean) x *= inv;
  readout_node(m, mean, logits);
}

namespace {

constexpr int kCheckpointVersion = 1;

void write_params(std::ostream& out, std::span<const double> params) {
  char buf[32];
  for (double p : params) {
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    out << buf << '\n';
  }
}

std::vector<int> read_widths(std::istream& in) {
  int count = 0;
  if (!(in >> count) || count < 2) {
    throw NetError("checkpoint: bad layer-width count");
  }
  std::vector<int> widths(count);
  for (int& w : widths) {
    if (!(in >> w)) throw NetError("checkpoint: truncated width list");
  }
  return widths;
}

DenseNet read_net(std::istream& in, const char* label) {
  std::string tag;
  in >> tag;
  if (tag != label) {
    throw NetError("checkpoint: expected section '" + std::string(label) +
                   "', found '" + tag + "'");
  }
  std::vector<int> widths = read_widths(in);
  double dropout = 0.0;
  if (!(in >> dropout)) throw NetError("checkpoint: missing dropout rate");
  DenseNet net(std::move(widths), dropout);
  std::vector<double> flat(net.param_count());
  for (double& p : flat) {
    if (!(in >> p)) throw NetError("checkpoint: truncated parameter vector");
  }
  net.unflatten(flat);
  return net;
}

}  // namespace

void save_checkpoint(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NetError("cannot open checkpoint for writing: " + path);
  out << "lpgnn-model " << kCheckpointVersion << '\n';
  out << "state_dim " << m.state_dim << '\n';
  out << "aggregation " << to_string(m.aggregation) << '\n';
  char eps[32];
  std::snprintf(eps, sizeof(eps), "%.17g", m.constraint.epsilon);
  out << "constraint " << to_string(m.constraint.variant) << ' ' << eps << '\n';

  for (const auto* net : {&m.message_net, &m.readout_net}) {
    out << (net == &m.message_net ? "message" : "readout") << ' '
        << net->widths().size();
    for (int w : net->widths()) out << ' ' << w;
    out << '\n' << net->dropout_rate() << '\n';
    write_params(out, net->params());
  }
  if (!out) throw NetError("write failed for checkpoint: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetError("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "lpgnn-model" || version != kCheckpointVersion) {
    throw NetError("not a supported checkpoint: " + path);
  }

  Model m;
  std::string tag;
  in >> tag;
  if (tag != "state_dim" || !(in >> m.state_dim) || m.state_dim <= 0) {
    throw NetError("checkpoint: bad state_dim");
  }
  std::string agg;
  in >> tag >> agg;
  if (tag != "aggregation") throw NetError("checkpoint: missing aggregation");
  m.aggregation = aggregation_from_string(agg);
  std::string gname;
  double eps = 0.0;
  in >> tag >> gname >> eps;
  if (tag != "constraint") throw NetError("checkpoint: missing constraint");
  m.constraint = ConstraintFunction(g_variant_from_string(gname), eps);

  m.message_net = read_net(in, "message");
  m.readout_net = read_net(in, "readout");
  if (m.message_net.output_width() != m.state_dim ||
      m.readout_net.input_width() != m.state_dim) {
    throw NetError("checkpoint: net widths disagree with state_dim");
  }
  return m;
}

}  // namespace lpgnn
