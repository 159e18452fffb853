#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpgnn/dataset.hpp"

namespace lpgnn {

namespace {

namespace fs = std::filesystem;

// The benchmark text files separate numbers with commas and/or whitespace;
// "3, 1" and "3,1" must both yield two endpoints, so commas split tokens
// rather than being stripped.
std::vector<long> read_numbers(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open: " + path.string());
  std::vector<long> out;
  std::string token;
  while (in >> token) {
    std::size_t begin = 0;
    while (begin <= token.size()) {
      std::size_t end = token.find(',', begin);
      if (end == std::string::npos) end = token.size();
      const std::string piece = token.substr(begin, end - begin);
      begin = end + 1;
      if (piece.empty()) continue;
      std::size_t pos = 0;
      long value = 0;
      try {
        value = std::stol(piece, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != piece.size()) {
        throw DatasetError("unparseable token '" + piece + "' in " +
                           path.string());
      }
      out.push_back(value);
    }
  }
  return out;
}

std::string find_prefix(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw DatasetError("not a directory: " + dir.string());
  }
  std::vector<std::string> prefixes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 6 && name.ends_with("_A.txt")) {
      prefixes.push_back(name.substr(0, name.size() - 6));
    }
  }
  if (prefixes.empty()) {
    throw DatasetError("no <prefix>_A.txt found in " + dir.string());
  }
  if (prefixes.size() > 1) {
    throw DatasetError("multiple datasets in " + dir.string() +
                       "; keep one <prefix>_A.txt per directory");
  }
  return prefixes.front();
}

// Dense 0-based remap of an arbitrary categorical alphabet, ordered by value.
std::map<long, int> remap(const std::vector<long>& values) {
  std::vector<long> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::map<long, int> ids;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    ids[sorted[i]] = static_cast<int>(i);
  }
  return ids;
}

}  // namespace

LabeledDataset load_tu_dataset(const std::string& directory) {
  const fs::path dir(directory);
  const std::string prefix = find_prefix(dir);
  const auto file = [&](const char* suffix) {
    return dir / (prefix + suffix);
  };

  const std::vector<long> indicator = read_numbers(file("_graph_indicator.txt"));
  const std::vector<long> graph_labels = read_numbers(file("_graph_labels.txt"));
  const std::vector<long> arc_pairs = read_numbers(file("_A.txt"));
  if (indicator.empty()) throw DatasetError("no nodes listed for " + prefix);
  if (arc_pairs.size() % 2 != 0) {
    throw DatasetError(prefix + "_A.txt has an odd number of endpoints");
  }

  const long num_nodes = static_cast<long>(indicator.size());
  const long num_graphs = *std::max_element(indicator.begin(), indicator.end());
  if (static_cast<long>(graph_labels.size()) != num_graphs) {
    throw DatasetError(prefix + "_graph_labels.txt lists " +
                       std::to_string(graph_labels.size()) + " labels for " +
                       std::to_string(num_graphs) + " graphs");
  }

  // Global node id (1-based) -> owning graph and local id.
  std::vector<int> owner(num_nodes), local(num_nodes);
  std::vector<int> sizes(num_graphs, 0);
  for (long i = 0; i < num_nodes; ++i) {
    const long gid = indicator[i];
    if (gid < 1 || gid > num_graphs) {
      throw DatasetError("graph indicator " + std::to_string(gid) +
                         " out of range in " + prefix);
    }
    owner[i] = static_cast<int>(gid - 1);
    local[i] = sizes[owner[i]]++;
  }

  std::vector<Graph> graphs(num_graphs);
  for (long gi = 0; gi < num_graphs; ++gi) {
    graphs[gi].num_nodes = sizes[gi];
  }

  for (std::size_t k = 0; k + 1 < arc_pairs.size(); k += 2) {
    const long u = arc_pairs[k];
    const long v = arc_pairs[k + 1];
    if (u < 1 || u > num_nodes || v < 1 || v > num_nodes) {
      throw DatasetError("arc endpoint out of range in " + prefix + "_A.txt");
    }
    if (owner[u - 1] != owner[v - 1]) {
      throw DatasetError("arc (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") crosses graphs in " + prefix + "_A.txt");
    }
    graphs[owner[u - 1]].arcs.push_back({local[u - 1], local[v - 1]});
  }

  // Node features: one-hot categorical labels when provided, else one-hot
  // degree with the bucket count fixed corpus-wide.
  const fs::path node_label_path = file("_node_labels.txt");
  if (fs::exists(node_label_path)) {
    const std::vector<long> node_labels = read_numbers(node_label_path);
    if (static_cast<long>(node_labels.size()) != num_nodes) {
      throw DatasetError(prefix + "_node_labels.txt lists " +
                         std::to_string(node_labels.size()) + " labels for " +
                         std::to_string(num_nodes) + " nodes");
    }
    const std::map<long, int> alphabet = remap(node_labels);
    const int width = static_cast<int>(alphabet.size());
    for (long gi = 0; gi < num_graphs; ++gi) {
      graphs[gi].node_features = Matrix(sizes[gi], width);
    }
    for (long i = 0; i < num_nodes; ++i) {
      graphs[owner[i]].node_features.at(local[i],
                                        alphabet.at(node_labels[i])) = 1.0;
    }
  } else {
    const int buckets = max_degree(graphs);
    for (Graph& g : graphs) {
      g.node_features = degree_one_hot_features(g, buckets);
    }
  }

  const std::map<long, int> classes = remap(graph_labels);
  LabeledDataset ds;
  ds.task = DatasetTask::GraphMulticlass;
  ds.num_classes = static_cast<int>(classes.size());
  ds.graphs = std::move(graphs);
  for (long gi = 0; gi < num_graphs; ++gi) {
    ds.graphs[gi].graph_target = classes.at(graph_labels[gi]);
    ds.graphs[gi].validate();
  }
  ds.provenance = nlohmann::json{{"source", "tu"},
                                 {"directory", directory},
                                 {"prefix", prefix},
                                 {"graphs", num_graphs},
                                 {"nodes", num_nodes}}
                      .dump();
  return ds;
}

}  // namespace lpgnn
