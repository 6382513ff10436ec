#pragma once

#include <cstdint>
#include <vector>

#include "clonewatch/model.hpp"
#include "clonewatch/views.hpp"

namespace clonewatch::node2vec {

struct Config {
  int dimensions = 128;
  double p_return = 0.5;
  double q_inout = 2.0;
  int walk_length = 15;
  int walks_per_node = 10;
  int window = 5;
  int negatives = 5;
  int epochs = 3;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Sorted, deduplicated undirected neighbour lists.
using Adjacency = std::vector<std::vector<std::uint32_t>>;

Adjacency make_adjacency(std::size_t nodes,
                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

/// Friend or follower edges of the corpus, as an undirected graph over the
/// corpus's row order.
Adjacency network_adjacency(const Corpus& corpus, ViewName which);

/// Unnormalised second-order weights for leaving `current` having arrived
/// from `previous`: 1/p back to `previous`, 1 to its neighbours, 1/q beyond.
/// One weight per entry of adjacency[current], in order.
std::vector<double> transition_weights(const Adjacency& adj, std::uint32_t previous,
                                       std::uint32_t current, double p, double q);

using Walk = std::vector<std::uint32_t>;

/// `walks_per_node` walks from every node. Each walk draws from its own
/// stream derived from (seed, node, walk index).
std::vector<Walk> generate_walks(const Adjacency& adj, const Config& config);

/// Skip-gram with negative sampling. Nodes that never form a
/// (centre, context) pair keep a zero row.
Eigen::MatrixXd train_skipgram(const std::vector<Walk>& walks, std::size_t nodes,
                               const Config& config);

ViewMatrix build_network_view(const Corpus& corpus, ViewName which, const Config& config);

}  // namespace clonewatch::node2vec
