#include "clonewatch/node2vec.hpp"

#include <algorithm>
#include <cmath>

#include "clonewatch/errors.hpp"
#include "clonewatch/rng.hpp"

namespace clonewatch::node2vec {

void Config::validate() const {
  if (dimensions <= 0 || p_return <= 0 || q_inout <= 0 || walk_length <= 0 || walks_per_node <= 0 ||
      window <= 0 || negatives <= 0 || epochs <= 0 || learning_rate <= 0)
    throw ConfigError("node2vec parameters must all be positive");
}

Adjacency make_adjacency(std::size_t nodes,
                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  Adjacency adj(nodes);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& n : adj) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return adj;
}

Adjacency network_adjacency(const Corpus& corpus, ViewName which) {
  if (which != ViewName::friend_network && which != ViewName::follower_network)
    throw ValidationError("network adjacency requires a friend or follower view");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  const auto& accounts = corpus.ordered();
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    const auto& list = which == ViewName::friend_network ? accounts[i]->friends : accounts[i]->followers;
    for (const auto& other : list)
      edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(corpus.index_of(other)));
  }
  return make_adjacency(accounts.size(), edges);
}

std::vector<double> transition_weights(const Adjacency& adj, std::uint32_t previous,
                                       std::uint32_t current, double p, double q) {
  const auto& next = adj[current];
  const auto& back = adj[previous];
  std::vector<double> w;
  w.reserve(next.size());
  for (auto x : next) {
    if (x == previous)
      w.push_back(1.0 / p);
    else if (std::binary_search(back.begin(), back.end(), x))
      w.push_back(1.0);
    else
      w.push_back(1.0 / q);
  }
  return w;
}

std::vector<Walk> generate_walks(const Adjacency& adj, const Config& config) {
  config.validate();
  std::vector<Walk> walks;
  walks.reserve(adj.size() * static_cast<std::size_t>(config.walks_per_node));
  for (int r = 0; r < config.walks_per_node; ++r) {
    for (std::uint32_t start = 0; start < adj.size(); ++start) {
      Rng rng(derive_seed(config.seed, start, static_cast<std::uint64_t>(r)));
      Walk walk{start};
      walk.reserve(static_cast<std::size_t>(config.walk_length));
      while (walk.size() < static_cast<std::size_t>(config.walk_length)) {
        const auto cur = walk.back();
        const auto& nbrs = adj[cur];
        if (nbrs.empty()) break;
        if (walk.size() == 1) {
          walk.push_back(nbrs[uniform_index(rng, nbrs.size())]);
          continue;
        }
        const auto w = transition_weights(adj, walk[walk.size() - 2], cur, config.p_return, config.q_inout);
        double total = 0;
        for (double x : w) total += x;
        double u = uniform01(rng) * total;
        std::size_t pick = 0;
        while (pick + 1 < w.size() && u >= w[pick]) u -= w[pick++];
        walk.push_back(nbrs[pick]);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

Eigen::MatrixXd train_skipgram(const std::vector<Walk>& walks, std::size_t nodes, const Config& config) {
  config.validate();
  const auto dim = static_cast<std::size_t>(config.dimensions);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes), config.dimensions);
  if (nodes == 0) return out;

  std::vector<double> freq(nodes, 0.0);
  std::size_t tokens = 0;
  for (const auto& w : walks) {
    for (auto v : w) freq[v] += 1.0;
    tokens += w.size();
  }
  // Negative-sampling distribution proportional to count^0.75.
  std::vector<double> cumulative(nodes);
  double acc = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    acc += std::pow(freq[i], 0.75);
    cumulative[i] = acc;
  }
  if (acc <= 0) return out;
  // Unigram table as in word2vec: O(1) negative draws.
  const std::size_t table_size = std::max<std::size_t>(nodes * 100, 1 << 16);
  std::vector<std::uint32_t> table(table_size);
  for (std::size_t t = 0, v = 0; t < table_size; ++t) {
    const double u = (static_cast<double>(t) + 0.5) / static_cast<double>(table_size) * acc;
    while (v + 1 < nodes && cumulative[v] < u) ++v;
    table[t] = static_cast<std::uint32_t>(v);
  }

  Rng rng(derive_seed(config.seed, 0x5c1b));
  std::vector<float> input(nodes * dim), output(nodes * dim, 0.0f);
  for (auto& x : input) x = static_cast<float>((uniform01(rng) - 0.5) / static_cast<double>(dim));
  std::vector<char> trained(nodes, 0);
  std::vector<float> grad(dim);

  const double total_steps = static_cast<double>(tokens) * config.epochs + 1.0;
  double step = 0;
  using VecMap = Eigen::Map<Eigen::VectorXf>;
  VecMap g_acc(grad.data(), static_cast<Eigen::Index>(dim));
  auto row = [&](std::vector<float>& m, std::uint32_t v) {
    return VecMap(&m[static_cast<std::size_t>(v) * dim], static_cast<Eigen::Index>(dim));
  };
  auto train_pair = [&](std::uint32_t centre, std::uint32_t target, float label, float lr) {
    auto in = row(input, centre);
    auto o = row(output, target);
    const float dot = in.dot(o);
    const float sig = 1.0f / (1.0f + std::exp(-std::clamp(dot, -6.0f, 6.0f)));
    const float g = (label - sig) * lr;
    g_acc += g * o;
    o += g * in;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& walk : walks) {
      for (std::size_t i = 0; i < walk.size(); ++i, step += 1.0) {
        const float lr = static_cast<float>(config.learning_rate * std::max(1e-4, 1.0 - step / total_steps));
        const auto reduced = uniform_index(rng, static_cast<std::size_t>(config.window));
        const std::size_t span = static_cast<std::size_t>(config.window) - reduced;
        const std::size_t lo = i > span ? i - span : 0;
        const std::size_t hi = std::min(walk.size(), i + span + 1);
        const auto centre = walk[i];
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i) continue;
          g_acc.setZero();
          train_pair(centre, walk[j], 1.0f, lr);
          for (int n = 0; n < config.negatives; ++n) {
            const auto neg = table[uniform_index(rng, table_size)];
            if (neg == walk[j]) continue;
            train_pair(centre, neg, 0.0f, lr);
          }
          row(input, centre) += g_acc;
          trained[centre] = 1;
        }
      }
    }
  }
  for (std::size_t v = 0; v < nodes; ++v) {
    if (!trained[v]) continue;
    for (std::size_t k = 0; k < dim; ++k)
      out(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(k)) = input[v * dim + k];
  }
  return out;
}

ViewMatrix build_network_view(const Corpus& corpus, ViewName which, const Config& config) {
  const auto adj = network_adjacency(corpus, which);
  const auto walks = generate_walks(adj, config);
  ViewMatrix view;
  view.view_name = which;
  for (const auto* a : corpus.ordered()) view.row_ids.push_back(a->account_id);
  view.data = train_skipgram(walks, corpus.size(), config);
  view.validate();
  return view;
}

}  // namespace clonewatch::node2vec
