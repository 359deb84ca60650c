#include "stance/node2vec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stance/parallel.hpp"
#include "stance/rng.hpp"

namespace stance {

namespace {

const std::vector<std::string>& post_items(const Post& post, GraphMode mode) {
  return mode == GraphMode::kHashtag ? post.hashtags : post.mentions;
}

}  // namespace

BipartiteGraph BipartiteGraph::build(const std::vector<Post>& posts, GraphMode mode) {
  // weight = number of posts by the user containing the item
  std::map<std::pair<std::string, std::string>, double> weights;
  for (const Post& post : posts) {
    std::set<std::string> unique(post_items(post, mode).begin(), post_items(post, mode).end());
    for (const auto& item : unique) {
      if (item.empty()) continue;
      weights[{user_node(post.author_id), item_node(item)}] += 1.0;
    }
  }

  BipartiteGraph g;
  std::set<std::string> names;
  for (const auto& [edge, _] : weights) {
    names.insert(edge.first);
    names.insert(edge.second);
  }
  g.names_.assign(names.begin(), names.end());
  for (std::uint32_t i = 0; i < g.names_.size(); ++i) g.index_[g.names_[i]] = i;

  g.adjacency_.resize(g.names_.size());
  for (const auto& [edge, w] : weights) {
    const std::uint32_t a = g.index_.at(edge.first);
    const std::uint32_t b = g.index_.at(edge.second);
    g.adjacency_[a].push_back({b, w});
    g.adjacency_[b].push_back({a, w});
  }
  for (auto& arcs : g.adjacency_) {
    std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) { return x.to < y.to; });
  }
  return g;
}

std::optional<std::uint32_t> BipartiteGraph::find_node(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool BipartiteGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
  const auto& arcs = adjacency_[a];
  auto it = std::lower_bound(arcs.begin(), arcs.end(), b,
                             [](const Arc& arc, std::uint32_t v) { return arc.to < v; });
  return it != arcs.end() && it->to == b;
}

std::size_t BipartiteGraph::edge_count() const {
  std::size_t arcs = 0;
  for (const auto& a : adjacency_) arcs += a.size();
  return arcs / 2;
}

std::vector<std::vector<std::uint32_t>> random_walks(const BipartiteGraph& graph,
                                                     const WalkParams& params) {
  if (params.p <= 0 || params.q <= 0) throw std::invalid_argument("random_walks: p and q must be > 0");
  if (params.walk_length < 2) throw std::invalid_argument("random_walks: walk_length must be >= 2");
  if (params.walks_per_node < 1) throw std::invalid_argument("random_walks: walks_per_node must be >= 1");

  const std::size_t n = graph.node_count();
  const std::size_t per_node = static_cast<std::size_t>(params.walks_per_node);
  std::vector<std::vector<std::uint32_t>> walks(n * per_node);

  parallel_for_blocks(n, params.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> cumulative;
    for (std::size_t node = begin; node < end; ++node) {
      for (std::size_t r = 0; r < per_node; ++r) {
        std::mt19937_64 rng(derive_seed(params.seed, node, r));
        std::uniform_real_distribution<double> uniform(0.0, 1.0);

        auto& walk = walks[node * per_node + r];
        walk.push_back(static_cast<std::uint32_t>(node));
        if (graph.neighbors(static_cast<std::uint32_t>(node)).empty()) continue;  // singleton

        while (walk.size() < static_cast<std::size_t>(params.walk_length)) {
          const std::uint32_t cur = walk.back();
          const auto& arcs = graph.neighbors(cur);
          if (arcs.empty()) break;

          cumulative.clear();
          double total = 0;
          if (walk.size() == 1) {
            for (const auto& arc : arcs) {
              total += arc.weight;
              cumulative.push_back(total);
            }
          } else {
            const std::uint32_t prev = walk[walk.size() - 2];
            for (const auto& arc : arcs) {
              double bias;
              if (arc.to == prev)
                bias = 1.0 / params.p;
              else if (graph.has_edge(arc.to, prev))
                bias = 1.0;
              else
                bias = 1.0 / params.q;
              total += arc.weight * bias;
              cumulative.push_back(total);
            }
          }
          const double draw = uniform(rng) * total;
          const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), draw);
          std::size_t pick = static_cast<std::size_t>(it - cumulative.begin());
          if (pick >= arcs.size()) pick = arcs.size() - 1;
          walk.push_back(arcs[pick].to);
        }
      }
    }
  });
  return walks;
}

NodeEmbeddings train_skipgram(const std::vector<std::vector<std::uint32_t>>& walks,
                              const BipartiteGraph& graph, const SkipGramParams& params) {
  if (params.dim < 1) throw std::invalid_argument("train_skipgram: dim must be >= 1");
  const std::size_t n = graph.node_count();

  std::vector<std::int64_t> frequency(n, 0);
  std::size_t corpus_tokens = 0;
  for (const auto& walk : walks) {
    for (std::uint32_t node : walk) {
      ++frequency[node];
      ++corpus_tokens;
    }
  }
  if (corpus_tokens == 0) throw std::invalid_argument("train_skipgram: empty walk corpus");

  // unigram^(3/4) sampling table as a cumulative distribution
  std::vector<double> negative_cdf(n, 0.0);
  double mass = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (frequency[i] > 0) mass += std::pow(static_cast<double>(frequency[i]), 0.75);
    negative_cdf[i] = mass;
  }

  const int d = params.dim;
  std::vector<float> input(n * static_cast<std::size_t>(d));
  std::vector<float> context(n * static_cast<std::size_t>(d), 0.0f);
  std::mt19937_64 rng(derive_seed(params.seed, 0x5619'0001ULL));
  std::uniform_real_distribution<float> init(-0.5f / d, 0.5f / d);
  for (float& w : input) w = init(rng);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  auto sample_negative = [&]() {
    const double draw = uniform(rng) * mass;
    const auto it = std::upper_bound(negative_cdf.begin(), negative_cdf.end(), draw);
    std::size_t idx = static_cast<std::size_t>(it - negative_cdf.begin());
    if (idx >= n) idx = n - 1;
    return static_cast<std::uint32_t>(idx);
  };

  const double total_updates = static_cast<double>(params.epochs) * corpus_tokens;
  double processed = 0;
  std::vector<double> grad(d);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (const auto& walk : walks) {
      for (std::size_t t = 0; t < walk.size(); ++t) {
        const double lr = std::max(params.lr * (1.0 - processed / total_updates), params.lr * 1e-4);
        ++processed;
        const std::uint32_t center = walk[t];
        const int shrink = static_cast<int>(rng() % static_cast<std::uint64_t>(params.window));
        const int span = params.window - shrink;
        float* wc = &input[center * static_cast<std::size_t>(d)];

        for (int off = -span; off <= span; ++off) {
          if (off == 0) continue;
          const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t) + off;
          if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(walk.size())) continue;
          const std::uint32_t ctx = walk[static_cast<std::size_t>(pos)];

          std::fill(grad.begin(), grad.end(), 0.0);
          // positive pair + negatives
          for (int s = 0; s <= params.negatives; ++s) {
            std::uint32_t target;
            double label;
            if (s == 0) {
              target = ctx;
              label = 1.0;
            } else {
              target = sample_negative();
              if (target == ctx) continue;
              label = 0.0;
            }
            float* wt = &context[target * static_cast<std::size_t>(d)];
            double dot = 0;
            for (int j = 0; j < d; ++j) dot += static_cast<double>(wc[j]) * wt[j];
            const double sigma = 1.0 / (1.0 + std::exp(-dot));
            const double g = (label - sigma) * lr;
            for (int j = 0; j < d; ++j) {
              grad[j] += g * wt[j];
              wt[j] += static_cast<float>(g * wc[j]);
            }
          }
          for (int j = 0; j < d; ++j) wc[j] += static_cast<float>(grad[j]);
        }
      }
    }
  }

  NodeEmbeddings out;
  out.dim = d;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (frequency[i] == 0) continue;  // vocabulary covers visited nodes only
    std::vector<float> vec(input.begin() + i * static_cast<std::size_t>(d),
                           input.begin() + (i + 1) * static_cast<std::size_t>(d));
    out.vectors[graph.node_name(i)] = std::move(vec);
  }
  return out;
}

void NodeEmbeddings::save_text(const std::string& path, const std::string& provenance) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write embeddings: " + path);
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << vectors.size() << " " << dim << "\n";
  char buf[48];
  for (const auto& [name, vec] : vectors) {
    out << name;
    for (float v : vec) {
      std::snprintf(buf, sizeof(buf), " %.8g", static_cast<double>(v));
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

NodeEmbeddings NodeEmbeddings::load_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read embeddings: " + path);
  std::string line;
  std::size_t count = 0;
  NodeEmbeddings out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream header(line);
    if (!(header >> count >> out.dim) || out.dim < 1)
      throw std::runtime_error("bad embeddings header in " + path);
    break;
  }
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string name;
    if (!(row >> name)) throw std::runtime_error("bad embeddings row in " + path);
    std::vector<float> vec(out.dim);
    for (int j = 0; j < out.dim; ++j) {
      if (!(row >> vec[j])) throw std::runtime_error("short embeddings row in " + path);
    }
    out.vectors[name] = std::move(vec);
  }
  if (out.vectors.size() != count)
    throw std::runtime_error("embeddings row count mismatch in " + path);
  return out;
}

const std::vector<float>* NodeEmbeddings::find(const std::string& name) const {
  auto it = vectors.find(name);
  return it == vectors.end() ? nullptr : &it->second;
}

const std::vector<float>* NodeEmbeddings::find_user(const std::string& user_id) const {
  return find(BipartiteGraph::user_node(user_id));
}

std::optional<std::vector<float>> medium_embedding(
    const std::map<std::string, std::int64_t>& citing_user_counts,
    const NodeEmbeddings& embeddings) {
  std::vector<double> sum(static_cast<std::size_t>(embeddings.dim), 0.0);
  double weight = 0;
  for (const auto& [user, count] : citing_user_counts) {
    if (count <= 0) continue;
    const std::vector<float>* vec = embeddings.find_user(user);
    if (!vec) continue;
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += static_cast<double>(count) * (*vec)[j];
    weight += static_cast<double>(count);
  }
  if (weight == 0) return std::nullopt;
  std::vector<float> out(sum.size());
  for (std::size_t j = 0; j < sum.size(); ++j) out[j] = static_cast<float>(sum[j] / weight);
  return out;
}

}  // namespace stance
