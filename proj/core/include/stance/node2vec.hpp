#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stance/post.hpp"

namespace stance {

enum class GraphMode { kHashtag, kMention };

// User-to-item co-occurrence graph. Node names are namespaced ("u:" for
// users, "t:" for items) because a mentioned account can also be an
// authoring user; edges only ever connect the two sides.
class BipartiteGraph {
 public:
  static BipartiteGraph build(const std::vector<Post>& posts, GraphMode mode);

  std::size_t node_count() const { return names_.size(); }
  const std::string& node_name(std::uint32_t idx) const { return names_[idx]; }
  bool is_user(std::uint32_t idx) const { return names_[idx].rfind("u:", 0) == 0; }
  std::optional<std::uint32_t> find_node(const std::string& name) const;

  struct Arc {
    std::uint32_t to;
    double weight;
  };
  const std::vector<Arc>& neighbors(std::uint32_t idx) const { return adjacency_[idx]; }
  bool has_edge(std::uint32_t a, std::uint32_t b) const;

  std::size_t edge_count() const;

  static std::string user_node(const std::string& user_id) { return "u:" + user_id; }
  static std::string item_node(const std::string& item) { return "t:" + item; }

 private:
  std::vector<std::string> names_;                   // sorted, index = node id
  std::map<std::string, std::uint32_t> index_;
  std::vector<std::vector<Arc>> adjacency_;          // neighbor lists sorted by node id
};

struct WalkParams {
  double p = 1.0;  // return bias
  double q = 1.0;  // in-out bias
  int walk_length = 80;
  int walks_per_node = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// Second-order biased random walks: the transition weight back to the
// previous node is scaled by 1/p, to a common neighbor by 1, and to a
// distance-2 node by 1/q. Isolated nodes emit singleton walks. Walk
// (node, repeat) slots are pre-seeded, so output is deterministic and
// independent of thread count.
std::vector<std::vector<std::uint32_t>> random_walks(const BipartiteGraph& graph,
                                                     const WalkParams& params);

struct NodeEmbeddings {
  int dim = 0;
  std::map<std::string, std::vector<float>> vectors;

  // "count dim" header followed by "name v1 .. vd" lines; '#' comments
  // before the header are allowed and skipped on load.
  void save_text(const std::string& path, const std::string& provenance = "") const;
  static NodeEmbeddings load_text(const std::string& path);

  const std::vector<float>* find(const std::string& name) const;
  const std::vector<float>* find_user(const std::string& user_id) const;
};

struct SkipGramParams {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;
};

// Skip-gram with negative sampling over walk windows; the negative table
// uses the unigram distribution raised to 3/4. Deterministic (single
// writer).
NodeEmbeddings train_skipgram(const std::vector<std::vector<std::uint32_t>>& walks,
                              const BipartiteGraph& graph, const SkipGramParams& params);

// Citation-count-weighted mean of the citing users' embedding vectors.
// Users without a trained vector are skipped; nullopt when none remain.
std::optional<std::vector<float>> medium_embedding(
    const std::map<std::string, std::int64_t>& citing_user_counts,
    const NodeEmbeddings& embeddings);

}  // namespace stance
