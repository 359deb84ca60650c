#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stance/config.hpp"
#include "stance/post.hpp"

namespace stance {

enum class Stage {
  kIngest,
  kVectors,
  kProjection,
  kClustering,
  kExpand,
  kValence,
  kEmbed,
  kBias,
};

struct PipelineOptions {
  std::string config_path;
  std::optional<std::string> only_topic;
  bool resume = false;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
};

// Batch driver over the per-topic stage chain
//   ingest -> vectors -> projection -> clustering -> expand -> valence
// and the cross-topic aggregate (embed, bias). Stage outputs are plain
// TSV/JSONL files under out_dir; each carries a provenance header with a
// config hash so --resume can skip stages whose inputs did not change. A
// failing stage aborts its topic only.
class Pipeline {
 public:
  explicit Pipeline(const PipelineOptions& opts);  // throws ConfigError on bad config

  // Runs the per-topic chain up to `last` for every selected topic.
  // Returns the names of topics that failed.
  std::vector<std::string> run_topics(Stage last);

  // Aggregate stages; run_topics(kValence) must have produced its outputs.
  void run_embed();
  void run_bias();

  // Convenience drivers for the CLI subcommands. Return process exit code
  // (0 ok, 2 = some stage failed).
  int run_all();
  int run_through(Stage last);

  const std::filesystem::path& out_dir() const { return out_dir_; }
  const std::vector<TopicConfig>& topics() const { return topics_; }
  std::uint64_t seed() const { return seed_; }

  std::filesystem::path topic_dir(const TopicConfig& t) const { return out_dir_ / t.name; }

 private:
  struct StageIo;

  void stage_ingest(const TopicConfig& topic);
  void stage_vectors(const TopicConfig& topic);
  void stage_projection(const TopicConfig& topic);
  void stage_clustering(const TopicConfig& topic);
  void stage_expand(const TopicConfig& topic);
  void stage_valence(const TopicConfig& topic);

  std::string stage_hash(const TopicConfig* topic, Stage stage) const;
  bool can_skip(const std::vector<std::filesystem::path>& outputs, const std::string& hash) const;

  std::vector<Post> read_topic_posts(const TopicConfig& topic) const;

  Config cfg_;
  std::filesystem::path base_dir_;
  std::filesystem::path out_dir_;
  std::vector<std::string> inputs_;
  std::vector<TopicConfig> topics_;
  Gazetteer gazetteer_;
  std::filesystem::path anchors_path_;
  std::filesystem::path gold_path_;
  std::optional<std::filesystem::path> external_vectors_path_;
  std::uint64_t seed_ = 1;
  bool resume_ = false;
  unsigned threads_ = 1;
  bool deterministic_ = true;
};

const char* stage_name(Stage s);

}  // namespace stance
