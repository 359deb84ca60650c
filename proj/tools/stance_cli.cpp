// stance: batch pipeline for stance clustering, influencer valence scoring,
// and media bias prediction over archived post streams.
//
// Exit codes: 0 success, 1 configuration error, 2 stage failure.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stance/config.hpp"
#include "stance/ingest.hpp"
#include "stance/pipeline.hpp"
#include "stance/synthetic.hpp"
#include "stance/version.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string topic;
  std::string out;
  bool resume = false;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags, std::uint64_t& seed_holder, bool& seed_set) {
  cmd->add_option("--config", flags.config, "pipeline config file")->required();
  cmd->add_option("--topic", flags.topic, "restrict to one topic by name");
  cmd->add_option("--out", flags.out, "override the output directory");
  cmd->add_flag("--resume", flags.resume, "skip stages whose outputs are up to date");
  cmd->add_option("--seed", seed_holder, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
}

stance::PipelineOptions to_options(const CommonFlags& flags, std::uint64_t seed_holder, bool seed_set) {
  stance::PipelineOptions opts;
  opts.config_path = flags.config;
  if (!flags.topic.empty()) opts.only_topic = flags.topic;
  if (!flags.out.empty()) opts.out_override = flags.out;
  opts.resume = flags.resume;
  if (seed_set) opts.seed_override = seed_holder;
  return opts;
}

int run_standalone_ingest(const std::string& topic_file, const std::string& gazetteer_file,
                          const std::vector<std::string>& inputs, const std::string& out_path) {
  using namespace stance;
  const TopicConfig topic = TopicConfig::from_config(Config::parse_file(topic_file));
  const Gazetteer gazetteer = Gazetteer::from_config(Config::parse_file(gazetteer_file));

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }
  out << "# stance " << kVersion << " config=standalone seed=0\n";

  std::size_t kept = 0, malformed = 0;
  for (const auto& input : inputs) {
    std::ifstream in(input);
    if (!in) {
      std::cerr << "cannot read " << input << "\n";
      return 1;
    }
    const ParseStats stats = parse_posts(in, [&](Post&& p) {
      if (!post_matches_topic(p, topic)) return;
      if (topic.us_filter && (!p.location || !gazetteer.matches(*p.location))) return;
      nlohmann::json j;
      j["id"] = p.post_id;
      j["user_id"] = p.author_id;
      j["ts"] = format_iso8601(p.timestamp);
      j["text"] = p.text;
      j["rt_user_id"] = p.retweeted_author_id ? nlohmann::json(*p.retweeted_author_id)
                                              : nlohmann::json(nullptr);
      j["urls"] = p.urls;
      j["hashtags"] = p.hashtags;
      j["mentions"] = p.mentions;
      j["loc"] = p.location ? nlohmann::json(*p.location) : nlohmann::json(nullptr);
      out << j.dump() << "\n";
      ++kept;
    });
    malformed += stats.skipped;
  }
  std::cout << "kept " << kept << " posts (malformed " << malformed << ") -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stance: retweet-based stance clustering, valence scoring, and media bias prediction"};
  app.set_version_flag("--version", stance::kVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t seed_holder = 0;
  bool seed_set = false;

  auto* synth = app.add_subcommand("synth", "generate a planted synthetic corpus and configs");
  std::string synth_out = "synth";
  stance::SynthParams synth_params;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--seed", synth_params.seed, "generator seed");
  synth->add_option("--users", synth_params.users_per_community, "users per community");
  synth->add_option("--elites", synth_params.elites_per_community, "elite accounts per community");
  synth->add_option("--p-in", synth_params.p_in, "own-side retweet probability");
  synth->add_option("--p-out", synth_params.p_out, "cross-side retweet probability");
  synth->add_option("--media", synth_params.media_per_leaning, "media domains per leaning");
  synth->add_option("--skew", synth_params.citation_skew, "own-leaning citation probability");
  synth->add_option("--posts", synth_params.posts_per_user, "max posts per user per topic");
  synth->add_option("--topics", synth_params.n_topics, "number of planted topics");

  auto* ingest = app.add_subcommand("ingest", "parse and filter archived posts");
  std::string ingest_topic_file, ingest_gazetteer;
  std::vector<std::string> ingest_inputs;
  std::string ingest_out = "posts.filtered.jsonl";
  ingest->add_option("--config", flags.config, "pipeline config file (runs the ingest stage)");
  ingest->add_option("--topic", ingest_topic_file,
                     "topic config file (standalone mode) or topic name (with --config)");
  ingest->add_option("--gazetteer", ingest_gazetteer, "gazetteer config file (standalone mode)");
  ingest->add_option("--input", ingest_inputs, "input JSONL files (standalone mode)");
  ingest->add_option("--out", ingest_out, "output path (standalone) or directory (with --config)");
  ingest->add_flag("--resume", flags.resume, "skip stages whose outputs are up to date");
  ingest->add_option("--seed", seed_holder, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });

  auto* cluster = app.add_subcommand("cluster", "vectors, projection, and mean-shift clustering");
  add_common(cluster, flags, seed_holder, seed_set);
  auto* expand = app.add_subcommand("expand", "classifier-based label expansion");
  add_common(expand, flags, seed_holder, seed_set);
  auto* valence = app.add_subcommand("valence", "per-topic influencer valence scores");
  add_common(valence, flags, seed_holder, seed_set);
  auto* embed = app.add_subcommand("embed", "U2H/U2M node2vec embeddings and medium vectors");
  add_common(embed, flags, seed_holder, seed_set);
  auto* bias = app.add_subcommand("bias", "sign alignment, averages, and bias prediction report");
  add_common(bias, flags, seed_holder, seed_set);
  auto* all = app.add_subcommand("all", "full pipeline across all topics");
  add_common(all, flags, seed_holder, seed_set);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const stance::SynthCorpus corpus = stance::generate(synth_params);
      stance::write_corpus(corpus, synth_params, synth_out);
      std::cout << "synthetic corpus: " << corpus.posts.size() << " posts, "
                << corpus.user_community.size() << " users -> " << synth_out << "\n";
      return 0;
    }

    if (ingest->parsed() && flags.config.empty()) {
      if (ingest_topic_file.empty() || ingest_gazetteer.empty() || ingest_inputs.empty()) {
        std::cerr << "ingest needs either --config or all of --topic/--gazetteer/--input\n";
        return 1;
      }
      return run_standalone_ingest(ingest_topic_file, ingest_gazetteer, ingest_inputs, ingest_out);
    }

    if (ingest->parsed()) {
      if (!ingest_topic_file.empty()) flags.topic = ingest_topic_file;
      if (ingest_out != "posts.filtered.jsonl") flags.out = ingest_out;
    }

    stance::Pipeline pipeline(to_options(flags, seed_holder, seed_set));
    if (ingest->parsed()) return pipeline.run_through(stance::Stage::kIngest);
    if (cluster->parsed()) return pipeline.run_through(stance::Stage::kClustering);
    if (expand->parsed()) return pipeline.run_through(stance::Stage::kExpand);
    if (valence->parsed()) return pipeline.run_through(stance::Stage::kValence);
    if (embed->parsed()) {
      const int rc = pipeline.run_through(stance::Stage::kIngest);
      if (rc != 0) return rc;
      pipeline.run_embed();
      return 0;
    }
    if (bias->parsed()) {
      const int rc = pipeline.run_through(stance::Stage::kValence);
      if (rc != 0) return rc;
      pipeline.run_embed();
      pipeline.run_bias();
      return 0;
    }
    if (all->parsed()) return pipeline.run_all();
  } catch (const stance::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
