#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stance/post.hpp"

namespace stance {

// Planted two-community corpus. Every retweet targets an elite account of
// one side, every citation URL embeds a generated domain, and hashtags and
// mentions come from community pools, so each downstream stage has a known
// ground truth to recover.
struct SynthParams {
  int users_per_community = 500;
  int elites_per_community = 20;
  double p_in = 0.9;   // P(post retweets an own-side elite)
  double p_out = 0.1;  // P(post retweets an other-side elite)
  int media_per_leaning = 10;  // left / center / right domains
  double citation_skew = 0.9;  // P(citation goes to the own-leaning pool)
  double cite_prob = 0.5;      // P(post carries a URL)
  int posts_per_user = 20;     // actual count per user is uniform in [1, posts_per_user]
  int n_topics = 2;
  int articles_per_domain = 5;
  int hashtags_per_community = 15;
  int mentions_per_community = 10;
  std::uint64_t seed = 1;
};

struct SynthCorpus {
  std::vector<Post> posts;
  std::map<std::string, int> user_community;          // user id -> 0 or 1 (0 = left)
  std::map<std::string, std::string> domain_leaning;  // domain -> left|center|right
  std::vector<std::string> topics;                    // topic names, one keyword hashtag each
  std::vector<std::string> left_elites;
  std::vector<std::string> right_elites;
};

SynthCorpus generate(const SynthParams& params);

// Writes a self-contained runnable workspace: posts.jsonl, ground-truth
// sidecars (truth_users.tsv, truth_media.tsv), gold_media.tsv, anchors.tsv,
// per-topic configs, a gazetteer, and pipeline.toml referencing them all.
void write_corpus(const SynthCorpus& corpus, const SynthParams& params, const std::string& dir);

}  // namespace stance
