#include "stance/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stance/rng.hpp"
#include "stance/time_util.hpp"
#include "stance/tsv.hpp"
#include "stance/version.hpp"

namespace stance {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string>& location_pool() {
  static const std::vector<std::string> pool = {
      "USA",          "New York, NY", "Austin, TX",  "Seattle, WA",
      "Boston, MA",   "Miami, FL",    "California",  "Denver, CO",
      "Baltimore, MD",
  };
  return pool;
}

std::string pad3(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", v);
  return buf;
}

}  // namespace

SynthCorpus generate(const SynthParams& params) {
  if (params.users_per_community < 1 || params.elites_per_community < 1)
    throw std::invalid_argument("synthetic: need at least one user and elite per community");
  if (params.p_in < 0 || params.p_in > 1 || params.p_out < 0 || params.p_out > 1)
    throw std::invalid_argument("synthetic: probabilities must be in [0,1]");
  if (params.citation_skew < 0 || params.citation_skew > 1)
    throw std::invalid_argument("synthetic: citation_skew must be in [0,1]");
  if (params.posts_per_user < 1) throw std::invalid_argument("synthetic: posts_per_user must be >= 1");
  if (params.n_topics < 1) throw std::invalid_argument("synthetic: n_topics must be >= 1");

  SynthCorpus corpus;

  std::vector<std::string> users[2];
  for (int side = 0; side < 2; ++side) {
    const char tag = side == 0 ? 'l' : 'r';
    for (int i = 0; i < params.users_per_community; ++i) {
      std::string id = std::string("user-") + tag + "-" + pad3(i);
      corpus.user_community[id] = side;
      users[side].push_back(std::move(id));
    }
  }
  for (int i = 0; i < params.elites_per_community; ++i) {
    corpus.left_elites.push_back("elite-l-" + pad3(i));
    corpus.right_elites.push_back("elite-r-" + pad3(i));
  }

  std::vector<std::string> media[3];  // left, center, right
  const char* leanings[3] = {"left", "center", "right"};
  for (int lean = 0; lean < 3; ++lean) {
    for (int i = 0; i < params.media_per_leaning; ++i) {
      std::string domain = std::string(1, "lcr"[lean]) + "-news-" + std::to_string(i) + ".example.com";
      corpus.domain_leaning[domain] = leanings[lean];
      media[lean].push_back(std::move(domain));
    }
  }

  std::vector<std::string> hashtag_pool[2];
  for (int i = 0; i < params.hashtags_per_community; ++i) {
    hashtag_pool[0].push_back("lefttag" + std::to_string(i));
    hashtag_pool[1].push_back("righttag" + std::to_string(i));
  }
  std::vector<std::string> mention_pool[2];
  for (int i = 0; i < params.mentions_per_community; ++i) {
    mention_pool[0].push_back("l-pundit-" + std::to_string(i));
    mention_pool[1].push_back("r-pundit-" + std::to_string(i));
  }

  for (int t = 0; t < params.n_topics; ++t) corpus.topics.push_back("planted-" + std::to_string(t + 1));

  const CivilDate base_date{2019, 3, 1};
  for (int t = 0; t < params.n_topics; ++t) {
    const std::int64_t day_start = (days_from_civil(base_date) + t) * 86400;
    const std::string topic_tag = "planted" + std::to_string(t + 1);

    for (int side = 0; side < 2; ++side) {
      const auto& own_elites = side == 0 ? corpus.left_elites : corpus.right_elites;
      const auto& other_elites = side == 0 ? corpus.right_elites : corpus.left_elites;
      const auto& own_media = media[side == 0 ? 0 : 2];
      const auto& other_media = media[side == 0 ? 2 : 0];

      for (std::size_t u = 0; u < users[side].size(); ++u) {
        const std::string& user = users[side][u];
        // one engine per (topic, user) so generation parallelizes cleanly
        std::mt19937_64 rng = make_engine(params.seed, static_cast<std::uint64_t>(t) + 1,
                                          static_cast<std::uint64_t>(side) * users[0].size() * 2 + u);
        std::uniform_real_distribution<double> coin(0.0, 1.0);

        const int n_posts = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(params.posts_per_user));
        for (int k = 0; k < n_posts; ++k) {
          Post post;
          post.post_id = "p-" + std::to_string(t + 1) + "-" + user + "-" + std::to_string(k);
          post.author_id = user;
          post.timestamp = day_start + static_cast<std::int64_t>((u * 131 + static_cast<std::size_t>(k) * 17 +
                                                                  static_cast<std::size_t>(side) * 13) %
                                                                 86400);
          post.location = location_pool()[rng() % location_pool().size()];
          post.text = "#" + topic_tag + " take " + std::to_string(k) + " from " + user;

          const double draw = coin(rng);
          if (draw < params.p_in) {
            post.retweeted_author_id = own_elites[rng() % own_elites.size()];
          } else if (draw < params.p_in + params.p_out) {
            post.retweeted_author_id = other_elites[rng() % other_elites.size()];
          }

          if (coin(rng) < params.cite_prob) {
            const double pick = coin(rng);
            const std::vector<std::string>* pool;
            if (pick < params.citation_skew)
              pool = &own_media;
            else if (pick < params.citation_skew + (1.0 - params.citation_skew) / 2)
              pool = &media[1];  // center
            else
              pool = &other_media;
            if (!pool->empty()) {
              const std::string& domain = (*pool)[rng() % pool->size()];
              const int article = static_cast<int>(rng() % static_cast<std::uint64_t>(params.articles_per_domain));
              post.urls.push_back("https://www." + domain + "/a" + std::to_string(article) +
                                  "?utm=" + std::to_string(k));
            }
          }

          post.hashtags.push_back(topic_tag);
          const auto& tags = hashtag_pool[side];
          const int n_tags = 1 + static_cast<int>(rng() % 2);
          for (int h = 0; h < n_tags && !tags.empty(); ++h)
            post.hashtags.push_back(tags[rng() % tags.size()]);

          const auto& pundits = mention_pool[side];
          const int n_mentions = static_cast<int>(rng() % 3);
          for (int m = 0; m < n_mentions && !pundits.empty(); ++m)
            post.mentions.push_back(pundits[rng() % pundits.size()]);

          corpus.posts.push_back(std::move(post));
        }
      }
    }
  }
  return corpus;
}

void write_corpus(const SynthCorpus& corpus, const SynthParams& params, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);

  {
    std::ofstream out(base / "posts.jsonl");
    if (!out) throw std::runtime_error("cannot write posts.jsonl under " + dir);
    out << "# stance " << kVersion << " config=synthetic seed=" << params.seed << "\n";
    for (const Post& p : corpus.posts) {
      json j;
      j["id"] = p.post_id;
      j["user_id"] = p.author_id;
      j["ts"] = format_iso8601(p.timestamp);
      j["text"] = p.text;
      if (p.retweeted_author_id)
        j["rt_user_id"] = *p.retweeted_author_id;
      else
        j["rt_user_id"] = nullptr;
      j["urls"] = p.urls;
      j["hashtags"] = p.hashtags;
      j["mentions"] = p.mentions;
      if (p.location)
        j["loc"] = *p.location;
      else
        j["loc"] = nullptr;
      out << j.dump() << "\n";
    }
  }

  {
    TsvWriter out((base / "truth_users.tsv").string());
    out.provenance("synthetic", params.seed);
    out.columns({"user_id", "community"});
    for (const auto& [user, side] : corpus.user_community)
      out.row({user, std::to_string(side)});
  }
  {
    TsvWriter out((base / "truth_media.tsv").string());
    out.provenance("synthetic", params.seed);
    out.columns({"domain", "leaning"});
    for (const auto& [domain, leaning] : corpus.domain_leaning) out.row({domain, leaning});
  }
  {
    TsvWriter out((base / "gold_media.tsv").string());
    out.provenance("synthetic", params.seed);
    out.columns({"domain", "bias", "factuality"});
    for (const auto& [domain, leaning] : corpus.domain_leaning)
      out.row({domain, leaning, "high"});
  }
  {
    TsvWriter out((base / "anchors.tsv").string());
    out.provenance("synthetic", params.seed);
    out.columns({"influencer", "side"});
    out.row({corpus.left_elites.front(), "left"});
    out.row({corpus.right_elites.front(), "right"});
  }
  {
    std::ofstream out(base / "gazetteer.toml");
    out << "# synthetic gazetteer\n";
    out << "terms = [\"USA\", \"America\", \"United States\", \"California\", \"New York\", \"Texas\"]\n";
    out << "abbreviations = [\"NY\", \"TX\", \"WA\", \"MA\", \"FL\", \"CO\", \"MD\", \"CA\"]\n";
  }

  std::string topic_list;
  const CivilDate base_date{2019, 3, 1};
  for (std::size_t t = 0; t < corpus.topics.size(); ++t) {
    const std::string file = "topic-" + corpus.topics[t] + ".toml";
    const std::int64_t day = days_from_civil(base_date) + static_cast<std::int64_t>(t);
    const CivilDate d = civil_from_days(day);
    char date_buf[16];
    std::snprintf(date_buf, sizeof(date_buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    std::ofstream out(base / file);
    out << "name = \"" << corpus.topics[t] << "\"\n";
    out << "keywords = [\"#planted" << (t + 1) << "\"]\n";
    out << "date_start = " << date_buf << "\n";
    out << "date_end = " << date_buf << "\n";
    out << "us_filter = true\n";
    if (!topic_list.empty()) topic_list += ", ";
    topic_list += "\"" + file + "\"";
  }

  {
    std::ofstream out(base / "pipeline.toml");
    out << "# generated synthetic workspace\n";
    out << "inputs = [\"posts.jsonl\"]\n";
    out << "topics = [" << topic_list << "]\n";
    out << "gazetteer = \"gazetteer.toml\"\n";
    out << "anchors = \"anchors.tsv\"\n";
    out << "gold_labels = \"gold_media.tsv\"\n";
    out << "out_dir = \"out\"\n";
    out << "seed = " << params.seed << "\n\n";
    out << "[user_model]\n";
    out << "top_n = " << std::max(100, params.users_per_community / 2) << "\n\n";
    out << "[projection]\n";
    out << "k = 15\n";
    out << "epochs = 200\n\n";
    out << "[clustering]\n";
    out << "quantile = 0.3\n\n";
    out << "[classifier]\n";
    out << "min_accounts = 5\n";
    out << "threshold = 0.8\n\n";
    out << "[valence]\n";
    out << "min_citations = 5\n\n";
    out << "[embeddings]\n";
    out << "dim = 32\n";
    out << "walk_length = 20\n";
    out << "walks_per_node = 5\n\n";
    out << "[bias]\n";
    out << "c = 0.1\n";
    out << "folds = 5\n";
  }
}

}  // namespace stance
