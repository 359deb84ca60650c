#include "stance/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stance/bias_model.hpp"
#include "stance/hash.hpp"
#include "stance/ingest.hpp"
#include "stance/mean_shift.hpp"
#include "stance/node2vec.hpp"
#include "stance/rng.hpp"
#include "stance/stance_model.hpp"
#include "stance/tsv.hpp"
#include "stance/umap.hpp"
#include "stance/user_vectors.hpp"
#include "stance/valence.hpp"
#include "stance/version.hpp"

namespace stance {

namespace fs = std::filesystem;
using nlohmann::json;

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kIngest: return "ingest";
    case Stage::kVectors: return "vectors";
    case Stage::kProjection: return "projection";
    case Stage::kClustering: return "clustering";
    case Stage::kExpand: return "expand";
    case Stage::kValence: return "valence";
    case Stage::kEmbed: return "embed";
    case Stage::kBias: return "bias";
  }
  return "?";
}

namespace {

std::string provenance_line(const std::string& hash, std::uint64_t seed) {
  return std::string("# stance ") + kVersion + " config=" + hash + " seed=" + std::to_string(seed);
}

std::optional<std::string> header_hash(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  const std::string key = "config=";
  const auto pos = line.find(key);
  if (line.rfind("#", 0) != 0 || pos == std::string::npos) return std::nullopt;
  const auto end = line.find(' ', pos);
  return line.substr(pos + key.size(), end == std::string::npos ? std::string::npos : end - pos - key.size());
}

json post_to_json(const Post& p) {
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
  return j;
}

UserVectorMap read_vectors_file(const fs::path& path) {
  UserVectorMap vectors;
  for (const auto& row : read_tsv(path.string()).rows) {
    if (row.size() != 3) throw std::runtime_error(path.string() + ": expected 3 columns");
    UserVector& v = vectors[row[0]];
    if (v.user_id.empty()) v.user_id = row[0];
    v.counts[row[1]] = std::stoll(row[2]);
  }
  return vectors;
}

std::vector<std::string> read_active_file(const fs::path& path) {
  std::vector<std::string> users;
  for (const auto& row : read_tsv(path.string()).rows) {
    if (row.empty()) continue;
    users.push_back(row[0]);
  }
  return users;
}

Embedding2D read_embedding_file(const fs::path& path) {
  Embedding2D emb;
  const TsvFile file = read_tsv(path.string());
  emb.coords.resize(static_cast<Eigen::Index>(file.rows.size()), 2);
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    const auto& row = file.rows[i];
    if (row.size() != 3) throw std::runtime_error(path.string() + ": expected 3 columns");
    emb.user_ids.push_back(row[0]);
    emb.coords(static_cast<Eigen::Index>(i), 0) = std::stod(row[1]);
    emb.coords(static_cast<Eigen::Index>(i), 1) = std::stod(row[2]);
  }
  return emb;
}

struct ClustersFile {
  std::map<std::string, int> cluster_of;
  StanceLabelMap retained;  // side labels for the two kept clusters
};

ClustersFile read_clusters_file(const fs::path& path) {
  ClustersFile out;
  for (const auto& row : read_tsv(path.string()).rows) {
    if (row.size() != 4) throw std::runtime_error(path.string() + ": expected 4 columns");
    out.cluster_of[row[0]] = std::stoi(row[1]);
    if (row[3] == "C0") out.retained[row[0]] = {0, LabelSource::kClustered, 1.0};
    if (row[3] == "C1") out.retained[row[0]] = {1, LabelSource::kClustered, 1.0};
  }
  return out;
}

StanceLabelMap read_labels_file(const fs::path& path) {
  StanceLabelMap out;
  for (const auto& row : read_tsv(path.string()).rows) {
    if (row.size() != 4) throw std::runtime_error(path.string() + ": expected 4 columns");
    StanceLabel label;
    label.side = row[1] == "C1" ? 1 : 0;
    label.source = row[2] == "expanded" ? LabelSource::kExpanded : LabelSource::kClustered;
    label.confidence = std::stod(row[3]);
    out[row[0]] = label;
  }
  return out;
}

std::vector<ValenceRecord> read_valence_file(const fs::path& path) {
  std::vector<ValenceRecord> records;
  for (const auto& row : read_tsv(path.string()).rows) {
    if (row.size() != 5) throw std::runtime_error(path.string() + ": expected 5 columns");
    ValenceRecord r;
    r.influencer_id = row[0];
    r.topic = row[1];
    r.score = std::stod(row[2]);
    const auto cat = parse_category(row[3]);
    if (!cat) throw std::runtime_error(path.string() + ": bad category '" + row[3] + "'");
    r.category = *cat;
    r.n_citations = std::stoll(row[4]);
    records.push_back(std::move(r));
  }
  return records;
}

std::string strip_article_id(const std::string& url) {
  const auto cut = url.find_first_of("?#");
  return cut == std::string::npos ? url : url.substr(0, cut);
}

std::string fmt_exact(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Pipeline::Pipeline(const PipelineOptions& opts) {
  cfg_ = Config::parse_file(opts.config_path);
  base_dir_ = fs::absolute(fs::path(opts.config_path)).parent_path();
  resume_ = opts.resume;

  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir_ / path;
  };

  seed_ = opts.seed_override.value_or(static_cast<std::uint64_t>(cfg_.get_int("seed", 1)));
  cfg_.set("seed", static_cast<std::int64_t>(seed_));

  if (opts.out_override)
    out_dir_ = fs::absolute(*opts.out_override);
  else
    out_dir_ = resolve(cfg_.get_string("out_dir", "out"));

  for (const auto& input : cfg_.get_list("inputs")) {
    const fs::path path = resolve(input);
    if (!fs::exists(path)) throw ConfigError("input file does not exist: " + path.string());
    inputs_.push_back(path.string());
  }
  if (inputs_.empty()) throw ConfigError("config lists no inputs");

  const fs::path gaz_path = resolve(cfg_.get_string("gazetteer"));
  if (!fs::exists(gaz_path)) throw ConfigError("gazetteer file does not exist: " + gaz_path.string());
  gazetteer_ = Gazetteer::from_config(Config::parse_file(gaz_path.string()));

  for (const auto& topic_file : cfg_.get_list("topics")) {
    const fs::path path = resolve(topic_file);
    if (!fs::exists(path)) throw ConfigError("topic file does not exist: " + path.string());
    topics_.push_back(TopicConfig::from_config(Config::parse_file(path.string())));
  }
  if (topics_.empty()) throw ConfigError("config lists no topics");
  if (opts.only_topic) {
    std::erase_if(topics_, [&](const TopicConfig& t) { return t.name != *opts.only_topic; });
    if (topics_.empty()) throw ConfigError("no topic named '" + *opts.only_topic + "'");
  }

  anchors_path_ = resolve(cfg_.get_string("anchors", "anchors.tsv"));
  gold_path_ = resolve(cfg_.get_string("gold_labels", "gold_media.tsv"));
  if (cfg_.has("embeddings.external_vectors")) {
    external_vectors_path_ = resolve(cfg_.get_string("embeddings.external_vectors"));
    if (!fs::exists(*external_vectors_path_))
      throw ConfigError("external vectors file does not exist: " + external_vectors_path_->string());
  }

  threads_ = static_cast<unsigned>(cfg_.get_int("run.threads", 1));
  deterministic_ = cfg_.get_bool("run.deterministic", true);
}

std::string Pipeline::stage_hash(const TopicConfig* topic, Stage stage) const {
  std::string material = std::string(kVersion) + "|" + stage_name(stage) + "|seed=" + std::to_string(seed_);

  // Relevant config slice per stage, chained with the parent stage hash.
  auto slice = [&](std::initializer_list<const char*> prefixes) {
    std::string s;
    const std::string whole = cfg_.canonical();
    std::istringstream lines(whole);
    std::string line;
    while (std::getline(lines, line)) {
      for (const char* prefix : prefixes) {
        if (line.rfind(prefix, 0) == 0) {
          s += line;
          s.push_back('\n');
        }
      }
    }
    return s;
  };

  if (topic) {
    material += "|topic=" + topic->name + "|kw=";
    for (const auto& kw : topic->keywords) material += kw + ",";
    material += "|range=" + std::to_string(days_from_civil(topic->date_start)) + ":" +
                std::to_string(days_from_civil(topic->date_end)) +
                "|usf=" + (topic->us_filter ? "1" : "0");
  }

  switch (stage) {
    case Stage::kIngest:
      material += slice({"inputs"});
      for (const auto& t : gazetteer_.terms) material += t + ";";
      for (const auto& a : gazetteer_.abbreviations) material += a + ";";
      break;
    case Stage::kVectors:
      material += slice({"user_model."});
      material += "|parent=" + stage_hash(topic, Stage::kIngest);
      break;
    case Stage::kProjection:
      material += slice({"projection.", "run."});
      material += "|parent=" + stage_hash(topic, Stage::kVectors);
      break;
    case Stage::kClustering:
      material += slice({"clustering."});
      material += "|parent=" + stage_hash(topic, Stage::kProjection);
      break;
    case Stage::kExpand:
      material += slice({"classifier."});
      material += "|parent=" + stage_hash(topic, Stage::kClustering);
      break;
    case Stage::kValence:
      material += slice({"valence."});
      material += "|parent=" + stage_hash(topic, Stage::kExpand);
      break;
    case Stage::kEmbed:
      material += slice({"embeddings.", "run."});
      for (const auto& t : topics_) material += "|" + stage_hash(&t, Stage::kIngest);
      break;
    case Stage::kBias:
      material += slice({"bias."});
      material += "|embed=" + stage_hash(nullptr, Stage::kEmbed);
      for (const auto& t : topics_) material += "|" + stage_hash(&t, Stage::kValence);
      material += "|anchors=" + anchors_path_.string() + "|gold=" + gold_path_.string();
      break;
  }
  return hex64(fnv1a64(material));
}

bool Pipeline::can_skip(const std::vector<fs::path>& outputs, const std::string& hash) const {
  if (!resume_) return false;
  for (const auto& path : outputs) {
    const auto found = header_hash(path);
    if (!found || *found != hash) return false;
  }
  return true;
}

std::vector<Post> Pipeline::read_topic_posts(const TopicConfig& topic) const {
  const fs::path path = out_dir_ / topic.name / "posts.jsonl";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing stage output: " + path.string());
  auto [posts, stats] = parse_posts(in);
  (void)stats;
  return posts;
}

void Pipeline::stage_ingest(const TopicConfig& topic) {
  const fs::path dir = topic_dir(topic);
  fs::create_directories(dir);
  const fs::path out_path = dir / "posts.jsonl";
  const std::string hash = stage_hash(&topic, Stage::kIngest);
  if (can_skip({out_path}, hash)) {
    std::cout << "[" << topic.name << "] ingest: up to date\n";
    return;
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path.string());
  out << provenance_line(hash, seed_) << "\n";

  std::size_t kept = 0, skipped = 0, scanned = 0;
  for (const auto& input : inputs_) {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot read input " + input);
    const ParseStats stats = parse_posts(in, [&](Post&& p) {
      ++scanned;
      if (!post_matches_topic(p, topic)) return;
      if (topic.us_filter && (!p.location || !gazetteer_.matches(*p.location))) return;
      out << post_to_json(p).dump() << "\n";
      ++kept;
    });
    skipped += stats.skipped;
  }
  out << "# scanned=" << scanned << " kept=" << kept << " malformed=" << skipped << "\n";
  if (!out) throw std::runtime_error("write failed: " + out_path.string());
  std::cout << "[" << topic.name << "] ingest: kept " << kept << "/" << scanned
            << " posts (malformed " << skipped << ")\n";
}

void Pipeline::stage_vectors(const TopicConfig& topic) {
  const fs::path dir = topic_dir(topic);
  const fs::path vec_path = dir / "vectors.tsv";
  const fs::path active_path = dir / "active.tsv";
  const std::string hash = stage_hash(&topic, Stage::kVectors);
  if (can_skip({vec_path, active_path}, hash)) {
    std::cout << "[" << topic.name << "] vectors: up to date\n";
    return;
  }

  const std::vector<Post> posts = read_topic_posts(topic);
  const UserVectorMap vectors = build_vectors(posts);
  const auto metric = cfg_.get_string("user_model.activity", "posts") == "retweets"
                          ? ActivityMetric::kRetweets
                          : ActivityMetric::kPosts;
  const std::size_t top_n = static_cast<std::size_t>(cfg_.get_int("user_model.top_n", 1000));
  const std::vector<std::string> active = top_active(posts, top_n, metric);

  TsvWriter vec_out(vec_path.string());
  vec_out.provenance(hash, seed_);
  vec_out.columns({"user_id", "account_id", "count"});
  for (const auto& [user, vec] : vectors) {
    for (const auto& [account, count] : vec.counts) {
      vec_out.row({user, account, std::to_string(count)});
    }
  }

  std::map<std::string, std::int64_t> activity;
  for (const Post& p : posts) {
    if (metric == ActivityMetric::kRetweets && !p.retweeted_author_id) continue;
    ++activity[p.author_id];
  }
  TsvWriter active_out(active_path.string());
  active_out.provenance(hash, seed_);
  active_out.columns({"user_id", "activity"});
  for (const auto& user : active) active_out.row({user, std::to_string(activity[user])});
  std::cout << "[" << topic.name << "] vectors: " << vectors.size() << " users, "
            << active.size() << " active\n";
}

void Pipeline::stage_projection(const TopicConfig& topic) {
  const fs::path dir = topic_dir(topic);
  const fs::path out_path = dir / "embedding.tsv";
  const std::string hash = stage_hash(&topic, Stage::kProjection);
  if (can_skip({out_path}, hash)) {
    std::cout << "[" << topic.name << "] projection: up to date\n";
    return;
  }

  const UserVectorMap vectors = read_vectors_file(dir / "vectors.tsv");
  std::vector<std::string> subset;
  for (const auto& user : read_active_file(dir / "active.tsv")) {
    if (vectors.count(user)) subset.push_back(user);  // users with no retweets cannot be placed
  }

  UmapParams params;
  params.k = static_cast<int>(cfg_.get_int("projection.k", 15));
  params.min_dist = cfg_.get_double("projection.min_dist", 0.1);
  params.epochs = static_cast<int>(cfg_.get_int("projection.epochs", 200));
  params.learning_rate = cfg_.get_double("projection.learning_rate", 1.0);
  params.negative_sample_rate = cfg_.get_double("projection.negative_sample_rate", 5.0);
  params.spectral_init = cfg_.get_bool("projection.spectral_init", true);
  params.seed = derive_seed(seed_, fnv1a64(topic.name), 1);
  params.deterministic = deterministic_;
  params.threads = threads_;

  const Embedding2D emb = project_users(vectors, subset, params);

  TsvWriter out(out_path.string());
  out.provenance(hash, seed_);
  out.columns({"user_id", "x", "y"});
  for (std::size_t i = 0; i < emb.user_ids.size(); ++i) {
    out.row({emb.user_ids[i], fmt_exact(emb.coords(static_cast<Eigen::Index>(i), 0)),
             fmt_exact(emb.coords(static_cast<Eigen::Index>(i), 1))});
  }
  std::cout << "[" << topic.name << "] projection: " << subset.size() << " users embedded\n";
}

void Pipeline::stage_clustering(const TopicConfig& topic) {
  const fs::path dir = topic_dir(topic);
  const fs::path out_path = dir / "clusters.tsv";
  const std::string hash = stage_hash(&topic, Stage::kClustering);
  if (can_skip({out_path}, hash)) {
    std::cout << "[" << topic.name << "] clustering: up to date\n";
    return;
  }

  const Embedding2D emb = read_embedding_file(dir / "embedding.tsv");
  double bandwidth;
  if (cfg_.has("clustering.bandwidth")) {
    bandwidth = cfg_.get_double("clustering.bandwidth");
  } else {
    bandwidth = estimate_bandwidth(emb.coords, cfg_.get_double("clustering.quantile", 0.3));
  }
  MeanShiftParams params;
  params.max_iterations = static_cast<int>(cfg_.get_int("clustering.max_iterations", 300));
  params.threads = threads_;
  const MeanShiftResult clusters = mean_shift(emb.coords, bandwidth, params);
  const auto [c0, c1] = top_two(clusters);

  TsvWriter out(out_path.string());
  out.provenance(hash, seed_);
  out.comment("bandwidth=" + fmt_double(bandwidth) + " clusters=" + std::to_string(clusters.sizes.size()));
  out.columns({"user_id", "cluster", "retained", "side"});
  for (std::size_t i = 0; i < emb.user_ids.size(); ++i) {
    const int c = clusters.labels[i];
    const bool retained = c == c0 || c == c1;
    out.row({emb.user_ids[i], std::to_string(c), retained ? "1" : "0",
             c == c0 ? "C0" : (c == c1 ? "C1" : "-")});
  }
  std::cout << "[" << topic.name << "] clustering: " << clusters.sizes.size()
            << " clusters, retained sizes " << clusters.sizes[c0] << "/" << clusters.sizes[c1] << "\n";
}

void Pipeline::stage_expand(const TopicConfig& topic) {
  const fs::path dir = topic_dir(topic);
  const fs::path labels_path = dir / "labels.tsv";
  const fs::path model_path = dir / "model.bin";
  const std::string hash = stage_hash(&topic, Stage::kExpand);
  if (can_skip({labels_path}, hash) && fs::exists(model_path)) {
    std::cout << "[" << topic.name << "] expand: up to date\n";
    return;
  }

  const UserVectorMap vectors = read_vectors_file(dir / "vectors.tsv");
  const ClustersFile clusters = read_clusters_file(dir / "clusters.tsv");

  std::vector<const UserVector*> examples;
  std::vector<int> labels;
  for (const auto& [user, label] : clusters.retained) {
    auto it = vectors.find(user);
    if (it == vectors.end()) continue;
    examples.push_back(&it->second);
    labels.push_back(label.side);
  }

  StanceTrainParams params;
  params.dim = static_cast<int>(cfg_.get_int("classifier.dim", 10));
  params.lr = cfg_.get_double("classifier.lr", 0.1);
  params.epochs = static_cast<int>(cfg_.get_int("classifier.epochs", 5));
  params.seed = derive_seed(seed_, fnv1a64(topic.name), 2);

  const HoldoutResult holdout = holdout_eval(examples, labels, params,
                                             cfg_.get_double("classifier.holdout", 0.8));
  const StanceModel model = StanceModel::train(examples, labels, params);
  model.save(model_path.string());

  ExpandParams gates;
  gates.min_accounts = static_cast<std::size_t>(cfg_.get_int("classifier.min_accounts", 5));
  gates.threshold = cfg_.get_double("classifier.threshold", 0.8);
  const StanceLabelMap expanded = expand(model, vectors, clusters.retained, gates);

  TsvWriter out(labels_path.string());
  out.provenance(hash, seed_);
  out.comment("holdout_accuracy=" + fmt_double(holdout.accuracy) +
              " train=" + std::to_string(holdout.train_size) +
              " test=" + std::to_string(holdout.test_size));
  out.columns({"user_id", "side", "source", "confidence"});
  std::size_t n_expanded = 0;
  for (const auto& [user, label] : expanded) {
    const bool is_expanded = label.source == LabelSource::kExpanded;
    if (is_expanded) ++n_expanded;
    out.row({user, label.side == 0 ? "C0" : "C1", is_expanded ? "expanded" : "clustered",
             fmt_double(label.confidence)});
  }
  std::cout << "[" << topic.name << "] expand: " << clusters.retained.size() << " clustered + "
            << n_expanded << " expanded (holdout acc " << holdout.accuracy << ")\n";
}

void Pipeline::stage_valence(const TopicConfig& topic) {
  const fs::path dir = topic_dir(topic);
  const fs::path media_path = dir / "valence_media.tsv";
  const fs::path accounts_path = dir / "valence_accounts.tsv";
  const std::string hash = stage_hash(&topic, Stage::kValence);
  if (can_skip({media_path, accounts_path}, hash)) {
    std::cout << "[" << topic.name << "] valence: up to date\n";
    return;
  }

  const std::vector<Post> posts = read_topic_posts(topic);
  const StanceLabelMap labels = read_labels_file(dir / "labels.tsv");

  std::set<std::string> denylist;
  for (const auto& d : cfg_.get_list("valence.shorteners", default_shortener_denylist()))
    denylist.insert(d);

  std::map<std::string, ArticleCitations> media;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> accounts;
  for (const Post& p : posts) {
    auto it = labels.find(p.author_id);
    if (it == labels.end()) continue;
    const int side = it->second.side;

    if (p.retweeted_author_id) {
      auto& tf = accounts[*p.retweeted_author_id];
      ++(side == 0 ? tf.first : tf.second);
    }
    for (const auto& url : p.urls) {
      const auto domain = extract_domain(url);
      if (!domain || denylist.count(*domain)) continue;
      auto& counts = media[*domain].per_article[strip_article_id(url)];
      ++(side == 0 ? counts.first : counts.second);
    }
  }

  const std::int64_t min_citations = cfg_.get_int("valence.min_citations", 10);
  const auto media_records = score_media(topic.name, media, min_citations);
  const auto account_records = score_accounts(topic.name, accounts, min_citations);

  auto write = [&](const fs::path& path, const std::vector<ValenceRecord>& records) {
    TsvWriter out(path.string());
    out.provenance(hash, seed_);
    out.columns({"influencer", "topic", "score", "category", "n_citations"});
    for (const auto& r : records) {
      out.row({r.influencer_id, r.topic, fmt_double(r.score), category_label(r.category),
               std::to_string(r.n_citations)});
    }
  };
  write(media_path, media_records);
  write(accounts_path, account_records);
  std::cout << "[" << topic.name << "] valence: " << media_records.size() << " media, "
            << account_records.size() << " accounts scored\n";
}

std::vector<std::string> Pipeline::run_topics(Stage last) {
  std::vector<std::string> failed;
  for (const TopicConfig& topic : topics_) {
    try {
      stage_ingest(topic);
      if (last >= Stage::kVectors) stage_vectors(topic);
      if (last >= Stage::kProjection) stage_projection(topic);
      if (last >= Stage::kClustering) stage_clustering(topic);
      if (last >= Stage::kExpand) stage_expand(topic);
      if (last >= Stage::kValence) stage_valence(topic);
    } catch (const std::exception& e) {
      std::cerr << "[" << topic.name << "] stage failed: " << e.what() << "\n";
      failed.push_back(topic.name);
    }
  }
  return failed;
}

void Pipeline::run_embed() {
  if (!cfg_.get_bool("embeddings.enabled", true)) {
    std::cout << "[aggregate] embed: disabled\n";
    return;
  }
  const fs::path dir = out_dir_ / "aggregate";
  fs::create_directories(dir);
  const std::string hash = stage_hash(nullptr, Stage::kEmbed);
  const std::vector<fs::path> outputs = {dir / "u2h.emb", dir / "u2m.emb",
                                         dir / "media_u2h.emb", dir / "media_u2m.emb"};
  if (can_skip(outputs, hash)) {
    std::cout << "[aggregate] embed: up to date\n";
    return;
  }

  // Union of the per-topic corpora; a post can match several topics.
  std::map<std::string, Post> by_id;
  for (const TopicConfig& topic : topics_) {
    for (Post& p : read_topic_posts(topic)) by_id.emplace(p.post_id, std::move(p));
  }
  std::vector<Post> posts;
  posts.reserve(by_id.size());
  for (auto& [_, p] : by_id) posts.push_back(std::move(p));

  WalkParams walk;
  walk.p = cfg_.get_double("embeddings.p", 1.0);
  walk.q = cfg_.get_double("embeddings.q", 1.0);
  walk.walk_length = static_cast<int>(cfg_.get_int("embeddings.walk_length", 80));
  walk.walks_per_node = static_cast<int>(cfg_.get_int("embeddings.walks_per_node", 10));
  walk.threads = threads_;

  SkipGramParams sg;
  sg.dim = static_cast<int>(cfg_.get_int("embeddings.dim", 100));
  sg.window = static_cast<int>(cfg_.get_int("embeddings.window", 5));
  sg.negatives = static_cast<int>(cfg_.get_int("embeddings.negatives", 5));
  sg.epochs = static_cast<int>(cfg_.get_int("embeddings.epochs", 5));

  std::set<std::string> denylist;
  for (const auto& d : cfg_.get_list("valence.shorteners", default_shortener_denylist()))
    denylist.insert(d);
  std::map<std::string, std::map<std::string, std::int64_t>> citing;  // domain -> user -> count
  for (const Post& p : posts) {
    for (const auto& url : p.urls) {
      const auto domain = extract_domain(url);
      if (!domain || denylist.count(*domain)) continue;
      ++citing[*domain][p.author_id];
    }
  }

  const struct {
    GraphMode mode;
    const char* node_file;
    const char* media_file;
    std::uint64_t stream;
  } jobs[] = {
      {GraphMode::kHashtag, "u2h.emb", "media_u2h.emb", 10},
      {GraphMode::kMention, "u2m.emb", "media_u2m.emb", 20},
  };
  for (const auto& job : jobs) {
    const BipartiteGraph graph = BipartiteGraph::build(posts, job.mode);
    NodeEmbeddings embeddings;
    if (graph.node_count() > 0) {
      walk.seed = derive_seed(seed_, 0xe4b3d, job.stream);
      sg.seed = derive_seed(seed_, 0xe4b3d, job.stream + 1);
      const auto walks = random_walks(graph, walk);
      embeddings = train_skipgram(walks, graph, sg);
    } else {
      embeddings.dim = sg.dim;
    }
    embeddings.save_text((dir / job.node_file).string(), provenance_line(hash, seed_).substr(2));

    NodeEmbeddings media;
    media.dim = embeddings.dim;
    for (const auto& [domain, users] : citing) {
      const auto vec = medium_embedding(users, embeddings);
      if (vec) media.vectors[domain] = *vec;
    }
    media.save_text((dir / job.media_file).string(), provenance_line(hash, seed_).substr(2));
    std::cout << "[aggregate] embed " << job.node_file << ": " << graph.node_count() << " nodes, "
              << media.vectors.size() << " media vectors\n";
  }
}

void Pipeline::run_bias() {
  const fs::path dir = out_dir_ / "aggregate";
  fs::create_directories(dir);
  const std::string hash = stage_hash(nullptr, Stage::kBias);

  // ----- collect per-topic valence records
  std::vector<ValenceRecord> media_records, account_records;
  std::set<std::string> topics_present;
  for (const TopicConfig& topic : topics_) {
    const fs::path tdir = topic_dir(topic);
    if (!fs::exists(tdir / "valence_media.tsv")) continue;
    for (auto& r : read_valence_file(tdir / "valence_media.tsv")) media_records.push_back(std::move(r));
    for (auto& r : read_valence_file(tdir / "valence_accounts.tsv"))
      account_records.push_back(std::move(r));
    topics_present.insert(topic.name);
  }
  if (topics_present.empty()) throw std::runtime_error("bias: no topic valence outputs found");

  // ----- anchor alignment across both influencer kinds
  AnchorSet anchors;
  for (const auto& row : read_tsv(anchors_path_.string()).rows) {
    if (row.size() < 2) throw std::runtime_error("anchors: rows need influencer and side");
    if (row[1] == "left")
      anchors[row[0]] = +1;
    else if (row[1] == "right")
      anchors[row[0]] = -1;
    else
      throw std::runtime_error("anchors: side must be left or right, got '" + row[1] + "'");
  }

  std::vector<ValenceRecord> all_records = media_records;
  all_records.insert(all_records.end(), account_records.begin(), account_records.end());
  const AlignResult alignment = align_signs(all_records, anchors);

  std::set<std::string> aligned_topics;
  for (const auto& [topic, _] : alignment.topic_sign) aligned_topics.insert(topic);
  if (aligned_topics.size() < 2) {
    std::string msg = "bias: fewer than 2 aligned topics (";
    msg += std::to_string(aligned_topics.size()) + " aligned";
    for (const auto& t : alignment.unaligned) msg += ", unaligned: " + t;
    msg += "); cannot aggregate";
    throw std::runtime_error(msg);
  }

  {
    TsvWriter out((dir / "topic_signs.tsv").string());
    out.provenance(hash, seed_);
    out.columns({"topic", "sign", "aligned"});
    for (const auto& topic : topics_present) {
      auto it = alignment.topic_sign.find(topic);
      if (it != alignment.topic_sign.end())
        out.row({topic, std::to_string(it->second), "1"});
      else
        out.row({topic, "0", "0"});
    }
  }

  // split the aligned records back out
  std::vector<ValenceRecord> media_aligned(all_records.begin(),
                                           all_records.begin() + static_cast<std::ptrdiff_t>(media_records.size()));
  std::vector<ValenceRecord> accounts_aligned(all_records.begin() + static_cast<std::ptrdiff_t>(media_records.size()),
                                              all_records.end());

  auto write_records = [&](const fs::path& path, const std::vector<ValenceRecord>& records) {
    TsvWriter out(path.string());
    out.provenance(hash, seed_);
    out.columns({"influencer", "topic", "score", "category", "n_citations"});
    for (const auto& r : records) {
      if (!aligned_topics.count(r.topic)) continue;
      out.row({r.influencer_id, r.topic, fmt_double(r.score), category_label(r.category),
               std::to_string(r.n_citations)});
    }
  };
  write_records(dir / "valence_media_aligned.tsv", media_aligned);
  write_records(dir / "valence_accounts_aligned.tsv", accounts_aligned);

  const auto media_avg = average_valence(media_aligned, aligned_topics);
  const auto accounts_avg = average_valence(accounts_aligned, aligned_topics);
  auto write_avg = [&](const fs::path& path, const std::vector<AverageValence>& rows) {
    TsvWriter out(path.string());
    out.provenance(hash, seed_);
    out.columns({"influencer", "score", "category", "n_topics", "n_citations"});
    for (const auto& r : rows) {
      out.row({r.influencer_id, fmt_double(r.score), category_label(r.category),
               std::to_string(r.n_topics), std::to_string(r.n_citations)});
    }
  };
  write_avg(dir / "media_average.tsv", media_avg);
  write_avg(dir / "accounts_average.tsv", accounts_avg);

  // ----- assemble features for gold-labeled media
  const std::vector<MediaRecord> gold = load_media_records(gold_path_.string());

  std::map<std::string, std::map<std::string, double>> valence_by_medium;  // domain -> topic -> score
  for (const auto& r : media_aligned) {
    if (aligned_topics.count(r.topic)) valence_by_medium[r.influencer_id][r.topic] = r.score;
  }
  std::map<std::string, double> avg_by_medium;
  for (const auto& r : media_avg) avg_by_medium[r.influencer_id] = r.score;
  std::map<std::string, ValenceCategory> avg_cat_by_medium;
  for (const auto& r : media_avg) avg_cat_by_medium[r.influencer_id] = r.category;

  NodeEmbeddings media_u2h, media_u2m, external;
  const bool have_u2h = fs::exists(dir / "media_u2h.emb");
  const bool have_u2m = fs::exists(dir / "media_u2m.emb");
  if (have_u2h) media_u2h = NodeEmbeddings::load_text((dir / "media_u2h.emb").string());
  if (have_u2m) media_u2m = NodeEmbeddings::load_text((dir / "media_u2m.emb").string());
  const bool have_external = external_vectors_path_.has_value();
  if (have_external) external = NodeEmbeddings::load_text(external_vectors_path_->string());

  const std::vector<std::string> topic_order(aligned_topics.begin(), aligned_topics.end());
  auto block_from = [](const std::vector<float>& v) {
    Eigen::VectorXd x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
    return x;
  };

  std::vector<MediaFeatures> features;
  std::vector<std::pair<ValenceCategory, std::string>> confusion_pairs;
  for (const MediaRecord& record : gold) {
    auto cat = avg_cat_by_medium.find(record.domain);
    if (cat != avg_cat_by_medium.end()) confusion_pairs.emplace_back(cat->second, record.bias);

    const auto merged = merge_labels(record.bias);
    if (!merged) continue;  // left-center / right-center discarded
    auto scores = valence_by_medium.find(record.domain);
    if (scores == valence_by_medium.end()) continue;  // never cited

    MediaFeatures f;
    f.domain = record.domain;
    f.gold = *merged;
    f.valence.resize(static_cast<Eigen::Index>(topic_order.size()) * 2);
    for (std::size_t t = 0; t < topic_order.size(); ++t) {
      auto it = scores->second.find(topic_order[t]);
      const bool present = it != scores->second.end();
      f.valence(static_cast<Eigen::Index>(2 * t)) = present ? it->second : 0.0;
      f.valence(static_cast<Eigen::Index>(2 * t + 1)) = present ? 1.0 : 0.0;
    }
    if (have_u2m) {
      if (const auto* v = media_u2m.find(record.domain)) f.graph_m = block_from(*v);
    }
    if (have_u2h) {
      if (const auto* v = media_u2h.find(record.domain)) f.graph_h = block_from(*v);
    }
    if (have_external) {
      if (const auto* v = external.find(record.domain)) f.external = block_from(*v);
    }
    auto avg = avg_by_medium.find(record.domain);
    if (avg != avg_by_medium.end()) f.average_valence = avg->second;
    features.push_back(std::move(f));
  }

  EvalOptions eopts;
  eopts.folds = static_cast<int>(cfg_.get_int("bias.folds", 5));
  eopts.seed = derive_seed(seed_, 0xb1a5, 0);
  eopts.train.regularization_c = cfg_.get_double("bias.c", 0.1);
  const std::vector<EvalRow> report = evaluate(features, eopts);

  {
    TsvWriter out((dir / "bias_report.tsv").string());
    out.provenance(hash, seed_);
    std::string topics_comment = "topics:";
    for (const auto& t : topic_order) topics_comment += " " + t;
    out.comment(topics_comment + " | media with gold label and valence: " + std::to_string(features.size()));
    out.columns({"configuration", "accuracy", "mae", "n_media"});
    for (const auto& row : report) {
      out.row({row.configuration, fmt_double(row.accuracy), fmt_double(row.mae),
               std::to_string(row.n_media)});
    }
  }
  {
    const ConfusionTable table = confusion_table(confusion_pairs);
    TsvWriter out((dir / "confusion.tsv").string());
    out.provenance(hash, seed_);
    std::vector<std::string> header = {"category"};
    for (const char* level : kGoldBiasLevels) header.push_back(level);
    out.columns(header);
    const ValenceCategory cats[] = {ValenceCategory::kMinusMinus, ValenceCategory::kMinus,
                                    ValenceCategory::kZero, ValenceCategory::kPlus,
                                    ValenceCategory::kPlusPlus};
    for (const auto cat : cats) {
      std::vector<std::string> row = {category_label(cat)};
      for (std::size_t col = 0; col < kGoldBiasLevels.size(); ++col) {
        row.push_back(std::to_string(table[static_cast<int>(cat)][col]));
      }
      out.row(row);
    }
  }
  std::cout << "[aggregate] bias: " << features.size() << " media evaluated, "
            << report.size() << " configurations\n";
}

int Pipeline::run_through(Stage last) {
  const std::vector<std::string> failed = run_topics(last);
  return failed.empty() ? 0 : 2;
}

int Pipeline::run_all() {
  const std::vector<std::string> failed = run_topics(Stage::kValence);
  if (!failed.empty()) {
    std::cerr << failed.size() << " topic(s) failed; skipping aggregate stages\n";
    return 2;
  }
  run_embed();
  run_bias();
  return 0;
}

}  // namespace stance
