#include "stance/valence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stance {

std::string category_label(ValenceCategory c) {
  switch (c) {
    case ValenceCategory::kMinusMinus: return "--";
    case ValenceCategory::kMinus: return "-";
    case ValenceCategory::kZero: return "0";
    case ValenceCategory::kPlus: return "+";
    case ValenceCategory::kPlusPlus: return "++";
  }
  throw std::logic_error("bad category");
}

std::optional<ValenceCategory> parse_category(const std::string& label) {
  if (label == "--") return ValenceCategory::kMinusMinus;
  if (label == "-") return ValenceCategory::kMinus;
  if (label == "0") return ValenceCategory::kZero;
  if (label == "+") return ValenceCategory::kPlus;
  if (label == "++") return ValenceCategory::kPlusPlus;
  return std::nullopt;
}

ValenceCategory mirror(ValenceCategory c) {
  switch (c) {
    case ValenceCategory::kMinusMinus: return ValenceCategory::kPlusPlus;
    case ValenceCategory::kMinus: return ValenceCategory::kPlus;
    case ValenceCategory::kZero: return ValenceCategory::kZero;
    case ValenceCategory::kPlus: return ValenceCategory::kMinus;
    case ValenceCategory::kPlusPlus: return ValenceCategory::kMinusMinus;
  }
  throw std::logic_error("bad category");
}

namespace {

double valence_from_rates(double rate0, double rate1) {
  return 2.0 * (rate0 / (rate0 + rate1)) - 1.0;
}

}  // namespace

std::optional<double> valence_account(std::int64_t tf0, std::int64_t total0, std::int64_t tf1,
                                      std::int64_t total1) {
  if (total0 <= 0 || total1 <= 0) throw std::invalid_argument("valence_account: totals must be positive");
  if (tf0 < 0 || tf1 < 0) throw std::invalid_argument("valence_account: negative term frequency");
  if (tf0 > total0 || tf1 > total1)
    throw std::invalid_argument("valence_account: term frequency exceeds total");
  if (tf0 == 0 && tf1 == 0) return std::nullopt;
  return valence_from_rates(static_cast<double>(tf0) / static_cast<double>(total0),
                            static_cast<double>(tf1) / static_cast<double>(total1));
}

double log_dampened_tf(const std::map<std::string, std::int64_t>& article_counts) {
  double tf = 0;
  for (const auto& [_, count] : article_counts) {
    if (count < 0) throw std::invalid_argument("log_dampened_tf: negative citation count");
    if (count > 0) tf += std::log(static_cast<double>(count)) + 1.0;
  }
  return tf;
}

std::optional<double> valence_influencer(double tf0, double total0, double tf1, double total1) {
  if (!(total0 > 0) || !(total1 > 0))
    throw std::invalid_argument("valence_influencer: totals must be positive");
  if (tf0 < 0 || tf1 < 0) throw std::invalid_argument("valence_influencer: negative term frequency");
  if (tf0 == 0 && tf1 == 0) return std::nullopt;
  return valence_from_rates(tf0 / total0, tf1 / total1);
}

ValenceCategory bin_valence(double score) {
  if (!(score >= -1.0 && score <= 1.0))
    throw std::invalid_argument("bin_valence: score outside [-1,1]");
  if (score < -0.6) return ValenceCategory::kMinusMinus;
  if (score < -0.2) return ValenceCategory::kMinus;
  if (score < 0.2) return ValenceCategory::kZero;
  if (score < 0.6) return ValenceCategory::kPlus;
  return ValenceCategory::kPlusPlus;
}

std::int64_t ArticleCitations::total_citations() const {
  std::int64_t n = 0;
  for (const auto& [_, counts] : per_article) n += counts.first + counts.second;
  return n;
}

std::vector<ValenceRecord> score_media(const std::string& topic,
                                       const std::map<std::string, ArticleCitations>& citations,
                                       std::int64_t min_citations) {
  std::map<std::string, std::pair<double, double>> tfs;
  double total0 = 0, total1 = 0;
  for (const auto& [domain, arts] : citations) {
    std::map<std::string, std::int64_t> c0, c1;
    for (const auto& [article, counts] : arts.per_article) {
      if (counts.first > 0) c0[article] = counts.first;
      if (counts.second > 0) c1[article] = counts.second;
    }
    const double tf0 = log_dampened_tf(c0);
    const double tf1 = log_dampened_tf(c1);
    tfs[domain] = {tf0, tf1};
    total0 += tf0;
    total1 += tf1;
  }

  std::vector<ValenceRecord> records;
  for (const auto& [domain, tf] : tfs) {
    const std::int64_t n = citations.at(domain).total_citations();
    if (n < min_citations) continue;
    const auto score = valence_influencer(tf.first, total0, tf.second, total1);
    if (!score) continue;
    records.push_back({domain, topic, *score, bin_valence(*score), n});
  }
  return records;
}

std::vector<ValenceRecord> score_accounts(
    const std::string& topic,
    const std::map<std::string, std::pair<std::int64_t, std::int64_t>>& counts,
    std::int64_t min_citations) {
  std::int64_t total0 = 0, total1 = 0;
  for (const auto& [_, tf] : counts) {
    total0 += tf.first;
    total1 += tf.second;
  }

  std::vector<ValenceRecord> records;
  for (const auto& [account, tf] : counts) {
    const std::int64_t n = tf.first + tf.second;
    if (n < min_citations) continue;
    const auto score = valence_account(tf.first, total0, tf.second, total1);
    if (!score) continue;
    records.push_back({account, topic, *score, bin_valence(*score), n});
  }
  return records;
}

AlignResult align_signs(std::vector<ValenceRecord>& records, const AnchorSet& anchors) {
  for (const auto& [anchor, polarity] : anchors) {
    if (polarity != 1 && polarity != -1)
      throw std::invalid_argument("anchor '" + anchor + "': polarity must be +1 or -1");
  }

  std::map<std::string, std::pair<double, double>> agreement;  // topic -> (weighted sum, weight)
  for (const ValenceRecord& r : records) {
    auto it = anchors.find(r.influencer_id);
    if (it == anchors.end()) continue;
    const double weight = static_cast<double>(r.n_citations);
    agreement[r.topic].first += weight * r.score * it->second;
    agreement[r.topic].second += weight;
  }

  AlignResult result;
  std::set<std::string> topics;
  for (const ValenceRecord& r : records) topics.insert(r.topic);
  for (const auto& topic : topics) {
    auto it = agreement.find(topic);
    if (it == agreement.end() || it->second.second <= 0 || it->second.first == 0) {
      result.unaligned.push_back(topic);
      continue;
    }
    result.topic_sign[topic] = it->second.first > 0 ? +1 : -1;
  }

  for (ValenceRecord& r : records) {
    auto it = result.topic_sign.find(r.topic);
    if (it != result.topic_sign.end() && it->second < 0) {
      r.score = -r.score;
      r.category = bin_valence(r.score);
    }
  }
  return result;
}

std::vector<AverageValence> average_valence(const std::vector<ValenceRecord>& records,
                                            const std::set<std::string>& aligned_topics) {
  struct Acc {
    double sum = 0;
    int n = 0;
    std::int64_t citations = 0;
  };
  std::map<std::string, Acc> by_influencer;
  for (const ValenceRecord& r : records) {
    if (!aligned_topics.count(r.topic)) continue;
    Acc& acc = by_influencer[r.influencer_id];
    acc.sum += r.score;
    ++acc.n;
    acc.citations += r.n_citations;
  }

  std::vector<AverageValence> out;
  out.reserve(by_influencer.size());
  for (const auto& [id, acc] : by_influencer) {
    const double mean = acc.sum / acc.n;
    out.push_back({id, mean, bin_valence(mean), acc.n, acc.citations});
  }
  return out;
}

}  // namespace stance
