#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stance {

enum class ValenceCategory { kMinusMinus = 0, kMinus = 1, kZero = 2, kPlus = 3, kPlusPlus = 4 };

// "--", "-", "0", "+", "++"
std::string category_label(ValenceCategory c);
std::optional<ValenceCategory> parse_category(const std::string& label);
ValenceCategory mirror(ValenceCategory c);

// Raw-frequency valence (retweeted accounts):
//   V = 2 * (tf0/total0) / (tf0/total0 + tf1/total1) - 1
// nullopt when the item was never cited by either cluster. Throws on
// non-positive totals or tf > total.
std::optional<double> valence_account(std::int64_t tf0, std::int64_t total0, std::int64_t tf1,
                                      std::int64_t total1);

// Log-dampened term frequency of one influencer in one cluster:
// sum over articles with count > 0 of ln(count) + 1.
double log_dampened_tf(const std::map<std::string, std::int64_t>& article_counts);

// Same rational form as valence_account over dampened frequencies.
std::optional<double> valence_influencer(double tf0, double total0, double tf1, double total1);

// Five equal bands of [-1,1]; the '++' band is closed at 1. Throws outside
// the range.
ValenceCategory bin_valence(double score);

struct ValenceRecord {
  std::string influencer_id;
  std::string topic;
  double score = 0;
  ValenceCategory category = ValenceCategory::kZero;
  std::int64_t n_citations = 0;
};

// Citations of one influencer, split per article and per cluster.
struct ArticleCitations {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_article;

  std::int64_t total_citations() const;
};

// Eq. 2 over a topic's media citation table. total(C_i) sums the dampened
// frequencies over all influencers; influencers below min_citations still
// contribute to the totals but emit no record.
std::vector<ValenceRecord> score_media(const std::string& topic,
                                       const std::map<std::string, ArticleCitations>& citations,
                                       std::int64_t min_citations);

// Eq. 1 over a topic's account retweet table: account -> (tf C0, tf C1).
std::vector<ValenceRecord> score_accounts(
    const std::string& topic,
    const std::map<std::string, std::pair<std::int64_t, std::int64_t>>& counts,
    std::int64_t min_citations);

// Anchor influencers with declared polarity: +1 (left) or -1 (right).
using AnchorSet = std::map<std::string, int>;

struct AlignResult {
  std::map<std::string, int> topic_sign;    // +1 kept, -1 flipped
  std::vector<std::string> unaligned;       // topics with no scored anchor
};

// Flips every record of a topic when the citation-weighted mean anchor
// score disagrees with the anchors' declared polarity. Topics without any
// scored anchor are flagged unaligned and left untouched.
AlignResult align_signs(std::vector<ValenceRecord>& records, const AnchorSet& anchors);

struct AverageValence {
  std::string influencer_id;
  double score = 0;
  ValenceCategory category = ValenceCategory::kZero;
  int n_topics = 0;
  std::int64_t n_citations = 0;
};

// Unweighted per-influencer mean over the aligned topics where a score
// exists; topics flagged unaligned must be excluded by the caller.
std::vector<AverageValence> average_valence(const std::vector<ValenceRecord>& records,
                                            const std::set<std::string>& aligned_topics);

}  // namespace stance
