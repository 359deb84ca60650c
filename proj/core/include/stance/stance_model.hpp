#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stance/mean_shift.hpp"
#include "stance/user_vectors.hpp"

namespace stance {

struct StanceTrainParams {
  int dim = 10;
  double lr = 0.1;  // linearly decayed to 0 over all updates
  int epochs = 5;
  std::uint64_t seed = 1;
};

// Linear classifier over retweeted-account id features: the user's account
// tokens (repeated per retweet count) are embedded, averaged, and fed to a
// two-class softmax. Input embeddings start uniform, output weights start at
// zero, so swapping the class labels mirrors the model exactly.
class StanceModel {
 public:
  // labels[i] in {0,1} parallel to examples. Throws unless both classes
  // have at least two examples.
  static StanceModel train(const std::vector<const UserVector*>& examples,
                           const std::vector<int>& labels, const StanceTrainParams& params);

  // (p(C0), p(C1)); tokens outside the vocabulary are skipped, an all-OOV
  // user gets the uniform (0.5, 0.5).
  std::array<double, 2> probabilities(const UserVector& user) const;

  // (side, confidence) where confidence = max probability.
  std::pair<int, double> predict(const UserVector& user) const;

  // Versioned binary format, little-endian 32-bit floats.
  void save(const std::string& path) const;
  static StanceModel load(const std::string& path);

  int dim() const { return dim_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  bool has_token(const std::string& account) const { return vocab_.count(account) > 0; }

 private:
  int dim_ = 0;
  std::map<std::string, std::uint32_t> vocab_;  // account -> row
  std::vector<float> input_;                    // vocab x dim, row-major
  std::vector<float> output_;                   // 2 x dim, row-major
  std::array<float, 2> bias_ = {0, 0};

  friend struct StanceModelTestAccess;
};

struct ExpandParams {
  std::size_t min_accounts = 5;  // distinct retweeted accounts
  double threshold = 0.8;        // strictly-greater confidence gate
};

bool passes_expand_gates(std::size_t distinct_accounts, double confidence,
                         const ExpandParams& params);

enum class LabelSource { kClustered, kExpanded };

struct StanceLabel {
  int side = 0;  // 0 = C0, 1 = C1
  LabelSource source = LabelSource::kClustered;
  double confidence = 1.0;
};

using StanceLabelMap = std::map<std::string, StanceLabel>;

// Labels every not-yet-clustered user that clears both gates; clustered
// users pass through untouched.
StanceLabelMap expand(const StanceModel& model, const UserVectorMap& vectors,
                      const StanceLabelMap& clustered, const ExpandParams& params = {});

struct HoldoutResult {
  double accuracy = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Random split evaluation (default 80/20). Reshuffles with successor seeds
// (up to 10 attempts) when a class goes missing from either side.
HoldoutResult holdout_eval(const std::vector<const UserVector*>& examples,
                           const std::vector<int>& labels, const StanceTrainParams& params,
                           double split = 0.8);

}  // namespace stance
