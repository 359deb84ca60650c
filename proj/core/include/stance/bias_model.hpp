#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stance/valence.hpp"

namespace stance {

// Ordered for the ordinal MAE: left < center < right.
enum class BiasClass { kLeft = 0, kCenter = 1, kRight = 2 };

std::string bias_class_label(BiasClass c);

// The seven-level annotation scale of the gold file.
inline constexpr std::array<const char*, 7> kGoldBiasLevels = {
    "extreme-left", "left", "left-center", "center", "right-center", "right", "extreme-right"};

// extreme-left/left -> left, extreme-right/right -> right, center -> center,
// left-center/right-center -> excluded (nullopt). Unknown labels throw.
std::optional<BiasClass> merge_labels(const std::string& gold_bias);

struct MediaRecord {
  std::string domain;      // normalized per extract_domain
  std::string bias;        // one of kGoldBiasLevels
  std::string factuality;  // informational only
};

// TSV: domain <tab> bias <tab> factuality
std::vector<MediaRecord> load_media_records(const std::string& path);

struct BiasTrainOptions {
  double regularization_c = 0.1;
  int max_iterations = 1000;
  double gradient_tolerance = 1e-5;
};

// Multinomial logistic regression over {left, center, right}, minimizing
// sum cross-entropy + ||W||^2/(2C) (intercepts unpenalized). Classes absent
// from the training data keep zero weights and probability zero.
class BiasModel {
 public:
  static BiasModel train(const Eigen::MatrixXd& features, const std::vector<BiasClass>& labels,
                         const BiasTrainOptions& opts = {});

  std::pair<BiasClass, Eigen::Vector3d> predict(const Eigen::VectorXd& features) const;

  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::Vector3d& intercepts() const { return intercepts_; }

 private:
  Eigen::MatrixXd weights_;  // 3 x F
  Eigen::Vector3d intercepts_ = Eigen::Vector3d::Zero();
  std::array<bool, 3> present_ = {false, false, false};
};

double accuracy(const std::vector<BiasClass>& predictions, const std::vector<BiasClass>& gold);

// Mean |ord(pred) - ord(gold)| with left=0, center=1, right=2.
double mae(const std::vector<BiasClass>& predictions, const std::vector<BiasClass>& gold);

// score > 0.2 -> left, score < -0.2 -> right, else center (positive valence
// denotes the left-aligned pole after anchor alignment).
BiasClass unsupervised_leaning(double average_valence);

// Named feature blocks for one medium; absent optional blocks exclude the
// medium from configurations that need them.
struct MediaFeatures {
  std::string domain;
  Eigen::VectorXd valence;               // score+presence pairs, fixed topic order
  std::optional<Eigen::VectorXd> graph_m;
  std::optional<Eigen::VectorXd> graph_h;
  std::optional<Eigen::VectorXd> external;
  std::optional<double> average_valence;
  BiasClass gold = BiasClass::kCenter;
};

struct EvalRow {
  std::string configuration;
  double accuracy = 0;
  double mae = 0;
  std::size_t n_media = 0;
};

struct EvalOptions {
  int folds = 5;
  std::uint64_t seed = 1;
  BiasTrainOptions train;
};

// Stratified k-fold evaluation of every feature configuration the available
// blocks permit, plus the majority-class and average-valence baselines.
// Features are z-normalized per column with training-fold statistics.
std::vector<EvalRow> evaluate(const std::vector<MediaFeatures>& media, const EvalOptions& opts);

// Cross-validated metrics for one fixed design matrix.
EvalRow evaluate_matrix(const std::string& name, const Eigen::MatrixXd& features,
                        const std::vector<BiasClass>& gold, const EvalOptions& opts);

// 5x7 counts of (valence category, gold bias level).
using ConfusionTable = std::array<std::array<std::int64_t, 7>, 5>;

ConfusionTable confusion_table(const std::vector<std::pair<ValenceCategory, std::string>>& pairs);

}  // namespace stance
