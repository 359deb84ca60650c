#include "stance/bias_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "stance/lbfgs.hpp"
#include "stance/rng.hpp"
#include "stance/tsv.hpp"

namespace stance {

std::string bias_class_label(BiasClass c) {
  switch (c) {
    case BiasClass::kLeft: return "left";
    case BiasClass::kCenter: return "center";
    case BiasClass::kRight: return "right";
  }
  throw std::logic_error("bad bias class");
}

std::optional<BiasClass> merge_labels(const std::string& gold_bias) {
  if (gold_bias == "left" || gold_bias == "extreme-left") return BiasClass::kLeft;
  if (gold_bias == "right" || gold_bias == "extreme-right") return BiasClass::kRight;
  if (gold_bias == "center") return BiasClass::kCenter;
  if (gold_bias == "left-center" || gold_bias == "right-center") return std::nullopt;
  throw std::invalid_argument("unknown bias label '" + gold_bias + "'");
}

std::vector<MediaRecord> load_media_records(const std::string& path) {
  const TsvFile file = read_tsv(path);
  std::vector<MediaRecord> records;
  records.reserve(file.rows.size());
  for (const auto& row : file.rows) {
    if (row.size() < 2) throw std::runtime_error(path + ": media rows need domain and bias");
    MediaRecord r;
    r.domain = row[0];
    r.bias = row[1];
    r.factuality = row.size() > 2 ? row[2] : "";
    merge_labels(r.bias);  // validates the label vocabulary
    records.push_back(std::move(r));
  }
  return records;
}

BiasModel BiasModel::train(const Eigen::MatrixXd& features, const std::vector<BiasClass>& labels,
                           const BiasTrainOptions& opts) {
  const Eigen::Index m = features.rows();
  const Eigen::Index f = features.cols();
  if (static_cast<std::size_t>(m) != labels.size())
    throw std::invalid_argument("bias train: features/labels size mismatch");
  if (!features.allFinite()) throw std::invalid_argument("bias train: non-finite features");
  if (opts.regularization_c <= 0) throw std::invalid_argument("bias train: C must be positive");

  std::set<int> class_set;
  for (BiasClass y : labels) class_set.insert(static_cast<int>(y));
  if (class_set.size() < 2) throw std::invalid_argument("bias train: need at least 2 classes");
  const std::vector<int> classes(class_set.begin(), class_set.end());
  const int k = static_cast<int>(classes.size());

  std::vector<int> dense(3, -1);
  for (int c = 0; c < k; ++c) dense[classes[c]] = c;

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(m, k);
  for (Eigen::Index i = 0; i < m; ++i) onehot(i, dense[static_cast<int>(labels[i])]) = 1.0;

  const double inv_c = 1.0 / opts.regularization_c;
  const Eigen::Index n_params = static_cast<Eigen::Index>(k) * f + k;

  auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const Eigen::Map<const Eigen::MatrixXd> w(theta.data(), f, k);  // column per class
    const Eigen::Map<const Eigen::VectorXd> b(theta.data() + k * f, k);

    Eigen::MatrixXd z = features * w;
    z.rowwise() += b.transpose();
    const Eigen::VectorXd row_max = z.rowwise().maxCoeff();
    z.colwise() -= row_max;
    const Eigen::MatrixXd ez = z.array().exp().matrix();
    const Eigen::VectorXd denom = ez.rowwise().sum();

    double loss = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const int c = dense[static_cast<int>(labels[i])];
      loss -= z(i, c) - std::log(denom(i));
    }
    loss += 0.5 * inv_c * w.squaredNorm();

    const Eigen::MatrixXd p = ez.array().colwise() / denom.array();
    const Eigen::MatrixXd residual = p - onehot;
    grad.resize(n_params);
    Eigen::Map<Eigen::MatrixXd>(grad.data(), f, k) = features.transpose() * residual + inv_c * w;
    Eigen::Map<Eigen::VectorXd>(grad.data() + k * f, k) = residual.colwise().sum();
    return loss;
  };

  LbfgsOptions lopts;
  lopts.max_iterations = opts.max_iterations;
  lopts.gradient_tolerance = opts.gradient_tolerance;
  const LbfgsResult fit = lbfgs_minimize(objective, Eigen::VectorXd::Zero(n_params), lopts);
  if (!fit.converged) {
    throw std::runtime_error("bias train: optimizer did not converge (" +
                             std::to_string(fit.iterations) + " iterations, |grad|=" +
                             std::to_string(fit.gradient_norm) + ", tol=" +
                             std::to_string(opts.gradient_tolerance) + ")");
  }

  BiasModel model;
  model.weights_ = Eigen::MatrixXd::Zero(3, f);
  const Eigen::Map<const Eigen::MatrixXd> w(fit.x.data(), f, k);
  const Eigen::Map<const Eigen::VectorXd> b(fit.x.data() + k * f, k);
  for (int c = 0; c < k; ++c) {
    model.weights_.row(classes[c]) = w.col(c).transpose();
    model.intercepts_(classes[c]) = b(c);
    model.present_[classes[c]] = true;
  }
  return model;
}

std::pair<BiasClass, Eigen::Vector3d> BiasModel::predict(const Eigen::VectorXd& features) const {
  Eigen::Vector3d z = weights_ * features + intercepts_;
  double max_z = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < 3; ++c) {
    if (present_[c]) max_z = std::max(max_z, z(c));
  }
  Eigen::Vector3d probs = Eigen::Vector3d::Zero();
  double denom = 0;
  for (int c = 0; c < 3; ++c) {
    if (!present_[c]) continue;
    probs(c) = std::exp(z(c) - max_z);
    denom += probs(c);
  }
  probs /= denom;
  int best = 0;
  double best_p = -1;
  for (int c = 0; c < 3; ++c) {
    if (probs(c) > best_p) {
      best_p = probs(c);
      best = c;
    }
  }
  return {static_cast<BiasClass>(best), probs};
}

double accuracy(const std::vector<BiasClass>& predictions, const std::vector<BiasClass>& gold) {
  if (predictions.size() != gold.size() || gold.empty())
    throw std::invalid_argument("accuracy: size mismatch or empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i] == gold[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double mae(const std::vector<BiasClass>& predictions, const std::vector<BiasClass>& gold) {
  if (predictions.size() != gold.size() || gold.empty())
    throw std::invalid_argument("mae: size mismatch or empty input");
  double sum = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    sum += std::abs(static_cast<int>(predictions[i]) - static_cast<int>(gold[i]));
  }
  return sum / static_cast<double>(gold.size());
}

BiasClass unsupervised_leaning(double average_valence) {
  if (average_valence > 0.2) return BiasClass::kLeft;
  if (average_valence < -0.2) return BiasClass::kRight;
  return BiasClass::kCenter;
}

namespace {

// fold id per item: per-class shuffle then round-robin deal
std::vector<int> stratified_folds(const std::vector<BiasClass>& gold, int folds, std::uint64_t seed) {
  std::vector<int> fold_of(gold.size(), 0);
  for (int c = 0; c < 3; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (static_cast<int>(gold[i]) == c) members.push_back(i);
    }
    std::mt19937_64 rng(derive_seed(seed, 0xf01d'0000ULL + static_cast<std::uint64_t>(c)));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      fold_of[members[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    }
  }
  return fold_of;
}

struct FoldScores {
  double acc_sum = 0, mae_sum = 0;
  int folds_used = 0;

  void add(const std::vector<BiasClass>& pred, const std::vector<BiasClass>& gold) {
    acc_sum += accuracy(pred, gold);
    mae_sum += mae(pred, gold);
    ++folds_used;
  }
};

Eigen::MatrixXd znormalize(const Eigen::MatrixXd& train, Eigen::RowVectorXd& mean,
                           Eigen::RowVectorXd& stdev) {
  mean = train.colwise().mean();
  Eigen::MatrixXd centered = train.rowwise() - mean;
  stdev = (centered.array().square().colwise().mean()).sqrt();
  for (Eigen::Index j = 0; j < stdev.size(); ++j) {
    if (stdev(j) <= 0) stdev(j) = 1.0;  // constant column stays centered at 0
  }
  return centered.array().rowwise() / stdev.array();
}

}  // namespace

EvalRow evaluate_matrix(const std::string& name, const Eigen::MatrixXd& features,
                        const std::vector<BiasClass>& gold, const EvalOptions& opts) {
  if (opts.folds < 2) throw std::invalid_argument("evaluate: folds must be >= 2");
  const std::vector<int> fold_of = stratified_folds(gold, opts.folds, opts.seed);

  FoldScores scores;
  for (int fold = 0; fold < opts.folds; ++fold) {
    std::vector<Eigen::Index> train_idx, test_idx;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      (fold_of[i] == fold ? test_idx : train_idx).push_back(static_cast<Eigen::Index>(i));
    }
    if (test_idx.empty() || train_idx.empty()) continue;

    std::set<BiasClass> train_classes;
    for (Eigen::Index i : train_idx) train_classes.insert(gold[i]);
    if (train_classes.size() < 2) continue;

    Eigen::MatrixXd train_x(train_idx.size(), features.cols());
    std::vector<BiasClass> train_y(train_idx.size());
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
      train_x.row(r) = features.row(train_idx[r]);
      train_y[r] = gold[train_idx[r]];
    }
    Eigen::RowVectorXd mean, stdev;
    const Eigen::MatrixXd train_norm = znormalize(train_x, mean, stdev);
    const BiasModel model = BiasModel::train(train_norm, train_y, opts.train);

    std::vector<BiasClass> pred, truth;
    pred.reserve(test_idx.size());
    for (Eigen::Index i : test_idx) {
      const Eigen::VectorXd x = ((features.row(i) - mean).array() / stdev.array()).transpose();
      pred.push_back(model.predict(x).first);
      truth.push_back(gold[i]);
    }
    scores.add(pred, truth);
  }
  if (scores.folds_used == 0) throw std::runtime_error("evaluate: no usable folds for " + name);

  EvalRow row;
  row.configuration = name;
  row.accuracy = scores.acc_sum / scores.folds_used;
  row.mae = scores.mae_sum / scores.folds_used;
  row.n_media = gold.size();
  return row;
}

std::vector<EvalRow> evaluate(const std::vector<MediaFeatures>& media, const EvalOptions& opts) {
  if (media.empty()) throw std::invalid_argument("evaluate: no media");

  struct Block {
    std::string name;
    std::function<const Eigen::VectorXd*(const MediaFeatures&)> get;
  };
  const std::vector<Block> optional_blocks = {
      {"graph_m", [](const MediaFeatures& m) { return m.graph_m ? &*m.graph_m : nullptr; }},
      {"graph_h", [](const MediaFeatures& m) { return m.graph_h ? &*m.graph_h : nullptr; }},
      {"external", [](const MediaFeatures& m) { return m.external ? &*m.external : nullptr; }},
  };

  // Which optional blocks exist for enough media to be usable at all?
  std::map<std::string, std::size_t> availability;
  for (const auto& b : optional_blocks) {
    for (const auto& m : media) {
      if (b.get(m)) ++availability[b.name];
    }
  }
  const std::size_t min_media = static_cast<std::size_t>(opts.folds) * 2;
  auto usable = [&](const std::string& name) { return availability[name] >= min_media; };

  std::vector<std::vector<std::string>> configurations = {{"valence"}};
  if (usable("graph_m")) configurations.push_back({"graph_m"});
  if (usable("graph_h")) configurations.push_back({"graph_h"});
  if (usable("graph_m") && usable("graph_h")) configurations.push_back({"graph_m", "graph_h"});
  if (usable("graph_m")) configurations.push_back({"valence", "graph_m"});
  if (usable("graph_h")) configurations.push_back({"valence", "graph_h"});
  if (usable("graph_m") && usable("graph_h"))
    configurations.push_back({"valence", "graph_m", "graph_h"});
  if (usable("external")) {
    configurations.push_back({"external"});
    configurations.push_back({"valence", "external"});
    if (usable("graph_m") && usable("graph_h")) {
      configurations.push_back({"graph_m", "graph_h", "external"});
      configurations.push_back({"valence", "graph_m", "graph_h", "external"});
    }
  }

  std::vector<EvalRow> rows;

  // Baseline 1: majority class of the training fold.
  {
    std::vector<BiasClass> gold;
    for (const auto& m : media) gold.push_back(m.gold);
    const std::vector<int> fold_of = stratified_folds(gold, opts.folds, opts.seed);
    FoldScores scores;
    for (int fold = 0; fold < opts.folds; ++fold) {
      std::array<std::size_t, 3> counts = {0, 0, 0};
      std::vector<BiasClass> truth;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        if (fold_of[i] == fold)
          truth.push_back(gold[i]);
        else
          ++counts[static_cast<int>(gold[i])];
      }
      if (truth.empty()) continue;
      const int majority = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      const std::vector<BiasClass> pred(truth.size(), static_cast<BiasClass>(majority));
      scores.add(pred, truth);
    }
    if (scores.folds_used > 0) {
      rows.push_back({"baseline_majority", scores.acc_sum / scores.folds_used,
                      scores.mae_sum / scores.folds_used, media.size()});
    }
  }

  // Baseline 2: thresholded average valence, no training.
  {
    std::vector<BiasClass> pred, truth;
    for (const auto& m : media) {
      if (!m.average_valence) continue;
      pred.push_back(unsupervised_leaning(*m.average_valence));
      truth.push_back(m.gold);
    }
    if (!pred.empty()) {
      rows.push_back({"baseline_average_valence", accuracy(pred, truth), mae(pred, truth), pred.size()});
    }
  }

  for (const auto& config : configurations) {
    std::vector<const MediaFeatures*> subset;
    for (const auto& m : media) {
      bool ok = true;
      for (const auto& block : config) {
        if (block == "valence") continue;
        for (const auto& b : optional_blocks) {
          if (b.name == block && !b.get(m)) ok = false;
        }
      }
      if (ok) subset.push_back(&m);
    }
    if (subset.size() < min_media) continue;

    Eigen::Index width = 0;
    for (const auto& block : config) {
      if (block == "valence") {
        width += subset.front()->valence.size();
      } else {
        for (const auto& b : optional_blocks) {
          if (b.name == block) width += b.get(*subset.front())->size();
        }
      }
    }

    Eigen::MatrixXd x(subset.size(), width);
    std::vector<BiasClass> y(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) {
      Eigen::Index offset = 0;
      for (const auto& block : config) {
        const Eigen::VectorXd* vec = nullptr;
        if (block == "valence") {
          vec = &subset[i]->valence;
        } else {
          for (const auto& b : optional_blocks) {
            if (b.name == block) vec = b.get(*subset[i]);
          }
        }
        x.block(i, offset, 1, vec->size()) = vec->transpose();
        offset += vec->size();
      }
      y[i] = subset[i]->gold;
    }

    std::string name = config.front();
    for (std::size_t c = 1; c < config.size(); ++c) name += "+" + config[c];
    rows.push_back(evaluate_matrix(name, x, y, opts));
  }
  return rows;
}

ConfusionTable confusion_table(const std::vector<std::pair<ValenceCategory, std::string>>& pairs) {
  ConfusionTable table{};
  for (auto& row : table) row.fill(0);
  for (const auto& [category, gold] : pairs) {
    int col = -1;
    for (std::size_t i = 0; i < kGoldBiasLevels.size(); ++i) {
      if (gold == kGoldBiasLevels[i]) col = static_cast<int>(i);
    }
    if (col < 0) throw std::invalid_argument("confusion_table: unknown bias label '" + gold + "'");
    ++table[static_cast<int>(category)][col];
  }
  return table;
}

}  // namespace stance
