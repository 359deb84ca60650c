#include "stance/stance_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "stance/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

namespace stance {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'M', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

std::array<double, 2> softmax2(double z0, double z1) {
  const double m = std::max(z0, z1);
  const double e0 = std::exp(z0 - m);
  const double e1 = std::exp(z1 - m);
  const double sum = e0 + e1;
  return {e0 / sum, e1 / sum};
}

void check_two_classes(const std::vector<int>& labels) {
  std::array<std::size_t, 2> counts = {0, 0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("stance labels must be 0 or 1");
    ++counts[y];
  }
  if (counts[0] < 2 || counts[1] < 2)
    throw std::invalid_argument("stance training needs at least 2 examples per class");
}

}  // namespace

StanceModel StanceModel::train(const std::vector<const UserVector*>& examples,
                               const std::vector<int>& labels, const StanceTrainParams& params) {
  if (examples.size() != labels.size())
    throw std::invalid_argument("examples/labels size mismatch");
  if (params.dim < 1) throw std::invalid_argument("dim must be >= 1");
  check_two_classes(labels);

  StanceModel model;
  model.dim_ = params.dim;

  // Vocabulary over training accounts only, rows assigned in sorted order.
  std::set<std::string> accounts;
  for (const UserVector* u : examples) {
    for (const auto& [acc, _] : u->counts) accounts.insert(acc);
  }
  std::uint32_t next = 0;
  for (const auto& acc : accounts) model.vocab_[acc] = next++;

  const std::size_t v = model.vocab_.size();
  const int d = params.dim;
  model.input_.resize(v * d);
  model.output_.assign(2 * d, 0.0f);
  model.bias_ = {0.0f, 0.0f};

  std::mt19937_64 rng(derive_seed(params.seed, 0xfa57'0001ULL));
  std::uniform_real_distribution<float> init(-1.0f / d, 1.0f / d);
  for (float& w : model.input_) w = init(rng);

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  const double total_updates = static_cast<double>(params.epochs) * examples.size();
  double update = 0;
  std::vector<double> hidden(d), grad_hidden(d);
  std::vector<std::pair<std::uint32_t, double>> rows;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const double lr = params.lr * (1.0 - update / total_updates);
      ++update;

      const UserVector& u = *examples[idx];
      rows.clear();
      double total_tokens = 0;
      for (const auto& [acc, cnt] : u.counts) {
        auto it = model.vocab_.find(acc);
        if (it == model.vocab_.end()) continue;
        rows.emplace_back(it->second, static_cast<double>(cnt));
        total_tokens += static_cast<double>(cnt);
      }
      if (rows.empty()) continue;

      std::fill(hidden.begin(), hidden.end(), 0.0);
      for (const auto& [row, cnt] : rows) {
        const float* w = &model.input_[row * d];
        for (int j = 0; j < d; ++j) hidden[j] += cnt * w[j];
      }
      for (int j = 0; j < d; ++j) hidden[j] /= total_tokens;

      double z0 = model.bias_[0], z1 = model.bias_[1];
      for (int j = 0; j < d; ++j) {
        z0 += model.output_[j] * hidden[j];
        z1 += model.output_[d + j] * hidden[j];
      }
      const auto probs = softmax2(z0, z1);
      const int y = labels[idx];
      const std::array<double, 2> delta = {probs[0] - (y == 0 ? 1.0 : 0.0),
                                           probs[1] - (y == 1 ? 1.0 : 0.0)};

      // gradient wrt the averaged embedding, with pre-update output weights
      std::fill(grad_hidden.begin(), grad_hidden.end(), 0.0);
      for (int c = 0; c < 2; ++c) {
        const float* w = &model.output_[c * d];
        for (int j = 0; j < d; ++j) grad_hidden[j] += delta[c] * w[j];
      }
      for (int c = 0; c < 2; ++c) {
        float* w = &model.output_[c * d];
        for (int j = 0; j < d; ++j) w[j] -= static_cast<float>(lr * delta[c] * hidden[j]);
        model.bias_[c] -= static_cast<float>(lr * delta[c]);
      }
      for (const auto& [row, cnt] : rows) {
        float* w = &model.input_[row * d];
        const double scale = lr * cnt / total_tokens;
        for (int j = 0; j < d; ++j) w[j] -= static_cast<float>(scale * grad_hidden[j]);
      }
    }
  }
  return model;
}

std::array<double, 2> StanceModel::probabilities(const UserVector& user) const {
  const int d = dim_;
  std::vector<double> hidden(d, 0.0);
  double total_tokens = 0;
  for (const auto& [acc, cnt] : user.counts) {
    auto it = vocab_.find(acc);
    if (it == vocab_.end()) continue;
    const float* w = &input_[it->second * d];
    for (int j = 0; j < d; ++j) hidden[j] += static_cast<double>(cnt) * w[j];
    total_tokens += static_cast<double>(cnt);
  }
  if (total_tokens == 0) return {0.5, 0.5};

  double z0 = bias_[0], z1 = bias_[1];
  for (int j = 0; j < d; ++j) {
    z0 += output_[j] * hidden[j] / total_tokens;
    z1 += output_[d + j] * hidden[j] / total_tokens;
  }
  return softmax2(z0, z1);
}

std::pair<int, double> StanceModel::predict(const UserVector& user) const {
  const auto p = probabilities(user);
  return p[0] >= p[1] ? std::make_pair(0, p[0]) : std::make_pair(1, p[1]);
}

void StanceModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model: " + path);

  auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  out.write(kMagic, 4);
  put_u32(kFormatVersion);
  put_u32(static_cast<std::uint32_t>(dim_));
  put_u32(static_cast<std::uint32_t>(vocab_.size()));

  // vocab_ iterates sorted; row ids were assigned in the same order
  for (const auto& [acc, row] : vocab_) {
    (void)row;
    put_u32(static_cast<std::uint32_t>(acc.size()));
    out.write(acc.data(), static_cast<std::streamsize>(acc.size()));
  }
  out.write(reinterpret_cast<const char*>(input_.data()),
            static_cast<std::streamsize>(input_.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(output_.data()),
            static_cast<std::streamsize>(output_.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(bias_.data()), 2 * sizeof(float));
  if (!out) throw std::runtime_error("write failed: " + path);
}

StanceModel StanceModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model: " + path);

  auto get_u32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a stance model file: " + path);
  if (get_u32() != kFormatVersion) throw std::runtime_error("unsupported model version: " + path);

  StanceModel model;
  model.dim_ = static_cast<int>(get_u32());
  const std::uint32_t v = get_u32();
  if (!in || model.dim_ < 1 || model.dim_ > 1 << 16)
    throw std::runtime_error("corrupt model header: " + path);

  std::string acc;
  for (std::uint32_t i = 0; i < v; ++i) {
    const std::uint32_t len = get_u32();
    acc.resize(len);
    in.read(acc.data(), len);
    model.vocab_[acc] = i;
  }
  model.input_.resize(static_cast<std::size_t>(v) * model.dim_);
  model.output_.resize(2 * static_cast<std::size_t>(model.dim_));
  in.read(reinterpret_cast<char*>(model.input_.data()),
          static_cast<std::streamsize>(model.input_.size() * sizeof(float)));
  in.read(reinterpret_cast<char*>(model.output_.data()),
          static_cast<std::streamsize>(model.output_.size() * sizeof(float)));
  in.read(reinterpret_cast<char*>(model.bias_.data()), 2 * sizeof(float));
  if (!in) throw std::runtime_error("truncated model file: " + path);
  return model;
}

bool passes_expand_gates(std::size_t distinct_accounts, double confidence,
                         const ExpandParams& params) {
  return distinct_accounts >= params.min_accounts && confidence > params.threshold;
}

StanceLabelMap expand(const StanceModel& model, const UserVectorMap& vectors,
                      const StanceLabelMap& clustered, const ExpandParams& params) {
  StanceLabelMap out = clustered;
  for (const auto& [user_id, vec] : vectors) {
    if (out.count(user_id)) continue;  // already clustered
    if (vec.distinct_accounts() < params.min_accounts) continue;
    const auto [side, confidence] = model.predict(vec);
    if (!passes_expand_gates(vec.distinct_accounts(), confidence, params)) continue;
    out[user_id] = StanceLabel{side, LabelSource::kExpanded, confidence};
  }
  return out;
}

HoldoutResult holdout_eval(const std::vector<const UserVector*>& examples,
                           const std::vector<int>& labels, const StanceTrainParams& params,
                           double split) {
  if (split <= 0 || split >= 1) throw std::invalid_argument("split must be in (0,1)");
  check_two_classes(labels);
  const std::size_t n = examples.size();
  const std::size_t n_train = static_cast<std::size_t>(std::floor(split * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) throw std::invalid_argument("holdout split leaves an empty side");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int attempt = 0; attempt < 10; ++attempt) {
    std::mt19937_64 rng(derive_seed(params.seed + static_cast<std::uint64_t>(attempt), 0xfa57'0002ULL));
    std::shuffle(order.begin(), order.end(), rng);

    std::array<std::size_t, 2> train_counts = {0, 0}, test_counts = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      auto& counts = i < n_train ? train_counts : test_counts;
      ++counts[labels[order[i]]];
    }
    if (train_counts[0] < 2 || train_counts[1] < 2 || test_counts[0] == 0 || test_counts[1] == 0)
      continue;

    std::vector<const UserVector*> train_x;
    std::vector<int> train_y;
    train_x.reserve(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
      train_x.push_back(examples[order[i]]);
      train_y.push_back(labels[order[i]]);
    }
    const StanceModel model = StanceModel::train(train_x, train_y, params);

    std::size_t correct = 0;
    for (std::size_t i = n_train; i < n; ++i) {
      if (model.predict(*examples[order[i]]).first == labels[order[i]]) ++correct;
    }
    HoldoutResult result;
    result.train_size = n_train;
    result.test_size = n - n_train;
    result.accuracy = static_cast<double>(correct) / static_cast<double>(result.test_size);
    return result;
  }
  throw std::runtime_error("holdout_eval: could not produce a split with both classes on both sides");
}

}  // namespace stance
