#include "vexrec/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

namespace vexrec {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be a finite non-negative number");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in [0,1]");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (embed == 0 || hidden == 0 || word_dim == 0) {
    throw std::invalid_argument("embedding, hidden and word dimensions must be positive");
  }
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (init == InitScheme::ScaledUniform && !(init_scale > 0.0)) {
    throw std::invalid_argument("init_scale must be positive");
  }
}

void write_train_report_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,objective,seconds,grad_norm_P,grad_norm_Q,grad_norm_attn,grad_norm_gru\n";
  const auto old = out.precision(17);
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << e.objective << ',' << e.seconds << ',' << e.grad_norm_user << ','
        << e.grad_norm_item << ',' << e.grad_norm_attention << ',' << e.grad_norm_text << '\n';
  }
  out.precision(old);
}

ModelDims dims_for(const TrainConfig& config, std::size_t users, std::size_t items,
                   std::size_t regions, std::size_t feature_dim, std::size_t vocab) {
  ModelDims d;
  d.users = users;
  d.items = items;
  d.embed = config.embed;
  d.feature_dim = feature_dim;
  d.regions = regions;
  d.hidden = config.hidden;
  d.vocab = vocab;
  d.word_dim = config.word_dim;
  return d;
}

Trainer::Trainer(TrainConfig config, const TrainingSet& data, ModelParams& params)
    : config_(config),
      data_(data),
      params_(params),
      grads_(ModelParams::zeros(params.dims)),
      rng_(config.seed ^ 0x5851F42D4C957F2DULL) {
  config_.validate();
  if (data_.positives.size() != params_.dims.users) {
    throw std::invalid_argument("training set user count does not match the model");
  }
}

EpochReport Trainer::train_epoch() {
  const auto start = std::chrono::steady_clock::now();
  ++epoch_;

  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t u = 0; u < data_.positives.size(); ++u) {
    for (std::size_t i : data_.positives[u]) order.emplace_back(u, i);
  }
  std::shuffle(order.begin(), order.end(), rng_);

  EpochReport report;
  report.epoch = epoch_;
  double data_objective = 0.0;
  std::size_t steps = 0;
  std::vector<LabeledPair> batch;
  batch.reserve(2 * config_.batch_size);

  auto step = [&]() {
    grads_.set_zero();
    const ObjectiveBreakdown obj = config_.batch_size == 1
        ? joint_objective(params_, data_.inputs, batch, config_.delta, config_.lambda, &grads_)
        : joint_objective_parallel(params_, data_.inputs, batch, config_.delta, config_.lambda,
                                   &grads_);
    if (!std::isfinite(obj.total)) {
      throw TrainingDiverged("objective became non-finite in epoch " + std::to_string(epoch_));
    }
    data_objective += obj.total + obj.regularizer;

    double user = 0.0, item = 0.0, attn = 0.0, text = 0.0;
    grads_.for_each_tensor([&](std::string_view, ParamGroup g, std::span<const double> v) {
      const double s = squared_norm(v);
      switch (g) {
        case ParamGroup::User: user += s; break;
        case ParamGroup::Item: item += s; break;
        case ParamGroup::Attention: attn += s; break;
        case ParamGroup::Gru:
        case ParamGroup::ContextGate:
        case ParamGroup::Output: text += s; break;
        case ParamGroup::Projection: break;
      }
    });
    report.grad_norm_user += std::sqrt(user);
    report.grad_norm_item += std::sqrt(item);
    report.grad_norm_attention += std::sqrt(attn);
    report.grad_norm_text += std::sqrt(text);

    add_scaled(params_, grads_, config_.learning_rate);
    ++steps;
    batch.clear();
  };

  for (const auto& [user, item] : order) {
    const std::size_t negative =
        sample_negatives(data_.positives[user], data_.num_items, 1, rng_).front();
    batch.push_back({user, item, 1});
    batch.push_back({user, negative, 0});
    if (batch.size() >= 2 * config_.batch_size) step();
  }
  if (!batch.empty()) step();

  if (!params_.all_finite()) {
    throw TrainingDiverged("parameters became non-finite in epoch " + std::to_string(epoch_));
  }
  report.objective = data_objective - config_.lambda * params_.squared_norm();
  if (steps > 0) {
    const double n = static_cast<double>(steps);
    report.grad_norm_user /= n;
    report.grad_norm_item /= n;
    report.grad_norm_attention /= n;
    report.grad_norm_text /= n;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TrainReport Trainer::train() {
  TrainReport report;
  for (std::size_t e = 0; e < config_.epochs; ++e) report.epochs.push_back(train_epoch());
  return report;
}

}  // namespace vexrec
