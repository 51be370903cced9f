#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <vector>

#include "vexrec/objective.hpp"
#include "vexrec/params.hpp"

namespace vexrec {

struct TrainConfig {
  Variant variant = Variant::ReVecf;
  double learning_rate = 0.01;
  double delta = 0.2;
  double lambda = 1e-3;
  std::size_t epochs = 10;
  std::uint64_t seed = 42;
  std::size_t embed = 20;     // K
  std::size_t hidden = 64;    // Z
  std::size_t word_dim = 64;  // O
  std::size_t batch_size = 1; // positives per SGD step
  InitScheme init = InitScheme::Uniform01;
  double init_scale = 0.1;

  void validate() const;
};

struct EpochReport {
  std::size_t epoch = 0;
  double objective = 0.0;
  double seconds = 0.0;
  double grad_norm_user = 0.0;
  double grad_norm_item = 0.0;
  double grad_norm_attention = 0.0;
  double grad_norm_text = 0.0;
};

struct TrainReport {
  std::vector<EpochReport> epochs;
};

// epoch,objective,seconds,grad_norm_P,grad_norm_Q,grad_norm_attn,grad_norm_gru
void write_train_report_csv(std::ostream& out, const TrainReport& report);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// What the trainer sees of the data: per-user sorted training positives plus
// the side information.
struct TrainingSet {
  std::size_t num_items = 0;
  std::vector<std::vector<std::size_t>> positives;
  ModelInputs inputs;
};

ModelDims dims_for(const TrainConfig& config, std::size_t users, std::size_t items,
                   std::size_t regions, std::size_t feature_dim, std::size_t vocab);

// Plain per-step SGD ascent on the joint objective. Every epoch visits all
// training positives in a fresh seeded order, each paired with one freshly
// sampled negative.
class Trainer {
 public:
  Trainer(TrainConfig config, const TrainingSet& data, ModelParams& params);

  EpochReport train_epoch();
  TrainReport train();

  std::size_t epochs_done() const { return epoch_; }

 private:
  TrainConfig config_;
  const TrainingSet& data_;
  ModelParams& params_;
  ModelParams grads_;
  std::mt19937_64 rng_;
  std::size_t epoch_ = 0;
};

}  // namespace vexrec
