// Mini-batch training with RMSprop and the moving-partition evaluation
// driver.
#pragma once

#include "dtcn/metrics.hpp"
#include "dtcn/model.hpp"
#include "dtcn/optimizer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dtcn {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 32;
    double lambda_emb = 0.1;
    double clip_norm = 5.0;  // <= 0 disables clipping
    int early_stop_patience = 10;
    bool restore_best = true;
    std::uint64_t seed = 0;  // shuffling and dropout
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean train loss per epoch
    int epochs_run = 0;
    double best_loss = 0.0;
};

// Minimizes mean over each batch of (pred - s)^2 + lambda_emb * embedding
// loss of the target pair. Target order is reshuffled per epoch; contexts
// are built once (they depend on the stream only, not on parameters).
TrainResult train(DtcnModel& model, const UserPostSequence& seq,
                  const std::vector<std::size_t>& targets,
                  const std::optional<ContextSpec>& ntc_spec,
                  const std::optional<ContextSpec>& ptc_spec, RmspropState& optimizer,
                  const TrainConfig& config);

struct Prediction {
    std::string post_id;
    double predicted = 0.0;
    double truth = 0.0;
};

// Eval-mode forward pass per target, order preserved. Contexts may reach
// back into earlier (training-period) records.
std::vector<Prediction> predict(const DtcnModel& model, const UserPostSequence& seq,
                                const std::vector<std::size_t>& targets,
                                const std::optional<ContextSpec>& ntc_spec,
                                const std::optional<ContextSpec>& ptc_spec);

struct ProtocolConfig {
    int parts = 14;
    int window = 10;
    TrainConfig train;
    ModelConfig model;
    RmspropState optimizer;
    std::uint64_t model_seed = 1;
};

// Trains a fresh model per round on the round's train split and evaluates on
// its test split. A round with constant truth gets an undefined SRC and is
// excluded from the SRC aggregate.
EvaluationReport evaluate_rounds(const UserPostSequence& seq,
                                 const std::optional<ContextSpec>& ntc_spec,
                                 const std::optional<ContextSpec>& ptc_spec,
                                 const ProtocolConfig& config);

}  // namespace dtcn
