#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dwn/augment.hpp"
#include "dwn/har_dataset.hpp"
#include "dwn/metrics.hpp"
#include "dwn/model.hpp"
#include "dwn/optimizer.hpp"

namespace dwn {

struct TrainConfig {
    uint32_t batch_size = 100;
    double lr = 0.01;
    double lr_decay = 0.1;
    uint32_t lr_decay_epochs = 14;
    uint32_t epochs = 32;
    AdamParams adam;
    uint64_t seed = 0;
    uint32_t threads = 1;  // 0 = hardware concurrency
    uint32_t thermometer_bits = 20;
    AugmentConfig augment;
    ModelConfig model;
    EfdOptions efd;

    void validate() const;
};

// lr * lr_decay^floor(epoch / lr_decay_epochs)
double lr_at_epoch(const TrainConfig& cfg, uint32_t epoch);

struct EpochRecord {
    uint32_t epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    std::vector<double> batch_losses;
    bool has_eval = false;
    Metrics eval;
    double seconds = 0.0;
};

struct TrainResult {
    DwnModel model;
    std::vector<EpochRecord> log;
};

// Fits distributive thermometer thresholds on the raw training windows,
// pooling every timestep of every sample per channel.
ThermometerEncoder fit_encoder(const SensorDataset& ds, uint32_t bits_per_value);

// Runs epochs x batches of augment -> encode -> hard forward -> cross-entropy
// -> EFD backward -> Adam. Shuffles per epoch, keeps the final partial batch,
// never stops early. Deterministic for fixed (seed, threads). When eval_set
// is non-null each epoch records Metrics on it (hard forward, un-augmented).
TrainResult train(const SensorDataset& train_set, const TrainConfig& cfg,
                  const SensorDataset* eval_set = nullptr, std::ostream* progress = nullptr);

Metrics evaluate(const DwnModel& model, const SensorDataset& ds);

}  // namespace dwn
