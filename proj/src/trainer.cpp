#include "dwn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

#include "dwn/error.hpp"
#include "dwn/rng.hpp"

namespace dwn {

void TrainConfig::validate() const {
    if (batch_size == 0) throw config_error("batch_size must be positive");
    if (lr <= 0.0) throw config_error("lr must be positive");
    if (lr_decay <= 0.0) throw config_error("lr_decay must be positive");
    if (lr_decay_epochs == 0) throw config_error("lr_decay_epochs must be positive");
    if (thermometer_bits == 0) throw config_error("thermometer_bits must be positive");
    augment.validate();
}

double lr_at_epoch(const TrainConfig& cfg, uint32_t epoch) {
    return cfg.lr * std::pow(cfg.lr_decay, double(epoch / cfg.lr_decay_epochs));
}

ThermometerEncoder fit_encoder(const SensorDataset& ds, uint32_t bits_per_value) {
    if (ds.size() == 0) throw data_error("fit_encoder: dataset is empty");
    std::vector<std::vector<double>> pooled(ds.channels);
    const size_t per_channel = ds.size() * ds.steps;
    for (uint32_t c = 0; c < ds.channels; ++c) pooled[c].reserve(per_channel);
    for (size_t i = 0; i < ds.size(); ++i) {
        const float* w = ds.window_data(i);
        for (uint32_t c = 0; c < ds.channels; ++c)
            for (uint32_t t = 0; t < ds.steps; ++t)
                pooled[c].push_back(w[size_t(c) * ds.steps + t]);
    }
    return ThermometerEncoder::fit_distributive(pooled, bits_per_value);
}

Metrics evaluate(const DwnModel& model, const SensorDataset& ds) {
    if (ds.size() == 0) throw data_error("evaluate: dataset is empty");
    if (ds.num_classes != model.num_classes)
        throw shape_error("evaluate: dataset has " + std::to_string(ds.num_classes) +
                          " classes, model has " + std::to_string(model.num_classes));

    const Routing routing = compute_routing(model);
    std::vector<uint32_t> truth(ds.size()), pred(ds.size());
    EncodedSample enc;
    ForwardTrace trace;
    std::vector<double> scores;
    for (size_t i = 0; i < ds.size(); ++i) {
        model.encoder.encode(ds.window(i), enc);
        forward_hard(model, routing, enc, trace, scores);
        uint32_t best = 0;
        for (uint32_t c = 1; c < model.num_classes; ++c)
            if (scores[c] > scores[best]) best = c;  // ties -> lowest index
        truth[i] = ds.class_index(i);
        pred[i] = best;
    }
    return compute_metrics(truth, pred, model.num_classes);
}

namespace {

struct WorkerScratch {
    Window window;
    EncodedSample encoded;
    ForwardTrace trace;
    std::vector<double> scores;
    Gradients grads;
    double loss_sum = 0.0;
};

// Processes batch positions [begin, end) of `order`, accumulating gradients
// in sample-index order into scratch.grads.
void run_range(const DwnModel& model, const EfdContext& ctx, const SensorDataset& ds,
               const TrainConfig& cfg, const std::vector<size_t>& order, size_t begin,
               size_t end, uint32_t epoch, double inv_batch, WorkerScratch& scratch) {
    for (size_t pos = begin; pos < end; ++pos) {
        const size_t idx = order[pos];
        scratch.window = ds.window(idx);
        std::mt19937_64 rng = sample_stream(cfg.augment, epoch, idx);
        apply_all(scratch.window, cfg.augment, rng);
        model.encoder.encode(scratch.window, scratch.encoded);
        forward_hard(model, ctx.routing, scratch.encoded, scratch.trace, scratch.scores);

        auto [loss, upstream] = cross_entropy_grad(scratch.scores, ds.class_index(idx));
        scratch.loss_sum += loss;
        for (double& u : upstream) u *= inv_batch;
        backward_efd(model, ctx, scratch.trace, upstream, cfg.efd, scratch.grads);
    }
}

}  // namespace

TrainResult train(const SensorDataset& train_set, const TrainConfig& cfg,
                  const SensorDataset* eval_set, std::ostream* progress) {
    cfg.validate();
    if (train_set.size() == 0) throw data_error("train: dataset is empty");

    TrainResult result;

    const ThermometerEncoder encoder = fit_encoder(train_set, cfg.thermometer_bits);
    std::mt19937_64 init_rng = make_rng(mix_seed(cfg.seed, 1));
    ModelConfig mc = cfg.model;
    if (mc.num_classes != train_set.num_classes)
        throw config_error("model num_classes " + std::to_string(mc.num_classes) +
                           " != dataset classes " + std::to_string(train_set.num_classes));
    result.model = init_model(mc, encoder, train_set.steps, init_rng);
    DwnModel& model = result.model;

    uint32_t n_threads = cfg.threads == 0
                             ? std::max(1u, std::thread::hardware_concurrency())
                             : cfg.threads;

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), size_t(0));

    std::vector<AdamState> adam_states;
    for (const LutLayer& l : model.layers) {
        adam_states.emplace_back(l.entry_weights.size());
        adam_states.emplace_back(l.mapping_logits.size());
    }

    Gradients batch_grads = Gradients::zeros_like(model);
    std::vector<WorkerScratch> scratch(n_threads);
    for (WorkerScratch& s : scratch) s.grads = Gradients::zeros_like(model);

    uint64_t step = 0;
    for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = lr_at_epoch(cfg, epoch);

        std::mt19937_64 shuffle_rng = make_rng(mix_seed(cfg.seed, 2, epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        EpochRecord record;
        record.epoch = epoch;
        record.lr = lr;

        for (size_t batch_begin = 0; batch_begin < order.size(); batch_begin += cfg.batch_size) {
            const size_t batch_end = std::min(batch_begin + cfg.batch_size, order.size());
            const size_t batch_n = batch_end - batch_begin;
            const double inv_batch = 1.0 / double(batch_n);

            const EfdContext ctx(model);

            const uint32_t workers = uint32_t(std::min<size_t>(n_threads, batch_n));
            double loss_sum = 0.0;
            if (workers <= 1) {
                scratch[0].grads.clear();
                scratch[0].loss_sum = 0.0;
                run_range(model, ctx, train_set, cfg, order, batch_begin, batch_end, epoch,
                          inv_batch, scratch[0]);
                loss_sum = scratch[0].loss_sum;
                std::swap(batch_grads, scratch[0].grads);
            } else {
                std::vector<std::thread> pool;
                for (uint32_t w = 0; w < workers; ++w) {
                    const size_t begin = batch_begin + batch_n * w / workers;
                    const size_t end = batch_begin + batch_n * (w + 1) / workers;
                    scratch[w].grads.clear();
                    scratch[w].loss_sum = 0.0;
                    pool.emplace_back([&, w, begin, end] {
                        run_range(model, ctx, train_set, cfg, order, begin, end, epoch,
                                  inv_batch, scratch[w]);
                    });
                }
                for (std::thread& t : pool) t.join();
                // Merge in worker order: workers own contiguous sample ranges,
                // so the reduction order is fixed for a given thread count.
                batch_grads.clear();
                for (uint32_t w = 0; w < workers; ++w) {
                    batch_grads.add_scaled(scratch[w].grads, 1.0);
                    loss_sum += scratch[w].loss_sum;
                }
            }

            ++step;
            for (size_t li = 0; li < model.layers.size(); ++li) {
                adam_step(model.layers[li].entry_weights, batch_grads.layers[li].entries,
                          adam_states[2 * li], step, lr, cfg.adam);
                adam_step(model.layers[li].mapping_logits, batch_grads.layers[li].logits,
                          adam_states[2 * li + 1], step, lr, cfg.adam);
            }
            record.batch_losses.push_back(loss_sum / double(batch_n));
        }

        record.mean_loss =
            record.batch_losses.empty()
                ? 0.0
                : std::accumulate(record.batch_losses.begin(), record.batch_losses.end(), 0.0) /
                      double(record.batch_losses.size());

        if (eval_set) {
            record.has_eval = true;
            record.eval = evaluate(model, *eval_set);
        }
        record.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        if (progress) {
            (*progress) << "epoch=" << record.epoch << " lr=" << record.lr
                        << " loss=" << record.mean_loss;
            if (record.has_eval)
                (*progress) << " acc=" << record.eval.accuracy
                            << " macro_f1=" << record.eval.macro_f1;
            (*progress) << " seconds=" << record.seconds << std::endl;
        }
        result.log.push_back(std::move(record));
    }
    return result;
}

}  // namespace dwn
