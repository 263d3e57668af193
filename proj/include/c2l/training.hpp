#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "c2l/data.hpp"
#include "c2l/metrics.hpp"
#include "c2l/model.hpp"
#include "c2l/optim.hpp"

namespace c2l {

// Owns the scaled cycles plus the window views into them. Move-only so the
// samples' record pointers stay valid.
struct WindowDataset {
    std::vector<DriveCycleRecord> cycles;
    std::vector<WindowSample> samples;
    Index window_len = 0;

    WindowDataset() = default;
    WindowDataset(const WindowDataset&) = delete;
    WindowDataset& operator=(const WindowDataset&) = delete;
    WindowDataset(WindowDataset&&) = default;
    WindowDataset& operator=(WindowDataset&&) = default;

    std::size_t size() const { return samples.size(); }
};

WindowDataset build_window_dataset(std::vector<DriveCycleRecord> scaled_cycles,
                                   Index window_len, Index stride);

struct TrainHistory {
    std::vector<Scalar> train_loss;
    std::vector<Scalar> val_loss;
    std::vector<Scalar> epoch_seconds;
    int best_epoch = -1; // index of the minimum recorded validation loss
};

struct TrainResult {
    Model model; // best-validation weights (or final, per config)
    TrainHistory history;
};

// Epoch loop with seeded shuffling, train-mode forwards, reverse-mode
// gradients and decoupled-weight-decay updates; per-epoch validation runs in
// eval mode. A non-finite loss aborts with a diagnostic dump. Deterministic
// for a fixed model seed and config.
TrainResult train(Model model, const WindowDataset& train_set, const WindowDataset& val_set,
                  const TrainConfig& cfg, std::ostream* log = nullptr);

// Eval-mode MSE of the current parameters over a window set.
Scalar dataset_mse(const Model& model, const WindowDataset& set);

struct SeedRun {
    std::uint64_t seed = 0;
    TrainResult result;
    MetricsReport report;
};

struct MultiSeedResult {
    std::vector<SeedRun> runs;
    MetricsReport averaged; // arithmetic mean per (cycle, metric) across seeds
};

using SeedLogFactory = std::function<std::ostream*(std::uint64_t seed)>;

// Independent trainings, one per seed in cfg.seeds (each seed drives init,
// shuffling and dropout streams). `jobs` > 1 trains seeds concurrently;
// results are merged in seed order either way.
MultiSeedResult run_seeds(const ModelConfig& base_config, const TrainConfig& cfg,
                          const WindowDataset& train_set, const WindowDataset& val_set,
                          std::span<const DriveCycleRecord> eval_cycles,
                          const ScalerParams& scaler, int jobs = 1,
                          const SeedLogFactory& log_factory = {});

} // namespace c2l
