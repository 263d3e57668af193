#pragma once

#include <cstdint>
#include <vector>

#include "c2l/matrix.hpp"

namespace c2l {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 128;
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 1e-2;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    bool shuffle = true;
    int train_stride = 1;
    int val_stride = 1;
    bool select_best = true; // minimum validation MSE; false keeps final weights
    // Stop once the epoch training loss drops below this (0 disables).
    double stop_below_train_loss = 0.0;

    void validate() const;
};

// Adaptive-moment state, one slot per parameter tensor.
struct OptimState {
    std::vector<Mat> m;
    std::vector<Mat> v;
    std::int64_t step = 0;
};

// One decoupled-weight-decay adaptive update. The decay theta -= lr*wd*theta
// is applied to the incoming parameters first, separately from the moment
// update; moments are bias-corrected with the incremented step count.
void adamw_step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
                OptimState& state, const TrainConfig& cfg);

} // namespace c2l
