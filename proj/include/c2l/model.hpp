#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "c2l/decoder.hpp"
#include "c2l/encoder.hpp"
#include "c2l/features.hpp"

namespace c2l {

// Architecture hyperparameters. The defaults are the reference
// configuration: a 200-sample window split into 5 chunks, hidden width 128,
// 10 harmonics, scalar tokens.
struct ModelConfig {
    int window_len = 200;
    int chunks = 5;
    int channels = 3;
    int hidden = 128;
    int harmonics = 10;
    int token_len = 1;
    double dropout = 0.2;
    double attention_temp = 1.0;
    double layernorm_eps = 1e-5;
    std::uint64_t seed = 1;

    int chunk_len() const { return window_len / chunks; }
    int theta_dim() const { return 1 + 2 * harmonics; }
    int token_rows() const { return chunks * token_len; }

    // Throws ConfigError listing every violated constraint.
    void validate() const;
};

template <class T>
struct ModelParamsT {
    SignalExtractorParamsT<T> current, voltage, temperature;
    GruWeightsT<T> encoder_gru;
    GruWeightsT<T> decoder_cell;
    HeadParamsT<T> head;

    template <class Self, class F>
    static void visit_impl(Self& self, F&& f) {
        self.current.visit("current", f);
        self.voltage.visit("voltage", f);
        self.temperature.visit("temperature", f);
        self.encoder_gru.visit("encoder_gru", f);
        self.decoder_cell.visit("decoder_cell", f);
        self.head.visit("head", f);
    }
    template <class F>
    void visit(F&& f) {
        visit_impl(*this, f);
    }
    template <class F>
    void visit(F&& f) const {
        visit_impl(*this, f);
    }
};

using ModelParams = ModelParamsT<Mat>;
using ModelValues = ModelParamsT<Value>;

struct Model {
    ModelConfig config;
    ModelParams params;
    SeasonalityBasis basis; // constant, excluded from the learnable count
};

// Seeded initialization: weights uniform in +/- 1/sqrt(fan_in) where fan_in
// is the tensor's input width, biases zero, norm gains one. The same seed
// always yields bit-identical parameters.
Model build_model(const ModelConfig& cfg);

// Number of learnable scalars (the basis is not learnable).
std::int64_t count_params(const ModelParams& params);

// Wraps every learnable tensor into a graph leaf. The returned structure
// shares no storage with `params`; leaf order matches collect_tensors.
ModelValues bind_params(const ModelParams& params, bool requires_grad);

struct NamedTensor {
    std::string name;
    Mat* tensor;
};
struct NamedTensorView {
    std::string name;
    const Mat* tensor;
};
struct NamedLeaf {
    std::string name;
    Value* leaf;
};

std::vector<NamedTensor> collect_tensors(ModelParams& params);
std::vector<NamedTensorView> collect_tensors(const ModelParams& params);
std::vector<NamedLeaf> collect_leaves(ModelValues& values);

// Per-stage shape record of one forward pass, plus the attention weights.
struct ShapeTrace {
    struct Stage {
        std::string name;
        std::vector<Index> dims;
    };
    std::vector<Stage> stages;
    Mat attention;
};

// Full forward pass over an already-bound parameter set. `window` must be a
// scaled (window_len x channels) matrix; the newest sample is the last row
// and also feeds the decoder cell. Returns the 1 x 1 estimate node.
Value forward_graph(const ModelValues& values, const SeasonalityBasis& basis,
                    const ModelConfig& cfg, const Value& window, Mode mode,
                    Rng* dropout_rng, ShapeTrace* trace = nullptr);

// Convenience eval/train forward from raw storage; returns the estimate.
Scalar forward(const Model& model, const Mat& window, Mode mode = Mode::eval,
               Rng* dropout_rng = nullptr, ShapeTrace* trace = nullptr);

} // namespace c2l
