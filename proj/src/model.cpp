#include "c2l/model.hpp"

#include <cmath>
#include <utility>

namespace c2l {

void ModelConfig::validate() const {
    std::string problems;
    auto complain = [&problems](const std::string& msg) {
        if (!problems.empty()) {
            problems += "; ";
        }
        problems += msg;
    };
    if (window_len < 1) complain("window_len must be >= 1");
    if (chunks < 1) complain("chunks must be >= 1");
    if (window_len >= 1 && chunks >= 1 && window_len % chunks != 0) {
        complain("chunks (" + std::to_string(chunks) + ") must divide window_len (" +
                 std::to_string(window_len) + ")");
    }
    if (channels < 1) complain("channels must be >= 1");
    if (channels != 3) complain("channels must be 3 (current, voltage, temperature)");
    if (hidden < 1) complain("hidden must be >= 1");
    if (harmonics < 1) complain("harmonics must be >= 1");
    if (token_len < 1) complain("token_len must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) complain("dropout must lie in [0, 1)");
    if (!(attention_temp > 0.0)) complain("attention_temp must be positive");
    if (!(layernorm_eps > 0.0)) complain("layernorm_eps must be positive");
    if (!problems.empty()) {
        throw ConfigError("invalid model config: " + problems);
    }
}

namespace {

void shape_extractor(SignalExtractorParams& p, int hidden, int theta_dim) {
    p.pool_proj_w.resize(1, hidden);
    p.pool_proj_b.resize(1, hidden);
    p.pool_score_w.resize(hidden, 1);
    p.pool_score_b.resize(1, 1);
    p.coeff_w1.resize(hidden, hidden);
    p.coeff_b1.resize(1, hidden);
    p.coeff_w2.resize(hidden, theta_dim);
    p.coeff_b2.resize(1, theta_dim);
}

void shape_gru(GruWeights& g, int input_dim, int hidden) {
    for (Mat* w : {&g.w_reset, &g.w_update, &g.w_cand}) {
        w->resize(input_dim, hidden);
    }
    for (Mat* u : {&g.u_reset, &g.u_update, &g.u_cand}) {
        u->resize(hidden, hidden);
    }
    for (Mat* b : {&g.b_in_reset, &g.b_in_update, &g.b_in_cand, &g.b_hid_reset,
                   &g.b_hid_update, &g.b_hid_cand}) {
        b->resize(1, hidden);
    }
}

} // namespace

Model build_model(const ModelConfig& cfg) {
    cfg.validate();
    Model model;
    model.config = cfg;

    shape_extractor(model.params.current, cfg.hidden, cfg.theta_dim());
    shape_extractor(model.params.voltage, cfg.hidden, cfg.theta_dim());
    shape_extractor(model.params.temperature, cfg.hidden, cfg.theta_dim());
    shape_gru(model.params.encoder_gru, cfg.channels, cfg.hidden);
    shape_gru(model.params.decoder_cell, cfg.channels, cfg.hidden);
    model.params.head.norm_gain.resize(1, cfg.hidden);
    model.params.head.norm_bias.resize(1, cfg.hidden);
    model.params.head.out_w.resize(cfg.hidden, 1);
    model.params.head.out_b.resize(1, 1);

    Rng init = Rng(cfg.seed).fork("init");
    model.params.visit([&init](const std::string&, Mat& t, TensorKind kind) {
        switch (kind) {
        case TensorKind::weight: {
            const Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(t.rows()));
            for (Index i = 0; i < t.rows(); ++i) {
                for (Index j = 0; j < t.cols(); ++j) {
                    t(i, j) = init.uniform(-bound, bound);
                }
            }
            break;
        }
        case TensorKind::bias:
            t.setZero();
            break;
        case TensorKind::gain:
            t.setOnes();
            break;
        }
    });

    model.basis = build_basis(cfg.harmonics, cfg.token_len);
    return model;
}

std::int64_t count_params(const ModelParams& params) {
    std::int64_t total = 0;
    params.visit([&total](const std::string&, const Mat& t, TensorKind) {
        total += static_cast<std::int64_t>(t.size());
    });
    return total;
}

ModelValues bind_params(const ModelParams& params, bool requires_grad) {
    ModelValues values;
    std::vector<const Mat*> src;
    params.visit([&src](const std::string&, const Mat& t, TensorKind) { src.push_back(&t); });
    std::vector<Value*> dst;
    values.visit([&dst](const std::string&, Value& v, TensorKind) { dst.push_back(&v); });
    for (std::size_t i = 0; i < src.size(); ++i) {
        *dst[i] = Value::leaf(*src[i], requires_grad);
    }
    return values;
}

std::vector<NamedTensor> collect_tensors(ModelParams& params) {
    std::vector<NamedTensor> out;
    params.visit([&out](const std::string& name, Mat& t, TensorKind) {
        out.push_back(NamedTensor{name, &t});
    });
    return out;
}

std::vector<NamedTensorView> collect_tensors(const ModelParams& params) {
    std::vector<NamedTensorView> out;
    params.visit([&out](const std::string& name, const Mat& t, TensorKind) {
        out.push_back(NamedTensorView{name, &t});
    });
    return out;
}

std::vector<NamedLeaf> collect_leaves(ModelValues& values) {
    std::vector<NamedLeaf> out;
    values.visit([&out](const std::string& name, Value& v, TensorKind) {
        out.push_back(NamedLeaf{name, &v});
    });
    return out;
}

namespace {

void record(ShapeTrace* trace, const char* name, std::initializer_list<Index> dims) {
    if (trace != nullptr) {
        trace->stages.push_back(ShapeTrace::Stage{name, std::vector<Index>(dims)});
    }
}

} // namespace

Value forward_graph(const ModelValues& values, const SeasonalityBasis& basis,
                    const ModelConfig& cfg, const Value& window, Mode mode,
                    Rng* dropout_rng, ShapeTrace* trace) {
    const Mat& w = window.val();
    if (w.rows() != cfg.window_len || w.cols() != cfg.channels) {
        throw ShapeError("forward (input): expected window " +
                         shape_str(cfg.window_len, cfg.channels) + ", got " + shape_str(w));
    }
    record(trace, "input", {w.rows(), w.cols()});
    record(trace, "chunked", {cfg.chunks, cfg.chunk_len(), cfg.channels});

    Value basis_table = Value::constant(basis.table);
    const std::array<const SignalExtractorValues*, 3> branches = {
        &values.current, &values.voltage, &values.temperature};

    // The three signal branches share one architecture, so their coefficient
    // and token shapes are forced by the config.
    for (const char* name : {"coefficients_current", "coefficients_voltage",
                             "coefficients_temperature"}) {
        record(trace, name, {cfg.chunks, cfg.theta_dim()});
    }
    for (const char* name : {"token_current", "token_voltage", "token_temperature"}) {
        record(trace, name, {cfg.chunks, cfg.token_len});
    }

    Value tokens = extract_tokens(window, branches, basis_table, cfg.chunks);
    record(trace, "token_sequence", {tokens.val().rows(), tokens.val().cols()});

    Value hidden = gru_forward(tokens, values.encoder_gru);
    record(trace, "recurrent_hidden", {hidden.val().rows(), hidden.val().cols()});

    AttentionResult attn = causal_cosine_attention_detail(hidden, cfg.attention_temp);
    record(trace, "attended", {attn.output.val().rows(), attn.output.val().cols()});
    if (trace != nullptr) {
        trace->attention = attn.weights.val();
    }

    Value context = take_context(attn.output);
    record(trace, "context", {context.val().cols()});

    Value latest = row(window, cfg.window_len - 1);
    Value state = cell_update(latest, context, values.decoder_cell);
    record(trace, "decoder_state", {state.val().cols()});

    Value estimate = soc_head(state, values.head, cfg.dropout, cfg.layernorm_eps, mode,
                              dropout_rng);
    record(trace, "estimate", {estimate.val().cols()});
    return estimate;
}

Scalar forward(const Model& model, const Mat& window, Mode mode, Rng* dropout_rng,
               ShapeTrace* trace) {
    ModelValues values = bind_params(model.params, false);
    Value window_leaf = Value::constant(window);
    Value out = forward_graph(values, model.basis, model.config, window_leaf, mode,
                              dropout_rng, trace);
    return out.val()(0, 0);
}

} // namespace c2l
