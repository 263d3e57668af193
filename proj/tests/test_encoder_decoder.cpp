#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "c2l/decoder.hpp"
#include "c2l/encoder.hpp"
#include "c2l/rng.hpp"
#include "test_support.hpp"

using namespace c2l;
using test_support::random_mat;

namespace {

GruWeights random_gru(Index in_dim, Index d, Rng& rng, Scalar scale = 1.0) {
    GruWeights g;
    g.w_reset = random_mat(in_dim, d, rng) * scale;
    g.w_update = random_mat(in_dim, d, rng) * scale;
    g.w_cand = random_mat(in_dim, d, rng) * scale;
    g.u_reset = random_mat(d, d, rng) * scale;
    g.u_update = random_mat(d, d, rng) * scale;
    g.u_cand = random_mat(d, d, rng) * scale;
    g.b_in_reset = random_mat(1, d, rng) * scale;
    g.b_in_update = random_mat(1, d, rng) * scale;
    g.b_in_cand = random_mat(1, d, rng) * scale;
    g.b_hid_reset = random_mat(1, d, rng) * scale;
    g.b_hid_update = random_mat(1, d, rng) * scale;
    g.b_hid_cand = random_mat(1, d, rng) * scale;
    return g;
}

GruWeights zero_gru(Index in_dim, Index d) {
    Rng rng(0);
    GruWeights g = random_gru(in_dim, d, rng, 0.0);
    return g;
}

GruValues bind(const GruWeights& g, bool grad = false) {
    GruValues v;
    v.w_reset = Value::leaf(g.w_reset, grad);
    v.w_update = Value::leaf(g.w_update, grad);
    v.w_cand = Value::leaf(g.w_cand, grad);
    v.u_reset = Value::leaf(g.u_reset, grad);
    v.u_update = Value::leaf(g.u_update, grad);
    v.u_cand = Value::leaf(g.u_cand, grad);
    v.b_in_reset = Value::leaf(g.b_in_reset, grad);
    v.b_in_update = Value::leaf(g.b_in_update, grad);
    v.b_in_cand = Value::leaf(g.b_in_cand, grad);
    v.b_hid_reset = Value::leaf(g.b_hid_reset, grad);
    v.b_hid_update = Value::leaf(g.b_hid_update, grad);
    v.b_hid_cand = Value::leaf(g.b_hid_cand, grad);
    return v;
}

} // namespace

TEST_CASE("gated recurrence") {
    Rng rng(4);

    SUBCASE("all-zero parameters stay at the zero fixed point") {
        GruValues g = bind(zero_gru(3, 8));
        Mat tokens = random_mat(5, 3, rng);
        Mat hidden = gru_forward(Value::constant(tokens), g).val();
        CHECK(hidden.rows() == 5);
        CHECK(hidden.cols() == 8);
        CHECK((hidden.array() == 0.0).all());
    }

    SUBCASE("output shape at width 128") {
        GruValues g = bind(random_gru(3, 128, rng, 0.1));
        Mat tokens = random_mat(5, 3, rng);
        Mat hidden = gru_forward(Value::constant(tokens), g).val();
        CHECK(hidden.rows() == 5);
        CHECK(hidden.cols() == 128);
    }

    SUBCASE("scalar hand case") {
        // one step, unit weights, zero biases, zero initial state
        GruWeights g;
        g.w_reset = g.w_update = g.w_cand = Mat::Ones(1, 1);
        g.u_reset = g.u_update = g.u_cand = Mat::Ones(1, 1);
        g.b_in_reset = g.b_in_update = g.b_in_cand = Mat::Zero(1, 1);
        g.b_hid_reset = g.b_hid_update = g.b_hid_cand = Mat::Zero(1, 1);
        Mat token = Mat::Ones(1, 1);
        Mat hidden = gru_forward(Value::constant(token), bind(g)).val();
        const Scalar gate = 1.0 / (1.0 + std::exp(-1.0));
        const Scalar cand = std::tanh(1.0);
        CHECK(hidden(0, 0) == doctest::Approx(gate * cand).epsilon(1e-12));
        CHECK(hidden(0, 0) == doctest::Approx(0.5568).epsilon(1e-4));
    }

    SUBCASE("hidden-side candidate bias is gated by reset") {
        // With zero input weights and zero hidden state, the candidate sees
        // tanh(b_in_cand + reset * b_hid_cand) where reset = sigmoid(b._resets).
        GruWeights g = zero_gru(2, 1);
        g.b_hid_cand = Mat::Constant(1, 1, 0.8);
        g.b_in_reset = Mat::Constant(1, 1, -1.2);
        Mat token = Mat::Zero(1, 2);
        Mat hidden = gru_forward(Value::constant(token), bind(g)).val();
        const Scalar reset = 1.0 / (1.0 + std::exp(1.2));
        const Scalar update = 0.5;
        const Scalar cand = std::tanh(reset * 0.8);
        CHECK(hidden(0, 0) == doctest::Approx(update * cand).epsilon(1e-12));
    }

    SUBCASE("finite for violent inputs") {
        GruValues g = bind(random_gru(3, 16, rng, 3.0));
        Mat tokens = random_mat(7, 3, rng, -1e6, 1e6);
        Mat hidden = gru_forward(Value::constant(tokens), g).val();
        CHECK(hidden.allFinite());
        CHECK(hidden.cwiseAbs().maxCoeff() <= 1.0);
    }

    SUBCASE("empty sequence") {
        GruValues g = bind(zero_gru(3, 4));
        Mat tokens(0, 3);
        CHECK_THROWS_AS(gru_forward(Value::constant(tokens), g), ShapeError);
    }
}

TEST_CASE("causal cosine attention") {
    Rng rng(5);

    SUBCASE("first output row equals the first hidden row") {
        Mat h = random_mat(6, 8, rng);
        Mat g = causal_cosine_attention(Value::constant(h), 1.0).val();
        CHECK(g.row(0) == h.row(0));
    }

    SUBCASE("identical rows average to themselves") {
        Mat h = random_mat(1, 8, rng).replicate(5, 1);
        Mat g = causal_cosine_attention(Value::constant(h), 1.0).val();
        for (Index i = 0; i < 5; ++i) {
            CHECK((g.row(i) - h.row(0)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    SUBCASE("hand case with orthogonal rows") {
        Mat h = Mat::Zero(2, 2);
        h(0, 0) = 2.0;
        h(1, 1) = 3.0;
        AttentionResult res = causal_cosine_attention_detail(Value::constant(h), 1.0);
        const Scalar w_self = std::exp(1.0) / (1.0 + std::exp(1.0));
        const Scalar w_other = 1.0 - w_self;
        CHECK(res.weights.val()(1, 0) == doctest::Approx(w_other).epsilon(1e-12));
        CHECK(res.weights.val()(1, 1) == doctest::Approx(w_self).epsilon(1e-12));
        CHECK(res.output.val()(1, 0) == doctest::Approx(w_other * 2.0).epsilon(1e-12));
        CHECK(res.output.val()(1, 1) == doctest::Approx(w_self * 3.0).epsilon(1e-12));
    }

    SUBCASE("weights form causal distributions") {
        Mat h = random_mat(9, 5, rng);
        Mat w = causal_cosine_attention_detail(Value::constant(h), 0.7).weights.val();
        for (Index i = 0; i < 9; ++i) {
            Scalar sum = 0.0;
            for (Index j = 0; j <= i; ++j) {
                CHECK(w(i, j) >= 0.0);
                sum += w(i, j);
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
            for (Index j = i + 1; j < 9; ++j) {
                CHECK(w(i, j) == 0.0);
            }
        }
    }

    SUBCASE("cosine similarities stay within the unit bound") {
        Mat h = random_mat(12, 6, rng, -5.0, 5.0);
        Mat unit = h;
        for (Index i = 0; i < h.rows(); ++i) {
            unit.row(i) /= std::max(h.row(i).norm(), 1e-12);
        }
        Mat sim = unit * unit.transpose();
        CHECK(sim.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
    }

    SUBCASE("causality: perturbing row j leaves earlier outputs bit-identical") {
        for (int trial = 0; trial < 20; ++trial) {
            Mat h = random_mat(7, 6, rng);
            Mat g = causal_cosine_attention(Value::constant(h), 1.0).val();
            const Index j = 1 + static_cast<Index>(rng.below(6));
            Mat h2 = h;
            h2.row(j).array() += rng.uniform(0.1, 2.0);
            Mat g2 = causal_cosine_attention(Value::constant(h2), 1.0).val();
            for (Index i = 0; i < j; ++i) {
                CHECK(g.row(i) == g2.row(i)); // bitwise
            }
        }
    }

    SUBCASE("power-of-two row scaling keeps weights bit-identical") {
        Mat h = random_mat(6, 5, rng);
        AttentionResult base = causal_cosine_attention_detail(Value::constant(h), 1.0);
        for (Scalar c : {0.5, 2.0, 8.0, 1024.0}) {
            AttentionResult scaled =
                causal_cosine_attention_detail(Value::constant(Mat(h * c)), 1.0);
            CHECK(scaled.weights.val() == base.weights.val());
            CHECK(scaled.output.val() == Mat(base.output.val() * c));
        }
    }

    SUBCASE("zero rows are handled by the norm floor") {
        Mat h = Mat::Zero(3, 4);
        h(2, 1) = 1.0;
        Mat g = causal_cosine_attention(Value::constant(h), 1.0).val();
        CHECK(g.allFinite());
    }

    SUBCASE("temperature validation") {
        Mat h = random_mat(3, 3, rng);
        CHECK_THROWS_AS(causal_cosine_attention(Value::constant(h), 0.0), ParamError);
    }
}

TEST_CASE("context selection") {
    Rng rng(6);
    Mat g = random_mat(5, 7, rng);
    CHECK(take_context(Value::constant(g)).val() == g.row(4));

    Mat single = random_mat(1, 7, rng);
    CHECK(take_context(Value::constant(single)).val() == single);

    Mat extended(6, 7);
    extended << g, random_mat(1, 7, rng);
    CHECK(take_context(Value::constant(extended)).val() == extended.row(5));
    CHECK(take_context(Value::constant(extended)).val() != g.row(4));
}

TEST_CASE("decoder cell update") {
    Rng rng(7);

    SUBCASE("zero weights halve the context") {
        GruValues cell = bind(zero_gru(3, 6));
        Mat x = random_mat(1, 3, rng);
        Mat g = random_mat(1, 6, rng);
        Mat h = cell_update(Value::constant(x), Value::constant(g), cell).val();
        CHECK((h - 0.5 * g).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("shapes at full width") {
        GruValues cell = bind(random_gru(3, 128, rng, 0.05));
        Mat x = random_mat(1, 3, rng);
        Mat g = random_mat(1, 128, rng);
        Mat h = cell_update(Value::constant(x), Value::constant(g), cell).val();
        CHECK(h.rows() == 1);
        CHECK(h.cols() == 128);
    }

    SUBCASE("scalar hand case seeded with the context") {
        GruWeights g;
        g.w_reset = g.w_update = g.w_cand = Mat::Ones(1, 1);
        g.u_reset = g.u_update = g.u_cand = Mat::Ones(1, 1);
        g.b_in_reset = g.b_in_update = g.b_in_cand = Mat::Zero(1, 1);
        g.b_hid_reset = g.b_hid_update = g.b_hid_cand = Mat::Zero(1, 1);
        Mat x = Mat::Ones(1, 1);
        Mat ctx = Mat::Constant(1, 1, 0.5);
        Mat h = cell_update(Value::constant(x), Value::constant(ctx), bind(g)).val();
        const Scalar reset = 1.0 / (1.0 + std::exp(-1.5));
        const Scalar update = reset;
        const Scalar cand = std::tanh(1.0 + reset * 0.5);
        const Scalar expect = (1.0 - update) * 0.5 + update * cand;
        CHECK(h(0, 0) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("soc head") {
    Rng rng(8);

    SUBCASE("zero output layer pins the estimate at one half") {
        HeadValues head;
        head.norm_gain = Value::constant(Mat::Ones(1, 6));
        head.norm_bias = Value::constant(Mat::Zero(1, 6));
        head.out_w = Value::constant(Mat::Zero(6, 1));
        head.out_b = Value::constant(Mat::Zero(1, 1));
        Mat state = random_mat(1, 6, rng);
        Value soc = soc_head(Value::constant(state), head, 0.0, 1e-5, Mode::eval, nullptr);
        CHECK(soc.val()(0, 0) == 0.5);
    }

    SUBCASE("hand case through the normalization") {
        HeadValues head;
        head.norm_gain = Value::constant(Mat::Ones(1, 2));
        head.norm_bias = Value::constant(Mat::Zero(1, 2));
        Mat w(2, 1);
        w << 1.0, 0.0;
        head.out_w = Value::constant(w);
        head.out_b = Value::constant(Mat::Zero(1, 1));
        Mat state(1, 2);
        state << 1.0, -1.0;
        Value soc = soc_head(Value::constant(state), head, 0.0, 1e-12, Mode::eval, nullptr);
        CHECK(soc.val()(0, 0) ==
              doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-9));
    }

    SUBCASE("open interval for any parameterization") {
        for (int trial = 0; trial < 50; ++trial) {
            const Index d = 2 + static_cast<Index>(rng.below(12));
            HeadValues head;
            head.norm_gain = Value::constant(random_mat(1, d, rng, -20.0, 20.0));
            head.norm_bias = Value::constant(random_mat(1, d, rng, -20.0, 20.0));
            head.out_w = Value::constant(random_mat(d, 1, rng, -50.0, 50.0));
            head.out_b = Value::constant(random_mat(1, 1, rng, -100.0, 100.0));
            Mat state = random_mat(1, d, rng, -10.0, 10.0);
            const Scalar soc =
                soc_head(Value::constant(state), head, 0.0, 1e-5, Mode::eval, nullptr)
                    .val()(0, 0);
            CHECK(soc > 0.0);
            CHECK(soc < 1.0);
        }
    }

    SUBCASE("eval calls are bit-identical and train mode needs an rng") {
        HeadValues head;
        head.norm_gain = Value::constant(Mat::Ones(1, 4));
        head.norm_bias = Value::constant(Mat::Zero(1, 4));
        head.out_w = Value::constant(random_mat(4, 1, rng));
        head.out_b = Value::constant(Mat::Zero(1, 1));
        Mat state = random_mat(1, 4, rng);
        const Scalar a =
            soc_head(Value::constant(state), head, 0.2, 1e-5, Mode::eval, nullptr).val()(0, 0);
        const Scalar b =
            soc_head(Value::constant(state), head, 0.2, 1e-5, Mode::eval, nullptr).val()(0, 0);
        CHECK(a == b);
        CHECK_THROWS_AS(
            soc_head(Value::constant(state), head, 0.2, 1e-5, Mode::train, nullptr),
            ParamError);
    }

    SUBCASE("estimate responds to the latest measurement") {
        // gradient of the estimate with respect to x_t is nonzero for random
        // parameters: the decoder is not a function of the context alone
        GruValues cell = bind(random_gru(3, 8, rng, 0.4));
        HeadValues head;
        head.norm_gain = Value::constant(Mat::Ones(1, 8));
        head.norm_bias = Value::constant(Mat::Zero(1, 8));
        head.out_w = Value::constant(random_mat(8, 1, rng));
        head.out_b = Value::constant(Mat::Zero(1, 1));
        Value latest = Value::leaf(random_mat(1, 3, rng), true);
        Value context = Value::constant(random_mat(1, 8, rng));
        Value soc = soc_head(cell_update(latest, context, cell), head, 0.0, 1e-5,
                             Mode::eval, nullptr);
        backward(soc);
        CHECK(latest.grad().cwiseAbs().maxCoeff() > 0.0);
    }
}
