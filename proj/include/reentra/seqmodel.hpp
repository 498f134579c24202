// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reentra/embed.hpp"
#include "reentra/errors.hpp"
#include "reentra/linalg.hpp"
#include "reentra/rng.hpp"

namespace reentra {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// One LSTM direction. Every gate weight is H x (H + E) and multiplies
/// z_t = [h_{t-1} ; x_t].
struct LstmParams {
    Matrix W_f, W_i, W_o, W_c;
    Vec b_f, b_i, b_o, b_c;

    std::size_t hidden() const { return W_f.rows; }
    std::size_t joint() const { return W_f.cols; }  // H + E

    template <typename F>
    void for_each(F&& f) {
        f(W_f.a); f(W_i.a); f(W_o.a); f(W_c.a);
        f(b_f); f(b_i); f(b_o); f(b_c);
    }
};

/// Attention scorer: mu_t = tanh(W h_t + b), score_t = mu_t . u.
struct AttentionParams {
    Matrix W;  // A x S where S is the state size fed in (2H for the BLSTM)
    Vec b, u;  // A

    template <typename F>
    void for_each(F&& f) {
        f(W.a); f(b); f(u);
    }
};

/// Two-logit softmax head over the attention-pooled state.
struct ClassifierParams {
    Matrix W;  // 2 x S
    Vec b;     // 2

    template <typename F>
    void for_each(F&& f) {
        f(W.a); f(b);
    }
};

struct ModelDims {
    std::size_t embed_dim = 300;
    std::size_t seq_len = 100;
    std::size_t hidden = 64;
    std::size_t attn_dim = 64;
};

struct ModelParams {
    ModelDims dims;
    LstmParams forward, backward;
    AttentionParams attention;
    ClassifierParams classifier;

    /// Visits every parameter block in a fixed order; optimizer state and
    /// serialization both key off this order.
    template <typename F>
    void for_each_param(F&& f) {
        forward.for_each(f);
        backward.for_each(f);
        attention.for_each(f);
        classifier.for_each(f);
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for_each_param([&](Vec& v) { n += v.size(); });
        return n;
    }
};

/// Glorot-uniform weights, zero biases. The draw order (forward gates
/// f,i,o,c; backward gates; attention W,u; classifier W) is part of the
/// model's determinism contract.
inline ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
    if (dims.embed_dim == 0 || dims.seq_len == 0 || dims.hidden == 0 || dims.attn_dim == 0)
        throw ArgumentError("model dimensions must be positive");
    const std::size_t E = dims.embed_dim, H = dims.hidden, A = dims.attn_dim;
    ModelParams p;
    p.dims = dims;

    Rng rng(derive_seed(seed, "init-params"));
    auto glorot = [&](Matrix& m, std::size_t r, std::size_t c, std::size_t fan_in,
                      std::size_t fan_out) {
        m = Matrix(r, c);
        const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& w : m.a) w = rng.next_double(-lim, lim);
    };

    for (LstmParams* dir : {&p.forward, &p.backward}) {
        glorot(dir->W_f, H, H + E, H + E, H);
        glorot(dir->W_i, H, H + E, H + E, H);
        glorot(dir->W_o, H, H + E, H + E, H);
        glorot(dir->W_c, H, H + E, H + E, H);
        dir->b_f.assign(H, 0.0);
        dir->b_i.assign(H, 0.0);
        dir->b_o.assign(H, 0.0);
        dir->b_c.assign(H, 0.0);
    }

    glorot(p.attention.W, A, 2 * H, 2 * H, A);
    p.attention.b.assign(A, 0.0);
    p.attention.u.assign(A, 0.0);
    {
        const double lim = std::sqrt(6.0 / static_cast<double>(A + 1));
        for (double& w : p.attention.u) w = rng.next_double(-lim, lim);
    }

    glorot(p.classifier.W, 2, 2 * H, 2 * H, 2);
    p.classifier.b.assign(2, 0.0);
    return p;
}

/// Same shapes as `like`, all zeros; the gradient accumulator.
inline ModelParams zeros_like(const ModelParams& like) {
    ModelParams g = like;
    g.for_each_param([](Vec& v) { std::fill(v.begin(), v.end(), 0.0); });
    return g;
}

// ---------------------------------------------------------------------------
// Forward pieces
// ---------------------------------------------------------------------------

/// In-place softmax with max subtraction.
inline void softmax(Vec& v) {
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - m);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

struct LstmStepDetail {
    Vec f, i, o, g, C, h;
};

/// One LSTM cell update, returning every intermediate. The training loop
/// uses the fused path below; this form exists for direct inspection.
inline LstmStepDetail lstm_step(const LstmParams& p, const Vec& x, const Vec& h_prev,
                                const Vec& C_prev) {
    const std::size_t H = p.hidden();
    if (h_prev.size() != H || C_prev.size() != H || x.size() + H != p.joint())
        throw ContractViolation("lstm_step: shape mismatch");
    Vec z(p.joint());
    std::copy(h_prev.begin(), h_prev.end(), z.begin());
    std::copy(x.begin(), x.end(), z.begin() + static_cast<std::ptrdiff_t>(H));

    LstmStepDetail d;
    d.f.resize(H); d.i.resize(H); d.o.resize(H); d.g.resize(H);
    d.C.resize(H); d.h.resize(H);
    for (std::size_t r = 0; r < H; ++r) {
        d.f[r] = sigmoid(dot(p.W_f.row(r), z.data(), z.size()) + p.b_f[r]);
        d.i[r] = sigmoid(dot(p.W_i.row(r), z.data(), z.size()) + p.b_i[r]);
        d.o[r] = sigmoid(dot(p.W_o.row(r), z.data(), z.size()) + p.b_o[r]);
        d.g[r] = std::tanh(dot(p.W_c.row(r), z.data(), z.size()) + p.b_c[r]);
        d.C[r] = d.f[r] * C_prev[r] + d.i[r] * d.g[r];
        d.h[r] = d.o[r] * std::tanh(d.C[r]);
    }
    return d;
}

struct AttentionResult {
    Vec weights;  // one per attended position
    Vec pooled;   // weighted state sum
};

/// Soft attention over the first `length` rows of `states`.
inline AttentionResult attention_pool(const AttentionParams& p, const Matrix& states,
                                      std::size_t length) {
    if (length == 0 || length > states.rows)
        throw ContractViolation("attention_pool: bad length");
    if (p.W.cols != states.cols) throw ContractViolation("attention_pool: state size mismatch");
    const std::size_t A = p.W.rows, S = states.cols;

    AttentionResult r;
    r.weights.resize(length);
    Vec mu(A);
    for (std::size_t t = 0; t < length; ++t) {
        matvec(p.W, states.row(t), mu.data());
        for (std::size_t a = 0; a < A; ++a) mu[a] = std::tanh(mu[a] + p.b[a]);
        r.weights[t] = dot(mu.data(), p.u.data(), A);
    }
    softmax(r.weights);
    r.pooled.assign(S, 0.0);
    for (std::size_t t = 0; t < length; ++t) {
        const double* row = states.row(t);
        for (std::size_t s = 0; s < S; ++s) r.pooled[s] += r.weights[t] * row[s];
    }
    return r;
}

/// Class probabilities for a pooled state.
inline Vec classify(const ClassifierParams& p, const Vec& pooled) {
    if (p.W.cols != pooled.size()) throw ContractViolation("classify: state size mismatch");
    Vec logits(p.W.rows);
    matvec(p.W, pooled.data(), logits.data());
    for (std::size_t r = 0; r < logits.size(); ++r) logits[r] += p.b[r];
    softmax(logits);
    return logits;
}

/// Argmax with ties to class 0: positive only when strictly more probable.
inline int predicted_label(const Vec& probs) { return probs[1] > probs[0] ? 1 : 0; }

/// Cross entropy against a hard 0/1 label.
inline double cross_entropy(const Vec& probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
        throw ContractViolation("cross_entropy: label out of range");
    return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
}

// ---------------------------------------------------------------------------
// Full forward with cache
// ---------------------------------------------------------------------------

struct DropoutSpec {
    double rate = 0.0;
    bool training = false;
    std::uint64_t seed = 0;

    bool active() const { return training && rate > 0.0; }
};

namespace detail {

struct DirCache {
    Matrix z;                         // T x (H+E), z_t = [h_prev ; x_t]
    Matrix f, i, o, g, C, tanhC;      // T x H each
};

struct ForwardCache {
    std::size_t T = 0;
    Matrix x;          // T x E, embedded input after input dropout
    DirCache fwd, bwd;
    Matrix h;          // L x 2H, concatenated states (zero beyond T)
    Matrix h_drop;     // L x 2H, what attention actually sees
    Matrix mask_h;     // T x 2H, scaled dropout mask on states
    Vec alpha;         // T attention weights
    Matrix mu;         // T x A
    Vec pooled;        // 2H
    Vec probs;         // 2
};

inline void run_direction(const LstmParams& p, const Matrix& x, std::size_t T, bool reversed,
                          DirCache& cache, Matrix& h_out, std::size_t col_offset) {
    const std::size_t H = p.hidden(), E = x.cols, J = H + E;
    cache.z = Matrix(T, J);
    cache.f = Matrix(T, H);
    cache.i = Matrix(T, H);
    cache.o = Matrix(T, H);
    cache.g = Matrix(T, H);
    cache.C = Matrix(T, H);
    cache.tanhC = Matrix(T, H);

    Vec h_prev(H, 0.0), C_prev(H, 0.0);
    for (std::size_t s = 0; s < T; ++s) {
        const std::size_t t = reversed ? T - 1 - s : s;
        double* z = cache.z.row(t);
        std::copy(h_prev.begin(), h_prev.end(), z);
        std::copy(x.row(t), x.row(t) + E, z + H);

        double* f = cache.f.row(t);
        double* i = cache.i.row(t);
        double* o = cache.o.row(t);
        double* g = cache.g.row(t);
        double* C = cache.C.row(t);
        double* tc = cache.tanhC.row(t);
        for (std::size_t r = 0; r < H; ++r) {
            f[r] = sigmoid(dot(p.W_f.row(r), z, J) + p.b_f[r]);
            i[r] = sigmoid(dot(p.W_i.row(r), z, J) + p.b_i[r]);
            o[r] = sigmoid(dot(p.W_o.row(r), z, J) + p.b_o[r]);
            g[r] = std::tanh(dot(p.W_c.row(r), z, J) + p.b_c[r]);
            C[r] = f[r] * C_prev[r] + i[r] * g[r];
            tc[r] = std::tanh(C[r]);
            const double h = o[r] * tc[r];
            h_out.at(t, col_offset + r) = h;
            h_prev[r] = h;
            C_prev[r] = C[r];
        }
    }
}

/// Embeds, runs both LSTM chains over the true length, applies attention
/// and the classifier head. Dropout (when active) hits the embedded input
/// and the concatenated states; masks derive from spec.seed alone.
inline void model_forward(const ModelParams& p, const EmbeddingTable& emb,
                          const EncodedSequence& ex, const DropoutSpec& dropout,
                          ForwardCache& cache) {
    const std::size_t E = p.dims.embed_dim, H = p.dims.hidden, L = p.dims.seq_len;
    if (emb.dim != E) throw ContractViolation("model_forward: embedding dim mismatch");
    if (ex.indices.size() != L) throw ContractViolation("model_forward: sequence length mismatch");
    if (ex.true_length == 0 || ex.true_length > L)
        throw ContractViolation("model_forward: bad true length");
    const std::size_t T = ex.true_length;
    cache.T = T;

    const double keep = 1.0 - dropout.rate;
    Rng drop_rng(dropout.seed);

    cache.x = Matrix(T, E);
    for (std::size_t t = 0; t < T; ++t) {
        const double* row = emb.row(ex.indices[t]);
        double* x = cache.x.row(t);
        std::copy(row, row + E, x);
        if (dropout.active())
            for (std::size_t e = 0; e < E; ++e)
                x[e] = drop_rng.next_double() < dropout.rate ? 0.0 : x[e] / keep;
    }

    cache.mask_h = Matrix(T, 2 * H);
    if (dropout.active()) {
        for (double& m : cache.mask_h.a) m = drop_rng.next_double() < dropout.rate ? 0.0 : 1.0 / keep;
    } else {
        cache.mask_h.fill(1.0);
    }

    cache.h = Matrix(L, 2 * H);
    run_direction(p.forward, cache.x, T, /*reversed=*/false, cache.fwd, cache.h, 0);
    run_direction(p.backward, cache.x, T, /*reversed=*/true, cache.bwd, cache.h, H);

    cache.h_drop = cache.h;
    for (std::size_t t = 0; t < T; ++t) {
        double* hd = cache.h_drop.row(t);
        const double* m = cache.mask_h.row(t);
        for (std::size_t s = 0; s < 2 * H; ++s) hd[s] *= m[s];
    }

    // Attention (inlined so mu is kept for the backward pass).
    const std::size_t A = p.attention.W.rows;
    cache.mu = Matrix(T, A);
    cache.alpha.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        double* mu = cache.mu.row(t);
        matvec(p.attention.W, cache.h_drop.row(t), mu);
        for (std::size_t a = 0; a < A; ++a) mu[a] = std::tanh(mu[a] + p.attention.b[a]);
        cache.alpha[t] = dot(mu, p.attention.u.data(), A);
    }
    softmax(cache.alpha);

    cache.pooled.assign(2 * H, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        const double* hd = cache.h_drop.row(t);
        for (std::size_t s = 0; s < 2 * H; ++s) cache.pooled[s] += cache.alpha[t] * hd[s];
    }

    cache.probs = classify(p.classifier, cache.pooled);
}

}  // namespace detail

/// Concatenated [h_fwd ; h_bwd] states for an already-embedded input
/// (one row per position). Rows at and beyond true_length stay zero.
inline Matrix blstm_forward(const ModelParams& p, const Matrix& input, std::size_t true_length) {
    if (input.cols != p.dims.embed_dim) throw ContractViolation("blstm_forward: input width");
    if (true_length == 0 || true_length > input.rows)
        throw ContractViolation("blstm_forward: bad true length");
    Matrix x(true_length, input.cols);
    std::copy(input.a.begin(),
              input.a.begin() + static_cast<std::ptrdiff_t>(true_length * input.cols),
              x.a.begin());
    Matrix h(input.rows, 2 * p.dims.hidden);
    detail::DirCache scratch;
    detail::run_direction(p.forward, x, true_length, false, scratch, h, 0);
    detail::run_direction(p.backward, x, true_length, true, scratch, h, p.dims.hidden);
    return h;
}

/// Probability that the snippet is vulnerable (class 1). Inference path:
/// dropout off.
inline Vec predict_probs(const ModelParams& p, const EmbeddingTable& emb,
                         const EncodedSequence& ex) {
    detail::ForwardCache cache;
    detail::model_forward(p, emb, ex, DropoutSpec{}, cache);
    return cache.probs;
}

/// Forward-only loss with the exact dropout masks `spec` implies; pairs
/// with loss_and_gradients for finite-difference verification.
inline double loss_only(const ModelParams& p, const EmbeddingTable& emb,
                        const EncodedSequence& ex, const DropoutSpec& dropout) {
    detail::ForwardCache cache;
    detail::model_forward(p, emb, ex, dropout, cache);
    return cross_entropy(cache.probs, ex.label);
}

/// Cross-entropy loss of one example and exact gradients of every model
/// parameter, accumulated (+=) into `grads`. The embedding is frozen, so
/// nothing propagates into the token vectors. Returns the loss; class
/// probabilities land in *probs_out when given.
inline double loss_and_gradients(ModelParams& p, const EmbeddingTable& emb,
                                 const EncodedSequence& ex, const DropoutSpec& dropout,
                                 ModelParams& grads, Vec* probs_out = nullptr) {
    detail::ForwardCache c;
    detail::model_forward(p, emb, ex, dropout, c);
    const double loss = cross_entropy(c.probs, ex.label);
    if (probs_out) *probs_out = c.probs;

    const std::size_t H = p.dims.hidden;
    const std::size_t A = p.attention.W.rows, T = c.T, S = 2 * H;

    // --- classifier head ---
    Vec dlogits = c.probs;
    dlogits[static_cast<std::size_t>(ex.label)] -= 1.0;
    outer_accum(grads.classifier.W, dlogits.data(), c.pooled.data());
    for (std::size_t r = 0; r < 2; ++r) grads.classifier.b[r] += dlogits[r];
    Vec d_pooled(S, 0.0);
    matvec_t_accum(p.classifier.W, dlogits.data(), d_pooled.data(), S);

    // --- attention ---
    Matrix dh(T, S);  // gradient on the post-dropout states
    Vec dalpha(T);
    for (std::size_t t = 0; t < T; ++t) {
        dalpha[t] = dot(d_pooled.data(), c.h_drop.row(t), S);
        double* dht = dh.row(t);
        for (std::size_t s = 0; s < S; ++s) dht[s] = c.alpha[t] * d_pooled[s];
    }
    double alpha_dot = 0.0;
    for (std::size_t t = 0; t < T; ++t) alpha_dot += c.alpha[t] * dalpha[t];
    Vec da(A);
    for (std::size_t t = 0; t < T; ++t) {
        const double dscore = c.alpha[t] * (dalpha[t] - alpha_dot);
        const double* mu = c.mu.row(t);
        for (std::size_t a = 0; a < A; ++a) {
            grads.attention.u[a] += dscore * mu[a];
            da[a] = dscore * p.attention.u[a] * (1.0 - mu[a] * mu[a]);
        }
        outer_accum(grads.attention.W, da.data(), c.h_drop.row(t));
        for (std::size_t a = 0; a < A; ++a) grads.attention.b[a] += da[a];
        matvec_t_accum(p.attention.W, da.data(), dh.row(t), S);
    }

    // Undo the state dropout scaling before entering the chains.
    for (std::size_t t = 0; t < T; ++t) {
        double* dht = dh.row(t);
        const double* m = c.mask_h.row(t);
        for (std::size_t s = 0; s < S; ++s) dht[s] *= m[s];
    }

    // --- BLSTM backward, one direction at a time ---
    auto backward_dir = [&](const LstmParams& dir, LstmParams& gdir, const detail::DirCache& dc,
                            bool reversed, std::size_t col_offset) {
        Vec dh_carry(H, 0.0), dC_carry(H, 0.0);
        Vec dzf(H), dzi(H), dzo(H), dzg(H), dstep(H);
        for (std::size_t s = T; s-- > 0;) {
            const std::size_t t = reversed ? T - 1 - s : s;
            const std::size_t t_prev = reversed ? t + 1 : t - 1;  // chain predecessor
            const bool has_prev = s > 0;

            const double* f = dc.f.row(t);
            const double* i = dc.i.row(t);
            const double* o = dc.o.row(t);
            const double* g = dc.g.row(t);
            const double* tc = dc.tanhC.row(t);
            const double* C_prev = has_prev ? dc.C.row(t_prev) : nullptr;
            const double* z = dc.z.row(t);

            for (std::size_t r = 0; r < H; ++r) {
                const double dh_total = dh.at(t, col_offset + r) + dh_carry[r];
                const double do_r = dh_total * tc[r];
                const double dC = dC_carry[r] + dh_total * o[r] * (1.0 - tc[r] * tc[r]);
                const double df = dC * (has_prev ? C_prev[r] : 0.0);
                const double di = dC * g[r];
                const double dg = dC * i[r];
                dC_carry[r] = dC * f[r];
                dzf[r] = df * f[r] * (1.0 - f[r]);
                dzi[r] = di * i[r] * (1.0 - i[r]);
                dzo[r] = do_r * o[r] * (1.0 - o[r]);
                dzg[r] = dg * (1.0 - g[r] * g[r]);
            }

            outer_accum(gdir.W_f, dzf.data(), z);
            outer_accum(gdir.W_i, dzi.data(), z);
            outer_accum(gdir.W_o, dzo.data(), z);
            outer_accum(gdir.W_c, dzg.data(), z);
            for (std::size_t r = 0; r < H; ++r) {
                gdir.b_f[r] += dzf[r];
                gdir.b_i[r] += dzi[r];
                gdir.b_o[r] += dzo[r];
                gdir.b_c[r] += dzg[r];
            }

            // Only the h-part of dz matters: the x-part would feed the
            // frozen embedding, so the transpose product stops at column H.
            std::fill(dstep.begin(), dstep.end(), 0.0);
            matvec_t_accum(dir.W_f, dzf.data(), dstep.data(), H);
            matvec_t_accum(dir.W_i, dzi.data(), dstep.data(), H);
            matvec_t_accum(dir.W_o, dzo.data(), dstep.data(), H);
            matvec_t_accum(dir.W_c, dzg.data(), dstep.data(), H);
            dh_carry = dstep;
        }
    };

    backward_dir(p.forward, grads.forward, c.fwd, false, 0);
    backward_dir(p.backward, grads.backward, c.bwd, true, H);
    return loss;
}

/// Content fingerprint of an encoded example (padding excluded). Dropout
/// masks key off this, so identical examples always draw identical masks.
inline std::uint64_t sequence_hash(const EncodedSequence& ex) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    mix(ex.true_length);
    mix(static_cast<std::uint64_t>(ex.label));
    for (std::size_t i = 0; i < ex.true_length; ++i) mix(ex.indices[i]);
    return h;
}

/// Mean cross-entropy over a batch and the exact gradients of that mean,
/// written (not accumulated) into `grads`. Each example's dropout mask
/// derives from (seed, its own content), which makes the result invariant
/// under duplicating batch elements.
inline double batch_loss_and_gradients(ModelParams& p, const EmbeddingTable& emb,
                                       const std::vector<EncodedSequence>& batch,
                                       double dropout_rate, bool training, std::uint64_t seed,
                                       ModelParams& grads) {
    if (batch.empty()) throw ArgumentError("batch_loss_and_gradients: batch is empty");
    grads.for_each_param([](Vec& v) { std::fill(v.begin(), v.end(), 0.0); });
    double loss_sum = 0.0;
    for (const auto& ex : batch) {
        DropoutSpec drop;
        drop.rate = dropout_rate;
        drop.training = training;
        drop.seed = derive_seed(seed, "mask", sequence_hash(ex));
        loss_sum += loss_and_gradients(p, emb, ex, drop, grads);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    grads.for_each_param([&](Vec& v) {
        for (double& x : v) x *= inv;
    });
    return loss_sum * inv;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ValidationError("checkpoint: " + what + " is not a matrix");
    Matrix m(j.size(), j[0].size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (!j[r].is_array() || j[r].size() != m.cols)
            throw ValidationError("checkpoint: ragged rows in " + what);
        for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline nlohmann::json lstm_to_json(const LstmParams& p) {
    nlohmann::json j;
    j["W_f"] = matrix_to_json(p.W_f);
    j["W_i"] = matrix_to_json(p.W_i);
    j["W_o"] = matrix_to_json(p.W_o);
    j["W_c"] = matrix_to_json(p.W_c);
    j["b_f"] = p.b_f;
    j["b_i"] = p.b_i;
    j["b_o"] = p.b_o;
    j["b_c"] = p.b_c;
    return j;
}

inline LstmParams lstm_from_json(const nlohmann::json& j, const std::string& what) {
    LstmParams p;
    p.W_f = matrix_from_json(j.at("W_f"), what + ".W_f");
    p.W_i = matrix_from_json(j.at("W_i"), what + ".W_i");
    p.W_o = matrix_from_json(j.at("W_o"), what + ".W_o");
    p.W_c = matrix_from_json(j.at("W_c"), what + ".W_c");
    p.b_f = j.at("b_f").get<Vec>();
    p.b_i = j.at("b_i").get<Vec>();
    p.b_o = j.at("b_o").get<Vec>();
    p.b_c = j.at("b_c").get<Vec>();
    return p;
}

}  // namespace detail

/// Self-contained trained model: dimensions, token vectors and every
/// network parameter. One file is enough to run detection.
struct Checkpoint {
    ModelParams params;
    EmbeddingTable embedding;
    nlohmann::json hyperparams;  // resolved training configuration

    std::string to_json() const {
        nlohmann::json j;
        j["version"] = 1;
        j["hyperparams"] = hyperparams.is_null() ? nlohmann::json::object() : hyperparams;
        j["hyperparams"]["embed_dim"] = params.dims.embed_dim;
        j["hyperparams"]["seq_len"] = params.dims.seq_len;
        j["hyperparams"]["hidden"] = params.dims.hidden;
        j["hyperparams"]["attn_dim"] = params.dims.attn_dim;
        j["embedding"] = nlohmann::json::parse(embedding.to_json());
        j["params"]["forward"] = detail::lstm_to_json(params.forward);
        j["params"]["backward"] = detail::lstm_to_json(params.backward);
        j["params"]["attention"]["W"] = detail::matrix_to_json(params.attention.W);
        j["params"]["attention"]["b"] = params.attention.b;
        j["params"]["attention"]["u"] = params.attention.u;
        j["params"]["classifier"]["W"] = detail::matrix_to_json(params.classifier.W);
        j["params"]["classifier"]["b"] = params.classifier.b;
        return j.dump(2);
    }

    static Checkpoint from_json(const std::string& text, const std::string& origin = {}) {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ParseError(origin + ": checkpoint is not valid JSON");
        if (j.value("version", 0) != 1)
            throw ValidationError(origin + ": unsupported checkpoint version");
        try {
            Checkpoint ck;
            ck.hyperparams = j.at("hyperparams");
            ck.params.dims.embed_dim = ck.hyperparams.at("embed_dim").get<std::size_t>();
            ck.params.dims.seq_len = ck.hyperparams.at("seq_len").get<std::size_t>();
            ck.params.dims.hidden = ck.hyperparams.at("hidden").get<std::size_t>();
            ck.params.dims.attn_dim = ck.hyperparams.at("attn_dim").get<std::size_t>();
            ck.embedding = EmbeddingTable::from_json(j.at("embedding").dump(), origin);
            const auto& pj = j.at("params");
            ck.params.forward = detail::lstm_from_json(pj.at("forward"), "forward");
            ck.params.backward = detail::lstm_from_json(pj.at("backward"), "backward");
            ck.params.attention.W = detail::matrix_from_json(pj.at("attention").at("W"), "attention.W");
            ck.params.attention.b = pj.at("attention").at("b").get<Vec>();
            ck.params.attention.u = pj.at("attention").at("u").get<Vec>();
            ck.params.classifier.W =
                detail::matrix_from_json(pj.at("classifier").at("W"), "classifier.W");
            ck.params.classifier.b = pj.at("classifier").at("b").get<Vec>();
            ck.validate(origin);
            return ck;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(origin + ": checkpoint missing field (" + e.what() + ")");
        }
    }

    void validate(const std::string& origin = {}) const {
        const auto& d = params.dims;
        auto fail = [&](const std::string& why) {
            throw ValidationError(origin + ": inconsistent checkpoint: " + why);
        };
        if (embedding.dim != d.embed_dim) fail("embedding dim");
        if (params.forward.W_f.rows != d.hidden || params.forward.W_f.cols != d.hidden + d.embed_dim)
            fail("forward gate shape");
        if (params.backward.W_f.rows != d.hidden ||
            params.backward.W_f.cols != d.hidden + d.embed_dim)
            fail("backward gate shape");
        if (params.attention.W.rows != d.attn_dim || params.attention.W.cols != 2 * d.hidden)
            fail("attention shape");
        if (params.attention.b.size() != d.attn_dim || params.attention.u.size() != d.attn_dim)
            fail("attention vector size");
        if (params.classifier.W.rows != 2 || params.classifier.W.cols != 2 * d.hidden)
            fail("classifier shape");
        if (params.classifier.b.size() != 2) fail("classifier bias size");
    }
};

}  // namespace reentra
