// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "reentra/corpus.hpp"
#include "reentra/embed.hpp"
#include "reentra/errors.hpp"
#include "reentra/metrics.hpp"
#include "reentra/preproc.hpp"
#include "reentra/seqmodel.hpp"

namespace reentra {

struct Hyperparams {
    double lr = 0.002;
    double dropout = 0.2;
    std::size_t batch_size = 64;
    std::size_t embed_dim = 300;
    std::size_t seq_len = 100;
    std::size_t hidden = 64;
    std::size_t epochs = 50;
    std::size_t embed_epochs = 30;
    std::uint64_t seed = 42;

    void validate() const {
        if (!(lr > 0.0)) throw ArgumentError("lr must be positive");
        if (dropout < 0.0 || dropout >= 1.0) throw ArgumentError("dropout must be in [0, 1)");
        if (batch_size < 1) throw ArgumentError("batch size must be at least 1");
        if (embed_dim < 1 || seq_len < 1 || hidden < 1)
            throw ArgumentError("model dimensions must be at least 1");
    }

    /// Attention width tracks the hidden size.
    ModelDims dims() const { return ModelDims{embed_dim, seq_len, hidden, hidden}; }

    EmbeddingConfig embedding_config() const {
        EmbeddingConfig cfg;
        cfg.dim = embed_dim;
        cfg.epochs = embed_epochs;
        return cfg;
    }
};

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
    ModelParams m, v;  // moment accumulators, shaped like the parameters
    std::size_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState like(const ModelParams& p) {
        AdamState s;
        s.m = zeros_like(p);
        s.v = zeros_like(p);
        return s;
    }
};

/// One Adam update with bias correction, in place. lr = 0 leaves the
/// parameters untouched (the moments and step counter still advance).
inline void adam_step(ModelParams& params, ModelParams& grads, AdamState& state, double lr) {
    std::vector<Vec*> p_blocks, g_blocks, m_blocks, v_blocks;
    params.for_each_param([&](Vec& v) { p_blocks.push_back(&v); });
    grads.for_each_param([&](Vec& v) { g_blocks.push_back(&v); });
    state.m.for_each_param([&](Vec& v) { m_blocks.push_back(&v); });
    state.v.for_each_param([&](Vec& v) { v_blocks.push_back(&v); });
    if (p_blocks.size() != g_blocks.size()) throw ContractViolation("adam_step: block mismatch");

    ++state.t;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));

    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
        Vec& p = *p_blocks[b];
        const Vec& g = *g_blocks[b];
        Vec& m = *m_blocks[b];
        Vec& v = *v_blocks[b];
        if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size())
            throw ContractViolation("adam_step: shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainRun {
    std::vector<double> history;  // per-epoch mean loss, length = epochs
    ModelParams final_params;
};

/// Trains a fresh model on already-encoded sequences against a frozen
/// embedding table. Epoch flow: seeded shuffle, fixed-order mini-batches
/// (last one may be short), mean gradient, one Adam step per batch.
/// Bitwise deterministic for a fixed (dataset, hp).
inline TrainRun train(const std::vector<EncodedSequence>& dataset, const Hyperparams& hp,
                      const EmbeddingTable& embedding) {
    hp.validate();
    if (dataset.empty()) throw ArgumentError("train: dataset is empty");
    if (embedding.dim != hp.embed_dim)
        throw ContractViolation("train: embedding dim does not match hyperparams");

    TrainRun run;
    run.final_params = init_params(hp.dims(), hp.seed);
    ModelParams grads = zeros_like(run.final_params);
    AdamState adam = AdamState::like(run.final_params);

    const std::size_t n = dataset.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(hp.seed, "train-shuffle"));

    std::vector<EncodedSequence> batch;
    std::size_t batch_counter = 0;
    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += hp.batch_size) {
            const std::size_t stop = std::min(n, start + hp.batch_size);
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(dataset[order[i]]);
            const double loss = batch_loss_and_gradients(
                run.final_params, embedding, batch, hp.dropout, /*training=*/true,
                derive_seed(hp.seed, "batch", batch_counter++), grads);
            if (!std::isfinite(loss)) throw ContractViolation("train: loss diverged");
            epoch_loss += loss * static_cast<double>(stop - start);
            adam_step(run.final_params, grads, adam, hp.lr);
        }
        run.history.push_back(epoch_loss / static_cast<double>(n));
    }
    return run;
}

/// Per-epoch training log, one JSON object per line.
inline std::string train_log_to_jsonl(const std::vector<double>& history) {
    std::string out;
    for (std::size_t e = 0; e < history.size(); ++e) {
        nlohmann::json j;
        j["epoch"] = e;
        j["mean_loss"] = history[e];
        out += j.dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation helpers
// ---------------------------------------------------------------------------

/// Scores every sequence and assembles the standard report. The decision
/// rule is argmax with ties to class 0, i.e. positive iff P(1) > 0.5.
inline EvalReport evaluate_model(const ModelParams& params, const EmbeddingTable& embedding,
                                 const std::vector<EncodedSequence>& data,
                                 const std::vector<std::string>& ids) {
    if (data.size() != ids.size()) throw ContractViolation("evaluate_model: id count mismatch");
    std::vector<Prediction> preds;
    preds.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Vec probs = predict_probs(params, embedding, data[i]);
        Prediction p;
        p.id = ids[i];
        p.score = probs[1];
        p.label = data[i].label;
        p.predicted = predicted_label(probs);
        preds.push_back(std::move(p));
    }
    return make_report(std::move(preds));
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

/// What one CV fold actually saw; handed to the observer so tests can
/// assert that no test-fold id ever reaches the training side.
struct FoldTrace {
    std::size_t fold = 0;
    std::vector<std::string> train_ids, test_ids;
    std::size_t vocab_size = 0;  // vocabulary built from the training side only
};

using FoldObserver = std::function<void(const FoldTrace&)>;

/// Stratified k-fold cross-validation over preprocessed snippets. Each
/// fold rebuilds the vocabulary and embedding table from its own training
/// split, so the held-out fold influences nothing it is scored with.
inline std::vector<EvalReport> cross_validate(const std::vector<SnippetRecord>& records,
                                              const Hyperparams& hp, std::size_t k,
                                              const FoldObserver& observer = {}) {
    hp.validate();
    std::vector<std::pair<std::string, int>> labeled;
    labeled.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        labeled.emplace_back(records[i].uid(i), records[i].label);
    const FoldSplit split = stratified_kfold(labeled, k, hp.seed);

    std::vector<EvalReport> reports;
    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (split.assignments.at(labeled[i].first) == fold)
                test_idx.push_back(i);
            else
                train_idx.push_back(i);
        }

        std::vector<std::vector<std::string>> train_corpus;
        train_corpus.reserve(train_idx.size());
        for (std::size_t i : train_idx) train_corpus.push_back(records[i].tokens);

        const Vocabulary vocab = build_vocab(train_corpus);
        const EmbeddingTable embedding =
            train_embeddings(train_corpus, vocab, hp.embedding_config(),
                             derive_seed(hp.seed, "fold-embed", fold));

        std::vector<EncodedSequence> train_data;
        train_data.reserve(train_idx.size());
        for (std::size_t i : train_idx)
            train_data.push_back(
                encode_sequence(records[i].tokens, vocab, hp.seq_len, records[i].label));

        Hyperparams fold_hp = hp;
        fold_hp.seed = derive_seed(hp.seed, "fold-train", fold);
        const TrainRun run = train(train_data, fold_hp, embedding);

        std::vector<EncodedSequence> test_data;
        std::vector<std::string> test_ids;
        for (std::size_t i : test_idx) {
            test_data.push_back(
                encode_sequence(records[i].tokens, vocab, hp.seq_len, records[i].label));
            test_ids.push_back(labeled[i].first);
        }
        reports.push_back(evaluate_model(run.final_params, embedding, test_data, test_ids));

        if (observer) {
            FoldTrace trace;
            trace.fold = fold;
            for (std::size_t i : train_idx) trace.train_ids.push_back(labeled[i].first);
            trace.test_ids = test_ids;
            trace.vocab_size = vocab.size();
            observer(trace);
        }
    }
    return reports;
}

inline double mean_fold_f1(const std::vector<EvalReport>& reports) {
    double s = 0.0;
    for (const auto& r : reports) s += r.scalars.f1;
    return reports.empty() ? 0.0 : s / static_cast<double>(reports.size());
}

inline double mean_fold_fpr(const std::vector<EvalReport>& reports) {
    double s = 0.0;
    for (const auto& r : reports) s += r.scalars.fpr;
    return reports.empty() ? 0.0 : s / static_cast<double>(reports.size());
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

inline const std::vector<double>& default_lr_grid() {
    static const std::vector<double> g = {0.0001, 0.0005, 0.001, 0.002, 0.005};
    return g;
}

inline const std::vector<double>& default_dropout_grid() {
    static const std::vector<double> g = {0.2, 0.4, 0.6, 0.8};
    return g;
}

struct GridPoint {
    double lr = 0.0;
    double dropout = 0.0;
    double mean_f1 = 0.0;
    double mean_fpr = 0.0;
};

struct GridResult {
    Hyperparams best;
    std::vector<GridPoint> table;  // one row per evaluated (lr, dropout)
};

/// Exhaustive (lr, dropout) sweep, each point scored by k-fold
/// cross-validation. Best point: highest mean F1, ties broken by lower
/// mean FPR, then lower lr, then lower dropout.
inline GridResult grid_search(const std::vector<SnippetRecord>& records,
                              const Hyperparams& base_hp, const std::vector<double>& lr_grid,
                              const std::vector<double>& dropout_grid, std::size_t k) {
    if (lr_grid.empty() || dropout_grid.empty())
        throw ArgumentError("grid_search: grids must be non-empty");

    GridResult result;
    result.best = base_hp;
    bool have_best = false;
    GridPoint best_pt;
    auto better_than = [](const GridPoint& a, const GridPoint& b) {
        if (a.mean_f1 != b.mean_f1) return a.mean_f1 > b.mean_f1;
        if (a.mean_fpr != b.mean_fpr) return a.mean_fpr < b.mean_fpr;
        if (a.lr != b.lr) return a.lr < b.lr;
        return a.dropout < b.dropout;
    };
    for (double lr : lr_grid) {
        for (double dropout : dropout_grid) {
            Hyperparams hp = base_hp;
            hp.lr = lr;
            hp.dropout = dropout;
            const auto reports = cross_validate(records, hp, k);
            GridPoint pt;
            pt.lr = lr;
            pt.dropout = dropout;
            pt.mean_f1 = mean_fold_f1(reports);
            pt.mean_fpr = mean_fold_fpr(reports);
            result.table.push_back(pt);
            if (!have_best || better_than(pt, best_pt)) {
                result.best = hp;
                best_pt = pt;
                have_best = true;
            }
        }
    }
    return result;
}

inline std::string grid_table_to_csv(const std::vector<GridPoint>& table) {
    std::string out = "lr,dropout,mean_f1,mean_fpr\n";
    for (const auto& p : table) {
        out += fmt_double(p.lr);
        out += ',';
        out += fmt_double(p.dropout);
        out += ',';
        out += fmt_double(p.mean_f1);
        out += ',';
        out += fmt_double(p.mean_fpr);
        out += '\n';
    }
    return out;
}

}  // namespace reentra
