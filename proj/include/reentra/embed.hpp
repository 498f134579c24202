// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reentra/errors.hpp"
#include "reentra/linalg.hpp"
#include "reentra/rng.hpp"

namespace reentra {

inline constexpr std::size_t kPadIndex = 0;
inline constexpr std::size_t kUnkIndex = 1;
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnkToken = "<unk>";

/// Token table with two pinned entries: <pad> at 0 and <unk> at 1. The rest
/// is ordered by corpus frequency (descending), ties broken lexically, so a
/// given corpus always produces the same table.
class Vocabulary {
  public:
    Vocabulary() {
        add(kPadToken);
        add(kUnkToken);
    }

    std::size_t add(const std::string& token) {
        auto [it, inserted] = index_.try_emplace(token, tokens_.size());
        if (inserted) tokens_.push_back(token);
        return it->second;
    }

    std::size_t size() const { return tokens_.size(); }

    /// Index of `token`, or the <unk> slot if unseen.
    std::size_t lookup(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? kUnkIndex : it->second;
    }

    bool contains(const std::string& token) const { return index_.count(token) != 0; }
    const std::string& token_at(std::size_t i) const { return tokens_.at(i); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// Rebuilds a vocabulary from a saved token table (e.g. a checkpoint),
    /// preserving the stored order.
    static Vocabulary from_tokens(const std::vector<std::string>& toks) {
        if (toks.size() < 2 || toks[0] != kPadToken || toks[1] != kUnkToken)
            throw ValidationError("token table must begin with " + std::string(kPadToken) +
                                  " and " + std::string(kUnkToken));
        Vocabulary v;
        for (std::size_t i = 2; i < toks.size(); ++i) v.add(toks[i]);
        if (v.size() != toks.size()) throw ValidationError("token table contains duplicates");
        return v;
    }

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Counts tokens across all sequences and keeps those seen at least
/// min_count times; rarer tokens fall through to <unk> downstream.
inline Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus,
                              std::size_t min_count = 1) {
    std::map<std::string, std::size_t> counts;  // ordered: gives the lexical tie-break
    for (const auto& seq : corpus)
        for (const auto& tok : seq) ++counts[tok];

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [tok, n] : counts)
        if (n >= min_count && tok != kPadToken && tok != kUnkToken) kept.emplace_back(tok, n);
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary vocab;
    for (const auto& [tok, n] : kept) vocab.add(tok);
    return vocab;
}

/// Dense token vectors, row i belonging to vocab index i. Row 0 (<pad>) is
/// held at zero so padded positions contribute nothing downstream.
struct EmbeddingTable {
    std::size_t dim = 0;
    std::vector<std::string> tokens;
    Matrix vectors;  // |vocab| x dim

    const double* row(std::size_t i) const { return vectors.row(i); }

    std::string to_json() const {
        nlohmann::json j;
        j["dim"] = dim;
        j["tokens"] = tokens;
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < vectors.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < dim; ++c) row.push_back(vectors.at(r, c));
            rows.push_back(std::move(row));
        }
        j["vectors"] = std::move(rows);
        return j.dump();
    }

    static EmbeddingTable from_json(const std::string& text, const std::string& origin = {}) {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("dim") || !j.contains("tokens") ||
            !j.contains("vectors"))
            throw ParseError(origin + ": malformed embedding file");
        EmbeddingTable table;
        table.dim = j["dim"].get<std::size_t>();
        table.tokens = j["tokens"].get<std::vector<std::string>>();
        const auto& rows = j["vectors"];
        if (!rows.is_array() || rows.size() != table.tokens.size())
            throw ValidationError(origin + ": vector count does not match token count");
        table.vectors = Matrix(table.tokens.size(), table.dim);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (!rows[r].is_array() || rows[r].size() != table.dim)
                throw ValidationError(origin + ": row " + std::to_string(r) +
                                      " has wrong dimension");
            for (std::size_t c = 0; c < table.dim; ++c)
                table.vectors.at(r, c) = rows[r][c].get<double>();
        }
        return table;
    }
};

struct EmbeddingConfig {
    std::size_t dim = 300;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 30;
    double lr = 0.025;
};

/// Skip-gram with negative sampling over the snippet corpus. Single
/// threaded and fully seeded: iteration order, the dynamic learning rate
/// and the negative draws are all functions of (corpus, config, seed).
/// Tokens absent from `vocab` train the <unk> row. Returns the table of
/// input vectors; per-epoch mean pair loss lands in *loss_history if given.
inline EmbeddingTable train_embeddings(const std::vector<std::vector<std::string>>& corpus,
                                       const Vocabulary& vocab, const EmbeddingConfig& cfg,
                                       std::uint64_t seed,
                                       std::vector<double>* loss_history = nullptr) {
    const std::size_t V = vocab.size();
    const std::size_t D = cfg.dim;
    if (D == 0) throw ArgumentError("embedding dim must be positive");

    EmbeddingTable table;
    table.dim = D;
    table.tokens = vocab.tokens();
    table.vectors = Matrix(V, D);

    // Input vectors start small and random, context vectors at zero; the
    // <pad> row stays zero for good.
    Rng init_rng(derive_seed(seed, "embed-init"));
    for (std::size_t r = 0; r < V; ++r)
        for (std::size_t c = 0; c < D; ++c)
            table.vectors.at(r, c) = r == kPadIndex ? 0.0 : init_rng.next_double(-0.5 / D, 0.5 / D);

    // Encode once; every downstream step works on indices.
    std::vector<std::vector<std::size_t>> encoded;
    std::vector<double> counts(V, 0.0);
    std::size_t positions = 0;
    for (const auto& seq : corpus) {
        std::vector<std::size_t> enc;
        enc.reserve(seq.size());
        for (const auto& tok : seq) {
            const std::size_t idx = vocab.lookup(tok);
            enc.push_back(idx);
            counts[idx] += 1.0;
            ++positions;
        }
        if (!enc.empty()) encoded.push_back(std::move(enc));
    }
    if (positions == 0) {
        warn("embedding corpus is empty; emitting random vectors");
        return table;
    }

    // Unigram^0.75 sampling distribution as a cumulative table (binary
    // search per draw); <pad> is never proposed.
    std::vector<double> cumulative(V, 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < V; ++i) {
        if (i != kPadIndex && counts[i] > 0.0) mass += std::pow(counts[i], 0.75);
        cumulative[i] = mass;
    }
    const bool can_sample = mass > 0.0;

    auto draw_negative = [&](Rng& rng) -> std::size_t {
        const double r = rng.next_double() * mass;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        // r can round up to exactly `mass`; clamp to the last real slot.
        const std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
        return idx < V ? idx : V - 1;
    };

    Matrix context(V, D);  // output-side vectors, discarded after training
    Vec center_grad(D);

    const std::size_t total_steps = cfg.epochs * positions;
    std::size_t done = 0;
    Rng rng(derive_seed(seed, "embed-train"));

    if (loss_history) loss_history->clear();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t loss_pairs = 0;
        for (const auto& seq : encoded) {
            for (std::size_t t = 0; t < seq.size(); ++t, ++done) {
                const double lr =
                    cfg.lr * std::max(1.0 - static_cast<double>(done) / total_steps, 1e-4);
                const std::size_t center = seq[t];
                const std::size_t lo = t >= cfg.window ? t - cfg.window : 0;
                const std::size_t hi = std::min(seq.size(), t + cfg.window + 1);
                double* v_c = table.vectors.row(center);
                for (std::size_t u = lo; u < hi; ++u) {
                    if (u == t) continue;
                    std::fill(center_grad.begin(), center_grad.end(), 0.0);

                    // Positive pair plus `negatives` sampled non-pairs.
                    for (std::size_t k = 0; k <= cfg.negatives; ++k) {
                        std::size_t target;
                        double label;
                        if (k == 0) {
                            target = seq[u];
                            label = 1.0;
                        } else {
                            if (!can_sample) break;
                            target = draw_negative(rng);
                            if (target == seq[u]) continue;
                            label = 0.0;
                        }
                        double* u_t = context.row(target);
                        const double s = sigmoid(dot(v_c, u_t, D));
                        loss_sum += label > 0.5 ? -std::log(std::max(s, 1e-12))
                                                : -std::log(std::max(1.0 - s, 1e-12));
                        const double g = (label - s) * lr;
                        for (std::size_t d = 0; d < D; ++d) {
                            center_grad[d] += g * u_t[d];
                            u_t[d] += g * v_c[d];
                        }
                    }
                    ++loss_pairs;
                    for (std::size_t d = 0; d < D; ++d) v_c[d] += center_grad[d];
                }
            }
        }
        if (loss_history)
            loss_history->push_back(loss_pairs == 0 ? 0.0 : loss_sum / loss_pairs);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Sequence encoding (tokens -> fixed-length index vector)
// ---------------------------------------------------------------------------

/// Fixed-length view of one snippet: indices padded with <pad> (or cut) to
/// seq_len; true_length counts the real tokens so later stages can stop
/// there.
struct EncodedSequence {
    std::vector<std::size_t> indices;
    std::size_t true_length = 0;
    int label = 0;
};

inline EncodedSequence encode_sequence(const std::vector<std::string>& tokens,
                                       const Vocabulary& vocab, std::size_t seq_len, int label = 0) {
    if (seq_len == 0) throw ArgumentError("sequence length must be positive");
    EncodedSequence enc;
    enc.indices.assign(seq_len, kPadIndex);
    enc.true_length = std::min(tokens.size(), seq_len);
    enc.label = label;
    for (std::size_t i = 0; i < enc.true_length; ++i) enc.indices[i] = vocab.lookup(tokens[i]);
    return enc;
}

}  // namespace reentra
