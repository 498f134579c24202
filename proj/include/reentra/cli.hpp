// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reentra/corpus.hpp"
#include "reentra/embed.hpp"
#include "reentra/errors.hpp"
#include "reentra/io.hpp"
#include "reentra/metrics.hpp"
#include "reentra/preproc.hpp"
#include "reentra/seqmodel.hpp"
#include "reentra/trainer.hpp"

namespace reentra {

/// Fully-resolved invocation: flags > REENTRA_* environment > defaults.
/// Echoed verbatim into run.json (and the checkpoint) for provenance.
struct RunConfig {
    std::string command;
    std::string manifest, snippets, checkpoint, out;
    Hyperparams hp;
    std::size_t folds = 0;                      // 0 = no cross-validation
    std::vector<double> lr_grid, dropout_grid;  // both empty = no grid search

    bool wants_grid() const { return !lr_grid.empty() || !dropout_grid.empty(); }
};

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["command"] = cfg.command;
    j["manifest"] = cfg.manifest;
    j["snippets"] = cfg.snippets;
    j["checkpoint"] = cfg.checkpoint;
    j["out"] = cfg.out;
    j["seed"] = cfg.hp.seed;
    j["lr"] = cfg.hp.lr;
    j["dropout"] = cfg.hp.dropout;
    j["batch_size"] = cfg.hp.batch_size;
    j["embed_dim"] = cfg.hp.embed_dim;
    j["seq_len"] = cfg.hp.seq_len;
    j["hidden"] = cfg.hp.hidden;
    j["epochs"] = cfg.hp.epochs;
    j["embed_epochs"] = cfg.hp.embed_epochs;
    j["folds"] = cfg.folds;
    j["lr_grid"] = cfg.lr_grid;
    j["dropout_grid"] = cfg.dropout_grid;
    return j;
}

namespace detail {

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
    return std::filesystem::path(cfg.out) / name;
}

/// Per-invocation provenance: the resolved config plus what was written.
inline void write_run_json(const RunConfig& cfg, const std::vector<std::string>& artifacts) {
    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["artifacts"] = artifacts;
    atomic_write(out_path(cfg, "run.json"), j.dump(2) + "\n");
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += "\"\"";
        else q += c;
    }
    q += "\"";
    return q;
}

inline Vocabulary vocab_of(const Checkpoint& ck) {
    return Vocabulary::from_tokens(ck.embedding.tokens);
}

/// Highest positive-class probability over a contract's snippets;
/// nullopt when the contract has no anchors at all.
inline std::optional<double> contract_score(const Checkpoint& ck, const Vocabulary& vocab,
                                            const std::vector<SnippetRecord>& snippets) {
    std::optional<double> best;
    for (const auto& s : snippets) {
        const EncodedSequence enc = encode_sequence(s.tokens, vocab, ck.params.dims.seq_len);
        const Vec probs = predict_probs(ck.params, ck.embedding, enc);
        if (!best || probs[1] > *best) best = probs[1];
    }
    return best;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline int cmd_stats(const RunConfig& cfg) {
    const auto records = load_manifest(cfg.manifest);
    atomic_write(out_path(cfg, "stats.json"), stats_to_json(corpus_stats(records)).dump(2) + "\n");
    write_run_json(cfg, {"stats.json"});
    return 0;
}

inline int cmd_preprocess(const RunConfig& cfg) {
    const auto records = load_manifest(cfg.manifest);

    std::vector<SnippetRecord> all;
    std::size_t succeeded = 0;
    for (const auto& rec : records) {
        try {
            auto snippets = preprocess_source(rec.source, rec.id, rec.label);
            std::cout << rec.id << ": " << snippets.size() << " snippet(s)\n";
            for (auto& s : snippets) all.push_back(std::move(s));
            ++succeeded;
        } catch (const DataError& e) {
            warn("skipping " + rec.id + ": " + e.what());
        }
    }
    if (!records.empty() && succeeded == 0)
        throw DataError("preprocess: every contract failed preprocessing");
    if (all.empty()) warn("no external-call anchors found; snippet file is empty");

    atomic_write(out_path(cfg, "snippets.jsonl"), snippet_records_to_jsonl(all));
    atomic_write(out_path(cfg, "stats.json"), stats_to_json(corpus_stats(records)).dump(2) + "\n");
    write_run_json(cfg, {"snippets.jsonl", "stats.json"});
    return 0;
}

inline nlohmann::json fold_reports_to_json(const std::vector<EvalReport>& reports) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& r : reports) folds.push_back(report_to_json(r));
    nlohmann::json j;
    j["folds"] = folds;
    j["mean"]["f1"] = mean_fold_f1(reports);
    j["mean"]["fpr"] = mean_fold_fpr(reports);
    return j;
}

inline int cmd_train(const RunConfig& cfg) {
    const std::string text = read_file(cfg.snippets);
    const auto snippets = snippet_records_from_jsonl(text, cfg.snippets);
    if (snippets.empty()) throw DataError(cfg.snippets + ": snippet file is empty");

    std::vector<std::string> artifacts;
    Hyperparams hp = cfg.hp;

    if (cfg.wants_grid()) {
        const auto& lrs = cfg.lr_grid.empty() ? default_lr_grid() : cfg.lr_grid;
        const auto& drs = cfg.dropout_grid.empty() ? default_dropout_grid() : cfg.dropout_grid;
        const std::size_t k = cfg.folds > 0 ? cfg.folds : 10;
        const GridResult grid = grid_search(snippets, hp, lrs, drs, k);
        atomic_write(out_path(cfg, "grid.csv"), grid_table_to_csv(grid.table));
        artifacts.push_back("grid.csv");
        hp = grid.best;
        std::cout << "grid best: lr=" << fmt_double(hp.lr) << " dropout=" << fmt_double(hp.dropout)
                  << "\n";
    }

    if (cfg.folds > 0) {
        const auto reports = cross_validate(snippets, hp, cfg.folds);
        atomic_write(out_path(cfg, "folds.json"), fold_reports_to_json(reports).dump(2) + "\n");
        artifacts.push_back("folds.json");
        std::cout << "cv mean f1=" << fmt_double(mean_fold_f1(reports))
                  << " fpr=" << fmt_double(mean_fold_fpr(reports)) << "\n";
    }

    // Final model: vocabulary and embeddings from the full snippet file.
    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(snippets.size());
    for (const auto& s : snippets) corpus.push_back(s.tokens);
    const Vocabulary vocab = build_vocab(corpus);
    const EmbeddingTable embedding =
        train_embeddings(corpus, vocab, hp.embedding_config(), derive_seed(hp.seed, "embed"));

    std::vector<EncodedSequence> data;
    data.reserve(snippets.size());
    for (const auto& s : snippets)
        data.push_back(encode_sequence(s.tokens, vocab, hp.seq_len, s.label));

    const TrainRun run = train(data, hp, embedding);

    Checkpoint ck;
    ck.params = run.final_params;
    ck.embedding = embedding;
    RunConfig resolved = cfg;
    resolved.hp = hp;
    ck.hyperparams = config_to_json(resolved);
    atomic_write(out_path(cfg, "checkpoint.json"), ck.to_json() + "\n");
    atomic_write(out_path(cfg, "train_log.jsonl"), train_log_to_jsonl(run.history));
    artifacts.push_back("checkpoint.json");
    artifacts.push_back("train_log.jsonl");
    write_run_json(cfg, artifacts);
    return 0;
}

inline int cmd_detect(const RunConfig& cfg) {
    const Checkpoint ck = Checkpoint::from_json(read_file(cfg.checkpoint), cfg.checkpoint);
    const Vocabulary vocab = vocab_of(ck);
    const auto records = load_manifest(cfg.manifest);

    std::string csv = "id,verdict,max_score,note\n";
    for (const auto& rec : records) {
        try {
            const auto snippets = preprocess_source(rec.source, rec.id, rec.label);
            if (snippets.empty()) {
                csv += csv_quote(rec.id) + ",0,,no-anchor\n";
                continue;
            }
            const double score = *contract_score(ck, vocab, snippets);
            const int verdict = score > 0.5 ? 1 : 0;
            csv += csv_quote(rec.id) + "," + std::to_string(verdict) + "," + fmt_double(score) +
                   ",\n";
        } catch (const DataError& e) {
            warn(rec.id + ": " + e.what());
            csv += csv_quote(rec.id) + ",,," + csv_quote(std::string("error: ") + e.what()) + "\n";
        }
    }
    atomic_write(out_path(cfg, "verdicts.csv"), csv);
    write_run_json(cfg, {"verdicts.csv"});
    return 0;
}

inline int cmd_evaluate(const RunConfig& cfg) {
    const Checkpoint ck = Checkpoint::from_json(read_file(cfg.checkpoint), cfg.checkpoint);
    const Vocabulary vocab = vocab_of(ck);

    std::vector<Prediction> preds;
    if (!cfg.snippets.empty()) {
        // Snippet-level evaluation straight off a preprocessed file.
        const auto snippets = snippet_records_from_jsonl(read_file(cfg.snippets), cfg.snippets);
        for (std::size_t i = 0; i < snippets.size(); ++i) {
            const auto& s = snippets[i];
            const EncodedSequence enc =
                encode_sequence(s.tokens, vocab, ck.params.dims.seq_len, s.label);
            const Vec probs = predict_probs(ck.params, ck.embedding, enc);
            Prediction p;
            p.id = s.uid(i);
            p.score = probs[1];
            p.label = s.label;
            p.predicted = probs[1] > 0.5 ? 1 : 0;
            preds.push_back(std::move(p));
        }
    } else {
        // Contract-level evaluation from a labeled manifest; a contract is
        // positive when any of its snippets is.
        const auto records = load_manifest(cfg.manifest);
        for (const auto& rec : records) {
            try {
                const auto snippets = preprocess_source(rec.source, rec.id, rec.label);
                const std::optional<double> score = contract_score(ck, vocab, snippets);
                Prediction p;
                p.id = rec.id;
                p.score = score.value_or(0.0);
                p.label = rec.label;
                p.predicted = p.score > 0.5 ? 1 : 0;
                preds.push_back(std::move(p));
            } catch (const DataError& e) {
                warn("excluding " + rec.id + " from evaluation: " + e.what());
            }
        }
    }
    if (preds.empty()) throw DataError("evaluate: nothing to evaluate");

    const EvalReport report = make_report(preds);
    atomic_write(out_path(cfg, "metrics.json"), report_to_json(report).dump(2) + "\n");
    atomic_write(out_path(cfg, "roc.csv"), roc_to_csv(report.roc));
    std::string pred_csv = "id,score,label,predicted\n";
    for (const auto& p : report.predictions)
        pred_csv += csv_quote(p.id) + "," + fmt_double(p.score) + "," + std::to_string(p.label) +
                    "," + std::to_string(p.predicted) + "\n";
    atomic_write(out_path(cfg, "predictions.csv"), pred_csv);
    write_run_json(cfg, {"metrics.json", "roc.csv", "predictions.csv"});
    return 0;
}

inline std::vector<double> parse_grid(const std::string& csv, const std::string& flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = std::min(csv.find(',', pos), csv.size());
        const std::string item = csv.substr(pos, comma - pos);
        if (!item.empty()) {
            try {
                std::size_t used = 0;
                const double v = std::stod(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                out.push_back(v);
            } catch (const std::exception&) {
                throw ArgumentError(flag + ": '" + item + "' is not a number");
            }
        }
        pos = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Entry point behind main(): builds the CLI, dispatches, maps exceptions
/// to exit codes (1 usage, 2 data, 3 internal invariant).
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"reentra: reentrancy detection for Solidity contracts"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string lr_grid_csv, dropout_grid_csv;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.hp.seed, "Base RNG seed")
            ->envname("REENTRA_SEED")
            ->capture_default_str();
        sub->add_option("--out", cfg.out, "Output directory")
            ->envname("REENTRA_OUT")
            ->required();
    };
    auto add_hyper = [&](CLI::App* sub) {
        sub->add_option("--lr", cfg.hp.lr, "Learning rate")
            ->envname("REENTRA_LR")
            ->capture_default_str();
        sub->add_option("--dropout", cfg.hp.dropout, "Dropout rate")
            ->envname("REENTRA_DROPOUT")
            ->capture_default_str();
        sub->add_option("--batch-size", cfg.hp.batch_size, "Mini-batch size")
            ->envname("REENTRA_BATCH_SIZE")
            ->capture_default_str();
        sub->add_option("--embed-dim", cfg.hp.embed_dim, "Token vector dimension")
            ->envname("REENTRA_EMBED_DIM")
            ->capture_default_str();
        sub->add_option("--seq-len", cfg.hp.seq_len, "Padded sequence length")
            ->envname("REENTRA_SEQ_LEN")
            ->capture_default_str();
        sub->add_option("--hidden", cfg.hp.hidden, "LSTM hidden units per direction")
            ->envname("REENTRA_HIDDEN")
            ->capture_default_str();
        sub->add_option("--epochs", cfg.hp.epochs, "Training epochs")
            ->envname("REENTRA_EPOCHS")
            ->capture_default_str();
        sub->add_option("--embed-epochs", cfg.hp.embed_epochs, "Embedding training epochs")
            ->envname("REENTRA_EMBED_EPOCHS")
            ->capture_default_str();
    };

    CLI::App* stats = app.add_subcommand("stats", "Corpus label/category counts");
    stats->add_option("--manifest", cfg.manifest, "Labeled contract manifest (JSONL)")
        ->envname("REENTRA_MANIFEST")
        ->required();
    add_common(stats);

    CLI::App* pre = app.add_subcommand("preprocess", "Slice contracts into token snippets");
    pre->add_option("--manifest", cfg.manifest, "Labeled contract manifest (JSONL)")
        ->envname("REENTRA_MANIFEST")
        ->required();
    add_common(pre);

    CLI::App* tr = app.add_subcommand("train", "Train embeddings and the classifier");
    tr->add_option("--snippets", cfg.snippets, "Preprocessed snippet file (JSONL)")
        ->envname("REENTRA_SNIPPETS")
        ->required();
    tr->add_option("--folds", cfg.folds, "Cross-validation folds (0 = off)")
        ->envname("REENTRA_FOLDS")
        ->capture_default_str();
    tr->add_option("--lr-grid", lr_grid_csv, "Comma-separated learning-rate grid")
        ->envname("REENTRA_LR_GRID");
    tr->add_option("--dropout-grid", dropout_grid_csv, "Comma-separated dropout grid")
        ->envname("REENTRA_DROPOUT_GRID");
    add_common(tr);
    add_hyper(tr);

    CLI::App* det = app.add_subcommand("detect", "Classify contracts with a trained model");
    det->add_option("--manifest", cfg.manifest, "Target contract manifest (JSONL)")
        ->envname("REENTRA_MANIFEST")
        ->required();
    det->add_option("--checkpoint", cfg.checkpoint, "Trained model checkpoint")
        ->envname("REENTRA_CHECKPOINT")
        ->required();
    add_common(det);

    CLI::App* ev = app.add_subcommand("evaluate", "Score a labeled corpus and report metrics");
    ev->add_option("--manifest", cfg.manifest, "Labeled contract manifest (JSONL)")
        ->envname("REENTRA_MANIFEST");
    ev->add_option("--snippets", cfg.snippets, "Labeled snippet file (JSONL)")
        ->envname("REENTRA_SNIPPETS");
    ev->add_option("--checkpoint", cfg.checkpoint, "Trained model checkpoint")
        ->envname("REENTRA_CHECKPOINT")
        ->required();
    add_common(ev);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        cfg.lr_grid = detail::parse_grid(lr_grid_csv, "--lr-grid");
        cfg.dropout_grid = detail::parse_grid(dropout_grid_csv, "--dropout-grid");
        if (ev->parsed() && cfg.manifest.empty() && cfg.snippets.empty())
            throw ArgumentError("evaluate: provide --manifest or --snippets");

        if (stats->parsed()) cfg.command = "stats";
        if (pre->parsed()) cfg.command = "preprocess";
        if (tr->parsed()) cfg.command = "train";
        if (det->parsed()) cfg.command = "detect";
        if (ev->parsed()) cfg.command = "evaluate";

        if (stats->parsed()) return detail::cmd_stats(cfg);
        if (pre->parsed()) return detail::cmd_preprocess(cfg);
        if (tr->parsed()) return detail::cmd_train(cfg);
        if (det->parsed()) return detail::cmd_detect(cfg);
        if (ev->parsed()) return detail::cmd_evaluate(cfg);
        return 1;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ContractViolation& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace reentra
