// End-to-end tests of the command-line tool: exit codes, artifacts, and
// pipeline composition, all via real subprocess invocations.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "reentra/corpus.hpp"
#include "reentra/io.hpp"
#include "reentra/metrics.hpp"
#include "reentra/preproc.hpp"
#include "reentra/trainer.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = REENTRA_FIXTURE_DIR;
const std::string kTool = REENTRA_TOOL_PATH;

// Hyperparameters small enough that every CLI run finishes in seconds.
const std::string kTinyHp =
    " --embed-dim 10 --seq-len 80 --hidden 4 --epochs 2 --embed-epochs 1"
    " --batch-size 8 --lr 0.005 --dropout 0.1";

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_root() {
    static const fs::path root = [] {
        const fs::path r = fs::temp_directory_path() / "reentra_cli_tests";
        fs::remove_all(r);
        fs::create_directories(r);
        return r;
    }();
    return root;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = scratch_root() / name;
    fs::create_directories(dir);
    return dir;
}

RunResult run_tool(const std::string& args, const std::string& tag) {
    const fs::path out_file = scratch_root() / (tag + ".out");
    const fs::path err_file = scratch_root() / (tag + ".err");
    const std::string cmd =
        kTool + " " + args + " >" + out_file.string() + " 2>" + err_file.string();
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = fs::exists(out_file) ? reentra::read_file(out_file) : "";
    r.err = fs::exists(err_file) ? reentra::read_file(err_file) : "";
    return r;
}

std::string manifest_arg() { return (kFixtures / "synthetic" / "manifest.jsonl").string(); }

/// Shared preprocess -> train artifacts, materialized once per test run.
struct SharedArtifacts {
    fs::path pre_dir;    // snippets.jsonl, stats.json
    fs::path train_dir;  // checkpoint.json, train_log.jsonl
};

const SharedArtifacts& shared() {
    static const SharedArtifacts a = [] {
        SharedArtifacts s;
        s.pre_dir = fresh_dir("shared_pre");
        auto pre = run_tool("preprocess --manifest " + manifest_arg() + " --out " +
                                s.pre_dir.string(),
                            "shared_pre");
        REQUIRE(pre.code == 0);
        s.train_dir = fresh_dir("shared_train");
        auto tr = run_tool("train --snippets " + (s.pre_dir / "snippets.jsonl").string() +
                               " --out " + s.train_dir.string() + kTinyHp,
                           "shared_train");
        REQUIRE(tr.code == 0);
        return s;
    }();
    return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// Usage errors
// ---------------------------------------------------------------------------

TEST_CASE("cli: missing subcommand or flags is a usage error") {
    CHECK(run_tool("", "use0").code == 1);
    CHECK(run_tool("preprocess", "use1").code == 1);  // --manifest and --out required
    CHECK(run_tool("bogus --out /tmp/x", "use2").code == 1);
    const auto help = run_tool("--help", "use3");
    CHECK(help.code == 0);
    CHECK(help.out.find("preprocess") != std::string::npos);
}

TEST_CASE("cli: evaluate demands a manifest or a snippet file") {
    const auto& a = shared();
    const auto r = run_tool("evaluate --checkpoint " +
                                (a.train_dir / "checkpoint.json").string() + " --out " +
                                fresh_dir("ev_usage").string(),
                            "ev_usage");
    CHECK(r.code == 1);
    CHECK(r.err.find("--manifest or --snippets") != std::string::npos);
}

TEST_CASE("cli: malformed grid flag is a usage error") {
    const auto& a = shared();
    const auto r = run_tool("train --snippets " + (a.pre_dir / "snippets.jsonl").string() +
                                " --out " + fresh_dir("grid_bad").string() +
                                " --lr-grid abc" + kTinyHp,
                            "grid_bad");
    CHECK(r.code == 1);
    CHECK(r.err.find("not a number") != std::string::npos);
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

TEST_CASE("cli stats: label counts and provenance") {
    const fs::path out = fresh_dir("stats");
    const auto r = run_tool("stats --manifest " + manifest_arg() + " --out " + out.string(),
                            "stats");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(reentra::read_file(out / "stats.json"));
    CHECK(j.at("total").get<int>() == 40);
    CHECK(j.at("per_label").at("0").get<int>() == 20);
    CHECK(j.at("per_label").at("1").get<int>() == 20);
    const auto run = nlohmann::json::parse(reentra::read_file(out / "run.json"));
    CHECK(run.at("config").at("command").get<std::string>() == "stats");
    CHECK(run.at("config").at("seed").get<std::uint64_t>() == 42);
}

TEST_CASE("cli: environment variables feed the config") {
    const fs::path out = fresh_dir("envseed");
    const std::string cmd = "env REENTRA_SEED=7 " + kTool + " stats --manifest " +
                            manifest_arg() + " --out " + out.string() + " >/dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    const auto run = nlohmann::json::parse(reentra::read_file(out / "run.json"));
    CHECK(run.at("config").at("seed").get<std::uint64_t>() == 7);
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

TEST_CASE("cli preprocess: snippet file, per-contract counts, provenance") {
    const auto& a = shared();
    const std::string text = reentra::read_file(a.pre_dir / "snippets.jsonl");
    const auto lines = reentra::split_lines(text);
    CHECK(lines.size() == 40);  // one anchor per fixture contract
    const auto records = reentra::snippet_records_from_jsonl(text, "snippets");
    std::size_t positives = 0;
    for (const auto& rec : records)
        if (rec.label == 1) ++positives;
    CHECK(positives == 20);

    const auto run = nlohmann::json::parse(reentra::read_file(a.pre_dir / "run.json"));
    const auto artifacts = run.at("artifacts").get<std::vector<std::string>>();
    CHECK(std::find(artifacts.begin(), artifacts.end(), "snippets.jsonl") != artifacts.end());
}

TEST_CASE("cli preprocess: stdout lists one count per contract") {
    const fs::path out = fresh_dir("pre_stdout");
    const auto r = run_tool("preprocess --manifest " + manifest_arg() + " --out " + out.string(),
                            "pre_stdout");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("v01: 1 snippet(s)") != std::string::npos);
    CHECK(r.out.find("s20: 1 snippet(s)") != std::string::npos);
}

TEST_CASE("cli preprocess: missing manifest is a data error") {
    const auto r = run_tool("preprocess --manifest /nonexistent/m.jsonl --out " +
                                fresh_dir("pre_missing").string(),
                            "pre_missing");
    CHECK(r.code == 2);
}

TEST_CASE("cli preprocess: broken contracts are skipped with a warning") {
    const fs::path dir = fresh_dir("pre_skip");
    reentra::atomic_write(dir / "good.sol",
                          "contract G { function f() public { msg.sender.transfer(1); } }\n");
    reentra::atomic_write(dir / "bad.sol", "contract B { /* never closed\n");
    reentra::atomic_write(dir / "m.jsonl",
                          "{\"path\":\"good.sol\",\"label\":0,\"id\":\"good\"}\n"
                          "{\"path\":\"bad.sol\",\"label\":1,\"id\":\"bad\"}\n");
    const fs::path out = fresh_dir("pre_skip_out");
    const auto r = run_tool("preprocess --manifest " + (dir / "m.jsonl").string() + " --out " +
                                out.string(),
                            "pre_skip");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("skipping bad") != std::string::npos);
    const auto lines = reentra::split_lines(reentra::read_file(out / "snippets.jsonl"));
    CHECK(lines.size() == 1);

    // When every record fails, the command fails.
    reentra::atomic_write(dir / "m_allbad.jsonl", "{\"path\":\"bad.sol\",\"label\":1}\n");
    const auto r2 = run_tool("preprocess --manifest " + (dir / "m_allbad.jsonl").string() +
                                 " --out " + fresh_dir("pre_allbad").string(),
                             "pre_allbad");
    CHECK(r2.code == 2);
}

TEST_CASE("cli preprocess: anchor-free corpus gives an empty file and a warning") {
    const fs::path dir = fresh_dir("pre_noanchor");
    reentra::atomic_write(dir / "plain.sol",
                          "contract P { uint x; function f() public { x = 1; } }\n");
    reentra::atomic_write(dir / "m.jsonl", "{\"path\":\"plain.sol\",\"label\":0}\n");
    const fs::path out = fresh_dir("pre_noanchor_out");
    const auto r = run_tool("preprocess --manifest " + (dir / "m.jsonl").string() + " --out " +
                                out.string(),
                            "pre_noanchor");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("no external-call anchors") != std::string::npos);
    CHECK(reentra::read_file(out / "snippets.jsonl").empty());
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

TEST_CASE("cli train: checkpoint and per-epoch log") {
    const auto& a = shared();
    const auto log_lines =
        reentra::split_lines(reentra::read_file(a.train_dir / "train_log.jsonl"));
    REQUIRE(log_lines.size() == 2);  // kTinyHp trains 2 epochs
    const auto first = nlohmann::json::parse(log_lines[0]);
    CHECK(first.at("epoch").get<int>() == 0);
    CHECK(first.at("mean_loss").is_number());

    const auto ck = reentra::Checkpoint::from_json(
        reentra::read_file(a.train_dir / "checkpoint.json"), "checkpoint");
    CHECK(ck.params.dims.hidden == 4);
    CHECK(ck.params.dims.embed_dim == 10);
    // The checkpoint carries the fully-resolved configuration.
    CHECK(ck.hyperparams.at("lr").get<double>() == 0.005);
    CHECK(ck.hyperparams.at("seed").get<std::uint64_t>() == 42);
    CHECK(ck.hyperparams.at("command").get<std::string>() == "train");
}

TEST_CASE("cli train: reruns are byte-identical") {
    const auto& a = shared();
    // The checkpoint embeds the fully-resolved config (including --out), so
    // byte-identity is over reruns of the *same* invocation.
    const fs::path out2 = fresh_dir("train_again");
    const std::string args = "train --snippets " + (a.pre_dir / "snippets.jsonl").string() +
                             " --out " + out2.string() + kTinyHp;
    REQUIRE(run_tool(args, "train_again1").code == 0);
    const std::string ck_first = reentra::read_file(out2 / "checkpoint.json");
    REQUIRE(run_tool(args, "train_again2").code == 0);
    CHECK(reentra::read_file(out2 / "checkpoint.json") == ck_first);

    // The learned state itself is output-path independent: the log and the
    // parameter/embedding blocks match the shared run exactly.
    CHECK(reentra::read_file(out2 / "train_log.jsonl") ==
          reentra::read_file(a.train_dir / "train_log.jsonl"));
    const auto j1 = nlohmann::json::parse(ck_first);
    const auto j2 = nlohmann::json::parse(reentra::read_file(a.train_dir / "checkpoint.json"));
    CHECK(j1.at("params") == j2.at("params"));
    CHECK(j1.at("embedding") == j2.at("embedding"));
}

TEST_CASE("cli train: cross-validation artifact with --folds") {
    const auto& a = shared();
    const fs::path out = fresh_dir("train_folds");
    const auto r = run_tool("train --snippets " + (a.pre_dir / "snippets.jsonl").string() +
                                " --out " + out.string() + " --folds 3" + kTinyHp,
                            "train_folds");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("cv mean f1=") != std::string::npos);
    const auto folds = nlohmann::json::parse(reentra::read_file(out / "folds.json"));
    REQUIRE(folds.at("folds").size() == 3);
    CHECK(folds.at("mean").contains("f1"));
    CHECK(folds.at("mean").contains("fpr"));
    long long total = 0;
    for (const auto& fold : folds.at("folds")) {
        const auto& c = fold.at("counts");
        total += c.at("tp").get<long long>() + c.at("tn").get<long long>() +
                 c.at("fp").get<long long>() + c.at("fn").get<long long>();
    }
    CHECK(total == 40);
}

TEST_CASE("cli train: grid search artifact and winner promotion") {
    const auto& a = shared();
    const fs::path out = fresh_dir("train_grid");
    const auto r = run_tool("train --snippets " + (a.pre_dir / "snippets.jsonl").string() +
                                " --out " + out.string() +
                                " --lr-grid 0.005 --dropout-grid 0.1,0.3 --folds 2" + kTinyHp,
                            "train_grid");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("grid best:") != std::string::npos);
    const auto lines = reentra::split_lines(reentra::read_file(out / "grid.csv"));
    REQUIRE(lines.size() == 3);  // header + 2 points
    CHECK(lines[0] == "lr,dropout,mean_f1,mean_fpr");
    // The checkpoint records the winning point.
    const auto ck = reentra::Checkpoint::from_json(
        reentra::read_file(out / "checkpoint.json"), "ck");
    const double best_dropout = ck.hyperparams.at("dropout").get<double>();
    CHECK((best_dropout == 0.1 || best_dropout == 0.3));
    CHECK(ck.hyperparams.at("lr").get<double>() == 0.005);
}

TEST_CASE("cli train: empty snippet file is a data error") {
    const fs::path dir = fresh_dir("train_empty");
    reentra::atomic_write(dir / "empty.jsonl", "");
    const auto r = run_tool("train --snippets " + (dir / "empty.jsonl").string() + " --out " +
                                fresh_dir("train_empty_out").string() + kTinyHp,
                            "train_empty");
    CHECK(r.code == 2);
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

TEST_CASE("cli detect: verdicts with no-anchor and error notes") {
    const auto& a = shared();
    const fs::path dir = fresh_dir("detect_in");
    reentra::atomic_write(dir / "noanchor.sol",
                          "contract P { uint x; function f() public { x = 1; } }\n");
    reentra::atomic_write(dir / "broken.sol", "contract B { /* never closed\n");
    const std::string vuln = (kFixtures / "synthetic" / "v01.sol").string();
    reentra::atomic_write(dir / "m.jsonl",
                          "{\"path\":\"" + vuln + "\",\"label\":1,\"id\":\"v01\"}\n" +
                              "{\"path\":\"noanchor.sol\",\"label\":0,\"id\":\"plain\"}\n" +
                              "{\"path\":\"broken.sol\",\"label\":0,\"id\":\"broken\"}\n");
    const fs::path out = fresh_dir("detect_out");
    const auto r = run_tool("detect --manifest " + (dir / "m.jsonl").string() +
                                " --checkpoint " + (a.train_dir / "checkpoint.json").string() +
                                " --out " + out.string(),
                            "detect");
    REQUIRE(r.code == 0);
    const auto lines = reentra::split_lines(reentra::read_file(out / "verdicts.csv"));
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "id,verdict,max_score,note");
    CHECK(lines[1].rfind("v01,", 0) == 0);
    CHECK((lines[1].find(",1,") != std::string::npos ||
           lines[1].find(",0,") != std::string::npos));
    CHECK(lines[2] == "plain,0,,no-anchor");
    CHECK(lines[3].rfind("broken,,,", 0) == 0);
    CHECK(lines[3].find("error:") != std::string::npos);
}

TEST_CASE("cli detect: empty target manifest gives an empty verdict table") {
    const auto& a = shared();
    const fs::path dir = fresh_dir("detect_empty");
    reentra::atomic_write(dir / "m.jsonl", "");
    const fs::path out = fresh_dir("detect_empty_out");
    const auto r = run_tool("detect --manifest " + (dir / "m.jsonl").string() +
                                " --checkpoint " + (a.train_dir / "checkpoint.json").string() +
                                " --out " + out.string(),
                            "detect_empty");
    REQUIRE(r.code == 0);
    const auto lines = reentra::split_lines(reentra::read_file(out / "verdicts.csv"));
    REQUIRE(lines.size() == 1);  // header only
}

TEST_CASE("cli detect: unreadable checkpoint is a data error") {
    const auto r = run_tool("detect --manifest " + manifest_arg() +
                                " --checkpoint /nonexistent/ck.json --out " +
                                fresh_dir("detect_bad_ck").string(),
                            "detect_bad_ck");
    CHECK(r.code == 2);
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

TEST_CASE("cli evaluate: snippet-level report recomputes from its own files") {
    const auto& a = shared();
    const fs::path out = fresh_dir("eval_snip");
    const auto r = run_tool("evaluate --snippets " + (a.pre_dir / "snippets.jsonl").string() +
                                " --checkpoint " + (a.train_dir / "checkpoint.json").string() +
                                " --out " + out.string(),
                            "eval_snip");
    REQUIRE(r.code == 0);

    const auto metrics = nlohmann::json::parse(reentra::read_file(out / "metrics.json"));
    const auto pred_lines =
        reentra::split_lines(reentra::read_file(out / "predictions.csv"));
    REQUIRE(pred_lines.size() == 41);  // header + one row per snippet
    CHECK(pred_lines[0] == "id,score,label,predicted");

    // Recompute the confusion matrix from the predictions file.
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::pair<int, double>> scored;
    for (std::size_t i = 1; i < pred_lines.size(); ++i) {
        const auto& line = pred_lines[i];
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            cells.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        REQUIRE(cells.size() == 4);
        pairs.emplace_back(std::stoi(cells[2]), std::stoi(cells[3]));
        scored.emplace_back(std::stoi(cells[2]), std::stod(cells[1]));
    }
    const auto counts = reentra::confusion(pairs);
    CHECK(counts.tp == metrics.at("counts").at("tp").get<long long>());
    CHECK(counts.tn == metrics.at("counts").at("tn").get<long long>());
    const auto scalars = reentra::scalar_metrics(counts);
    CHECK(scalars.f1 == metrics.at("f1").get<double>());
    CHECK(scalars.acc == metrics.at("acc").get<double>());

    // ROC row count: distinct scores + the infinity start, + header.
    std::set<double> distinct;
    for (const auto& [label, s] : scored) distinct.insert(s);
    const auto roc_lines = reentra::split_lines(reentra::read_file(out / "roc.csv"));
    CHECK(roc_lines.size() == 1 + 1 + distinct.size());
    CHECK(roc_lines[0] == "threshold,fpr,tpr");

    // AUC agrees with the library on the same scores.
    const auto [points, auc] = reentra::roc_curve(scored);
    REQUIRE(auc.has_value());
    CHECK(metrics.at("auc").get<double>() == *auc);
}

TEST_CASE("cli evaluate: contract-level aggregation over a labeled manifest") {
    const auto& a = shared();
    const fs::path out = fresh_dir("eval_contract");
    const auto r = run_tool("evaluate --manifest " + manifest_arg() + " --checkpoint " +
                                (a.train_dir / "checkpoint.json").string() + " --out " +
                                out.string(),
                            "eval_contract");
    REQUIRE(r.code == 0);
    const auto pred_lines =
        reentra::split_lines(reentra::read_file(out / "predictions.csv"));
    CHECK(pred_lines.size() == 41);  // 40 contracts + header
    const auto metrics = nlohmann::json::parse(reentra::read_file(out / "metrics.json"));
    const auto& c = metrics.at("counts");
    CHECK(c.at("tp").get<long long>() + c.at("tn").get<long long>() +
              c.at("fp").get<long long>() + c.at("fn").get<long long>() ==
          40);
}

TEST_CASE("cli evaluate: single-class input marks auc undefined") {
    const auto& a = shared();
    // Keep only label-1 snippets.
    const auto records = reentra::snippet_records_from_jsonl(
        reentra::read_file(a.pre_dir / "snippets.jsonl"), "snippets");
    std::vector<reentra::SnippetRecord> positives;
    for (const auto& rec : records)
        if (rec.label == 1) positives.push_back(rec);
    REQUIRE(!positives.empty());
    const fs::path dir = fresh_dir("eval_single_in");
    reentra::atomic_write(dir / "pos.jsonl", reentra::snippet_records_to_jsonl(positives));
    const fs::path out = fresh_dir("eval_single_out");
    const auto r = run_tool("evaluate --snippets " + (dir / "pos.jsonl").string() +
                                " --checkpoint " + (a.train_dir / "checkpoint.json").string() +
                                " --out " + out.string(),
                            "eval_single");
    REQUIRE(r.code == 0);
    const auto metrics = nlohmann::json::parse(reentra::read_file(out / "metrics.json"));
    CHECK(metrics.at("auc").is_null());
}

TEST_CASE("cli evaluate: reruns are byte-identical") {
    const auto& a = shared();
    const fs::path o1 = fresh_dir("eval_rep1");
    const fs::path o2 = fresh_dir("eval_rep2");
    for (const fs::path& out : {o1, o2}) {
        const auto r = run_tool("evaluate --snippets " +
                                    (a.pre_dir / "snippets.jsonl").string() + " --checkpoint " +
                                    (a.train_dir / "checkpoint.json").string() + " --out " +
                                    out.string(),
                                "eval_rep_" + out.filename().string());
        REQUIRE(r.code == 0);
    }
    for (const char* name : {"metrics.json", "roc.csv", "predictions.csv"}) {
        CHECK(reentra::read_file(o1 / name) == reentra::read_file(o2 / name));
    }
}

// ---------------------------------------------------------------------------
// Pipeline composition
// ---------------------------------------------------------------------------

TEST_CASE("cli pipeline: staged run equals the in-process composition") {
    const auto& a = shared();

    // In-process: same stages, same seeds, straight through the library.
    const auto manifest = reentra::load_manifest(kFixtures / "synthetic" / "manifest.jsonl");
    std::vector<reentra::SnippetRecord> snippets;
    for (const auto& rec : manifest) {
        auto s = reentra::preprocess_source(rec.source, rec.id, rec.label);
        snippets.insert(snippets.end(), s.begin(), s.end());
    }
    // Matches kTinyHp.
    reentra::Hyperparams hp;
    hp.lr = 0.005;
    hp.dropout = 0.1;
    hp.batch_size = 8;
    hp.embed_dim = 10;
    hp.seq_len = 80;
    hp.hidden = 4;
    hp.epochs = 2;
    hp.embed_epochs = 1;
    hp.seed = 42;

    std::vector<std::vector<std::string>> corpus;
    for (const auto& s : snippets) corpus.push_back(s.tokens);
    const auto vocab = reentra::build_vocab(corpus);
    const auto embedding = reentra::train_embeddings(
        corpus, vocab, hp.embedding_config(), reentra::derive_seed(hp.seed, "embed"));
    std::vector<reentra::EncodedSequence> data;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < snippets.size(); ++i) {
        data.push_back(
            reentra::encode_sequence(snippets[i].tokens, vocab, hp.seq_len, snippets[i].label));
        ids.push_back(snippets[i].uid(i));
    }
    const auto run = reentra::train(data, hp, embedding);
    const auto report = reentra::evaluate_model(run.final_params, embedding, data, ids);

    // Staged artifacts, produced by the separate processes above.
    const fs::path out = fresh_dir("pipeline_eval");
    const auto r = run_tool("evaluate --snippets " + (a.pre_dir / "snippets.jsonl").string() +
                                " --checkpoint " + (a.train_dir / "checkpoint.json").string() +
                                " --out " + out.string(),
                            "pipeline_eval");
    REQUIRE(r.code == 0);
    const auto metrics = nlohmann::json::parse(reentra::read_file(out / "metrics.json"));

    CHECK(metrics.at("f1").get<double>() == report.scalars.f1);
    CHECK(metrics.at("acc").get<double>() == report.scalars.acc);
    CHECK(metrics.at("fpr").get<double>() == report.scalars.fpr);
    REQUIRE(report.auc.has_value());
    CHECK(metrics.at("auc").get<double>() == *report.auc);
    CHECK(metrics.at("counts").at("tp").get<long long>() == report.counts.tp);
}
