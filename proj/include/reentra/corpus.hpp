// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "reentra/errors.hpp"
#include "reentra/io.hpp"
#include "reentra/rng.hpp"

namespace reentra {

/// One labeled Solidity source file.
struct ContractRecord {
    std::string id;
    std::filesystem::path path;
    std::string source;  // raw bytes, may contain non-ASCII before cleaning
    int label = 0;       // 0 = non-reentrant, 1 = reentrant
    std::optional<std::string> category;
};

/// Assignment of record ids to folds. Folds partition the corpus and the
/// per-label counts differ by at most one across folds.
struct FoldSplit {
    std::size_t k = 0;
    std::unordered_map<std::string, std::size_t> assignments;
};

struct CorpusStats {
    std::size_t total = 0;
    std::map<int, std::size_t> per_label;
    std::map<std::string, std::size_t> per_category;  // "uncategorized" for records without one
};

inline constexpr const char* kUncategorized = "uncategorized";

/// Manifest format: one JSON object per line with required keys `path` and
/// `label` (0 or 1), optional `id` (defaults to the path) and `category`.
/// Relative contract paths are resolved against the manifest's directory.
inline std::vector<ContractRecord> load_manifest(const std::filesystem::path& manifest_path) {
    const std::string text = read_file(manifest_path);
    const std::filesystem::path base = manifest_path.parent_path();

    std::vector<ContractRecord> records;
    std::unordered_set<std::string> seen_ids;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = manifest_path.string() + ":" + std::to_string(i + 1);

        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ParseError(where + ": malformed manifest line");
        if (!j.contains("path") || !j["path"].is_string())
            throw ParseError(where + ": missing string key \"path\"");
        if (!j.contains("label") || !j["label"].is_number_integer())
            throw ParseError(where + ": missing integer key \"label\"");

        const long long label = j["label"].get<long long>();
        if (label != 0 && label != 1)
            throw ValidationError(where + ": label must be 0 or 1 (got " + std::to_string(label) + ")");

        ContractRecord rec;
        std::filesystem::path p = j["path"].get<std::string>();
        rec.path = p.is_absolute() ? p : base / p;
        rec.id = j.contains("id") ? j["id"].get<std::string>() : j["path"].get<std::string>();
        rec.label = static_cast<int>(label);
        if (j.contains("category")) rec.category = j["category"].get<std::string>();

        if (!seen_ids.insert(rec.id).second)
            throw ValidationError(where + ": duplicate id \"" + rec.id + "\"");

        try {
            rec.source = read_file(rec.path);
        } catch (const IoError&) {
            throw IoError(where + ": unreadable contract path " + rec.path.string());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// Stratified k-fold assignment: shuffle each label group with the seeded
/// generator, then deal round-robin. Deterministic for fixed inputs.
inline FoldSplit stratified_kfold(const std::vector<std::pair<std::string, int>>& labeled_ids,
                                  std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ArgumentError("stratified_kfold: k must be at least 2");
    if (k > labeled_ids.size())
        throw ArgumentError("stratified_kfold: k exceeds the number of records");

    FoldSplit split;
    split.k = k;
    std::size_t next_fold = 0;  // carried across label groups so small
                                // corpora still spread over every fold
    for (int label : {0, 1}) {
        std::vector<std::string> ids;
        for (const auto& [id, l] : labeled_ids)
            if (l == label) ids.push_back(id);
        Rng rng(derive_seed(seed, "kfold", static_cast<std::uint64_t>(label)));
        rng.shuffle(ids);
        for (const auto& id : ids) {
            split.assignments[id] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    return split;
}

inline FoldSplit stratified_kfold(const std::vector<ContractRecord>& records, std::size_t k,
                                  std::uint64_t seed) {
    std::vector<std::pair<std::string, int>> labeled;
    labeled.reserve(records.size());
    for (const auto& r : records) labeled.emplace_back(r.id, r.label);
    return stratified_kfold(labeled, k, seed);
}

inline CorpusStats corpus_stats(const std::vector<ContractRecord>& records) {
    CorpusStats s;
    s.total = records.size();
    for (const auto& r : records) {
        s.per_label[r.label]++;
        s.per_category[r.category ? *r.category : kUncategorized]++;
    }
    return s;
}

inline nlohmann::json stats_to_json(const CorpusStats& s) {
    nlohmann::json j;
    j["total"] = s.total;
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [label, count] : s.per_label) labels[std::to_string(label)] = count;
    j["per_label"] = labels;
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [cat, count] : s.per_category) cats[cat] = count;
    j["per_category"] = cats;
    return j;
}

}  // namespace reentra
