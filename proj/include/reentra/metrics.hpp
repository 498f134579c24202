// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reentra/errors.hpp"

namespace reentra {

struct ConfusionCounts {
    long long tp = 0;
    long long tn = 0;
    long long fp = 0;
    long long fn = 0;

    long long total() const { return tp + tn + fp + fn; }
};

struct ScalarMetrics {
    double acc = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double pre = 0.0;
    double f1 = 0.0;
};

struct RocPoint {
    double threshold = 0.0;  // +inf for the all-negative starting point
    double fpr = 0.0;
    double tpr = 0.0;
};

struct Prediction {
    std::string id;
    double score = 0.0;
    int label = 0;
    int predicted = 0;
};

struct EvalReport {
    ConfusionCounts counts;
    ScalarMetrics scalars;
    std::vector<RocPoint> roc;
    std::optional<double> auc;  // empty when the test set is single-class
    std::vector<Prediction> predictions;
};

inline ConfusionCounts confusion(const std::vector<std::pair<int, int>>& pairs) {
    ConfusionCounts c;
    for (const auto& [label, predicted] : pairs) {
        if ((label != 0 && label != 1) || (predicted != 0 && predicted != 1))
            throw ArgumentError("confusion: labels and predictions must be 0 or 1");
        if (label == 1)
            (predicted == 1 ? c.tp : c.fn)++;
        else
            (predicted == 1 ? c.fp : c.tn)++;
    }
    return c;
}

inline ScalarMetrics scalar_metrics(const ConfusionCounts& c) {
    ScalarMetrics m;
    const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
    if (c.total() > 0) {
        m.acc = (tp + tn) / (tp + tn + fp + fn);
    } else {
        warn("scalar_metrics: empty confusion matrix, acc set to 0");
    }
    if (c.tp + c.fn > 0) {
        m.tpr = tp / (tp + fn);
    } else {
        warn("scalar_metrics: tp+fn is 0, tpr set to 0");
    }
    if (c.fp + c.tn > 0) {
        m.fpr = fp / (fp + tn);
    } else {
        warn("scalar_metrics: fp+tn is 0, fpr set to 0");
    }
    if (c.tp + c.fp > 0) {
        m.pre = tp / (tp + fp);
    } else {
        warn("scalar_metrics: tp+fp is 0, pre set to 0");
    }
    if (m.pre + m.tpr > 0.0) {
        m.f1 = 2.0 * m.pre * m.tpr / (m.pre + m.tpr);
    } else {
        warn("scalar_metrics: pre+tpr is 0, f1 set to 0");
    }
    return m;
}

/// Threshold sweep over the distinct scores in descending order, preceded by
/// a +inf point so the curve starts at (0,0). Grouping tied scores into one
/// point makes the trapezoidal area equal the pairwise ranking statistic
/// with ties counted as 1/2.
inline std::pair<std::vector<RocPoint>, std::optional<double>> roc_curve(
    const std::vector<std::pair<int, double>>& scored) {
    long long pos = 0, neg = 0;
    for (const auto& [label, score] : scored) {
        if (label != 0 && label != 1) throw ArgumentError("roc_curve: labels must be 0 or 1");
        if (!std::isfinite(score)) throw ArgumentError("roc_curve: scores must be finite");
        (label == 1 ? pos : neg)++;
    }

    std::vector<std::pair<double, int>> by_score;  // (score, label)
    by_score.reserve(scored.size());
    for (const auto& [label, score] : scored) by_score.emplace_back(score, label);
    std::sort(by_score.begin(), by_score.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });

    const double dp = pos > 0 ? static_cast<double>(pos) : 0.0;
    const double dn = neg > 0 ? static_cast<double>(neg) : 0.0;
    auto rate = [](long long count, double denom) {
        return denom > 0.0 ? static_cast<double>(count) / denom : 0.0;
    };

    std::vector<RocPoint> points;
    points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    long long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < by_score.size()) {
        const double s = by_score[i].first;
        while (i < by_score.size() && by_score[i].first == s) {
            (by_score[i].second == 1 ? tp : fp)++;
            ++i;
        }
        points.push_back({s, rate(fp, dn), rate(tp, dp)});
    }

    std::optional<double> auc;
    if (pos > 0 && neg > 0) {
        double area = 0.0;
        for (std::size_t k = 0; k + 1 < points.size(); ++k) {
            area += (points[k + 1].fpr - points[k].fpr) *
                    (points[k + 1].tpr + points[k].tpr) * 0.5;
        }
        auc = area;
    } else {
        warn("roc_curve: single-class input, auc undefined");
    }
    return {points, auc};
}

/// Assemble the full report from per-example predictions.
inline EvalReport make_report(std::vector<Prediction> predictions) {
    EvalReport r;
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::pair<int, double>> scored;
    pairs.reserve(predictions.size());
    scored.reserve(predictions.size());
    for (const auto& p : predictions) {
        pairs.emplace_back(p.label, p.predicted);
        scored.emplace_back(p.label, p.score);
    }
    r.counts = confusion(pairs);
    r.scalars = scalar_metrics(r.counts);
    auto [roc, auc] = roc_curve(scored);
    r.roc = std::move(roc);
    r.auc = auc;
    r.predictions = std::move(predictions);
    return r;
}

/// %.17g: enough digits to round-trip a double exactly.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["acc"] = r.scalars.acc;
    j["tpr"] = r.scalars.tpr;
    j["fpr"] = r.scalars.fpr;
    j["pre"] = r.scalars.pre;
    j["f1"] = r.scalars.f1;
    if (r.auc)
        j["auc"] = *r.auc;
    else
        j["auc"] = nullptr;
    j["counts"] = {{"tp", r.counts.tp}, {"tn", r.counts.tn}, {"fp", r.counts.fp}, {"fn", r.counts.fn}};
    return j;
}

inline std::string roc_to_csv(const std::vector<RocPoint>& roc) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : roc) {
        out += fmt_double(p.threshold);
        out += ',';
        out += fmt_double(p.fpr);
        out += ',';
        out += fmt_double(p.tpr);
        out += '\n';
    }
    return out;
}

}  // namespace reentra
