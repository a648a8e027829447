#include "flowtriage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowtriage/common.hpp"

namespace flowtriage::metrics {

ConfusionCounts confusion(const std::vector<bool>& verdicts, const std::vector<bool>& labels) {
    if (verdicts.size() != labels.size())
        throw Error("length-mismatch", "verdicts and labels must have equal length");
    if (verdicts.empty()) throw Error("empty-input", "confusion requires at least one sample");
    ConfusionCounts c;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (labels[i]) {
            (verdicts[i] ? c.tp : c.fn)++;
        } else {
            (verdicts[i] ? c.fp : c.tn)++;
        }
    }
    return c;
}

Metric precision(const ConfusionCounts& c) {
    const std::uint64_t denom = c.tp + c.fp;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

Metric recall(const ConfusionCounts& c) {
    const std::uint64_t denom = c.tp + c.fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

Metric accuracy(const ConfusionCounts& c) {
    const std::uint64_t denom = c.total();
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(denom);
}

Metric f1(const ConfusionCounts& c) {
    const double denom = static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp + c.fn);
    if (denom == 0.0) return std::nullopt;
    return static_cast<double>(c.tp) / denom;
}

BaselineMetrics expected_random_baseline(double p_vuln, std::uint64_t n_pos, std::uint64_t n_neg) {
    if (p_vuln < 0.0 || p_vuln > 1.0)
        throw Error("bad-value", "p_vuln must lie in [0, 1]");
    const double pos = static_cast<double>(n_pos);
    const double neg = static_cast<double>(n_neg);
    const double total = pos + neg;

    BaselineMetrics out;
    out.recall = p_vuln;
    out.accuracy = (p_vuln * pos + (1.0 - p_vuln) * neg) / total;
    if (p_vuln > 0.0) {
        out.precision = pos / total;  // expected TP/(TP+FP) of an unbiased coin
        out.f1 = p_vuln * pos / (p_vuln * pos + 0.5 * (p_vuln * neg + (1.0 - p_vuln) * pos));
    } else {
        out.precision = std::nullopt;
        out.f1 = 0.0;  // TP=0 with FN=n_pos > 0
    }
    return out;
}

namespace {

/// Distinct scores, descending: the sweep thresholds (strictest first).
std::vector<double> sweep_thresholds(const std::vector<double>& scores) {
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    return thresholds;
}

ConfusionCounts confusion_at(const std::vector<double>& scores, const std::vector<bool>& labels,
                             double threshold) {
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool verdict = scores[i] >= threshold;
        if (labels[i]) {
            (verdict ? c.tp : c.fn)++;
        } else {
            (verdict ? c.fp : c.tn)++;
        }
    }
    return c;
}

}  // namespace

std::vector<PRPoint> pr_curve(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size())
        throw Error("length-mismatch", "scores and labels must have equal length");
    if (std::find(labels.begin(), labels.end(), true) == labels.end())
        throw Error("no-positives", "pr_curve requires at least one positive label");

    std::vector<PRPoint> curve;
    for (const double t : sweep_thresholds(scores)) {
        const ConfusionCounts c = confusion_at(scores, labels, t);
        PRPoint p;
        p.threshold = t;
        p.precision = precision(c).value();  // at least one score >= t, so TP+FP > 0
        p.recall = recall(c).value();
        curve.push_back(p);
    }
    return curve;
}

double average_precision(const std::vector<PRPoint>& curve) {
    if (curve.empty()) throw Error("empty-input", "average_precision of an empty curve");
    double ap = 0.0;
    double prev_recall = 0.0;
    for (const auto& p : curve) {
        ap += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    return ap;
}

namespace {

/// Precision of one curve at a recall value, by linear interpolation between
/// the curve's distinct recall points. Duplicate recalls collapse to the best
/// precision seen at that recall; queries outside the observed range clamp to
/// the nearest end.
double interpolate_curve(const std::vector<PRPoint>& curve, double r) {
    std::vector<std::pair<double, double>> pts;  // (recall, precision), recall ascending
    for (const auto& p : curve) {
        if (!pts.empty() && pts.back().first == p.recall) {
            pts.back().second = std::max(pts.back().second, p.precision);
        } else {
            pts.emplace_back(p.recall, p.precision);
        }
    }
    if (r <= pts.front().first) return pts.front().second;
    if (r >= pts.back().first) return pts.back().second;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (r <= pts[i].first) {
            const auto [r0, p0] = pts[i - 1];
            const auto [r1, p1] = pts[i];
            const double w = (r - r0) / (r1 - r0);
            return p0 + w * (p1 - p0);
        }
    }
    return pts.back().second;
}

}  // namespace

InterpolatedPR interpolate_pr(const std::vector<std::vector<PRPoint>>& curves,
                              std::size_t grid_points) {
    if (curves.empty()) throw Error("empty-input", "interpolate_pr requires at least one curve");
    if (grid_points < 2) throw Error("bad-value", "interpolation grid needs at least 2 points");
    for (const auto& c : curves) {
        if (c.empty()) throw Error("empty-input", "interpolate_pr got an empty curve");
    }

    InterpolatedPR out;
    out.recall_grid.resize(grid_points);
    out.mean_precision.resize(grid_points);
    out.sd_precision.resize(grid_points);
    const double step = 1.0 / static_cast<double>(grid_points - 1);

    for (std::size_t gi = 0; gi < grid_points; ++gi) {
        const double r = static_cast<double>(gi) * step;
        out.recall_grid[gi] = r;
        std::vector<double> ps;
        ps.reserve(curves.size());
        for (const auto& c : curves) ps.push_back(interpolate_curve(c, r));
        const bool all_equal = std::all_of(ps.begin(), ps.end(),
                                           [&](double p) { return p == ps.front(); });
        if (all_equal) {  // exact: identical curves carry no spread
            out.mean_precision[gi] = ps.front();
            out.sd_precision[gi] = 0.0;
            continue;
        }
        const double mean = std::accumulate(ps.begin(), ps.end(), 0.0) / static_cast<double>(ps.size());
        out.mean_precision[gi] = mean;
        double sd = 0.0;
        if (ps.size() > 1) {
            double ss = 0.0;
            for (const double p : ps) ss += (p - mean) * (p - mean);
            sd = std::sqrt(ss / static_cast<double>(ps.size() - 1));
        }
        out.sd_precision[gi] = sd;
    }
    return out;
}

double top_n_precision(const std::vector<double>& scores, const std::vector<bool>& labels,
                       double fraction) {
    if (scores.size() != labels.size())
        throw Error("length-mismatch", "scores and labels must have equal length");
    if (scores.empty()) throw Error("empty-input", "top_n_precision requires samples");
    if (fraction <= 0.0 || fraction > 1.0)
        throw Error("bad-value", "fraction must lie in (0, 1]");

    const auto k = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(scores.size())));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];  // stable keeps ascending index among ties
    });

    std::size_t positives = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (labels[order[i]]) ++positives;
    }
    return static_cast<double>(positives) / static_cast<double>(k);
}

Metric cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a.size() != b.size())
        throw Error("length-mismatch", "rater vectors must have equal length");
    if (a.empty()) throw Error("empty-input", "cohens_kappa requires at least one sample");

    const auto n = static_cast<double>(a.size());
    double agree = 0.0, a_yes = 0.0, b_yes = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) ++agree;
        if (a[i]) ++a_yes;
        if (b[i]) ++b_yes;
    }
    const double p_o = agree / n;
    const double p_e = (a_yes / n) * (b_yes / n) + (1.0 - a_yes / n) * (1.0 - b_yes / n);
    if (p_e == 1.0) {
        if (p_o == 1.0) return 1.0;
        return std::nullopt;
    }
    return (p_o - p_e) / (1.0 - p_e);
}

SeedSummary seed_summary(const std::vector<double>& values) {
    if (values.size() != 5)
        throw Error("bad-value", "seed_summary requires exactly five values, got " +
                                     std::to_string(values.size()));
    SeedSummary s;
    s.values = values;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / 5.0;
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / 4.0);
    s.ci_halfwidth = 2.776 * s.sd;
    return s;
}

OperatingPoint select_operating_point(const std::vector<double>& scores,
                                      const std::vector<bool>& labels, OperatingTarget target) {
    if (scores.size() != labels.size())
        throw Error("length-mismatch", "scores and labels must have equal length");
    if (std::find(labels.begin(), labels.end(), true) == labels.end())
        throw Error("no-positives", "operating point selection requires a positive label");

    const std::vector<double> thresholds = sweep_thresholds(scores);  // strictest first

    OperatingPoint best;
    best.attainable = false;
    for (const double t : thresholds) {
        const ConfusionCounts c = confusion_at(scores, labels, t);
        const Metric prec = precision(c);
        const double fnr =
            static_cast<double>(c.fn) / static_cast<double>(c.tp + c.fn);  // pre: positives exist
        bool qualifies = false;
        if (target.kind == OperatingTarget::Kind::min_precision) {
            qualifies = prec.has_value() && *prec >= target.value;
        } else {
            qualifies = fnr <= target.value;
        }
        if (!qualifies) continue;

        OperatingPoint candidate;
        candidate.attainable = true;
        candidate.threshold = t;
        candidate.precision = prec;
        candidate.recall = recall(c);
        candidate.fnr = fnr;
        const std::uint64_t negs = c.fp + c.tn;
        candidate.negatives_excluded =
            negs == 0 ? Metric{} : Metric{static_cast<double>(c.tn) / static_cast<double>(negs)};
        candidate.counts = c;

        if (target.kind == OperatingTarget::Kind::min_precision) {
            // keep the loosest qualifying threshold: recall is non-decreasing
            // as the sweep loosens, so the last qualifying one wins
            best = candidate;
        } else {
            // strictest qualifying threshold: first hit wins
            return candidate;
        }
    }
    return best;
}

}  // namespace flowtriage::metrics
