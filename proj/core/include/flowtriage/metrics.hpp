#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowtriage::metrics {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
};

/// Undefined metrics (zero denominators) are reported as nullopt, never NaN.
using Metric = std::optional<double>;

ConfusionCounts confusion(const std::vector<bool>& verdicts, const std::vector<bool>& labels);

Metric precision(const ConfusionCounts& c);
Metric recall(const ConfusionCounts& c);
Metric accuracy(const ConfusionCounts& c);
/// F1 = TP / (TP + 0.5*(FP+FN)); defined (and zero) when TP=0 but FP+FN>0,
/// undefined only when every count that touches the positive class is zero.
Metric f1(const ConfusionCounts& c);

struct BaselineMetrics {
    Metric precision;
    double recall = 0.0;
    Metric f1;
    double accuracy = 0.0;
};

/// Closed-form expected metrics of a Bernoulli(p_vuln) predictor over a test
/// set with the given class counts.
BaselineMetrics expected_random_baseline(double p_vuln, std::uint64_t n_pos, std::uint64_t n_neg);

struct PRPoint {
    double precision = 0.0;
    double recall = 0.0;
    double threshold = 0.0;  // verdict = score >= threshold
};

/// Threshold sweep over the distinct scores, strictest first; tied scores
/// share a threshold. Requires at least one positive label.
std::vector<PRPoint> pr_curve(const std::vector<double>& scores, const std::vector<bool>& labels);

/// AP = sum over points of (R_n - R_{n-1}) * P_n with R_0 = 0, points in sweep
/// order (ascending recall).
double average_precision(const std::vector<PRPoint>& curve);

struct InterpolatedPR {
    std::vector<double> recall_grid;    // 101 points, 0.00 .. 1.00
    std::vector<double> mean_precision;
    std::vector<double> sd_precision;   // sample SD across curves; 0 for one curve
};

/// Linear interpolation of each curve onto a fixed recall grid, then pointwise
/// mean and sample SD across curves. Curves that stop short of recall 1 are
/// extended with their last precision.
InterpolatedPR interpolate_pr(const std::vector<std::vector<PRPoint>>& curves,
                              std::size_t grid_points = 101);

/// Precision among the ceil(fraction * n) highest-scoring samples, ties broken
/// by ascending sample index.
double top_n_precision(const std::vector<double>& scores, const std::vector<bool>& labels,
                       double fraction);

/// Chance-corrected agreement between two binary raters. Returns 1 when both
/// observed and chance agreement are perfect, nullopt when chance agreement is
/// 1 but observed is not.
Metric cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

struct SeedSummary {
    std::vector<double> values;
    double mean = 0.0;
    double sd = 0.0;            // sample SD (n-1 denominator)
    double ci_halfwidth = 0.0;  // 2.776 * SD (95%, n=5, Student's t)
};

/// Cross-seed summary; requires exactly five values.
SeedSummary seed_summary(const std::vector<double>& values);

struct OperatingTarget {
    enum class Kind { min_precision, max_fnr } kind = Kind::min_precision;
    double value = 0.8;
};

struct OperatingPoint {
    bool attainable = false;
    double threshold = 0.0;
    Metric precision;
    Metric recall;
    Metric fnr;                        // FN / (TP + FN)
    Metric negatives_excluded;         // fraction of negatives below threshold
    ConfusionCounts counts;
};

/// Sweep the distinct-score thresholds and pick the operating point for the
/// target: loosest threshold with precision >= p (maximizing recall), or
/// strictest threshold with FNR <= f (maximizing excluded negatives). An
/// unattainable target is reported, not thrown.
OperatingPoint select_operating_point(const std::vector<double>& scores,
                                      const std::vector<bool>& labels, OperatingTarget target);

}  // namespace flowtriage::metrics
