#include <doctest.h>

#include <cmath>
#include <random>

#include "flowtriage/common.hpp"
#include "flowtriage/metrics.hpp"
#include "support/oracles.hpp"

using namespace flowtriage;
using namespace flowtriage::metrics;

namespace {

std::vector<bool> repeat(bool value, std::size_t n) { return std::vector<bool>(n, value); }

std::vector<bool> concat(std::vector<bool> a, const std::vector<bool>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("confusion counts the four cells") {
    const auto labels = concat(repeat(true, 137), repeat(false, 52));

    const auto perfect = confusion(labels, labels);
    CHECK(perfect.tp == 137);
    CHECK(perfect.tn == 52);
    CHECK(perfect.fp == 0);
    CHECK(perfect.fn == 0);

    const auto all_positive = confusion(repeat(true, 189), labels);
    CHECK(all_positive.tp == 137);
    CHECK(all_positive.fp == 52);
    CHECK(all_positive.fn == 0);
    CHECK(all_positive.tn == 0);

    CHECK_THROWS_AS(confusion({}, {}), Error);
    CHECK_THROWS_AS(confusion({true}, {true, false}), Error);
}

TEST_CASE("all-positive predictor reproduces the random P=1 row") {
    const auto labels = concat(repeat(true, 137), repeat(false, 52));
    const auto c = confusion(repeat(true, 189), labels);
    CHECK(*precision(c) == doctest::Approx(0.725).epsilon(1e-3));
    CHECK(*recall(c) == doctest::Approx(1.000));
    CHECK(*f1(c) == doctest::Approx(0.841).epsilon(1e-3));
    CHECK(*accuracy(c) == doctest::Approx(0.725).epsilon(1e-3));
}

TEST_CASE("perfect-precision low-recall counts give F1 0.676") {
    // 70 of 137 positives confirmed, nothing misflagged
    const ConfusionCounts c{70, 0, 67, 52};
    CHECK(*precision(c) == doctest::Approx(1.000));
    CHECK(*recall(c) == doctest::Approx(0.511).epsilon(1e-3));
    CHECK(*f1(c) == doctest::Approx(0.676).epsilon(1e-3));
}

TEST_CASE("all-negative predictor: undefined precision, zero F1") {
    const auto labels = concat(repeat(true, 137), repeat(false, 52));
    const auto c = confusion(repeat(false, 189), labels);
    CHECK(!precision(c).has_value());
    CHECK(*f1(c) == 0.0);
    CHECK(*accuracy(c) == doctest::Approx(0.275).epsilon(1e-3));
    CHECK(*recall(c) == 0.0);
}

TEST_CASE("f1 is undefined only when no sample touches the positive class") {
    const ConfusionCounts all_tn{0, 0, 0, 10};
    CHECK(!f1(all_tn).has_value());
}

TEST_CASE("expected random baselines match the published rows") {
    const auto half = expected_random_baseline(0.5, 137, 52);
    CHECK(*half.f1 == doctest::Approx(0.592).epsilon(1e-3));
    CHECK(half.recall == doctest::Approx(0.500));
    CHECK(*half.precision == doctest::Approx(0.725).epsilon(1e-3));
    CHECK(half.accuracy == doctest::Approx(0.500).epsilon(1e-3));

    const auto prior = expected_random_baseline(989.0 / 1506.0, 137, 52);
    CHECK(*prior.f1 == doctest::Approx(0.689).epsilon(1e-3));
    CHECK(prior.recall == doctest::Approx(0.657).epsilon(1e-3));
    CHECK(prior.accuracy == doctest::Approx(0.571).epsilon(1e-3));

    const auto always = expected_random_baseline(1.0, 137, 52);
    CHECK(*always.f1 == doctest::Approx(0.841).epsilon(1e-3));
    CHECK(always.accuracy == doctest::Approx(0.725).epsilon(1e-3));

    const auto never = expected_random_baseline(0.0, 137, 52);
    CHECK(*never.f1 == 0.0);
    CHECK(!never.precision.has_value());
    CHECK(never.accuracy == doctest::Approx(0.275).epsilon(1e-3));
}

TEST_CASE("pr_curve sweeps distinct scores strictest first") {
    const auto curve = pr_curve({0.9, 0.8, 0.7}, {true, false, true});
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].precision == doctest::Approx(1.0));
    CHECK(curve[0].recall == doctest::Approx(0.5));
    CHECK(curve[1].precision == doctest::Approx(0.5));
    CHECK(curve[1].recall == doctest::Approx(0.5));
    CHECK(curve[2].precision == doctest::Approx(2.0 / 3.0));
    CHECK(curve[2].recall == doctest::Approx(1.0));
}

TEST_CASE("perfectly separating scores reach the (1,1) corner") {
    const auto curve = pr_curve({0.9, 0.8, 0.2, 0.1}, {true, true, false, false});
    bool corner = false;
    for (const auto& p : curve) {
        if (p.precision == 1.0 && p.recall == 1.0) corner = true;
    }
    CHECK(corner);
}

TEST_CASE("all-positive labels keep precision at 1") {
    for (const auto& p : pr_curve({0.3, 0.6, 0.9}, {true, true, true})) {
        CHECK(p.precision == 1.0);
    }
    CHECK_THROWS_AS(pr_curve({0.5}, {false}), Error);
}

TEST_CASE("average precision of the worked example is 5/6") {
    const auto curve = pr_curve({0.9, 0.8, 0.7}, {true, false, true});
    CHECK(average_precision(curve) == doctest::Approx(0.83333333).epsilon(1e-6));
}

TEST_CASE("average precision degenerate cases") {
    CHECK(average_precision(pr_curve({0.9, 0.8, 0.1, 0.2}, {true, true, false, false})) ==
          doctest::Approx(1.0));
    // one point at recall 1 with precision p
    const std::vector<PRPoint> single{{0.7, 1.0, 0.5}};
    CHECK(average_precision(single) == doctest::Approx(0.7));
    CHECK_THROWS_AS(average_precision({}), Error);
}

TEST_CASE("identical curves interpolate with zero spread") {
    const auto curve = pr_curve({0.9, 0.8, 0.7, 0.3}, {true, false, true, true});
    const auto interp = interpolate_pr({curve, curve, curve});
    for (const double sd : interp.sd_precision) CHECK(sd == 0.0);
    CHECK(interp.recall_grid.front() == 0.0);
    CHECK(interp.recall_grid.back() == 1.0);
}

TEST_CASE("a grid point between two recalls interpolates linearly") {
    // two points: (recall .5, precision 1.0) and (recall 1.0, precision .6)
    std::vector<PRPoint> curve{{1.0, 0.5, 0.9}, {0.6, 1.0, 0.1}};
    const auto interp = interpolate_pr({curve});
    // recall 0.75 sits halfway: precision 0.8
    CHECK(interp.mean_precision[75] == doctest::Approx(0.8).epsilon(1e-9));
    // at and below the first observed recall, the first precision holds
    CHECK(interp.mean_precision[0] == doctest::Approx(1.0));
    CHECK(interp.mean_precision[50] == doctest::Approx(1.0));
}

TEST_CASE("interpolation reproduces a curve at its own recall points") {
    const auto curve = pr_curve({0.9, 0.7, 0.5, 0.3}, {true, true, false, true});
    const auto interp = interpolate_pr({curve}, 101);
    for (const auto& p : curve) {
        const double grid_pos = p.recall * 100.0;
        const auto idx = static_cast<std::size_t>(std::llround(grid_pos));
        if (std::abs(grid_pos - static_cast<double>(idx)) > 1e-12) continue;  // off-grid
        // duplicate recalls collapse to their best precision
        double best = 0.0;
        for (const auto& q : curve) {
            if (q.recall == p.recall) best = std::max(best, q.precision);
        }
        CHECK(interp.mean_precision[idx] == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("near-perfect scores keep recall high at precision 0.8") {
    // 200 positives scored high, 50 negatives low, one negative in between
    std::vector<double> scores;
    std::vector<bool> labels;
    for (int i = 0; i < 200; ++i) {
        scores.push_back(0.9 + 0.0001 * i);
        labels.push_back(true);
    }
    scores.push_back(0.95);
    labels.push_back(false);
    for (int i = 0; i < 50; ++i) {
        scores.push_back(0.1 + 0.0001 * i);
        labels.push_back(false);
    }
    const auto interp = interpolate_pr({pr_curve(scores, labels)});
    double best_recall = 0.0;
    for (std::size_t i = 0; i < interp.recall_grid.size(); ++i) {
        if (interp.mean_precision[i] >= 0.8) best_recall = std::max(best_recall, interp.recall_grid[i]);
    }
    CHECK(best_recall >= 0.99);
}

TEST_CASE("top-N precision") {
    // separable ranking, N=10%
    std::vector<double> scores;
    std::vector<bool> labels;
    for (int i = 0; i < 30; ++i) {
        scores.push_back(1.0 - 0.01 * i);
        labels.push_back(i < 10);
    }
    CHECK(top_n_precision(scores, labels, 0.10) == doctest::Approx(1.0));
    // N = 100% equals the base rate exactly
    CHECK(top_n_precision(scores, labels, 1.0) == doctest::Approx(10.0 / 30.0));
    // worked example: top-2 of four
    CHECK(top_n_precision({0.9, 0.8, 0.7, 0.6}, {true, false, true, false}, 0.5) ==
          doctest::Approx(0.5));
}

TEST_CASE("kappa agrees with hand computations") {
    CHECK(*cohens_kappa({true, false, true}, {true, false, true}) == doctest::Approx(1.0));
    CHECK(*cohens_kappa({true, true, false, false}, {true, false, false, true}) ==
          doctest::Approx(0.0));
    CHECK(*cohens_kappa({true, false}, {false, true}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(cohens_kappa({true}, {true, false}), Error);
}

TEST_CASE("kappa is symmetric and label-flip invariant") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = oracles::random_instance(gen, 20);
        const auto& a = inst.labels;
        const auto& b = inst.verdicts;
        const auto ab = cohens_kappa(a, b);
        const auto ba = cohens_kappa(b, a);
        CHECK(ab.has_value() == ba.has_value());
        if (ab) CHECK(*ab == doctest::Approx(*ba).epsilon(1e-12));
        std::vector<bool> na, nb;
        for (const bool v : a) na.push_back(!v);
        for (const bool v : b) nb.push_back(!v);
        const auto flipped = cohens_kappa(na, nb);
        CHECK(ab.has_value() == flipped.has_value());
        if (ab) CHECK(*ab == doctest::Approx(*flipped).epsilon(1e-12));
    }
}

TEST_CASE("kappa with degenerate marginals") {
    // both raters constant in the same direction: chance agreement is 1 but
    // so is observed agreement
    CHECK(*cohens_kappa({true, true}, {true, true}) == 1.0);
    CHECK(*cohens_kappa({false, false, false}, {false, false, false}) == 1.0);
    // constant raters pointing opposite ways: p_e = 0, kappa = 0
    CHECK(*cohens_kappa({true, true}, {false, false}) == 0.0);
}

TEST_CASE("seed summary over five values") {
    const auto same = seed_summary({0.9, 0.9, 0.9, 0.9, 0.9});
    CHECK(same.sd == 0.0);
    CHECK(same.ci_halfwidth == 0.0);

    const auto skew = seed_summary({0, 0, 0, 0, 1});
    CHECK(skew.mean == doctest::Approx(0.2));
    CHECK(skew.sd == doctest::Approx(0.4472).epsilon(1e-4));
    CHECK(skew.ci_halfwidth == doctest::Approx(1.2415).epsilon(1e-4));

    // mean 0.886 with sample variance 1.71e-4
    const double d = std::sqrt(1.71e-4);
    const auto row = seed_summary({0.886 - d, 0.886 - d, 0.886, 0.886 + d, 0.886 + d});
    CHECK(row.mean == doctest::Approx(0.886).epsilon(1e-12));
    CHECK(row.sd == doctest::Approx(0.013077).epsilon(1e-4));
    CHECK(row.ci_halfwidth == doctest::Approx(0.0363).epsilon(1e-3));
    CHECK(row.ci_halfwidth == doctest::Approx(2.776 * row.sd).epsilon(1e-15));

    CHECK_THROWS_AS(seed_summary({1.0, 2.0}), Error);
}

TEST_CASE("operating point: separating scores give full recall at precision 0.8") {
    const auto point = select_operating_point({0.9, 0.8, 0.2, 0.1}, {true, true, false, false},
                                              {OperatingTarget::Kind::min_precision, 0.8});
    REQUIRE(point.attainable);
    CHECK(*point.recall == doctest::Approx(1.0));
    CHECK(*point.precision >= 0.8);
}

TEST_CASE("operating point worked example: threshold 0.9, recall 0.5") {
    const auto point = select_operating_point({0.9, 0.8, 0.7}, {true, false, true},
                                              {OperatingTarget::Kind::min_precision, 0.8});
    REQUIRE(point.attainable);
    CHECK(point.threshold == doctest::Approx(0.9));
    CHECK(*point.recall == doctest::Approx(0.5));
}

TEST_CASE("operating point can be unattainable") {
    const auto point = select_operating_point({0.5, 0.5, 0.5}, {true, false, false},
                                              {OperatingTarget::Kind::min_precision, 0.8});
    CHECK(!point.attainable);
}

TEST_CASE("max-FNR target picks the strictest qualifying threshold") {
    // scores sorted desc: labels T T F T F; FNR at each threshold: 2/3, 1/3, 1/3, 0, 0
    const std::vector<double> scores{0.9, 0.8, 0.7, 0.6, 0.5};
    const std::vector<bool> labels{true, true, false, true, false};
    const auto point = select_operating_point(scores, labels,
                                              {OperatingTarget::Kind::max_fnr, 1.0 / 3.0});
    REQUIRE(point.attainable);
    CHECK(point.threshold == doctest::Approx(0.8));
    CHECK(*point.fnr <= 1.0 / 3.0 + 1e-12);
    // excluded negatives: both negatives sit below 0.8
    CHECK(*point.negatives_excluded == doctest::Approx(1.0));
}

TEST_CASE("f1 equals the harmonic mean where precision and recall are defined") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 500; ++trial) {
        const auto inst = oracles::random_instance(gen, 20);
        const auto c = confusion(inst.verdicts, inst.labels);
        const auto p = precision(c);
        const auto r = recall(c);
        const auto f = f1(c);
        if (p && r && (*p + *r) > 0.0) {
            CHECK(*f == doctest::Approx(2.0 * *p * *r / (*p + *r)).epsilon(1e-12));
        }
    }
}

TEST_CASE("average precision matches the brute-force sweep on small instances") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 500; ++trial) {
        const auto inst = oracles::random_instance(gen, 20);
        const auto via_curve = average_precision(pr_curve(inst.scores, inst.labels));
        const auto brute = oracles::average_precision(inst.scores, inst.labels);
        CHECK(via_curve == doctest::Approx(brute).epsilon(1e-12));
    }
}
