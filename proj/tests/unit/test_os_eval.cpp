#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "gliopipe/rng.hpp"
#include "gliopipe/survival/evaluate.hpp"

using namespace gliopipe;
using namespace gliopipe::survival;

TEST_CASE("bucket thresholds follow the challenge classes", "[os_eval]") {
    CHECK(bucketize(299) == OsBucket::Short);
    CHECK(bucketize(300) == OsBucket::Mid);
    CHECK(bucketize(450) == OsBucket::Mid);
    CHECK(bucketize(451) == OsBucket::Long);
    CHECK(bucketize(0) == OsBucket::Short);
    CHECK_THROWS_AS(bucketize(-1), DataError);

    SECTION("monotone and total over a grid") {
        int last = 0;
        for (double d = 0; d <= 900; d += 0.5) {
            const int b = static_cast<int>(bucketize(d));
            CHECK(b >= last);
            last = b;
        }
        CHECK(last == static_cast<int>(OsBucket::Long));
    }

    SECTION("configurable thresholds") {
        const BucketThresholds t{100, 200};
        CHECK(bucketize(99, t) == OsBucket::Short);
        CHECK(bucketize(150, t) == OsBucket::Mid);
        CHECK(bucketize(201, t) == OsBucket::Long);
    }
}

TEST_CASE("average ranks break ties by averaging", "[os_eval]") {
    const auto r = average_ranks({1.0, 2.0, 2.0, 4.0});
    CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
}

TEST_CASE("spearman correlation", "[os_eval]") {
    SECTION("any strictly monotone transform correlates exactly 1") {
        const std::vector<double> days{120, 340, 510, 95, 430};
        std::vector<double> transformed;
        for (double d : days) transformed.push_back(std::exp(d / 100.0) + 3.0);
        CHECK(spearman_r(transformed, days) == 1.0);
    }
    SECTION("reversal correlates -1") {
        CHECK(spearman_r({1, 2, 3, 4}, {4, 3, 2, 1}) == Catch::Approx(-1.0));
    }
    SECTION("size checks") {
        CHECK_THROWS_AS(spearman_r({1.0}, {1.0}), DataError);
        CHECK_THROWS_AS(spearman_r({1, 2}, {1, 2, 3}), DataError);
    }
}

TEST_CASE("evaluate_os reproduces the hand-computed fixture", "[os_eval]") {
    const std::vector<double> pred{100, 400, 500};
    const std::vector<double> truth{200, 350, 600};
    const OsEvaluation e = evaluate_os(pred, truth);
    CHECK(e.accuracy == 1.0);  // buckets (short,mid,long) on both sides
    CHECK(e.mse == Catch::Approx(7500.0));
    // squared errors {10000, 2500, 10000}: median 10000
    CHECK(e.median_se == Catch::Approx(10000.0));
    CHECK(e.std_se == Catch::Approx(std::sqrt((2 * 2500.0 * 2500.0 +
                                               5000.0 * 5000.0) / 3.0)));
    CHECK(e.spearman == 1.0);
}

TEST_CASE("evaluate_os on perfect and monotone predictions", "[os_eval]") {
    const std::vector<double> truth{100, 320, 480, 250};
    SECTION("pred == true") {
        const OsEvaluation e = evaluate_os(truth, truth);
        CHECK(e.accuracy == 1.0);
        CHECK(e.mse == 0.0);
        CHECK(e.median_se == 0.0);
        CHECK(e.std_se == 0.0);
        CHECK(e.spearman == 1.0);
    }
    SECTION("monotone transform keeps rank correlation 1 with positive mse") {
        std::vector<double> pred;
        for (double d : truth) pred.push_back(1.1 * d + 30.0);
        const OsEvaluation e = evaluate_os(pred, truth);
        CHECK(e.spearman == 1.0);
        CHECK(e.mse > 0.0);
    }
    SECTION("length mismatch") {
        CHECK_THROWS_AS(evaluate_os({1, 2}, {1, 2, 3}), DataError);
    }
}

TEST_CASE("evaluate_os is permutation equivariant", "[os_eval]") {
    std::vector<double> pred{100, 400, 500, 230, 610};
    std::vector<double> truth{200, 350, 600, 260, 580};
    const OsEvaluation base = evaluate_os(pred, truth);

    std::vector<std::size_t> perm{4, 2, 0, 3, 1};
    std::vector<double> pred_p, truth_p;
    for (std::size_t i : perm) {
        pred_p.push_back(pred[i]);
        truth_p.push_back(truth[i]);
    }
    const OsEvaluation shuffled = evaluate_os(pred_p, truth_p);
    CHECK(shuffled.accuracy == base.accuracy);
    CHECK(shuffled.mse == Catch::Approx(base.mse));
    CHECK(shuffled.median_se == Catch::Approx(base.median_se));
    CHECK(shuffled.std_se == Catch::Approx(base.std_se));
    CHECK(shuffled.spearman == Catch::Approx(base.spearman));
}

TEST_CASE("fold assignment partitions the index set", "[os_eval]") {
    for (std::size_t rows : {8u, 11u, 20u}) {
        const auto folds = make_folds(rows, 4, 7);
        std::vector<int> seen(rows, 0);
        for (const auto& fold : folds)
            for (std::size_t r : fold) ++seen[r];
        for (int s : seen) CHECK(s == 1);
        std::size_t largest = 0, smallest = rows;
        for (const auto& fold : folds) {
            largest = std::max(largest, fold.size());
            smallest = std::min(smallest, fold.size());
        }
        CHECK(largest - smallest <= 1);
    }
    CHECK_THROWS_AS(make_folds(10, 1, 0), ConfigError);
    CHECK_THROWS_AS(make_folds(3, 4, 0), DataError);
}
