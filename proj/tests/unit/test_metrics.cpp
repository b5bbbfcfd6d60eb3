#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gliopipe/metrics/cohort.hpp"
#include "gliopipe/metrics/segmentation.hpp"
#include "gliopipe/rng.hpp"

using namespace gliopipe;
using namespace gliopipe::metrics;

namespace {

MaskGrid mask_of(Dims3 dims, const std::vector<std::array<int, 3>>& voxels) {
    MaskGrid m(dims);
    for (const auto& v : voxels) m.at(v[0], v[1], v[2]) = 1;
    return m;
}

// Brute-force oracle: independent boundary extraction and all-pairs distances.
struct OracleHd {
    static std::vector<std::array<int, 3>> boundary(const MaskGrid& mask) {
        const Dims3 dims = mask.dims();
        std::vector<std::array<int, 3>> out;
        auto outside = [&](int d, int h, int w) {
            if (d < 0 || d >= dims.d || h < 0 || h >= dims.h || w < 0 || w >= dims.w)
                return true;
            return mask.at(d, h, w) == 0;
        };
        for (int d = 0; d < dims.d; ++d)
            for (int h = 0; h < dims.h; ++h)
                for (int w = 0; w < dims.w; ++w) {
                    if (!mask.at(d, h, w)) continue;
                    if (outside(d - 1, h, w) || outside(d + 1, h, w) ||
                        outside(d, h - 1, w) || outside(d, h + 1, w) ||
                        outside(d, h, w - 1) || outside(d, h, w + 1))
                        out.push_back({d, h, w});
                }
        return out;
    }

    static std::vector<double> pooled(const MaskGrid& a, const MaskGrid& b,
                                      const Spacing& sp) {
        const auto ba = boundary(a);
        const auto bb = boundary(b);
        auto dist = [&](const std::array<int, 3>& p, const std::array<int, 3>& q) {
            const double x = (p[0] - q[0]) * sp.d;
            const double y = (p[1] - q[1]) * sp.h;
            const double z = (p[2] - q[2]) * sp.w;
            return std::sqrt(x * x + y * y + z * z);
        };
        std::vector<double> out;
        for (const auto& p : ba) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : bb) best = std::min(best, dist(p, q));
            out.push_back(best);
        }
        for (const auto& q : bb) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& p : ba) best = std::min(best, dist(q, p));
            out.push_back(best);
        }
        return out;
    }

    // same percentile definition, written independently
    static double pct95(std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const double pos = 0.95 * (static_cast<double>(v.size()) - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        if (lo + 1 >= v.size()) return v.back();
        return v[lo] * (1.0 - (pos - std::floor(pos))) + v[lo + 1] * (pos - std::floor(pos));
    }

    static double hd95(const MaskGrid& a, const MaskGrid& b, const Spacing& sp) {
        return pct95(pooled(a, b, sp));
    }
    static double hdmax(const MaskGrid& a, const MaskGrid& b, const Spacing& sp) {
        const auto d = pooled(a, b, sp);
        return *std::max_element(d.begin(), d.end());
    }
};

MaskGrid random_blob(Dims3 dims, std::uint64_t seed, double fill) {
    Rng rng(seed);
    MaskGrid m(dims);
    for (auto& v : m.data()) v = rng.uniform01() < fill ? 1 : 0;
    return m;
}

}  // namespace

TEST_CASE("dice handles overlap and the degenerate rules", "[metrics]") {
    const Dims3 dims{16, 16, 16};
    MaskGrid g(dims);
    // G: 2n voxels; P: the first n of them
    const int n = 32;
    MaskGrid p(dims);
    int placed = 0;
    for (int d = 0; d < dims.d && placed < 2 * n; ++d)
        for (int h = 0; h < dims.h && placed < 2 * n; ++h)
            for (int w = 0; w < dims.w && placed < 2 * n; ++w) {
                g.at(d, h, w) = 1;
                if (placed < n) p.at(d, h, w) = 1;
                ++placed;
            }
    CHECK(dice(p, g) == Catch::Approx(2.0 / 3.0));

    CHECK(dice(g, g) == 1.0);
    MaskGrid empty(dims);
    CHECK(dice(empty, empty) == 1.0);
    CHECK(dice(empty, g) == 0.0);

    MaskGrid q(dims);
    q.at(15, 15, 15) = 1;  // disjoint from the block at low indices? ensure
    MaskGrid lone(dims);
    lone.at(0, 15, 15) = 1;
    CHECK(dice(q, lone) == 0.0);

    MaskGrid other({8, 8, 8});
    CHECK_THROWS_AS(dice(other, g), ShapeError);
}

TEST_CASE("dice is symmetric", "[metrics]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MaskGrid a = random_blob({8, 8, 8}, seed, 0.3);
        const MaskGrid b = random_blob({8, 8, 8}, seed + 100, 0.3);
        CHECK(dice(a, b) == dice(b, a));
    }
}

TEST_CASE("sensitivity and specificity count the confusion cells", "[metrics]") {
    const Dims3 dims{4, 4, 4};
    MaskGrid g(dims), p(dims);
    // gt: 4 voxels; pred hits 3 of them (TP=3, FN=1)
    g.at(0, 0, 0) = g.at(0, 0, 1) = g.at(0, 0, 2) = g.at(0, 0, 3) = 1;
    p.at(0, 0, 0) = p.at(0, 0, 1) = p.at(0, 0, 2) = 1;
    CHECK(sensitivity(p, g) == Catch::Approx(0.75));

    CHECK(sensitivity(g, g) == 1.0);
    CHECK(specificity(g, g) == 1.0);

    MaskGrid all(dims, 1);
    CHECK(specificity(all, g) == 0.0);  // every background voxel is a FP

    // complement-swap identity
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const MaskGrid a = random_blob(dims, seed, 0.4);
        const MaskGrid b = random_blob(dims, seed + 50, 0.4);
        MaskGrid na(dims), nb(dims);
        for (std::size_t i = 0; i < a.data().size(); ++i) {
            na.data()[i] = a.data()[i] ? 0 : 1;
            nb.data()[i] = b.data()[i] ? 0 : 1;
        }
        CHECK(sensitivity(a, b) == specificity(na, nb));
    }
}

TEST_CASE("hausdorff95 matches hand cases", "[metrics]") {
    const Dims3 dims{16, 16, 16};
    const Spacing mm{1, 1, 1};
    const MaskGrid a = mask_of(dims, {{3, 4, 5}});
    const MaskGrid b = mask_of(dims, {{3, 4, 10}});
    CHECK(hausdorff95(a, b, mm) == Catch::Approx(5.0));
    CHECK(hausdorff95(a, a, mm) == 0.0);

    MaskGrid empty(dims);
    CHECK(hausdorff95(empty, empty, mm) == 0.0);
    CHECK(hausdorff95(empty, a, mm) ==
          Catch::Approx(std::sqrt(3.0 * 16.0 * 16.0)));  // volume diagonal penalty

    SECTION("anisotropic spacing scales the distance") {
        const Spacing aniso{1, 1, 2.5};
        CHECK(hausdorff95(a, b, aniso) == Catch::Approx(12.5));
    }
}

TEST_CASE("hausdorff matches the brute-force oracle on random masks", "[metrics]") {
    const Spacing mm{1.0, 1.25, 0.75};
    int done = 0;
    for (std::uint64_t seed = 0; done < 40; ++seed) {
        const MaskGrid a = random_blob({9, 8, 7}, seed * 2 + 1, 0.2);
        const MaskGrid b = random_blob({9, 8, 7}, seed * 2 + 2, 0.2);
        if (mask_count(a) == 0 || mask_count(b) == 0) continue;
        ++done;
        CHECK(hausdorff95(a, b, mm) == Catch::Approx(OracleHd::hd95(a, b, mm)).margin(1e-9));
        CHECK(hausdorff(a, b, mm, HausdorffKind::Max) ==
              Catch::Approx(OracleHd::hdmax(a, b, mm)).margin(1e-9));
        // pooled-set symmetry
        CHECK(hausdorff95(a, b, mm) == Catch::Approx(hausdorff95(b, a, mm)).margin(1e-12));
    }
}

TEST_CASE("evaluate_case scores every region", "[metrics]") {
    const Dims3 dims{12, 12, 12};
    LabelVolume gt;
    gt.case_id = "c";
    gt.labels = ByteGrid(dims);
    for (int d = 2; d < 6; ++d)
        for (int h = 2; h < 6; ++h)
            for (int w = 2; w < 6; ++w) gt.labels.at(d, h, w) = 1;
    for (int d = 6; d < 9; ++d)
        for (int h = 2; h < 6; ++h)
            for (int w = 2; w < 6; ++w) gt.labels.at(d, h, w) = 4;
    for (int d = 9; d < 11; ++d)
        for (int h = 2; h < 6; ++h)
            for (int w = 2; w < 6; ++w) gt.labels.at(d, h, w) = 2;

    SECTION("identical volumes are perfect") {
        const SegCaseMetrics m = evaluate_case(gt, gt, {1, 1, 1});
        for (const auto& r : m.per_region) {
            CHECK(r.dice == 1.0);
            CHECK(r.hd95 == 0.0);
            CHECK(r.sensitivity == 1.0);
            CHECK(r.specificity == 1.0);
        }
    }

    SECTION("empty-empty region evaluates to the degenerate ideals") {
        LabelVolume no_et = gt;
        for (auto& v : no_et.labels.data())
            if (v == 4) v = 1;
        const SegCaseMetrics m = evaluate_case(no_et, no_et, {1, 1, 1});
        CHECK(m.region(RegionId::ET).dice == 1.0);
        CHECK(m.region(RegionId::ET).hd95 == 0.0);
    }

    SECTION("label swap 1<->4 keeps TC fixed and degrades ET") {
        LabelVolume swapped = gt;
        for (auto& v : swapped.labels.data()) {
            if (v == 1) {
                v = 4;
            } else if (v == 4) {
                v = 1;
            }
        }
        const SegCaseMetrics m = evaluate_case(swapped, gt, {1, 1, 1});
        CHECK(m.region(RegionId::TC).dice == 1.0);
        CHECK(m.region(RegionId::WT).dice == 1.0);
        CHECK(m.region(RegionId::ET).dice < 0.5);
    }
}

TEST_CASE("cohort summary computes mean, population std, median", "[metrics]") {
    SegCaseMetrics a, b, c;
    a.case_id = "a";
    b.case_id = "b";
    c.case_id = "c";
    for (int r = 0; r < 3; ++r) {
        a.per_region[r].dice = 0.2;
        b.per_region[r].dice = 0.5;
        c.per_region[r].dice = 0.8;
    }
    const CohortSummary s = summarize_cohort({a, b, c});
    CHECK(s.values[0][0][0] == Catch::Approx(0.5));  // mean dice ET
    CHECK(s.values[2][0][0] == Catch::Approx(0.5));  // median
    CHECK(s.values[1][0][0] == Catch::Approx(std::sqrt(0.06)));  // population std

    SECTION("single case: std 0, mean == median") {
        const CohortSummary one = summarize_cohort({a});
        CHECK(one.values[0][0][1] == Catch::Approx(0.2));
        CHECK(one.values[1][0][1] == 0.0);
        CHECK(one.values[2][0][1] == Catch::Approx(0.2));
    }

    SECTION("empty cohort rejected") {
        CHECK_THROWS_AS(summarize_cohort({}), DataError);
    }
}

TEST_CASE("summary CSV renders in the report layout", "[metrics]") {
    // Dice means 0.704 (ET), 0.898 (WT), 0.792 (TC) must land in the first
    // three numeric columns of the Mean row, in that order.
    SegCaseMetrics row;
    row.case_id = "fixture";
    row.per_region[0].dice = 0.704;
    row.per_region[1].dice = 0.898;
    row.per_region[2].dice = 0.792;
    const std::string csv = render_summary_csv(summarize_cohort({row}));
    const auto lines = [&] {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : csv) {
            if (ch == '\n') {
                out.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        return out;
    }();
    REQUIRE(lines.size() == 4);
    CHECK(lines[0].rfind("stat,dice_et,dice_wt,dice_tc,hausdorff_et", 0) == 0);
    CHECK(lines[1].rfind("Mean,0.704,0.898,0.792,", 0) == 0);
    CHECK(lines[2].rfind("StdDev,", 0) == 0);
    CHECK(lines[3].rfind("Median,", 0) == 0);
}
