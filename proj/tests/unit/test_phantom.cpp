#include <catch2/catch_amalgamated.hpp>

#include "gliopipe/phantom.hpp"

using namespace gliopipe;

namespace {

PhantomSpec base_spec() {
    PhantomSpec spec;
    spec.case_id = "p";
    spec.seed = 42;
    spec.dims = {32, 32, 32};
    spec.center = {16, 16, 16};
    spec.ncr_semi = {4, 4, 4};
    spec.tc_semi = {7, 7, 7};
    spec.wt_semi = {11, 10, 9};
    spec.noise_sigma = 0.03;
    return spec;
}

// independent voxel-center membership count
std::int64_t ellipsoid_count(const Dims3& dims, const std::array<double, 3>& center,
                             const std::array<double, 3>& semi) {
    std::int64_t n = 0;
    for (int d = 0; d < dims.d; ++d)
        for (int h = 0; h < dims.h; ++h)
            for (int w = 0; w < dims.w; ++w) {
                const double x = (d - center[0]) / semi[0];
                const double y = (h - center[1]) / semi[1];
                const double z = (w - center[2]) / semi[2];
                if (x * x + y * y + z * z <= 1.0) ++n;
            }
    return n;
}

}  // namespace

TEST_CASE("phantom generation is deterministic in the spec", "[phantom]") {
    const PhantomSpec spec = base_spec();
    auto [v1, l1] = generate_phantom(spec);
    auto [v2, l2] = generate_phantom(spec);
    CHECK(l1.labels.data() == l2.labels.data());
    for (int c = 0; c < kNumModalities; ++c)
        CHECK(v1.channels[c].data() == v2.channels[c].data());
}

TEST_CASE("NCR voxel count matches the brute-force membership oracle", "[phantom]") {
    PhantomSpec spec = base_spec();
    spec.noise_sigma = 0.0;
    auto [volume, label] = generate_phantom(spec);

    const MaskGrid ncr = region_mask(label, RegionId::NCR);
    CHECK(mask_count(ncr) == ellipsoid_count(spec.dims, spec.center, spec.ncr_semi));

    // composite regions follow the same membership rule
    const MaskGrid tc = region_mask(label, RegionId::TC);
    const MaskGrid wt = region_mask(label, RegionId::WT);
    CHECK(mask_count(tc) == ellipsoid_count(spec.dims, spec.center, spec.tc_semi));
    CHECK(mask_count(wt) == ellipsoid_count(spec.dims, spec.center, spec.wt_semi));
}

TEST_CASE("phantom labels are the three nested shells", "[phantom]") {
    PhantomSpec spec = base_spec();
    spec.noise_sigma = 0.0;
    auto [volume, label] = generate_phantom(spec);
    bool saw[3] = {false, false, false};
    for (auto v : label.labels.data()) {
        CHECK(valid_label(v));
        if (v == 1) saw[0] = true;
        if (v == 2) saw[1] = true;
        if (v == 4) saw[2] = true;
    }
    CHECK((saw[0] && saw[1] && saw[2]));
    // noise-free: background stays exactly zero
    for (std::size_t i = 0; i < label.labels.data().size(); ++i)
        if (label.labels.data()[i] == 0)
            for (int c = 0; c < kNumModalities; ++c)
                CHECK(volume.channels[c].data()[i] == 0.0f);
}

TEST_CASE("non-nested phantom spec is rejected", "[phantom]") {
    PhantomSpec spec = base_spec();
    spec.ncr_semi = {12, 12, 12};  // larger than wt
    CHECK_THROWS_AS(generate_phantom(spec), SpecError);

    PhantomSpec tiny = base_spec();
    tiny.dims = {6, 32, 32};
    CHECK_THROWS_AS(generate_phantom(tiny), SpecError);

    PhantomSpec touching = base_spec();
    touching.tc_semi = touching.wt_semi;
    CHECK_THROWS_AS(generate_phantom(touching), SpecError);
}
