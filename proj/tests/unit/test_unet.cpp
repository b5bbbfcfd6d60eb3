#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gliopipe/nn/checkpoint.hpp"
#include "gliopipe/nn/unet.hpp"
#include "gliopipe/rng.hpp"

#include "grad_check.hpp"
#include "test_util.hpp"

using namespace gliopipe;
using namespace gliopipe::nn;

namespace {

Tensor random_input(int c, int d, int h, int w, std::uint64_t seed) {
    Tensor t(c, d, h, w);
    Rng rng(seed);
    for (auto& v : t.v) v = rng.normal(0.0, 1.0);
    return t;
}

NetworkConfig small_config(bool attention) {
    NetworkConfig cfg;
    cfg.in_channels = 4;
    cfg.num_classes = 4;
    cfg.base_filters = 4;
    cfg.depth = 3;
    cfg.reduction_ratio = 2;
    cfg.attention = attention;
    return cfg;
}

// closed-form attention parameter overhead per decoder level of width C:
// spatial (C+1) + channel (C*C/r + C/r + C/r*C + C)
std::size_t attention_overhead(const NetworkConfig& cfg) {
    std::size_t total = 0;
    for (int level = 0; level < cfg.depth - 1; ++level) {
        const std::size_t c = static_cast<std::size_t>(cfg.base_filters) << level;
        const std::size_t cr = c / static_cast<std::size_t>(cfg.reduction_ratio);
        total += (c + 1) + (c * cr + cr + cr * c + c);
    }
    return total;
}

}  // namespace

TEST_CASE("unet output preserves spatial dims and class count", "[unet]") {
    UNet3d model(small_config(true), 1);
    const Tensor logits = model.forward(random_input(4, 16, 16, 16, 2));
    CHECK(logits.c == 4);
    CHECK(logits.d == 16);
    CHECK(logits.h == 16);
    CHECK(logits.w == 16);

    SECTION("indivisible dims are rejected") {
        CHECK_THROWS_AS(model.forward(random_input(4, 10, 16, 16, 3)), ShapeError);
    }
    SECTION("wrong channel count is rejected") {
        CHECK_THROWS_AS(model.forward(random_input(3, 16, 16, 16, 3)), ShapeError);
    }
}

TEST_CASE("config invariants are enforced", "[unet]") {
    NetworkConfig bad = small_config(true);
    bad.depth = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config(true);
    bad.base_filters = 3;
    bad.reduction_ratio = 2;  // 3 % 2 != 0
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config(true);
    bad.fusion = "sequential";
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config(false);
    bad.base_filters = 3;  // no attention: reduction does not constrain
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("attention arm adds exactly the closed-form parameter count", "[unet]") {
    for (int base : {4, 8}) {
        for (int depth : {2, 3, 4}) {
            NetworkConfig with = small_config(true);
            with.base_filters = base;
            with.depth = depth;
            NetworkConfig without = with;
            without.attention = false;
            UNet3d a(with, 9), b(without, 9);
            CHECK(a.parameter_count() - b.parameter_count() == attention_overhead(with));
        }
    }
}

TEST_CASE("both arms share common parameters under one seed", "[unet]") {
    UNet3d with(small_config(true), 4);
    UNet3d without(small_config(false), 4);
    auto pa = with.params();
    auto pb = without.params();
    // the attention arm holds extra tensors; the shared ones match by name
    std::size_t matched = 0;
    for (Param* b : pb) {
        for (Param* a : pa)
            if (a->name == b->name) {
                CHECK(a->value == b->value);
                ++matched;
                break;
            }
    }
    CHECK(matched == pb.size());
}

TEST_CASE("zeroed attention parameters reduce the unit to a doubling", "[unet]") {
    UNet3d model(small_config(true), 5);
    for (auto& att : model.attentions()) {
        auto wipe = [](Param& p) { std::fill(p.value.begin(), p.value.end(), 0.0); };
        wipe(att.spatial().weight);
        wipe(att.spatial().bias);
        wipe(att.channel().w1);
        wipe(att.channel().b1);
        wipe(att.channel().w2);
        wipe(att.channel().b2);
        const int channels = static_cast<int>(att.spatial().weight.size());
        const Tensor f = random_input(channels, 4, 4, 4, 50);
        const Tensor out = att.forward(f);
        for (std::size_t i = 0; i < f.v.size(); ++i)
            CHECK(out.v[i] == 2.0 * f.v[i]);
    }
}

TEST_CASE("model construction is deterministic in the seed", "[unet]") {
    UNet3d a(small_config(true), 77), b(small_config(true), 77), c(small_config(true), 78);
    const auto pa = a.params(), pb = b.params(), pc = c.params();
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->value == pb[i]->value);
        if (pa[i]->value != pc[i]->value) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("whole-model gradient spot check against finite differences", "[unet]") {
    NetworkConfig cfg = small_config(true);
    cfg.base_filters = 2;
    cfg.depth = 2;
    UNet3d model(cfg, 13);
    Tensor x = random_input(4, 4, 4, 4, 14);
    const Tensor cov = random_input(cfg.num_classes, 4, 4, 4, 15);

    auto loss = [&]() {
        UNet3d probe(cfg, 13);
        auto src = model.params();
        auto dst = probe.params();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
        const Tensor out = probe.forward(x);
        double total = 0;
        for (std::size_t i = 0; i < out.v.size(); ++i) total += out.v[i] * cov.v[i];
        return total;
    };

    model.zero_grad();
    model.forward(x);
    model.backward(cov);

    // sample a handful of entries from every tensor
    Rng rng(16);
    double worst = 0.0;
    for (Param* p : model.params()) {
        for (int probe_i = 0; probe_i < 3; ++probe_i) {
            const auto j = static_cast<std::size_t>(rng.uniform_index(p->value.size()));
            const double numeric = testutil::central_diff(p->value[j], loss);
            worst = std::max(worst, testutil::rel_err(p->grad[j], numeric));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("checkpoint round trip restores parameters bit-exactly", "[unet]") {
    const auto dir = testutil::temp_dir("ckpt");
    UNet3d model(small_config(true), 21);
    const std::vector<double> history{1.5, 1.2, 0.9};
    const std::string path = (dir / "model.ckpt").string();
    Checkpoint::save(path, model, 3, history, {16, 16, 16});

    auto [restored, meta] = Checkpoint::load(path);
    CHECK(meta.step == 3);
    CHECK(meta.loss_history == history);
    CHECK(meta.crop_dims == Dims3{16, 16, 16});
    CHECK(meta.config == model.config());
    const auto pa = model.params(), pb = restored.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);

    SECTION("architecture mismatch is rejected") {
        UNet3d other(small_config(false), 21);
        const std::string p2 = (dir / "other.ckpt").string();
        Checkpoint::save(p2, other, 0, {}, {16, 16, 16});
        auto [m2, meta2] = Checkpoint::load(p2);
        CHECK(meta2.config.attention == false);
    }

    SECTION("corrupt magic is rejected") {
        const std::string p3 = (dir / "bad.ckpt").string();
        gliopipe::write_text_file(p3, "not a checkpoint");
        CHECK_THROWS_AS(Checkpoint::load(p3), ConfigError);
    }

    SECTION("unknown version is rejected") {
        std::string bytes = gliopipe::read_text_file(path);
        const auto at = bytes.find("\"version\":1");
        REQUIRE(at != std::string::npos);
        bytes[at + 10] = '9';  // same header length, different version
        const std::string p4 = (dir / "v9.ckpt").string();
        gliopipe::write_text_file(p4, bytes);
        CHECK_THROWS_AS(Checkpoint::load(p4), ConfigError);
    }
}
