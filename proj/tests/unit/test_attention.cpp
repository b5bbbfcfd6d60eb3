#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gliopipe/nn/attention.hpp"
#include "gliopipe/rng.hpp"

#include "grad_check.hpp"

using namespace gliopipe;
using namespace gliopipe::nn;

namespace {

Tensor random_tensor(int c, int d, int h, int w, std::uint64_t seed) {
    Tensor t(c, d, h, w);
    Rng rng(seed);
    for (auto& v : t.v) v = rng.normal(0.0, 1.0);
    return t;
}

void zero_params(SkipAttention& att) {
    auto wipe = [](Param& p) { std::fill(p.value.begin(), p.value.end(), 0.0); };
    wipe(att.spatial().weight);
    wipe(att.spatial().bias);
    wipe(att.channel().w1);
    wipe(att.channel().b1);
    wipe(att.channel().w2);
    wipe(att.channel().b2);
}

}  // namespace

TEST_CASE("spatial gate is sigmoid of a 1x1x1 squeeze", "[attention]") {
    SpatialGate gate("g", 3);
    const Tensor f = random_tensor(3, 4, 4, 4, 1);

    SECTION("zero weights give 0.5 everywhere") {
        const Tensor s = gate.forward(f);
        REQUIRE(s.c == 1);
        REQUIRE(s.dims() == f.dims());
        for (double v : s.v) CHECK(v == 0.5);
    }

    SECTION("identity weight on one channel is sigmoid of the value") {
        SpatialGate g1("g1", 1);
        g1.weight.value[0] = 1.0;
        Tensor x(1, 2, 2, 2);
        x.v[3] = 0.0;
        x.v[5] = 2.0;
        const Tensor s = g1.forward(x);
        CHECK(s.v[3] == 0.5);
        CHECK(s.v[5] == Catch::Approx(1.0 / (1.0 + std::exp(-2.0))));
    }

    SECTION("gate values stay strictly inside (0,1)") {
        Rng rng(7);
        for (auto& v : gate.weight.value) v = rng.normal(0, 1);
        gate.bias.value[0] = rng.normal(0, 1);
        const Tensor s = gate.forward(f);
        for (double v : s.v) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }

    SECTION("channel mismatch rejected") {
        CHECK_THROWS_AS(gate.forward(random_tensor(5, 2, 2, 2, 3)), ShapeError);
    }
}

TEST_CASE("spatial gate gradient matches finite differences", "[attention]") {
    SpatialGate gate("g", 4);
    Rng rng(11);
    for (auto& v : gate.weight.value) v = rng.normal(0, 0.7);
    gate.bias.value[0] = 0.2;
    const Tensor f = random_tensor(4, 3, 3, 3, 12);
    const Tensor r = random_tensor(1, 3, 3, 3, 13);  // fixed co-vector

    auto loss = [&]() {
        SpatialGate probe("p", 4);
        probe.weight.value = gate.weight.value;
        probe.bias.value = gate.bias.value;
        const Tensor s = probe.forward(f);
        double total = 0;
        for (std::size_t i = 0; i < s.v.size(); ++i) total += s.v[i] * r.v[i];
        return total;
    };

    gate.forward(f);
    gate.backward(r, f);
    CHECK(testutil::max_grad_error(gate.weight.value, gate.weight.grad, loss) < 1e-4);
    CHECK(testutil::max_grad_error(gate.bias.value, gate.bias.grad, loss) < 1e-4);
}

TEST_CASE("channel gate pools then squeezes", "[attention]") {
    ChannelGate gate("c", 4, 2);
    const Tensor f = random_tensor(4, 3, 3, 3, 21);

    SECTION("zero weights give 0.5 per channel") {
        const auto e = gate.forward(f);
        REQUIRE(e.size() == 4);
        for (double v : e) CHECK(v == 0.5);
    }

    SECTION("constant channels pool to the constant exactly") {
        Tensor constant(4, 2, 2, 2);
        for (int c = 0; c < 4; ++c)
            for (int x = 0; x < 8; ++x) constant.v[c * 8 + x] = 1.5 * (c + 1);
        gate.forward(constant);
        const auto& z = gate.pooled();
        for (int c = 0; c < 4; ++c) CHECK(z[c] == 1.5 * (c + 1));
    }

    SECTION("reduction must divide the channel count") {
        CHECK_THROWS_AS(ChannelGate("bad", 6, 4), ConfigError);
    }
}

TEST_CASE("channel gate gradient matches finite differences", "[attention]") {
    ChannelGate gate("c", 6, 2);
    Rng rng(31);
    gate.init_params(rng);
    for (auto& v : gate.b1.value) v = rng.normal(0, 0.2);
    for (auto& v : gate.b2.value) v = rng.normal(0, 0.2);
    const Tensor f = random_tensor(6, 3, 3, 3, 32);
    std::vector<double> r(6);
    for (auto& v : r) v = rng.normal(0, 1);

    auto loss = [&]() {
        ChannelGate probe("p", 6, 2);
        probe.w1.value = gate.w1.value;
        probe.b1.value = gate.b1.value;
        probe.w2.value = gate.w2.value;
        probe.b2.value = gate.b2.value;
        const auto e = probe.forward(f);
        double total = 0;
        for (std::size_t i = 0; i < e.size(); ++i) total += e[i] * r[i];
        return total;
    };

    gate.forward(f);
    gate.backward(r, f);
    CHECK(testutil::max_grad_error(gate.w1.value, gate.w1.grad, loss) < 1e-4);
    CHECK(testutil::max_grad_error(gate.b1.value, gate.b1.grad, loss) < 1e-4);
    CHECK(testutil::max_grad_error(gate.w2.value, gate.w2.grad, loss) < 1e-4);
    CHECK(testutil::max_grad_error(gate.b2.value, gate.b2.grad, loss) < 1e-4);
}

TEST_CASE("skip attention fuses identity and both excitations", "[attention]") {
    SECTION("zero parameters double the features exactly") {
        SkipAttention att("a", 4, 2);
        zero_params(att);
        const Tensor f = random_tensor(4, 3, 5, 2, 41);
        const Tensor out = att.forward(f);
        REQUIRE(out.same_shape(f));
        for (std::size_t i = 0; i < f.v.size(); ++i)
            CHECK(out.v[i] == Catch::Approx(2.0 * f.v[i]).margin(0.0));
    }

    SECTION("zero input maps to zero output") {
        SkipAttention att("a", 4, 2);
        Rng rng(3);
        att.init_params(rng);
        Tensor f(4, 2, 2, 2);
        const Tensor out = att.forward(f);
        for (double v : out.v) CHECK(v == 0.0);
    }

    SECTION("shape preserved for 20 random shapes") {
        Rng rng(55);
        for (int trial = 0; trial < 20; ++trial) {
            const int r = 1 + static_cast<int>(rng.uniform_index(2));
            const int c = static_cast<int>(r * (1 + rng.uniform_index(4)));
            const int d = 1 + static_cast<int>(rng.uniform_index(5));
            const int h = 1 + static_cast<int>(rng.uniform_index(5));
            const int w = 1 + static_cast<int>(rng.uniform_index(5));
            SkipAttention att("a", c, r);
            att.init_params(rng);
            const Tensor f = random_tensor(c, d, h, w, 100 + trial);
            const Tensor out = att.forward(f);
            CHECK(out.same_shape(f));
        }
    }

    SECTION("bounded amplification: |out| <= 3|F| elementwise") {
        Rng rng(66);
        SkipAttention att("a", 8, 2);
        att.init_params(rng);
        const Tensor f = random_tensor(8, 4, 4, 4, 67);
        const Tensor out = att.forward(f);
        for (std::size_t i = 0; i < f.v.size(); ++i)
            CHECK(std::abs(out.v[i]) <= 3.0 * std::abs(f.v[i]) + 1e-12);
    }
}

TEST_CASE("skip attention end-to-end gradient matches finite differences",
          "[attention]") {
    const int c = 6, r = 2;
    SkipAttention att("a", c, r);
    Rng rng(71);
    att.init_params(rng);
    for (auto& v : att.channel().b1.value) v = rng.normal(0, 0.1);
    for (auto& v : att.channel().b2.value) v = rng.normal(0, 0.1);
    att.spatial().bias.value[0] = -0.1;

    Tensor f = random_tensor(c, 3, 3, 3, 72);
    const Tensor cov = random_tensor(c, 3, 3, 3, 73);

    auto loss = [&]() {
        SkipAttention probe("p", c, r);
        probe.spatial().weight.value = att.spatial().weight.value;
        probe.spatial().bias.value = att.spatial().bias.value;
        probe.channel().w1.value = att.channel().w1.value;
        probe.channel().b1.value = att.channel().b1.value;
        probe.channel().w2.value = att.channel().w2.value;
        probe.channel().b2.value = att.channel().b2.value;
        const Tensor out = probe.forward(f);
        double total = 0;
        for (std::size_t i = 0; i < out.v.size(); ++i) total += out.v[i] * cov.v[i];
        return total;
    };

    att.forward(f);
    const Tensor gf = att.backward(cov);

    CHECK(testutil::max_grad_error(f.v, gf.v, loss) < 1e-4);
    CHECK(testutil::max_grad_error(att.spatial().weight.value, att.spatial().weight.grad,
                                   loss) < 1e-4);
    CHECK(testutil::max_grad_error(att.spatial().bias.value, att.spatial().bias.grad,
                                   loss) < 1e-4);
    CHECK(testutil::max_grad_error(att.channel().w1.value, att.channel().w1.grad, loss) <
          1e-4);
    CHECK(testutil::max_grad_error(att.channel().b1.value, att.channel().b1.grad, loss) <
          1e-4);
    CHECK(testutil::max_grad_error(att.channel().w2.value, att.channel().w2.grad, loss) <
          1e-4);
    CHECK(testutil::max_grad_error(att.channel().b2.value, att.channel().b2.grad, loss) <
          1e-4);
}
