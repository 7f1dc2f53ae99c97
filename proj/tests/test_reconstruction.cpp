#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gradcheck.hpp"
#include "lfld/fourier.hpp"
#include "lfld/optim.hpp"
#include "lfld/reconstruction.hpp"

using namespace lfld;

namespace {

template <typename S>
void fill_params(ReconstructionNetT<S>& net, S value) {
    ParamList<S> params;
    net.collect(params, "rec");
    for (auto& p : params)
        for (std::size_t i = 0; i < p.tensor.size(); ++i) p.tensor.data()[i] = value;
}

}  // namespace

TEST_CASE("fourier kernel: shape, distribution, trainability") {
    auto b150 = init_fourier_kernel<float>(50, 3, 1.0, 7);
    CHECK(b150.shape() == Shape{50, 3});
    CHECK(b150.size() == 150);
    CHECK(b150.requires_grad());

    auto b300 = init_fourier_kernel<float>(100, 3, 1.0, 7);
    CHECK(b300.size() == 300);

    auto empty = init_fourier_kernel<float>(0, 3, 1.0, 7);
    CHECK(empty.shape() == Shape{0, 3});
    CHECK(empty.size() == 0);

    // Moments of a big draw match the requested Gaussian(0, scale^2).
    auto big = init_fourier_kernel<float>(4000, 4, 2.0, 99);
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < big.size(); ++i) mean += big.data()[i];
    mean /= double(big.size());
    for (std::size_t i = 0; i < big.size(); ++i) {
        const double d = big.data()[i] - mean;
        var += d * d;
    }
    var /= double(big.size() - 1);
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(0.05));

    // Same seed, same kernel; different seed differs.
    auto again = init_fourier_kernel<float>(50, 3, 1.0, 7);
    CHECK(std::memcmp(again.data(), b150.data(), sizeof(float) * b150.size()) == 0);
    auto other = init_fourier_kernel<float>(50, 3, 1.0, 8);
    CHECK(std::memcmp(other.data(), b150.data(), sizeof(float) * b150.size()) != 0);

    CHECK_THROWS_AS(init_fourier_kernel<float>(4, 2, -0.5, 1), ConfigError);
    CHECK_THROWS_AS(init_fourier_kernel<float>(-1, 2, 1.0, 1), ConfigError);
}

TEST_CASE("fourier embedding: zero coordinate and zero kernel") {
    auto B = init_fourier_kernel<float>(4, 3, 1.0, 3);
    auto x0 = Tensor::zeros({1, 3});
    auto e = fourier_embed(x0, B);
    REQUIRE(e.shape() == Shape{1, 8});
    for (int j = 0; j < 4; ++j) CHECK(e.at(0, j) == 1.0f);
    for (int j = 4; j < 8; ++j) CHECK(e.at(0, j) == 0.0f);

    auto Bz = Tensor::zeros({4, 3});
    SplitMix64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<float> xs(3);
        for (auto& v : xs) v = float(rng.uniform(-10.0, 10.0));
        auto x = Tensor::from_data(xs, {1, 3});
        auto ez = fourier_embed(x, Bz);
        for (int j = 0; j < 4; ++j) CHECK(ez.at(0, j) == 1.0f);
        for (int j = 4; j < 8; ++j) CHECK(ez.at(0, j) == 0.0f);
    }
}

TEST_CASE("fourier embedding: pythagorean identity and shape errors") {
    SplitMix64 rng(21);
    auto B = init_fourier_kernel<float>(6, 2, 3.0, 12);
    std::vector<float> xs(10 * 2);
    for (auto& v : xs) v = float(rng.uniform(-2.0, 2.0));
    auto x = Tensor::from_data(xs, {10, 2});
    auto e = fourier_embed(x, B);
    REQUIRE(e.shape() == Shape{10, 12});
    for (int r = 0; r < 10; ++r)
        for (int i = 0; i < 6; ++i) {
            const double c = e.at(r, i), s = e.at(r, 6 + i);
            CHECK(std::abs(c * c + s * s - 1.0) < 1e-6);
        }

    auto bad = Tensor::zeros({10, 3});
    CHECK_THROWS_AS(fourier_embed(bad, B), ShapeError);

    // Empty kernel: embedding has zero columns.
    auto none = fourier_embed(x, init_fourier_kernel<float>(0, 2, 1.0, 1));
    CHECK(none.shape() == Shape{10, 0});
}

TEST_CASE("fourier embedding: gradient w.r.t. kernel matches finite differences") {
    SplitMix64 rng(31);
    auto B = testing::random_leaf(rng, {5, 2}, 0.7);
    auto x = testing::random_leaf(rng, {7, 2}, 1.0);
    x.set_requires_grad(false);
    auto target = testing::random_leaf(rng, {7, 10}, 1.0);
    target.set_requires_grad(false);

    auto res = testing::gradcheck({&B}, [&] { return mse(fourier_embed(x, B), target); });
    CHECK(res.n_checked == 10);
    CHECK(res.max_rel_err < 1e-4);

    // And w.r.t. the coordinates themselves.
    x.set_requires_grad(true);
    auto res2 = testing::gradcheck({&B, &x}, [&] { return mse(fourier_embed(x, B), target); });
    CHECK(res2.n_checked == 24);
    CHECK(res2.max_rel_err < 1e-4);
}

TEST_CASE("reconstruction: all-zero parameters give zero output") {
    ReconstructionConfig cfg;
    cfg.n_state = 3;
    cfg.n_freq = 4;
    cfg.n_dim = 2;
    cfg.hidden = {16, 16};
    cfg.n_out = 2;
    SplitMix64 rng(5);
    auto net = ReconstructionNet::build(cfg, rng);
    fill_params(net, 0.0f);
    auto kernel = init_fourier_kernel<float>(4, 2, 1.0, 6);

    auto s = Tensor::from_data({0.3f, -0.2f, 1.1f}, {1, 3});
    std::vector<float> xs(9 * 2);
    SplitMix64 xrng(8);
    for (auto& v : xs) v = float(xrng.uniform(-1.0, 1.0));
    auto x = Tensor::from_data(xs, {9, 2});
    auto u = reconstruct(net, kernel, s, x);
    REQUIRE(u.shape() == Shape{9, 2});
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u.data()[i] == 0.0f);
}

TEST_CASE("reconstruction: disabled embedding consumes exactly the state width") {
    ReconstructionConfig cfg;
    cfg.n_state = 4;
    cfg.n_freq = 0;
    cfg.n_dim = 2;
    cfg.hidden = {8};
    cfg.n_out = 1;
    SplitMix64 rng(5);
    auto net = ReconstructionNet::build(cfg, rng);
    CHECK(net.mlp.in_width() == 4);

    auto s = Tensor::from_data({0.1f, 0.2f, 0.3f, 0.4f}, {1, 4});
    auto x = Tensor::zeros({5, 2});
    auto kernel = init_fourier_kernel<float>(0, 2, 1.0, 1);
    auto u = reconstruct(net, kernel, s, x);
    CHECK(u.shape() == Shape{5, 1});
    // Coordinate-free readout: every node sees the same input row.
    for (int r = 1; r < 5; ++r) CHECK(u.at(r, 0) == u.at(0, 0));
}

TEST_CASE("reconstruction: hand-set single hidden unit reproduces gelu(1)") {
    ReconstructionConfig cfg;
    cfg.n_state = 1;
    cfg.n_freq = 0;
    cfg.n_dim = 0;
    cfg.hidden = {1};
    cfg.n_out = 1;
    SplitMix64 rng(5);
    auto net = ReconstructionNet::build(cfg, rng);
    fill_params(net, 1.0f);
    for (auto& b : net.mlp.biases)
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = 0.0f;

    auto s = Tensor::from_data({1.0f}, {1, 1});
    auto x = Tensor::zeros({1, 0});
    auto kernel = init_fourier_kernel<float>(0, 0, 1.0, 1);
    auto u = reconstruct(net, kernel, s, x);
    CHECK(u.item() == doctest::Approx(0.8413447).epsilon(1e-4));
}

TEST_CASE("reconstruction: raw-coordinate features and optional channels") {
    ReconstructionConfig cfg;
    cfg.n_state = 2;
    cfg.n_freq = 0;
    cfg.n_dim = 1;
    cfg.raw_coords = true;
    cfg.dim_g = 2;
    cfg.hidden = {8};
    cfg.n_out = 1;
    SplitMix64 rng(5);
    auto net = ReconstructionNet::build(cfg, rng);
    CHECK(net.mlp.in_width() == 2 + 1 + 2);

    auto x = Tensor::from_data({0.0f, 0.5f, 1.0f}, {3, 1});
    auto g = Tensor::from_data({1.f, 2.f, 3.f, 4.f, 5.f, 6.f}, {3, 2});
    auto kernel = init_fourier_kernel<float>(0, 1, 1.0, 1);
    auto feats = point_features(cfg, kernel, x, &g);
    REQUIRE(feats.shape() == Shape{3, 3});
    CHECK(feats.at(1, 0) == 0.5f);
    CHECK(feats.at(2, 1) == 5.0f);
    CHECK(feats.at(2, 2) == 6.0f);

    // Missing or mis-shaped channels are rejected by name.
    CHECK_THROWS_WITH_AS(point_features(cfg, kernel, x), doctest::Contains("G"), ShapeError);
    auto gbad = Tensor::zeros({3, 1});
    CHECK_THROWS_AS(point_features(cfg, kernel, x, &gbad), ShapeError);

    auto s = Tensor::from_data({0.1f, -0.1f}, {1, 2});
    auto u = reconstruct(net, kernel, s, x, &g);
    CHECK(u.shape() == Shape{3, 1});
}

TEST_CASE("reconstruction: config validation") {
    SplitMix64 rng(5);
    ReconstructionConfig cfg;
    cfg.n_state = 0;
    cfg.n_freq = 0;
    cfg.n_out = 1;
    CHECK_THROWS_AS(ReconstructionNet::build(cfg, rng), ConfigError);
    cfg.n_state = 2;
    cfg.n_out = 0;
    CHECK_THROWS_AS(ReconstructionNet::build(cfg, rng), ConfigError);
    cfg.n_out = 1;
    cfg.hidden = {8, 0};
    CHECK_THROWS_AS(ReconstructionNet::build(cfg, rng), ConfigError);
}

TEST_CASE("reconstruction: full gradient through embedding and MLP") {
    ReconstructionConfig cfg;
    cfg.n_state = 2;
    cfg.n_freq = 3;
    cfg.n_dim = 2;
    cfg.hidden = {6};
    cfg.n_out = 2;
    SplitMix64 rng(17);
    auto net = ReconstructionNetT<double>::build(cfg, rng);
    auto kernel = init_fourier_kernel<double>(3, 2, 1.0, 18);
    auto s = testing::random_leaf(rng, {2, 2}, 0.5);
    auto x = testing::random_leaf(rng, {4, 2}, 1.0);
    x.set_requires_grad(false);
    auto target = testing::random_leaf(rng, {8, 2}, 1.0);
    target.set_requires_grad(false);

    std::vector<TensorT<double>*> leaves{&kernel, &s};
    for (auto& w : net.mlp.weights) leaves.push_back(&w);
    for (auto& b : net.mlp.biases) leaves.push_back(&b);
    auto res = testing::gradcheck(leaves, [&] {
        return mse(reconstruct(net, kernel, s, x), target);
    });
    CHECK(res.n_checked > 60);
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("boundary mask: identity, clamp, and bitwise pass-through") {
    SplitMix64 rng(9);
    std::vector<float> vals(6 * 2);
    for (auto& v : vals) v = float(rng.normal());
    auto pred = Tensor::from_data(vals, {6, 2});

    BoundaryMask none;
    auto same = apply_boundary_mask(pred, none);
    CHECK(std::memcmp(same.data(), pred.data(), sizeof(float) * pred.size()) == 0);

    BoundaryMask all;
    all.forced.assign(6, 1);
    auto zeroed = apply_boundary_mask(pred, all);
    for (std::size_t i = 0; i < zeroed.size(); ++i) CHECK(zeroed.data()[i] == 0.0f);

    BoundaryMask half;
    half.forced = {1, 0, 1, 0, 0, 1};
    half.value = -2.5f;
    auto mixed = apply_boundary_mask(pred, half);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 2; ++c) {
            if (half.forced[std::size_t(r)])
                CHECK(mixed.at(r, c) == -2.5f);
            else
                CHECK(std::memcmp(&mixed.at(r, c), &pred.at(r, c), sizeof(float)) == 0);
        }

    BoundaryMask wrong;
    wrong.forced.assign(4, 1);
    CHECK_THROWS_AS(apply_boundary_mask(pred, wrong), ShapeError);
}

TEST_CASE("boundary mask: no gradient reaches clamped rows") {
    auto x = Tensor::from_data({1.f, 2.f, 3.f, 4.f}, {4, 1}, true);
    BoundaryMask m;
    m.forced = {0, 1, 0, 1};
    Tape tape;
    auto y = apply_boundary_mask(x, m);
    auto loss = sum(mul(y, y));
    tape.backward(loss);
    CHECK(x.grad()[0] == 2.0f);
    CHECK(x.grad()[1] == 0.0f);
    CHECK(x.grad()[2] == 6.0f);
    CHECK(x.grad()[3] == 0.0f);
}

namespace {

// Fit u(x) = sin(2*pi*8*x) on 256 uniform points and report the final MSE.
// n_freq == 0 falls back to raw-coordinate input, everything else identical.
float fit_high_frequency_sine(std::int64_t n_freq, std::uint64_t seed, int steps, double lr) {
    const int m = 256;
    std::vector<float> xs(m), ys(m);
    for (int i = 0; i < m; ++i) {
        const double x = double(i) / m;
        xs[std::size_t(i)] = float(x);
        ys[std::size_t(i)] = float(std::sin(2.0 * std::numbers::pi * 8.0 * x));
    }
    auto x = Tensor::from_data(xs, {m, 1});
    auto y = Tensor::from_data(ys, {m, 1});

    ReconstructionConfig cfg;
    cfg.n_state = 0;
    cfg.n_freq = n_freq;
    cfg.n_dim = 1;
    cfg.raw_coords = (n_freq == 0);
    cfg.hidden = {64};
    cfg.n_out = 1;
    SplitMix64 rng(seed);
    auto net = ReconstructionNet::build(cfg, rng);
    auto kernel = init_fourier_kernel<float>(n_freq, 1, 1.0, seed + 1);

    ParamList<float> params;
    net.collect(params, "rec");
    if (n_freq > 0) params.push_back({"fourier.B", kernel, nullptr});

    AdamT<float> opt(lr);
    auto s = Tensor::zeros({1, 0});
    float last = 0.0f;
    for (int step = 0; step < steps; ++step) {
        Tape tape;
        auto loss = mse(reconstruct(net, kernel, s, x), y);
        last = loss.item();
        opt.zero_grad(params);
        tape.backward(loss);
        opt.step(params);
    }
    return last;
}

}  // namespace

TEST_CASE("spectral effect: fourier features reach half the raw-coordinate error") {
    const int steps = 2000;
    const double lr = 1e-2;
    std::vector<float> with, without;
    for (std::uint64_t seed : {101u, 202u, 303u}) {
        with.push_back(fit_high_frequency_sine(32, seed, steps, lr));
        without.push_back(fit_high_frequency_sine(0, seed, steps, lr));
    }
    std::sort(with.begin(), with.end());
    std::sort(without.begin(), without.end());
    INFO("median mse with embedding ", with[1], ", raw coordinates ", without[1]);
    CHECK(with[1] <= 0.5f * without[1]);
}
