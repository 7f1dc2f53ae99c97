#include <doctest.h>

#include <cstring>
#include <vector>

#include "gradcheck.hpp"
#include "lfld/rng.hpp"
#include "lfld/tensor.hpp"

using namespace lfld;
using lfld::testing::gradcheck;
using lfld::testing::random_leaf;
using DTensor = TensorT<double>;
using DTape = TapeT<double>;

TEST_CASE("matmul forward oracle") {
    auto a = Tensor::from_data({1, 2, 3, 4}, {2, 2});
    auto b = Tensor::from_data({5, 6, 7, 8}, {2, 2});
    auto c = matmul(a, b);
    CHECK(c.at(0, 0) == 19.0f);
    CHECK(c.at(0, 1) == 22.0f);
    CHECK(c.at(1, 0) == 43.0f);
    CHECK(c.at(1, 1) == 50.0f);
}

TEST_CASE("matmul rejects incompatible shapes") {
    auto a = Tensor::zeros({2, 3});
    auto b = Tensor::zeros({2, 2});
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[2,3]"), ShapeError);
}

TEST_CASE("activation value oracles") {
    auto x = Tensor::from_data({1.0f}, {1});
    CHECK(apply_activation(x, Act::lecun_tanh).item() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(apply_activation(x, Act::gelu).item() == doctest::Approx(0.8413447).epsilon(1e-6));
    auto zero = Tensor::from_data({0.0f}, {1});
    CHECK(apply_activation(zero, Act::sigmoid).item() == doctest::Approx(0.5));
    CHECK(apply_activation(zero, Act::gelu).item() == doctest::Approx(0.0));
    CHECK(apply_activation(x, Act::neg).item() == doctest::Approx(-1.0));
    CHECK(apply_activation(x, Act::exp).item() == doctest::Approx(2.718281828).epsilon(1e-6));
}

TEST_CASE("activation names round-trip; unknown name is a config error") {
    CHECK(act_from_string("gelu") == Act::gelu);
    CHECK(act_from_string("lecun_tanh") == Act::lecun_tanh);
    CHECK_THROWS_WITH_AS(act_from_string("relu6"), doctest::Contains("relu6"), ConfigError);
}

TEST_CASE("sigmoid gradient at zero is one quarter") {
    auto x = DTensor::from_data({0.0}, {1}, true);
    DTape tape;
    auto y = apply_activation(x, Act::sigmoid);
    tape.backward(sum(y));
    CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("mse oracle") {
    auto pred = Tensor::from_data({0, 0}, {2});
    auto obs = Tensor::from_data({1, 3}, {2});
    CHECK(mse(pred, obs).item() == doctest::Approx(5.0));
}

TEST_CASE("add_bias broadcasts one bias row over all rows") {
    auto x = Tensor::from_data({1, 2, 3, 4, 5, 6}, {2, 3});
    auto b = Tensor::from_data({10, 20, 30}, {3});
    auto y = add_bias(x, b);
    CHECK(y.at(0, 0) == 11.0f);
    CHECK(y.at(1, 2) == 36.0f);
    CHECK_THROWS_AS(add_bias(x, Tensor::zeros({2})), ShapeError);
}

TEST_CASE("add_bias gradient column-sums over rows") {
    auto x = DTensor::from_data({1, 2, 3, 4}, {2, 2}, true);
    auto b = DTensor::from_data({0.5, -0.5}, {2}, true);
    DTape tape;
    tape.backward(sum(add_bias(x, b)));
    CHECK(b.grad()[0] == doctest::Approx(2.0));
    CHECK(b.grad()[1] == doctest::Approx(2.0));
    CHECK(x.grad()[3] == doctest::Approx(1.0));
}

TEST_CASE("backward demands a scalar loss") {
    auto x = DTensor::from_data({1, 2}, {2}, true);
    DTape tape;
    auto y = affine(x, 2.0, 0.0);
    CHECK_THROWS_AS(tape.backward(y), ContractError);
}

TEST_CASE("backward twice without reset is a state error") {
    auto x = DTensor::from_data({1.0}, {1}, true);
    DTape tape;
    auto loss = sum(mul(x, x));
    tape.backward(loss);
    CHECK_THROWS_AS(tape.backward(loss), StateError);
    tape.reset();  // after reset the tape is reusable (records nothing new here)
}

TEST_CASE("gradient accumulates when a tensor is reused") {
    auto x = DTensor::from_data({3.0}, {1}, true);
    DTape tape;
    auto loss = sum(add(mul(x, x), x));  // x^2 + x -> d/dx = 2x + 1 = 7
    tape.backward(loss);
    CHECK(x.grad()[0] == doctest::Approx(7.0));
}

TEST_CASE("no tape means no recording and no grads") {
    auto x = Tensor::from_data({2.0f}, {1}, true);
    auto y = mul(x, x);
    CHECK_FALSE(y.requires_grad());  // nothing was tracked
    CHECK(y.item() == 4.0f);
}

TEST_CASE("mask_rows forces masked rows to the value and blocks their gradient") {
    auto x = DTensor::from_data({1, 2, 3, 4, 5, 6}, {3, 2}, true);
    std::vector<std::uint8_t> keep{1, 0, 1};
    DTape tape;
    auto y = mask_rows(x, keep, 9.0);
    CHECK(y.at(1, 0) == 9.0);
    CHECK(y.at(1, 1) == 9.0);
    CHECK(y.at(0, 1) == 2.0);
    tape.backward(sum(y));
    CHECK(x.grad()[0] == 1.0);
    CHECK(x.grad()[2] == 0.0);  // masked row
    CHECK(x.grad()[3] == 0.0);
    CHECK(x.grad()[4] == 1.0);
}

TEST_CASE("kron_concat crosses rows of both inputs") {
    auto a = DTensor::from_data({1, 2, 3, 4}, {2, 2});
    auto b = DTensor::from_data({10, 20, 30}, {3, 1});
    auto y = kron_concat(a, b);
    REQUIRE(y.shape() == Shape{6, 3});
    // row (i*3 + r) = [a_i | b_r]
    CHECK(y.at(0, 0) == 1.0);
    CHECK(y.at(0, 2) == 10.0);
    CHECK(y.at(2, 2) == 30.0);
    CHECK(y.at(3, 0) == 3.0);
    CHECK(y.at(5, 2) == 30.0);
}

TEST_CASE("finite differences: every primitive in one composite graph") {
    SplitMix64 rng(101);
    auto W1 = random_leaf(rng, {4, 6}, 0.5);
    auto b1 = random_leaf(rng, {6}, 0.1);
    auto W2 = random_leaf(rng, {8, 3}, 0.5);
    auto x = random_leaf(rng, {2, 4}, 1.0);
    auto z = random_leaf(rng, {2, 2}, 1.0);
    auto t = random_leaf(rng, {2, 3}, 1.0);

    std::vector<std::uint8_t> keep{1, 0, 1, 1};

    auto loss_fn = [&] {
        auto h1 = apply_activation(add_bias(matmul(x, W1), b1), Act::gelu);
        auto h2 = concat_cols(h1, apply_activation(z, Act::lecun_tanh));
        auto h3 = apply_activation(matmul(h2, W2), Act::tanh);
        auto h4 = kron_concat(h3, sub(t, affine(t, 0.5, 0.1)));
        auto h5 = mask_rows(h4, keep, 0.25);
        auto h6 = mul(h5, apply_activation(h5, Act::sigmoid));
        auto pieces = vstack<double>({h6, affine(h6, -1.0, 0.0)});
        auto probe = apply_activation(sum(pieces), Act::exp);
        return sum(add(probe, apply_activation(probe, Act::softplus)));
    };

    auto res = gradcheck({&W1, &b1, &W2, &x, &z, &t}, loss_fn);
    CHECK(res.n_checked > 40);
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("finite differences: each activation kind alone") {
    SplitMix64 rng(202);
    for (Act act : {Act::lecun_tanh, Act::gelu, Act::sigmoid, Act::tanh, Act::exp, Act::neg,
                    Act::softplus, Act::cos, Act::sin}) {
        CAPTURE(act_to_string(act));
        auto x = random_leaf(rng, {3, 3}, 0.8);
        auto res = gradcheck({&x}, [&] { return sum(mul(apply_activation(x, act),
                                                        apply_activation(x, act))); });
        CHECK(res.max_rel_err < 1e-5);
    }
}

TEST_CASE("matmul gradient against finite differences") {
    SplitMix64 rng(303);
    auto a = random_leaf(rng, {3, 5});
    auto b = random_leaf(rng, {5, 4});
    auto res = gradcheck({&a, &b}, [&] {
        auto c = matmul(a, b);
        return mse(c, affine(c, 0.0, 0.3));  // target is a constant graph-wise? not constant; use sum
    });
    // mse against a derived target exercises sub/mul/sum too
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("float forward/backward is bitwise reproducible") {
    SplitMix64 rng(404);
    std::vector<float> av(6 * 8), bv(8 * 5);
    for (auto& v : av) v = float(rng.normal());
    for (auto& v : bv) v = float(rng.normal());

    auto run = [&](std::vector<float>& grad_out) {
        auto a = Tensor::from_data(av, {6, 8}, true);
        auto b = Tensor::from_data(bv, {8, 5}, true);
        Tape tape;
        auto y = apply_activation(matmul(a, b), Act::gelu);
        tape.backward(sum(y));
        grad_out = a.grad();
        return y.values();
    };
    std::vector<float> g1, g2;
    auto v1 = run(g1);
    auto v2 = run(g2);
    CHECK(std::memcmp(v1.data(), v2.data(), v1.size() * sizeof(float)) == 0);
    CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(float)) == 0);
}

TEST_CASE("matmul result does not depend on row chunking (bitwise)") {
    SplitMix64 rng(505);
    const std::int64_t m = 37, k = 19, n = 23;
    std::vector<float> av(m * k), bv(k * n);
    for (auto& v : av) v = float(rng.normal());
    for (auto& v : bv) v = float(rng.normal());
    auto a = Tensor::from_data(av, {m, k});
    auto b = Tensor::from_data(bv, {k, n});
    auto full = matmul(a, b);

    for (std::int64_t chunk : {1, 2, 3, 5, 8, 36, 37}) {
        std::vector<float> stitched;
        stitched.reserve(std::size_t(m * n));
        for (std::int64_t r0 = 0; r0 < m; r0 += chunk) {
            const std::int64_t r1 = std::min(m, r0 + chunk);
            std::vector<float> part(av.begin() + r0 * k, av.begin() + r1 * k);
            auto ap = Tensor::from_data(std::move(part), {r1 - r0, k});
            auto cp = matmul(ap, b);
            stitched.insert(stitched.end(), cp.values().begin(), cp.values().end());
        }
        REQUIRE(stitched.size() == std::size_t(m * n));
        CHECK(std::memcmp(stitched.data(), full.data(), stitched.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("matmul matches the generic kernel numerically") {
    // The AVX path must compute the same sums as the plain loop, up to FMA
    // rounding. Compare against double accumulation for a tight bound.
    SplitMix64 rng(606);
    const std::int64_t m = 9, k = 31, n = 18;
    std::vector<float> av(m * k), bv(k * n);
    for (auto& v : av) v = float(rng.normal());
    for (auto& v : bv) v = float(rng.normal());
    auto c = matmul(Tensor::from_data(av, {m, k}), Tensor::from_data(bv, {k, n}));
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) {
            double acc = 0;
            for (std::int64_t kk = 0; kk < k; ++kk)
                acc += double(av[i * k + kk]) * double(bv[kk * n + j]);
            CHECK(double(c.at(i, j)) == doctest::Approx(acc).epsilon(1e-5));
        }
}

TEST_CASE("vstack stacks and routes gradients to each block") {
    auto a = DTensor::from_data({1, 2}, {1, 2}, true);
    auto b = DTensor::from_data({3, 4, 5, 6}, {2, 2}, true);
    DTape tape;
    auto y = vstack<double>({a, b});
    REQUIRE(y.shape() == Shape{3, 2});
    CHECK(y.at(2, 1) == 6.0);
    tape.backward(sum(mul(y, y)));
    CHECK(a.grad()[0] == doctest::Approx(2.0));
    CHECK(b.grad()[3] == doctest::Approx(12.0));
    CHECK_THROWS_AS(vstack<double>({a, DTensor::zeros({1, 3})}), ShapeError);
}

TEST_CASE("empty loss and scalar item contracts") {
    CHECK_THROWS_AS(mse(Tensor::zeros({0, 2}), Tensor::zeros({0, 2})), ContractError);
    CHECK_THROWS_AS(Tensor::zeros({2, 2}).item(), ContractError);
}
