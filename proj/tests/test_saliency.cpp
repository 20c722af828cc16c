#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "saliency/ig.hpp"
#include "saliency/prng.hpp"
#include "saliency/synth.hpp"

using namespace saliency;

namespace {

MlpPolicy linear_policy(const std::vector<std::vector<double>>& weights) {
    MlpPolicy policy;
    LayerSpec layer;
    layer.weights = Matrix::from_rows(weights);
    layer.biases.assign(layer.weights.rows(), 0.0);
    layer.activation = Activation::Identity;
    policy.layers.push_back(std::move(layer));
    policy.input_dim = policy.layers.front().in_dim();
    policy.output_dim = policy.layers.back().out_dim();
    policy.validate();
    return policy;
}

std::vector<double> seeded_input(std::uint64_t seed, std::size_t n) {
    SplitMix64 rng(seed);
    std::vector<double> x(n);
    for (double& v : x) v = rng.next_range(-1.0, 1.0);
    return x;
}

SynthConfig small_net(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.input_dim = 8;
    cfg.output_dim = 4;
    cfg.hidden = {16};
    cfg.mask_first_half = false;
    return cfg;
}

} // namespace

TEST_CASE("integrated_gradients: constant gradient makes the sum exact") {
    auto policy = linear_policy({{2.0}});
    for (std::size_t p : {1u, 7u, 25u}) {
        IgConfig cfg;
        cfg.steps = p;
        const auto result = integrated_gradients(policy, {3.0}, cfg);
        CHECK(result.attributions[0] == doctest::Approx(6.0).epsilon(1e-15));
    }
}

TEST_CASE("integrated_gradients: absolute value applies per output term") {
    auto policy = linear_policy({{1.0, -1.0}});
    IgConfig cfg;
    const auto result = integrated_gradients(policy, {0.5, 0.5}, cfg);
    CHECK(result.attributions[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(result.attributions[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(result.signed_per_output(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(result.signed_per_output(0, 1) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("integrated_gradients: p=25 lands close to the high-resolution oracle") {
    const auto policy = gen_random_policy(small_net(900));
    const auto x = seeded_input(13, 8);
    IgConfig cfg;
    cfg.steps = 25;
    const auto coarse = integrated_gradients(policy, x, cfg).attributions;
    const auto fine = ig_oracle(policy, x, {}, 65536);
    double worst = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        worst = std::max(worst, std::abs(coarse[i] - fine[i]));
        peak = std::max(peak, std::abs(fine[i]));
    }
    REQUIRE(peak > 0.0);
    CHECK(worst / peak < 5e-2);
}

TEST_CASE("integrated_gradients: completeness at high resolution over 20 seeded nets") {
    int improved = 0, cases = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto policy = gen_random_policy(small_net(1200 + seed));
        const auto x = seeded_input(seed * 31 + 5, 8);
        const auto reference = forward(policy, x);
        const auto at_baseline = forward(policy, std::vector<double>(8, 0.0));

        auto completeness_errors = [&](std::size_t p) {
            IgConfig cfg;
            cfg.steps = p;
            const auto result = integrated_gradients(policy, x, cfg);
            std::vector<double> errors;
            for (std::size_t row = 0; row < result.outputs.size(); ++row) {
                double sum = 0.0;
                for (std::size_t i = 0; i < 8; ++i) sum += result.signed_per_output(row, i);
                const std::size_t j = result.outputs[row];
                errors.push_back(std::abs(sum - (reference[j] - at_baseline[j])));
            }
            return errors;
        };

        const auto e_fine = completeness_errors(65536);
        const auto e_25 = completeness_errors(25);
        const auto e_2 = completeness_errors(2);
        for (std::size_t row = 0; row < e_fine.size(); ++row) {
            // Relative to the output difference, floored at the unit scale
            // of the tanh-bounded outputs.
            const double target = std::max(1.0, std::abs(reference[row] - at_baseline[row]));
            CHECK(e_fine[row] / target < 1e-3);
            if (e_25[row] < e_2[row]) ++improved;
            ++cases;
        }
    }
    CHECK(static_cast<double>(improved) / static_cast<double>(cases) >= 0.95);
}

TEST_CASE("integrated_gradients: linear exactness independent of step count") {
    SplitMix64 rng(321);
    std::vector<std::vector<double>> weights(3, std::vector<double>(4));
    for (auto& row : weights)
        for (double& w : row) w = rng.next_range(-2.0, 2.0);
    const auto policy = linear_policy(weights);
    const auto x = seeded_input(17, 4);
    for (std::size_t p : {1u, 25u, 1000u}) {
        IgConfig cfg;
        cfg.steps = p;
        const auto result = integrated_gradients(policy, x, cfg);
        for (std::size_t i = 0; i < 4; ++i) {
            double expected = 0.0;
            for (std::size_t j = 0; j < 3; ++j) expected += std::abs(weights[j][i] * x[i]);
            CHECK(std::abs(result.attributions[i] - expected) <= 1e-12);
        }
    }
}

TEST_CASE("integrated_gradients: zero first-layer columns receive zero attribution") {
    SynthConfig cfg = small_net(77);
    const std::vector<std::size_t> relevant = {1, 2};
    const auto policy = gen_planted_policy(cfg, relevant);
    const auto x = seeded_input(23, 8);
    IgConfig ig;
    const auto result = integrated_gradients(policy, x, ig);
    for (std::size_t i = 0; i < 8; ++i) {
        if (i == 1 || i == 2) continue;
        CHECK(result.attributions[i] == 0.0);
    }
    // Cross-check the construction with finite differences.
    const auto numeric = fd_jacobian(policy, x, 1e-5);
    for (std::size_t j = 0; j < numeric.rows(); ++j)
        for (std::size_t i = 0; i < 8; ++i)
            if (i != 1 && i != 2) CHECK(numeric(j, i) == 0.0);
}

TEST_CASE("integrated_gradients: configuration errors") {
    auto policy = linear_policy({{1.0, 1.0}});
    IgConfig bad_baseline;
    bad_baseline.baseline = {0.0};
    CHECK_THROWS_AS((void)integrated_gradients(policy, {1.0, 1.0}, bad_baseline), ComputeError);
    IgConfig bad_mask;
    bad_mask.output_mask = std::vector<std::size_t>{5};
    CHECK_THROWS_AS((void)integrated_gradients(policy, {1.0, 1.0}, bad_mask), ComputeError);
    IgConfig zero_steps;
    zero_steps.steps = 0;
    CHECK_THROWS_AS((void)integrated_gradients(policy, {1.0, 1.0}, zero_steps), InputError);
}

TEST_CASE("postprocess_saliency: hand-computed threshold and normalization") {
    const auto map = postprocess_saliency(Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}}));
    CHECK(map.epsilon == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(map.thresholded == Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
    CHECK(map.normalized == Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
}

TEST_CASE("postprocess_saliency: all-equal raw values collapse to zero") {
    const auto map = postprocess_saliency(Matrix(3, 4, 0.7));
    for (double v : map.thresholded.data()) CHECK(v == 0.0);
    for (double v : map.normalized.data()) CHECK(v == 0.0);
}

TEST_CASE("postprocess_saliency: normalized map peaks at exactly 1") {
    SplitMix64 rng(88);
    Matrix raw(5, 6);
    for (double& v : raw.data()) v = rng.next_range(0.0, 3.0);
    const auto map = postprocess_saliency(raw);
    double peak = 0.0;
    for (double v : map.normalized.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        peak = std::max(peak, v);
    }
    CHECK(peak == 1.0);
}

TEST_CASE("saliency_pipeline: thread count does not change the result") {
    const auto policy = gen_random_policy(small_net(3000));
    SynthConfig cfg = small_net(3000);
    cfg.timesteps = 9;
    StateSchema schema;
    schema.total_dim = 8;
    schema.groups.push_back({"all", {0, 1, 2, 3, 4, 5, 6, 7}, GroupKind::Feedback, std::nullopt});
    const auto traj = gen_trajectory(cfg, schema);
    IgConfig ig;
    const auto serial = saliency_pipeline(policy, traj, ig, 1);
    const auto parallel = saliency_pipeline(policy, traj, ig, 4);
    CHECK(serial.raw == parallel.raw);
    CHECK(serial.normalized == parallel.normalized);
    CHECK(serial.epsilon == parallel.epsilon);
}

TEST_CASE("saliency_pipeline: dimension mismatch and empty trajectory fail") {
    const auto policy = gen_random_policy(small_net(1));
    Trajectory traj;
    traj.states = Matrix(2, 5, 0.1);
    IgConfig ig;
    CHECK_THROWS_AS((void)saliency_pipeline(policy, traj, ig), InputError);
    traj.states = Matrix(0, 8);
    CHECK_THROWS_AS((void)saliency_pipeline(policy, traj, ig), InputError);
}

TEST_CASE("saliency_pipeline: deterministic across repeated runs") {
    const auto policy = gen_random_policy(small_net(41));
    SynthConfig cfg = small_net(41);
    cfg.timesteps = 6;
    StateSchema schema;
    schema.total_dim = 8;
    schema.groups.push_back({"all", {0, 1, 2, 3, 4, 5, 6, 7}, GroupKind::Feedback, std::nullopt});
    const auto traj = gen_trajectory(cfg, schema);
    IgConfig ig;
    const auto a = saliency_pipeline(policy, traj, ig);
    const auto b = saliency_pipeline(policy, traj, ig);
    CHECK(a.raw == b.raw);
    CHECK(a.normalized == b.normalized);
}
