#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "saliency/prng.hpp"
#include "saliency/schema.hpp"
#include "saliency/trajectory.hpp"

using namespace saliency;

TEST_CASE("sigmoid_contact: anchor values") {
    const ContactConfig cfg{2.0, 2.0};
    CHECK(sigmoid_contact(2.0, cfg) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sigmoid_contact(1e6, cfg) == doctest::Approx(1.0).epsilon(1e-12));
    // Direct evaluation of 1/(1+e^{-c1(F-c2)}) at F=0.
    CHECK(sigmoid_contact(0.0, cfg) == doctest::Approx(1.0 / (1.0 + std::exp(4.0))).epsilon(1e-15));
}

TEST_CASE("sigmoid_contact: strictly monotone and bounded") {
    const ContactConfig cfg{2.0, 2.0};
    // Strictness is checkable while 1 - sigmoid stays representable
    // (saturates to exactly 1.0 in doubles near c1*(F-c2) ~ 37).
    double prev = -1.0;
    for (double f = 0.0; f <= 18.0; f += 0.5) {
        const double v = sigmoid_contact(f, cfg);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(sigmoid_contact(1e9, cfg) <= 1.0);
    CHECK_THROWS_AS((void)sigmoid_contact(-1.0, cfg), ComputeError);
    CHECK_THROWS_AS((void)sigmoid_contact(1.0, ContactConfig{0.0, 2.0}), InputError);
}

TEST_CASE("phase: anchors and exact periodicity") {
    const PhaseConfig cfg{1.0, 25.0};
    CHECK(phase(0, cfg) == 0.0);
    CHECK(phase(25, cfg) == 0.0);  // wraps at T*f_c steps
    CHECK(phase(12, cfg) == doctest::Approx(0.48).epsilon(1e-15));
    for (std::uint64_t k = 0; k < 100; ++k) CHECK(phase(k + 25, cfg) == phase(k, cfg));
}

TEST_CASE("phase: non-integer period is allowed") {
    const PhaseConfig cfg{0.3, 25.0};  // 7.5 steps per period
    for (std::uint64_t k = 0; k < 50; ++k) {
        const double phi = phase(k, cfg);
        CHECK(phi >= 0.0);
        CHECK(phi < 1.0);
    }
    CHECK_THROWS_AS((void)phase(0, PhaseConfig{0.01, 25.0}), InputError);  // T*f_c < 1
}

TEST_CASE("phase_vector: anchors and unit norm") {
    auto [s0, c0] = phase_vector(0.0);
    CHECK(s0 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(c0 == doctest::Approx(1.0).epsilon(1e-15));
    auto [s1, c1] = phase_vector(0.25);
    CHECK(s1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c1 == doctest::Approx(0.0).epsilon(1e-15));
    auto [s2, c2] = phase_vector(0.48);
    CHECK(s2 == doctest::Approx(std::sin(0.96 * std::numbers::pi)).epsilon(1e-15));
    CHECK(c2 == doctest::Approx(std::cos(0.96 * std::numbers::pi)).epsilon(1e-15));

    SplitMix64 rng(4);
    for (int i = 0; i < 200; ++i) {
        auto [s, c] = phase_vector(rng.next_unit());
        CHECK(std::abs(std::sqrt(s * s + c * c) - 1.0) < 1e-12);
    }
}

TEST_CASE("default schema reproduces the nine-group 64-dim layout") {
    const auto schema = default_schema();
    REQUIRE(schema.groups.size() == 9);
    CHECK(schema.total_dim == 64);
    const std::vector<std::pair<std::string, std::size_t>> expected = {
        {"joint_position", 12}, {"gravity_vector", 3},  {"base_linear_velocity", 3},
        {"base_angular_velocity", 3}, {"foot_position", 12}, {"base_position", 3},
        {"foot_contact", 4},    {"joint_torque", 12},   {"joint_velocity", 12},
    };
    for (std::size_t g = 0; g < expected.size(); ++g) {
        CHECK(schema.groups[g].name == expected[g].first);
        CHECK(schema.groups[g].dims.size() == expected[g].second);
        CHECK(schema.groups[g].kind == GroupKind::Feedback);
    }
    CHECK(validate_schema(schema, 64).ok);
}

TEST_CASE("gait schema appends the feedforward phase vector") {
    const auto schema = default_schema_with_phase();
    CHECK(schema.total_dim == 66);
    CHECK(schema.has_feedforward());
    CHECK(validate_schema(schema, 66).ok);
    CHECK(schema.find("phase_vector")->dims == std::vector<std::size_t>{64, 65});
}

TEST_CASE("validate_schema: overlap names both groups") {
    StateSchema schema;
    schema.total_dim = 6;
    schema.groups.push_back({"first", {0, 1, 2, 5}, GroupKind::Feedback, std::nullopt});
    schema.groups.push_back({"second", {3, 4, 5}, GroupKind::Feedback, std::nullopt});
    const auto v = validate_schema(schema, 6);
    CHECK_FALSE(v.ok);
    bool found = false;
    for (const auto& p : v.problems)
        if (p.find("first") != std::string::npos && p.find("second") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validate_schema: gap lists the missing index") {
    StateSchema schema;
    schema.total_dim = 64;
    auto base = default_schema();
    schema.groups = base.groups;
    schema.groups.back().dims.pop_back();  // drop dim 63
    const auto v = validate_schema(schema, 64);
    CHECK_FALSE(v.ok);
    bool found = false;
    for (const auto& p : v.problems)
        if (p.find("63") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validate_schema: total_dim mismatch and bad range") {
    auto schema = default_schema();
    CHECK_FALSE(validate_schema(schema, 60).ok);
    schema.groups[0].range = std::vector<DimRange>(12, DimRange{1.0, 1.0});
    CHECK_FALSE(validate_schema(schema, 64).ok);
}

TEST_CASE("schema JSON round trip") {
    auto schema = default_schema_with_phase();
    schema.groups[1].range = std::vector<DimRange>{{-1, 1}, {-1, 1}, {-1, 1}};
    const auto path = std::filesystem::temp_directory_path() / "saliency_test_schema.json";
    save_schema(schema, path);
    const auto loaded = load_schema(path);
    CHECK(loaded.total_dim == 66);
    CHECK(loaded.groups.size() == 10);
    CHECK(loaded.groups[1].range.has_value());
    CHECK((*loaded.groups[1].range)[0].min == -1.0);
    CHECK(loaded.groups[9].kind == GroupKind::Feedforward);
    std::filesystem::remove(path);
}

TEST_CASE("trajectory CSV round trip with aux channels") {
    Trajectory traj;
    traj.dt = 0.04;
    traj.states = Matrix::from_rows({{0.5, -0.25, 1.0 / 3.0}, {0.125, 2.0, -7.5}});
    traj.aux.emplace_back("aux_reward", std::vector<double>{0.25, 0.75});
    const auto path = std::filesystem::temp_directory_path() / "saliency_test_traj.csv";
    save_trajectory_csv(traj, path);
    const auto loaded = load_trajectory_csv(path);
    CHECK(loaded.states == traj.states);  // 17-digit format round-trips exactly
    CHECK(loaded.dt == doctest::Approx(0.04).epsilon(1e-15));
    REQUIRE(loaded.aux.size() == 1);
    CHECK(loaded.aux[0].first == "aux_reward");
    CHECK(loaded.aux[0].second == traj.aux[0].second);
    std::filesystem::remove(path);
}

TEST_CASE("trajectory CSV rejects malformed headers and rows") {
    const auto path = std::filesystem::temp_directory_path() / "saliency_bad_traj.csv";
    write_text_file(path, "s0,s1\n1,2\n");
    CHECK_THROWS_AS((void)load_trajectory_csv(path), InputError);  // missing t
    write_text_file(path, "t,s0,other\n0,1,2\n");
    CHECK_THROWS_AS((void)load_trajectory_csv(path), InputError);  // non-aux extra column
    write_text_file(path, "t,s0\n0\n");
    CHECK_THROWS_AS((void)load_trajectory_csv(path), InputError);  // short row
    write_text_file(path, "t,s0\n0,nope\n");
    CHECK_THROWS_AS((void)load_trajectory_csv(path), InputError);  // bad number
    std::filesystem::remove(path);
}
