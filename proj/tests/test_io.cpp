#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "saliency/bundle.hpp"
#include "saliency/csv.hpp"
#include "saliency/metrics.hpp"
#include "saliency/prng.hpp"
#include "saliency/svg.hpp"

using namespace saliency;
namespace fs = std::filesystem;

TEST_CASE("format_double: 17 significant digits round-trip exactly") {
    SplitMix64 rng(20);
    for (int i = 0; i < 2000; ++i) {
        const double v = (rng.next_unit() - 0.5) * std::pow(10.0, static_cast<double>(rng.next_below(20)) - 10.0);
        const double back = parse_double(format_double(v), "round trip");
        CHECK(back == v);
    }
    CHECK(parse_double(format_double(0.1), "t") == 0.1);
    CHECK_THROWS_AS((void)parse_double("1.2x", "t"), InputError);
    CHECK_THROWS_AS((void)parse_double("", "t"), InputError);
}

TEST_CASE("matrix CSV round trip") {
    SplitMix64 rng(21);
    Matrix m(7, 5);
    for (double& v : m.data()) v = rng.next_range(-3.0, 3.0);
    const auto path = fs::temp_directory_path() / "saliency_test_matrix.csv";
    write_text_file(path, matrix_to_csv(m));
    CHECK(read_matrix_csv(path) == m);
    write_text_file(path, "1,2\n3\n");
    CHECK_THROWS_AS((void)read_matrix_csv(path), InputError);
    fs::remove(path);
}

TEST_CASE("fnv1a64: reference vectors") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("render_heatmap_svg: extreme cells") {
    const auto black = render_heatmap_svg(Matrix(1, 1, 1.0));
    CHECK(black.find("fill=\"rgb(0,0,0)\"") != std::string::npos);
    CHECK(black.find("<rect") != std::string::npos);

    const auto white = render_heatmap_svg(Matrix(2, 2, 0.0));
    CHECK(white.find("rgb(255,255,255)") != std::string::npos);
    CHECK(white.find("rgb(0,0,0)") == std::string::npos);

    // Out-of-range values clamp instead of corrupting the gray level.
    const auto clamped = render_heatmap_svg(Matrix(1, 2, 7.0));
    CHECK(clamped.find("rgb(0,0,0)") != std::string::npos);
    CHECK_THROWS_AS((void)render_heatmap_svg(Matrix(0, 0)), InputError);
}

TEST_CASE("render_heatmap_svg: byte-identical to the reviewed golden file") {
    const auto rendered = render_heatmap_svg(Matrix::from_rows({{1.0, 0.5}, {0.25, 0.0}}));
    const auto golden = read_text_file(fs::path(TEST_DATA_DIR) / "golden_heatmap_2x2.svg");
    CHECK(rendered == golden);
}

TEST_CASE("doughnut CSV: percentages cover included groups and sum to 100") {
    ImportanceReport report;
    report.groups.push_back({"a", GroupKind::Feedback, 3.0, 0.625});
    report.groups.push_back({"b", GroupKind::Feedback, 1.8, 0.375});
    report.groups.push_back({"ff", GroupKind::Feedforward, 9.0, 0.0});
    const auto csv = doughnut_csv(report, false);
    CHECK(csv.find("ff") == std::string::npos);
    double total = 0.0;
    bool first = true;
    std::istringstream stream(csv);
    std::string line;
    while (std::getline(stream, line)) {
        if (first) {
            first = false;
            CHECK(line == "group,percent");
            continue;
        }
        const auto fields = split_csv_line(line);
        REQUIRE(fields.size() == 2);
        total += parse_double(fields[1], "doughnut");
    }
    CHECK(std::abs(total - 100.0) <= 0.01);
}

TEST_CASE("manifest records content hashes of the inputs") {
    const auto dir = fs::temp_directory_path() / "saliency_manifest_test";
    fs::create_directories(dir);
    const auto file = dir / "input.txt";
    write_text_file(file, "payload");
    InputManifest inputs;
    inputs.add("input", file);
    const auto doc = manifest_json("analyze", inputs, {{"p", 25}});
    CHECK(doc["tool"]["name"] == "saliency");
    CHECK(doc["command"] == "analyze");
    CHECK(doc["inputs"]["input"]["fnv1a64"] == fnv1a64_hex("payload"));
    CHECK(doc["config"]["p"] == 25);
    fs::remove_all(dir);
}

TEST_CASE("episode loader: channels plus sidecar scalars") {
    const auto dir = fs::temp_directory_path() / "saliency_episode_test";
    fs::create_directories(dir);
    const auto csv = dir / "episode.csv";

    std::string header = "t";
    for (int i = 0; i < 12; ++i) header += ",tau_" + std::to_string(i);
    header += ",h,gx,gy,gz,vhx,vhy,V\n";
    std::string row = "0";
    for (int i = 0; i < 12; ++i) row += ",1.5";
    row += ",0.3,0,0,-1,0.5,0,0.5\n";
    write_text_file(csv, header + row + row);
    write_text_file(dir / "episode.json",
                    R"({"T":1.48,"T_hat":10.0,"p_f":[0.18,0.13,-0.18,-0.13,-0.18,0.13,0.18,-0.13],)"
                    R"("h_N":0.25,"g_N":[0,0,-1]})");

    const auto episode = load_episode(csv);
    CHECK(episode.timesteps == 2);
    CHECK(episode.has_torques);
    CHECK(episode.has_recovery_time);
    CHECK(episode.has_final_state);
    CHECK(episode.torques(0, 0) == 1.5);
    CHECK(episode.recovery_time == 1.48);

    const auto recovery = score_episode(episode, default_targets(Task::Recovery), Task::Recovery);
    CHECK(recovery.get("s_r") == doctest::Approx(0.852).epsilon(1e-15));
    const auto gait = score_episode(episode, default_targets(Task::Gait), Task::Gait);
    CHECK(gait.get("s_v") == 1.0);

    const auto doc = metric_set_to_json(recovery);
    CHECK(doc["task"] == "recovery");
    CHECK(doc["scores"]["s_r"].get<double>() == doctest::Approx(0.852).epsilon(1e-15));
    fs::remove_all(dir);
}

TEST_CASE("episode loader: rejects unknown and incomplete channels") {
    const auto dir = fs::temp_directory_path() / "saliency_episode_bad";
    fs::create_directories(dir);
    const auto csv = dir / "episode.csv";
    write_text_file(csv, "t,tau_0\n0,1\n");
    CHECK_THROWS_AS((void)load_episode(csv), InputError);  // incomplete torque block
    write_text_file(csv, "t,foo\n0,1\n");
    CHECK_THROWS_AS((void)load_episode(csv), InputError);  // unknown channel
    write_text_file(csv, "t,h\n0,0.3\n");
    write_text_file(dir / "episode.json", R"({"p_f":[1,2],"h_N":0.2,"g_N":[0,0,-1]})");
    CHECK_THROWS_AS((void)load_episode(csv), InputError);  // p_f needs 8 coords
    fs::remove_all(dir);
}

TEST_CASE("targets JSON: defaults per task with overrides") {
    const auto recovery = targets_from_json(nlohmann::json::object(), Task::Recovery);
    CHECK(recovery.nominal_height == 0.25);
    const auto gait = targets_from_json(nlohmann::json::object(), Task::Gait);
    CHECK(gait.nominal_height == 0.3);
    CHECK(gait.nominal_speed == 0.5);
    const auto bounding = targets_from_json({{"nominal_speed", 1.0}, {"nominal_heading", {1.0, 0.0}}}, Task::Gait);
    CHECK(bounding.nominal_speed == 1.0);
    CHECK_THROWS_AS((void)targets_from_json({{"nominal_gravity", {0.0, 0.0, -2.0}}}, Task::Gait), InputError);
}

TEST_CASE("importance report JSON carries method, per-dim values and shares") {
    ImportanceReport report;
    report.method = ImportanceMethod::Max;
    report.per_dim = {0.5, 0.25};
    report.groups.push_back({"a", GroupKind::Feedback, 0.5, 1.0});
    const auto doc = importance_report_to_json(report);
    CHECK(doc["method"] == "max");
    CHECK(doc["per_dim"].size() == 2);
    CHECK(doc["groups"][0]["name"] == "a");
    CHECK(doc["groups"][0]["r"] == 1.0);
}
