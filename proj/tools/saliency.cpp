// Command-line surface for the state-saliency analysis pipeline.
//
// Subcommands: analyze, metrics, correlate, compose, synth, render.
// Exit codes: 0 success, 1 computation error, 2 input/parse error.
// SALIENCY_THREADS caps internal parallelism (default: all cores).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "saliency/bundle.hpp"
#include "saliency/csv.hpp"
#include "saliency/errors.hpp"
#include "saliency/metrics.hpp"
#include "saliency/mlp.hpp"
#include "saliency/pipeline.hpp"
#include "saliency/schema.hpp"
#include "saliency/stats.hpp"
#include "saliency/svg.hpp"
#include "saliency/synth.hpp"
#include "saliency/trajectory.hpp"
#include "saliency/version.hpp"

namespace fs = std::filesystem;

namespace {

unsigned env_threads() {
    const char* raw = std::getenv("SALIENCY_THREADS");
    if (!raw) return 0;
    const long value = std::strtol(raw, nullptr, 10);
    return value > 0 ? static_cast<unsigned>(value) : 0;
}

std::vector<double> load_baseline_file(const fs::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(saliency::read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw saliency::InputError("cannot parse baseline file " + path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw saliency::InputError("baseline file must be a JSON array of numbers");
    return doc.get<std::vector<double>>();
}

void require_file(const fs::path& path, const std::string& role) {
    if (!fs::exists(path)) throw saliency::InputError(role + " file not found: " + path.string());
}

struct AnalyzeArgs {
    std::string policy, trajectory, schema, out;
    std::size_t steps = 25;
    std::string baseline = "zero";
    std::string method = "mean";
    bool include_ff = false;
};

void run_analyze(const AnalyzeArgs& args) {
    require_file(args.policy, "policy");
    require_file(args.trajectory, "trajectory");
    require_file(args.schema, "schema");

    const auto policy = saliency::load_policy(args.policy);
    const auto trajectory = saliency::load_trajectory_csv(args.trajectory);
    const auto schema = saliency::load_schema(args.schema);

    saliency::AnalysisOptions opts;
    opts.steps = args.steps;
    if (args.baseline != "zero") opts.baseline = load_baseline_file(args.baseline);
    if (args.method == "mean")
        opts.method = saliency::ImportanceMethod::Mean;
    else if (args.method == "max")
        opts.method = saliency::ImportanceMethod::Max;
    else
        throw saliency::InputError("unknown method '" + args.method + "' (expected mean or max)");
    opts.include_feedforward = args.include_ff;
    opts.threads = env_threads();

    const auto result = saliency::run_analysis(policy, trajectory, schema, opts);

    saliency::InputManifest inputs;
    inputs.add("policy", args.policy);
    inputs.add("trajectory", args.trajectory);
    inputs.add("schema", args.schema);
    if (args.baseline != "zero") inputs.add("baseline", args.baseline);
    saliency::write_analysis_bundle(args.out, result, policy, opts, inputs);
}

struct MetricsArgs {
    std::string task, episode, targets, out;
};

void run_metrics(const MetricsArgs& args) {
    require_file(args.episode, "episode");
    require_file(args.targets, "targets");
    const auto task = saliency::task_from_name(args.task);
    const auto episode = saliency::load_episode(args.episode);
    const auto targets = saliency::load_targets(args.targets, task);
    std::vector<std::string> warnings;
    const auto set = saliency::score_episode(episode, targets, task, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    saliency::write_text_file(args.out, saliency::metric_set_to_json(set).dump(2) + "\n");
}

struct CorrelateArgs {
    std::string trajectory, schema, out;
    double threshold = 0.25;
};

void run_correlate(const CorrelateArgs& args) {
    require_file(args.trajectory, "trajectory");
    require_file(args.schema, "schema");
    const auto trajectory = saliency::load_trajectory_csv(args.trajectory);
    const auto schema = saliency::load_schema(args.schema);
    if (trajectory.state_dim() != schema.total_dim)
        throw saliency::InputError("trajectory state dim does not match schema total_dim");

    std::vector<std::string> warnings;
    const auto dim_matrix = saliency::pearson_abs_matrix(trajectory, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    const auto group_matrix = saliency::group_correlation(dim_matrix, schema);
    std::vector<std::string> names;
    for (const auto& g : schema.groups) names.push_back(g.name);
    const auto links = saliency::chord_filter(group_matrix, names, args.threshold);

    fs::create_directories(args.out);
    saliency::write_text_file(fs::path(args.out) / "correlation.csv", saliency::matrix_to_csv(dim_matrix));
    saliency::write_text_file(fs::path(args.out) / "chord.json", saliency::chord_links_json(links).dump(2) + "\n");
    saliency::InputManifest inputs;
    inputs.add("trajectory", args.trajectory);
    inputs.add("schema", args.schema);
    nlohmann::json config;
    config["threshold"] = args.threshold;
    saliency::write_text_file(fs::path(args.out) / "manifest.json",
                              saliency::manifest_json("correlate", inputs, config).dump(2) + "\n");
}

struct ComposeArgs {
    std::string saliency_csv, noise, schema, out;
};

void run_compose(const ComposeArgs& args) {
    require_file(args.saliency_csv, "saliency");
    require_file(args.noise, "noise");
    require_file(args.schema, "schema");
    const auto schema = saliency::load_schema(args.schema);
    saliency::SaliencyMap map;
    map.normalized = saliency::read_matrix_csv(args.saliency_csv);

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(saliency::read_text_file(args.noise));
    } catch (const nlohmann::json::exception& e) {
        throw saliency::InputError("cannot parse noise file " + std::string(args.noise) + ": " + e.what());
    }
    if (!doc.contains("sigma")) throw saliency::InputError("noise file must contain a 'sigma' array");
    saliency::NoiseSpec noise;
    noise.sigma = doc["sigma"].get<std::vector<double>>();

    const auto sensitivity = saliency::compose_sensitivity(map, noise, schema);
    saliency::write_text_file(args.out, saliency::matrix_to_csv(sensitivity));
}

struct SynthArgs {
    std::uint64_t seed = 0;
    std::string planted;
    std::string out;
};

void run_synth(const SynthArgs& args) {
    saliency::SynthConfig cfg;
    cfg.seed = args.seed;
    const auto schema = saliency::default_schema();

    saliency::MlpPolicy policy;
    if (!args.planted.empty()) {
        const saliency::StateGroup* group = schema.find(args.planted);
        if (!group) throw saliency::InputError("planted group '" + args.planted + "' is not in the schema");
        policy = saliency::gen_planted_policy(cfg, group->dims);
    } else {
        policy = saliency::gen_random_policy(cfg);
    }
    const auto trajectory = saliency::gen_trajectory(cfg, schema);

    fs::create_directories(args.out);
    saliency::save_policy(policy, fs::path(args.out) / "policy.json");
    saliency::save_schema(schema, fs::path(args.out) / "schema.json");
    saliency::save_trajectory_csv(trajectory, fs::path(args.out) / "trajectory.csv");
}

struct RenderArgs {
    std::string matrix, out;
};

void run_render(const RenderArgs& args) {
    require_file(args.matrix, "matrix");
    const auto matrix = saliency::read_matrix_csv(args.matrix);
    saliency::write_text_file(args.out, saliency::render_heatmap_svg(matrix));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feedback-state saliency analysis for differentiable policies"};
    app.set_version_flag("--version", saliency::kToolVersion);
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "Saliency map and importance ranking for a policy on a trajectory");
    analyze->add_option("--policy", analyze_args.policy, "Policy weight JSON")->required();
    analyze->add_option("--trajectory", analyze_args.trajectory, "Trajectory CSV")->required();
    analyze->add_option("--schema", analyze_args.schema, "State schema JSON")->required();
    analyze->add_option("--p", analyze_args.steps, "Riemann step count")->default_val(25);
    analyze->add_option("--baseline", analyze_args.baseline, "'zero' or a JSON array file")->default_val("zero");
    analyze->add_option("--method", analyze_args.method, "Group importance method: mean|max")->default_val("mean");
    analyze->add_flag("--include-ff", analyze_args.include_ff, "Include feedforward groups in the shares");
    analyze->add_option("--out", analyze_args.out, "Output directory")->required();
    analyze->callback([&] { run_analyze(analyze_args); });

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "Score a locomotion episode with the task metrics");
    metrics->add_option("--task", metrics_args.task, "recovery|gait")->required();
    metrics->add_option("--episode", metrics_args.episode, "Episode CSV (JSON sidecar alongside)")->required();
    metrics->add_option("--targets", metrics_args.targets, "Metric targets JSON")->required();
    metrics->add_option("--out", metrics_args.out, "Output metric JSON")->required();
    metrics->callback([&] { run_metrics(metrics_args); });

    CorrelateArgs correlate_args;
    auto* correlate = app.add_subcommand("correlate", "Pearson correlation structure of a trajectory");
    correlate->add_option("--trajectory", correlate_args.trajectory, "Trajectory CSV")->required();
    correlate->add_option("--schema", correlate_args.schema, "State schema JSON")->required();
    correlate->add_option("--threshold", correlate_args.threshold, "Chord link threshold")->default_val(0.25);
    correlate->add_option("--out", correlate_args.out, "Output directory")->required();
    correlate->callback([&] { run_correlate(correlate_args); });

    ComposeArgs compose_args;
    auto* compose = app.add_subcommand("compose", "Compose a saliency map with sensor noise sensitivities");
    compose->add_option("--saliency", compose_args.saliency_csv, "Normalized saliency CSV")->required();
    compose->add_option("--noise", compose_args.noise, "Noise spec JSON {\"sigma\":[...]}")->required();
    compose->add_option("--schema", compose_args.schema, "State schema JSON (with ranges)")->required();
    compose->add_option("--out", compose_args.out, "Output sensitivity CSV")->required();
    compose->callback([&] { run_compose(compose_args); });

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Write a seeded (policy, schema, trajectory) fixture triple");
    synth->add_option("--seed", synth_args.seed, "Fixture seed")->required();
    synth->add_option("--planted", synth_args.planted, "Restrict policy input to this schema group");
    synth->add_option("--out", synth_args.out, "Output directory")->required();
    synth->callback([&] { run_synth(synth_args); });

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "Render a matrix CSV as a grayscale SVG heatmap");
    render->add_option("--matrix", render_args.matrix, "Matrix CSV")->required();
    render->add_option("--out", render_args.out, "Output SVG path")->required();
    render->callback([&] { run_render(render_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const saliency::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
