#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "asnsim/kernels/bytescan.hpp"
#include "asnsim/pipeline.hpp"

// asnsim — simulates the bibliometric first phase of the Italian National
// Scientific Qualification from open bibliographic and citation data and
// measures agreement with the official outcomes.
//
// Exit codes: 0 success, 2 invalid manifest, 3 stage failure.

namespace {

constexpr int kExitOk = 0;
constexpr int kExitManifest = 2;
constexpr int kExitStage = 3;

struct Overrides {
    std::optional<bool> offline;
    std::optional<std::string> comparator;
    std::optional<std::string> normalization;
    std::optional<int> jobs;
    std::optional<std::string> out_dir;
    std::optional<bool> charts;
};

void apply_overrides(asnsim::RunManifest& manifest, const Overrides& o) {
    if (o.offline) manifest.offline = *o.offline;
    if (o.comparator) {
        const auto c = asnsim::parse_comparator(*o.comparator);
        if (!c) throw asnsim::ManifestError("--comparator must be 'ge' or 'gt'");
        manifest.comparator = *c;
    }
    if (o.normalization) {
        if (*o.normalization == "none") {
            manifest.normalization =
                asnsim::NormalizationPolicy::uniform(asnsim::NormalizationMode::none);
        } else if (*o.normalization == "age") {
            manifest.normalization = asnsim::NormalizationPolicy::uniform(
                asnsim::NormalizationMode::divide_by_scientific_age);
        } else {
            throw asnsim::ManifestError("--normalization must be 'none' or 'age'");
        }
    }
    if (o.jobs) {
        if (*o.jobs < 1) throw asnsim::ManifestError("--jobs must be >= 1");
        manifest.jobs = *o.jobs;
    }
    if (o.out_dir) manifest.out_dir = *o.out_dir;
    if (o.charts) manifest.charts = *o.charts;
}

struct StageCommand {
    std::string name;
    std::string description;
    std::function<void(asnsim::Pipeline&)> invoke;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open-data simulation of the NSQ bibliometric phase"};
    app.require_subcommand(1);

    const StageCommand commands[] = {
        {"run", "Run the whole pipeline from the manifest",
         [](asnsim::Pipeline& p) { p.run(); }},
        {"extract", "Normalize applications / extract DOIs from CV texts",
         [](asnsim::Pipeline& p) { p.extract(); }},
        {"resolve", "Validate DOIs and fetch publication metadata",
         [](asnsim::Pipeline& p) { p.resolve(); }},
        {"ingest", "Build the citation index from COCI dumps",
         [](asnsim::Pipeline& p) { p.ingest(); }},
        {"evaluate", "Compute metrics, thresholds and agreement per application",
         [](asnsim::Pipeline& p) { p.evaluate(); }},
        {"report", "Aggregate agreement tables and charts",
         [](asnsim::Pipeline& p) { p.report(); }},
    };

    std::string manifest_path;
    Overrides overrides;
    const StageCommand* selected = nullptr;

    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.description);
        sub->add_option("--manifest", manifest_path, "Run manifest (JSON)")->required();
        sub->add_flag_callback("--offline", [&] { overrides.offline = true; },
                               "Force offline mode (no network transports)");
        sub->add_flag_callback("--online", [&] { overrides.offline = false; },
                               "Allow live DOI/metadata transports");
        sub->add_option_function<std::string>(
            "--comparator", [&](const std::string& v) { overrides.comparator = v; },
            "Threshold comparator: ge (default) or gt");
        sub->add_option_function<std::string>(
            "--normalization", [&](const std::string& v) { overrides.normalization = v; },
            "Metric normalization: none (default) or age");
        sub->add_option_function<int>("--jobs",
                                      [&](int v) { overrides.jobs = v; },
                                      "Parallelism bound");
        sub->add_option_function<std::string>(
            "--out", [&](const std::string& v) { overrides.out_dir = v; }, "Output directory");
        sub->add_flag_callback("--charts", [&] { overrides.charts = true; },
                               "Write per-RF agreement charts (SVG)");
        sub->callback([&selected, &cmd] { selected = &cmd; });
    }

    bool verbose = false;
    app.add_flag("--verbose", verbose, "Print the selected kernel implementation");

    CLI11_PARSE(app, argc, argv);

    if (verbose) {
        std::fprintf(stderr, "asnsim: byte-scan kernels: %s\n",
                     asnsim::kernels::active_implementation());
    }

    try {
        asnsim::RunManifest manifest = asnsim::RunManifest::load(manifest_path);
        apply_overrides(manifest, overrides);
        asnsim::Pipeline pipeline(std::move(manifest));
        selected->invoke(pipeline);
    } catch (const asnsim::ManifestError& e) {
        std::fprintf(stderr, "asnsim: manifest error: %s\n", e.what());
        return kExitManifest;
    } catch (const asnsim::StageError& e) {
        std::fprintf(stderr, "asnsim: stage failure in '%s': %s\n", e.stage.c_str(), e.what());
        return kExitStage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "asnsim: stage failure: %s\n", e.what());
        return kExitStage;
    }
    return kExitOk;
}
