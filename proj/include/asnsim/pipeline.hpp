#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "asnsim/manifest.hpp"

// Stage orchestration. Every stage reads its inputs from files and writes
// its outputs to files under the manifest's output dir, so `run` and the
// individual subcommands produce identical artifacts.

namespace asnsim {

struct StageError : std::runtime_error {
    StageError(std::string stage_name, const std::string& what)
        : std::runtime_error(stage_name + ": " + what), stage(std::move(stage_name)) {}

    std::string stage;
};

// Artifact locations under the output dir.
struct PipelinePaths {
    explicit PipelinePaths(const std::filesystem::path& out_dir);

    std::filesystem::path applications;       // applications.csv
    std::filesystem::path extraction_report;  // extraction_report.jsonl
    std::filesystem::path dois;               // dois.csv
    std::filesystem::path index;              // citations.idx
    std::filesystem::path edges;              // edges.csv (keep_edges only)
    std::filesystem::path results;            // results.csv
    std::filesystem::path report_by_level;    // agreement_by_level.csv
    std::filesystem::path report_by_sa;       // agreement_by_sa.csv
    std::filesystem::path report_by_rf;       // agreement_by_rf.csv
    std::filesystem::path report_cells;       // agreement_cells.csv
    std::filesystem::path sa_ranking;         // sa_ranking.csv
    std::filesystem::path charts_dir;         // charts/
    std::filesystem::path run_report;         // run_report.json
};

class Pipeline {
public:
    explicit Pipeline(RunManifest manifest);

    // Normalizes the application input (CV dir + sidecar, or a pre-extracted
    // applications file) into the canonical applications artifact.
    void extract();

    // DOI existence validation + metadata resolution into the per-DOI table.
    void resolve();

    // COCI dump ingestion into the index snapshot (or adoption of a
    // pre-built snapshot).
    void ingest();

    // Metrics, thresholds, 2-of-3 assessment and official comparison into
    // the per-application results file.
    void evaluate();

    // Grouped agreement tables, SA ranking and optional charts.
    void report();

    void run();

    const PipelinePaths& paths() const noexcept { return paths_; }

private:
    RunManifest manifest_;
    PipelinePaths paths_;
};

}  // namespace asnsim
