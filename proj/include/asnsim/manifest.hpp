#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asnsim/assessment.hpp"
#include "asnsim/metrics.hpp"

// The run manifest: every path and policy knob the pipeline needs, loaded
// from a JSON file and overridable from the command line.

namespace asnsim {

struct ManifestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunManifest {
    // Application input: either a pre-extracted applications file or a CV
    // directory plus its sidecar metadata table.
    std::optional<std::filesystem::path> applications_file;
    std::optional<std::filesystem::path> cv_dir;
    std::optional<std::filesystem::path> cv_metadata;

    std::vector<std::string> coci_inputs;  // files or '*' globs
    std::filesystem::path thresholds_file;
    std::filesystem::path rf_file;

    std::optional<std::filesystem::path> resolver_fixture;
    std::optional<std::filesystem::path> metadata_store;
    std::optional<std::filesystem::path> metadata_cache;
    std::optional<std::filesystem::path> index_snapshot;  // reuse, skips ingest

    bool offline = true;
    Comparator comparator = Comparator::greater_equal;
    NormalizationPolicy normalization;
    int jobs = 1;
    int partitions = 8;

    // Live-transport knobs; unused offline.
    std::string crossref_base_url;
    std::string doi_proxy_base_url;
    double rate_limit_per_second = 1.0;
    std::string mailto;
    int retry_budget = 3;
    double backoff_seconds = 0.5;

    std::filesystem::path out_dir;
    bool charts = false;
    bool keep_edges = false;

    static RunManifest load(const std::filesystem::path& path);

    // Path existence and mutual-consistency checks; throws ManifestError.
    void validate() const;

    // Expands coci_inputs (sorted, duplicates removed). Throws ManifestError
    // when a pattern matches nothing and no snapshot is available.
    std::vector<std::filesystem::path> expand_coci_inputs() const;
};

}  // namespace asnsim
