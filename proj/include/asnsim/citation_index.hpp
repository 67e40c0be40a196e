#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "asnsim/doi.hpp"

// DOI -> in-degree store over COCI-format DOI-to-DOI citation dumps. Only
// the in-degree survives ingestion; metrics B and C need nothing else.
// Counting is exact: each distinct (citing, cited) pair counts once, deduped
// through hash-partitioned disk spills so peak memory stays proportional to
// the number of distinct DOIs, not to the number of dump rows.

namespace asnsim {

struct IngestStats {
    std::uint64_t files_requested = 0;
    std::uint64_t files_ok = 0;
    std::uint64_t rows_read = 0;        // data rows, headers excluded
    std::uint64_t malformed_rows = 0;
    std::uint64_t duplicate_pairs = 0;  // rows collapsed by distinct-pair dedup
    std::vector<std::string> unreadable_sources;
};

struct IngestOptions {
    int jobs = 1;
    int partitions = 8;
    std::filesystem::path spill_dir;  // required; scratch space for pair dedup
    bool keep_edges = false;          // also write the deduped edge list
    std::filesystem::path edges_out;  // used when keep_edges is set
};

class CitationIndex {
public:
    CitationIndex() = default;

    // Streams COCI CSV dumps (plain or gzip; header
    // oci,citing,cited,creation,timespan,journal_sc,author_sc). Unreadable
    // files are recorded in stats and skipped; ingestion continues.
    static CitationIndex ingest(const std::vector<std::filesystem::path>& files,
                                const IngestOptions& options, IngestStats& stats);

    // In-degree under the distinct-pair convention; 0 for unseen DOIs.
    // Case-insensitive (DOIs are normalized to lowercase before counting).
    std::uint64_t citation_count(const Doi& doi) const;
    std::uint64_t citation_count(std::string_view doi) const;

    // Bulk lookup; pointwise equal to citation_count.
    std::map<std::string, std::uint64_t> restrict(std::span<const Doi> dois) const;

    std::uint64_t total_edges() const noexcept { return total_edges_; }
    std::uint64_t total_entities() const noexcept { return total_entities_; }

    // Canonical snapshot: magic+version header, totals, then (doi, count)
    // records sorted by DOI. Byte-identical for any ingestion order.
    void save(const std::filesystem::path& path) const;
    static CitationIndex load(const std::filesystem::path& path);

private:
    std::unordered_map<std::string, std::uint64_t> in_degree_;
    std::uint64_t total_edges_ = 0;
    std::uint64_t total_entities_ = 0;
};

}  // namespace asnsim
