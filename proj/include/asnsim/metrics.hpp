#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "asnsim/citation_index.hpp"
#include "asnsim/doi.hpp"
#include "asnsim/metadata.hpp"
#include "asnsim/taxonomy.hpp"

// The three citation-based metrics of the qualification's first phase:
// A = journal articles, B = citations received, C = h-index, computed over
// the level's publication-age window.

namespace asnsim {

// One CV = one application; the same person may appear under several app_ids.
struct CandidateApplication {
    std::string app_id;
    RecruitmentField rf;
    Level level = Level::AP;
    int session_year = 0;
    std::vector<Doi> dois;  // unique, extraction order
    std::optional<ThresholdTriple> official_metrics;  // (A, B, C) as released
    std::optional<bool> official_passed;
};

struct MetricsTriple {
    double a_journals = 0.0;
    double b_citations = 0.0;
    double c_hindex = 0.0;

    bool operator==(const MetricsTriple&) const = default;
};

enum class NormalizationMode { none, divide_by_scientific_age };

// The official normalization formulas are not public; default off, with the
// scientific-age divisor available per metric for experimentation.
struct NormalizationPolicy {
    NormalizationMode a = NormalizationMode::none;
    NormalizationMode b = NormalizationMode::none;
    NormalizationMode c = NormalizationMode::none;

    static NormalizationPolicy uniform(NormalizationMode m) { return {m, m, m}; }
};

using RecordMap = std::unordered_map<std::string, PublicationRecord>;

// Years since the first dated publication, floored at 1. Undated records are
// ignored; with no dated record at all the floor applies.
int scientific_age(std::span<const PublicationRecord> records, int session_year);

// Keeps records strictly younger than the level's window; undated records
// are excluded (they cannot be proven inside any window).
std::vector<PublicationRecord> window_filter(std::span<const PublicationRecord> records,
                                             Level level, int session_year);

// Largest h such that at least h counts are >= h.
std::uint64_t h_index(std::vector<std::uint64_t> citation_counts);

// A, B, C over the application's windowed records. DOIs without a metadata
// record contribute nothing anywhere.
MetricsTriple compute_metrics(const CandidateApplication& app, const RecordMap& records,
                              const CitationIndex& index, const NormalizationPolicy& policy = {});

}  // namespace asnsim
