#include "asnsim/metrics.hpp"

#include <algorithm>

namespace asnsim {

int scientific_age(std::span<const PublicationRecord> records, int session_year) {
    std::optional<int> first_year;
    for (const auto& r : records) {
        if (r.year && (!first_year || *r.year < *first_year)) first_year = r.year;
    }
    if (!first_year) return 1;
    return std::max(1, session_year - *first_year + 1);
}

std::vector<PublicationRecord> window_filter(std::span<const PublicationRecord> records,
                                             Level level, int session_year) {
    const int window = window_years(level);
    std::vector<PublicationRecord> kept;
    kept.reserve(records.size());
    for (const auto& r : records) {
        if (r.year && session_year - *r.year < window) kept.push_back(r);
    }
    return kept;
}

std::uint64_t h_index(std::vector<std::uint64_t> citation_counts) {
    std::sort(citation_counts.begin(), citation_counts.end(), std::greater<>());
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < citation_counts.size(); ++i) {
        if (citation_counts[i] >= i + 1) {
            h = i + 1;
        } else {
            break;
        }
    }
    return h;
}

MetricsTriple compute_metrics(const CandidateApplication& app, const RecordMap& records,
                              const CitationIndex& index, const NormalizationPolicy& policy) {
    std::vector<PublicationRecord> resolved;
    resolved.reserve(app.dois.size());
    for (const auto& doi : app.dois) {
        const auto it = records.find(doi.value);
        if (it != records.end()) resolved.push_back(it->second);
    }

    const std::vector<PublicationRecord> windowed =
        window_filter(resolved, app.level, app.session_year);

    double a = 0.0;
    double b = 0.0;
    std::vector<std::uint64_t> counts;
    counts.reserve(windowed.size());
    for (const auto& r : windowed) {
        if (r.is_journal_article) a += 1.0;
        const std::uint64_t c = index.citation_count(r.doi);
        b += static_cast<double>(c);
        counts.push_back(c);
    }
    double c = static_cast<double>(h_index(std::move(counts)));

    const int age = scientific_age(resolved, app.session_year);
    if (policy.a == NormalizationMode::divide_by_scientific_age) a /= age;
    if (policy.b == NormalizationMode::divide_by_scientific_age) b /= age;
    if (policy.c == NormalizationMode::divide_by_scientific_age) c /= age;
    return MetricsTriple{a, b, c};
}

}  // namespace asnsim
