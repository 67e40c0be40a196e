#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asnsim/assessment.hpp"
#include "asnsim/taxonomy.hpp"

// Aggregation of per-application agreement into grouped percentage tables
// (per level, per level x scientific area, per level x recruitment field).

namespace asnsim {

// One aggregation input: the agreement flags plus the grouping metadata.
struct AgreementObservation {
    Level level = Level::AP;
    RecruitmentField rf;
    std::optional<bool> agree_a;
    std::optional<bool> agree_b;
    std::optional<bool> agree_c;
    std::optional<bool> agree_overall;
};

enum class Grouping { by_level, by_level_sa, by_level_rf };

std::optional<Grouping> parse_grouping(std::string_view s);
std::string_view grouping_name(Grouping g) noexcept;

// Exact integer cell; percentages materialize only at render time.
struct AgreementCell {
    std::uint64_t n = 0;
    std::uint64_t agreed = 0;

    double pct() const noexcept { return n == 0 ? 0.0 : 100.0 * static_cast<double>(agreed) /
                                                            static_cast<double>(n); }
};

struct AgreementReportRow {
    Level level = Level::AP;
    std::optional<int> sa;                  // set for by_level_sa
    std::optional<RecruitmentField> rf;     // set for by_level_rf
    std::uint64_t n = 0;                    // applications in the group
    AgreementCell overall;
    AgreementCell a;
    AgreementCell b;
    AgreementCell c;

    std::string group_label() const;
};

// Deterministic: rows sorted by group key; groups with n = 0 are omitted.
// Cells carry their own denominators — observations with unknown per-metric
// agreement stay out of the per-metric cells but keep their overall cell
// when the overall flag is known.
std::vector<AgreementReportRow> aggregate(std::span<const AgreementObservation> observations,
                                          Grouping grouping);

// Stable ascending sort by overall agreement percentage (exact rational
// comparison), ties broken by group key.
void rank_groups(std::vector<AgreementReportRow>& rows);

}  // namespace asnsim
