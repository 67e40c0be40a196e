#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "asnsim/metrics.hpp"
#include "asnsim/taxonomy.hpp"

// Threshold application and the 2-of-3 pass rule, plus the per-application
// comparison between the open-data simulation and the official outcome.

namespace asnsim {

// "Exceed" is read as meet-or-exceed by default; the strict form is kept
// selectable because the official rule's strictness is not documented.
enum class Comparator { greater_equal, greater };

std::optional<Comparator> parse_comparator(std::string_view s);
std::string_view comparator_name(Comparator c) noexcept;

struct AssessmentResult {
    std::array<bool, 3> exceeds{false, false, false};  // A, B, C
    bool passed = false;
};

AssessmentResult evaluate(const MetricsTriple& metrics, const ThresholdTriple& thresholds,
                          Comparator comparator = Comparator::greater_equal);

struct OfficialData {
    std::optional<ThresholdTriple> metrics;  // official (A, B, C) values
    std::optional<bool> passed;              // stored official verdict
};

// Agreement is about contribution to the qualification, not metric values:
// per metric, both sides on the same side of the threshold; overall, the
// same pass/fail status.
struct AgreementRecord {
    std::string app_id;
    std::optional<bool> agree_a;
    std::optional<bool> agree_b;
    std::optional<bool> agree_c;
    std::optional<bool> agree_overall;
    // Official exceedance is recomputed from official metric values; when a
    // stored verdict disagrees with the recomputation, this flags it.
    bool official_passed_mismatch = false;
};

// nullopt when no official data at all is present (the record is excluded
// and counted upstream).
std::optional<AgreementRecord> compare(const std::string& app_id, const AssessmentResult& sim,
                                       const OfficialData& official,
                                       const ThresholdTriple& thresholds,
                                       Comparator comparator = Comparator::greater_equal);

}  // namespace asnsim
