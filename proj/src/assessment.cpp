#include "asnsim/assessment.hpp"

#include "asnsim/text.hpp"

namespace asnsim {

namespace {

bool exceeds(double value, double threshold, Comparator c) noexcept {
    return c == Comparator::greater_equal ? value >= threshold : value > threshold;
}

}  // namespace

std::optional<Comparator> parse_comparator(std::string_view s) {
    const std::string v = to_lower_copy(trim(s));
    if (v == "ge" || v == ">=") return Comparator::greater_equal;
    if (v == "gt" || v == ">") return Comparator::greater;
    return std::nullopt;
}

std::string_view comparator_name(Comparator c) noexcept {
    return c == Comparator::greater_equal ? "ge" : "gt";
}

AssessmentResult evaluate(const MetricsTriple& metrics, const ThresholdTriple& thresholds,
                          Comparator comparator) {
    AssessmentResult r;
    r.exceeds[0] = exceeds(metrics.a_journals, thresholds.t_a, comparator);
    r.exceeds[1] = exceeds(metrics.b_citations, thresholds.t_b, comparator);
    r.exceeds[2] = exceeds(metrics.c_hindex, thresholds.t_c, comparator);
    const int n = static_cast<int>(r.exceeds[0]) + static_cast<int>(r.exceeds[1]) +
                  static_cast<int>(r.exceeds[2]);
    r.passed = n >= 2;
    return r;
}

std::optional<AgreementRecord> compare(const std::string& app_id, const AssessmentResult& sim,
                                       const OfficialData& official,
                                       const ThresholdTriple& thresholds, Comparator comparator) {
    if (!official.metrics && !official.passed) return std::nullopt;

    AgreementRecord rec;
    rec.app_id = app_id;

    if (official.metrics) {
        const MetricsTriple official_metrics{official.metrics->t_a, official.metrics->t_b,
                                             official.metrics->t_c};
        const AssessmentResult off = evaluate(official_metrics, thresholds, comparator);
        rec.agree_a = sim.exceeds[0] == off.exceeds[0];
        rec.agree_b = sim.exceeds[1] == off.exceeds[1];
        rec.agree_c = sim.exceeds[2] == off.exceeds[2];
        rec.agree_overall = sim.passed == off.passed;
        if (official.passed && *official.passed != off.passed) {
            rec.official_passed_mismatch = true;
        }
    } else {
        // Only the stored verdict exists: per-metric agreement is unknown and
        // excluded from per-metric aggregates.
        rec.agree_overall = sim.passed == *official.passed;
    }
    return rec;
}

}  // namespace asnsim
