#include "asnsim/agreement.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include "asnsim/text.hpp"

namespace asnsim {

std::optional<Grouping> parse_grouping(std::string_view s) {
    const std::string v = to_lower_copy(trim(s));
    if (v == "level") return Grouping::by_level;
    if (v == "sa" || v == "level_sa") return Grouping::by_level_sa;
    if (v == "rf" || v == "level_rf") return Grouping::by_level_rf;
    return std::nullopt;
}

std::string_view grouping_name(Grouping g) noexcept {
    switch (g) {
        case Grouping::by_level:
            return "level";
        case Grouping::by_level_sa:
            return "sa";
        case Grouping::by_level_rf:
            return "rf";
    }
    return "level";
}

std::string AgreementReportRow::group_label() const {
    std::string label(level_name(level));
    if (sa) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), " SA %02d", *sa);
        label += buf;
    }
    if (rf) label += " " + format_rf(*rf);
    return label;
}

std::vector<AgreementReportRow> aggregate(std::span<const AgreementObservation> observations,
                                          Grouping grouping) {
    using Key = std::tuple<Level, int, RecruitmentField>;
    std::map<Key, AgreementReportRow> groups;

    for (const auto& obs : observations) {
        Key key{obs.level, 0, RecruitmentField{}};
        switch (grouping) {
            case Grouping::by_level:
                break;
            case Grouping::by_level_sa:
                std::get<1>(key) = obs.rf.sa;
                break;
            case Grouping::by_level_rf:
                std::get<1>(key) = obs.rf.sa;
                std::get<2>(key) = obs.rf;
                break;
        }
        AgreementReportRow& row = groups[key];
        row.level = obs.level;
        if (grouping != Grouping::by_level) row.sa = obs.rf.sa;
        if (grouping == Grouping::by_level_rf) row.rf = obs.rf;
        ++row.n;
        const auto tally = [](AgreementCell& cell, const std::optional<bool>& flag) {
            if (flag) {
                ++cell.n;
                if (*flag) ++cell.agreed;
            }
        };
        tally(row.overall, obs.agree_overall);
        tally(row.a, obs.agree_a);
        tally(row.b, obs.agree_b);
        tally(row.c, obs.agree_c);
    }

    std::vector<AgreementReportRow> rows;
    rows.reserve(groups.size());
    for (auto& [key, row] : groups) rows.push_back(std::move(row));
    return rows;
}

void rank_groups(std::vector<AgreementReportRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const AgreementReportRow& x, const AgreementReportRow& y) {
                         // agreed_x/n_x < agreed_y/n_y by cross-multiplication;
                         // empty cells sort as 0%.
                         const auto lhs = x.overall.agreed * std::max<std::uint64_t>(y.overall.n, 1);
                         const auto rhs = y.overall.agreed * std::max<std::uint64_t>(x.overall.n, 1);
                         if (lhs != rhs) return lhs < rhs;
                         return std::tie(x.level, x.sa, x.rf) < std::tie(y.level, y.sa, y.rf);
                     });
}

}  // namespace asnsim
