#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Recruitment-field taxonomy of the Italian National Scientific
// Qualification (ASN/NSQ): field codes, the citation-based vs
// non-citation-based split, qualification levels, and the per-field
// threshold tables released by ANVUR.

namespace asnsim {

class TaxonomyError : public std::runtime_error {
public:
    enum class Code {
        malformed_code,
        out_of_range,
        duplicate_key,
        malformed_row,
        missing_entry,
        unreadable_source,
    };

    TaxonomyError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

// A recruitment field "AA/GF": scientific area 1..14, group letter, field
// digit 1..9. Canonical text form zero-pads the area: "06/D5".
struct RecruitmentField {
    int sa = 0;
    char group = 'A';
    int field = 0;

    auto operator<=>(const RecruitmentField&) const = default;
};

enum class DisciplineCategory { CD, ND };

// Qualification level with its publication-age window.
enum class Level { FP, AP };

constexpr int window_years(Level level) noexcept { return level == Level::FP ? 15 : 10; }

std::string format_rf(const RecruitmentField& rf);

// Accepts "06/D5" and "06-D5" (both separators occur in the wild), tolerates
// surrounding whitespace and a lowercase group letter, and normalizes to the
// slash form. Throws TaxonomyError with malformed_code / out_of_range.
RecruitmentField parse_rf(std::string_view code);

std::optional<Level> parse_level(std::string_view s);
std::string_view level_name(Level level) noexcept;

// CD for areas 01-09 and ND for 10-14, with the nine decree exceptions
// (08/C1, 08/D1, 08/E1, 08/E2, 08/F1 are ND; 11/E1..11/E4 are CD).
DisciplineCategory classify(const RecruitmentField& rf) noexcept;

struct ThresholdTriple {
    double t_a = 0.0;  // journal articles
    double t_b = 0.0;  // citations
    double t_c = 0.0;  // h-index

    auto operator<=>(const ThresholdTriple&) const = default;
};

// Lookup table keyed by (rf, level) with an optional per-session refinement.
// Rows with a session value shadow session-less rows for that session only.
class ThresholdTable {
public:
    // Delimited text, header: rf,level,t_a,t_b,t_c[,session]
    static ThresholdTable load(const std::filesystem::path& path);
    static ThresholdTable load_from_string(std::string_view content, const std::string& origin);

    void insert(const RecruitmentField& rf, Level level, std::optional<int> session,
                const ThresholdTriple& t);

    // Throws TaxonomyError{missing_entry} when neither a session-specific nor
    // a session-less row exists.
    const ThresholdTriple& lookup(const RecruitmentField& rf, Level level,
                                  std::optional<int> session = std::nullopt) const;

    std::optional<ThresholdTriple> find(const RecruitmentField& rf, Level level,
                                        std::optional<int> session = std::nullopt) const noexcept;

    std::size_t size() const noexcept { return rows_.size(); }

private:
    struct Key {
        RecruitmentField rf;
        Level level;
        std::optional<int> session;

        auto operator<=>(const Key&) const = default;
    };

    std::map<Key, ThresholdTriple> rows_;
};

// The decree's list of recruitment fields, shipped as a data file (one code
// per line, '#' comments). The CD/ND rule never depends on this list; it is
// the validation reference for incoming applications.
class RecruitmentFieldList {
public:
    static RecruitmentFieldList load(const std::filesystem::path& path);

    bool contains(const RecruitmentField& rf) const noexcept;
    const std::vector<RecruitmentField>& all() const noexcept { return fields_; }
    std::size_t size() const noexcept { return fields_.size(); }

private:
    std::vector<RecruitmentField> fields_;
};

}  // namespace asnsim
