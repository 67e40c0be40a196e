#include "asnsim/taxonomy.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>

#include "asnsim/csv.hpp"
#include "asnsim/gzline.hpp"
#include "asnsim/text.hpp"

namespace asnsim {

namespace {

[[noreturn]] void malformed(std::string_view code) {
    throw TaxonomyError(TaxonomyError::Code::malformed_code,
                        "malformed recruitment-field code: '" + std::string(code) + "'");
}

constexpr std::array<RecruitmentField, 5> kNdExceptions = {{
    {8, 'C', 1},
    {8, 'D', 1},
    {8, 'E', 1},
    {8, 'E', 2},
    {8, 'F', 1},
}};

constexpr std::array<RecruitmentField, 4> kCdExceptions = {{
    {11, 'E', 1},
    {11, 'E', 2},
    {11, 'E', 3},
    {11, 'E', 4},
}};

std::optional<double> parse_non_negative(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 0.0) return std::nullopt;
    return v;
}

// Incremental threshold-table parser shared by the file and string loaders.
struct ThresholdLoader {
    explicit ThresholdLoader(std::string origin) : origin(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw TaxonomyError(TaxonomyError::Code::malformed_row,
                            origin + ":" + std::to_string(lineno) + ": " + msg);
    }

    void feed(std::string_view line) {
        ++lineno;
        if (trim(line).empty()) return;
        if (!split_csv_fields(line, fields, arena)) fail("broken quoting");
        if (!saw_header) {
            saw_header = true;
            if (fields.size() < 5 || to_lower_copy(trim(fields[0])) != "rf") {
                fail("missing 'rf,level,t_a,t_b,t_c' header");
            }
            has_session_col = fields.size() >= 6 && to_lower_copy(trim(fields[5])) == "session";
            return;
        }
        const std::size_t expected = has_session_col ? 6 : 5;
        if (fields.size() != expected) {
            fail("expected " + std::to_string(expected) + " fields, got " +
                 std::to_string(fields.size()));
        }
        RecruitmentField rf{};
        try {
            rf = parse_rf(fields[0]);
        } catch (const TaxonomyError& e) {
            fail(e.what());
        }
        const auto level = parse_level(fields[1]);
        const auto a = parse_non_negative(fields[2]);
        const auto b = parse_non_negative(fields[3]);
        const auto c = parse_non_negative(fields[4]);
        if (!level || !a || !b || !c) fail("bad level or threshold value");
        std::optional<int> session;
        if (has_session_col) {
            const std::string_view raw = trim(fields[5]);
            if (!raw.empty()) {
                int y = 0;
                const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), y);
                if (ec != std::errc() || ptr != raw.data() + raw.size()) fail("bad session");
                session = y;
            }
        }
        table.insert(rf, *level, session, ThresholdTriple{*a, *b, *c});
    }

    std::string origin;
    ThresholdTable table;
    std::vector<std::string_view> fields;
    std::string arena;
    bool saw_header = false;
    bool has_session_col = false;
    std::size_t lineno = 0;
};

}  // namespace

std::string format_rf(const RecruitmentField& rf) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d/%c%d", rf.sa, rf.group, rf.field);
    return buf;
}

RecruitmentField parse_rf(std::string_view code) {
    const std::string_view s = trim(code);
    // Shapes: "A/GF" or "AA/GF" with '/' or '-' as separator.
    if (s.size() < 4 || s.size() > 5) malformed(code);
    const std::size_t sep = s.size() == 5 ? 2 : 1;
    if (s[sep] != '/' && s[sep] != '-') malformed(code);

    int sa = 0;
    for (std::size_t i = 0; i < sep; ++i) {
        if (!is_digit(s[i])) malformed(code);
        sa = sa * 10 + (s[i] - '0');
    }

    char group = s[sep + 1];
    if (group >= 'a' && group <= 'z') group = static_cast<char>(group - 0x20);
    if (group < 'A' || group > 'Z') malformed(code);

    const char field_ch = s[sep + 2];
    if (field_ch < '1' || field_ch > '9') malformed(code);

    if (sa < 1 || sa > 14) {
        throw TaxonomyError(TaxonomyError::Code::out_of_range,
                            "scientific area out of range 1..14 in '" + std::string(code) + "'");
    }
    return RecruitmentField{sa, group, field_ch - '0'};
}

std::optional<Level> parse_level(std::string_view s) {
    const std::string v = to_lower_copy(trim(s));
    if (v == "fp" || v == "1") return Level::FP;
    if (v == "ap" || v == "2") return Level::AP;
    return std::nullopt;
}

std::string_view level_name(Level level) noexcept { return level == Level::FP ? "FP" : "AP"; }

DisciplineCategory classify(const RecruitmentField& rf) noexcept {
    if (rf.sa <= 9) {
        for (const auto& e : kNdExceptions) {
            if (rf == e) return DisciplineCategory::ND;
        }
        return DisciplineCategory::CD;
    }
    for (const auto& e : kCdExceptions) {
        if (rf == e) return DisciplineCategory::CD;
    }
    return DisciplineCategory::ND;
}

void ThresholdTable::insert(const RecruitmentField& rf, Level level, std::optional<int> session,
                            const ThresholdTriple& t) {
    const Key key{rf, level, session};
    if (!rows_.emplace(key, t).second) {
        throw TaxonomyError(TaxonomyError::Code::duplicate_key,
                            "duplicate threshold row for " + format_rf(rf) + " " +
                                std::string(level_name(level)));
    }
}

const ThresholdTriple& ThresholdTable::lookup(const RecruitmentField& rf, Level level,
                                              std::optional<int> session) const {
    if (session) {
        const auto it = rows_.find(Key{rf, level, session});
        if (it != rows_.end()) return it->second;
    }
    const auto it = rows_.find(Key{rf, level, std::nullopt});
    if (it != rows_.end()) return it->second;
    throw TaxonomyError(TaxonomyError::Code::missing_entry,
                        "no threshold entry for " + format_rf(rf) + " " +
                            std::string(level_name(level)));
}

std::optional<ThresholdTriple> ThresholdTable::find(const RecruitmentField& rf, Level level,
                                                    std::optional<int> session) const noexcept {
    if (session) {
        const auto it = rows_.find(Key{rf, level, session});
        if (it != rows_.end()) return it->second;
    }
    const auto it = rows_.find(Key{rf, level, std::nullopt});
    if (it != rows_.end()) return it->second;
    return std::nullopt;
}

ThresholdTable ThresholdTable::load(const std::filesystem::path& path) {
    LineReader in(path);
    if (!in.is_open()) {
        throw TaxonomyError(TaxonomyError::Code::unreadable_source, in.error());
    }
    ThresholdLoader loader(path.string());
    std::string_view line;
    while (in.next(line)) loader.feed(line);
    if (in.failed()) {
        throw TaxonomyError(TaxonomyError::Code::unreadable_source,
                            path.string() + ": " + in.error());
    }
    return std::move(loader.table);
}

ThresholdTable ThresholdTable::load_from_string(std::string_view content,
                                                const std::string& origin) {
    ThresholdLoader loader(origin);
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        std::string_view line = content.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        loader.feed(line);
        pos = nl + 1;
    }
    return std::move(loader.table);
}

RecruitmentFieldList RecruitmentFieldList::load(const std::filesystem::path& path) {
    LineReader in(path);
    if (!in.is_open()) {
        throw TaxonomyError(TaxonomyError::Code::unreadable_source, in.error());
    }
    RecruitmentFieldList list;
    std::string_view line;
    while (in.next(line)) {
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        list.fields_.push_back(parse_rf(s));
    }
    if (in.failed()) {
        throw TaxonomyError(TaxonomyError::Code::unreadable_source,
                            path.string() + ": " + in.error());
    }
    std::sort(list.fields_.begin(), list.fields_.end());
    const auto dup = std::adjacent_find(list.fields_.begin(), list.fields_.end());
    if (dup != list.fields_.end()) {
        throw TaxonomyError(TaxonomyError::Code::duplicate_key,
                            path.string() + ": duplicate code " + format_rf(*dup));
    }
    return list;
}

bool RecruitmentFieldList::contains(const RecruitmentField& rf) const noexcept {
    return std::binary_search(fields_.begin(), fields_.end(), rf);
}

}  // namespace asnsim
