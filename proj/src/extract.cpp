#include "asnsim/extract.hpp"

#include <unordered_set>

#include "asnsim/kernels/bytescan.hpp"
#include "asnsim/text.hpp"

namespace asnsim {

namespace {

// Character class a DOI suffix may contain, after decoding. Ends at
// whitespace or anything outside this set; trailing punctuation is stripped
// afterwards. This is the usual Crossref-style matching heuristic, widened
// with <>:; for legacy SICI-shaped suffixes.
bool allowed_suffix_char(char c) noexcept {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) return true;
    switch (c) {
        case '-':
        case '.':
        case '_':
        case ';':
        case '(':
        case ')':
        case '/':
        case ':':
        case '<':
        case '>':
        case '[':
        case ']':
        case '+':
            return true;
        default:
            return false;
    }
}

int hex_value(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

struct Decoded {
    char c = '\0';
    std::size_t next = 0;
    bool was_encoded = false;
};

// Reads one logical character at `pos`, resolving %XX escapes and HTML
// entities. Non-ASCII entity values come back as '\0', which no character
// class accepts, so they terminate a match.
Decoded decode_at(std::string_view text, std::size_t pos) {
    const char c = text[pos];
    if (c == '%' && pos + 2 < text.size()) {
        const int hi = hex_value(text[pos + 1]);
        const int lo = hex_value(text[pos + 2]);
        if (hi >= 0 && lo >= 0) {
            return {static_cast<char>(hi * 16 + lo), pos + 3, true};
        }
    }
    if (c == '&') {
        std::size_t semi = std::string_view::npos;
        const std::size_t limit = std::min(text.size(), pos + 10);
        for (std::size_t j = pos + 1; j < limit; ++j) {
            if (text[j] == ';') {
                semi = j;
                break;
            }
        }
        if (semi != std::string_view::npos && semi > pos + 1) {
            const std::string_view body = text.substr(pos + 1, semi - pos - 1);
            if (body == "amp") return {'&', semi + 1, true};
            if (body == "lt") return {'<', semi + 1, true};
            if (body == "gt") return {'>', semi + 1, true};
            if (body == "quot") return {'"', semi + 1, true};
            if (body == "apos") return {'\'', semi + 1, true};
            if (body == "sol") return {'/', semi + 1, true};
            if (body == "nbsp") return {' ', semi + 1, true};
            if (body.size() >= 2 && body[0] == '#') {
                long value = -1;
                if (body[1] == 'x' || body[1] == 'X') {
                    value = 0;
                    for (std::size_t j = 2; j < body.size(); ++j) {
                        const int h = hex_value(body[j]);
                        if (h < 0) {
                            value = -1;
                            break;
                        }
                        value = value * 16 + h;
                    }
                } else {
                    value = 0;
                    for (std::size_t j = 1; j < body.size(); ++j) {
                        if (!is_digit(body[j])) {
                            value = -1;
                            break;
                        }
                        value = value * 10 + (body[j] - '0');
                    }
                }
                if (value >= 0) {
                    return {value >= 1 && value <= 127 ? static_cast<char>(value) : '\0',
                            semi + 1, true};
                }
            }
        }
    }
    return {c, pos + 1, false};
}

// Raw-text check for a fresh DOI prefix ("10." + 4-9 digits + "/"), used as
// the guard that keeps the line-rejoin heuristic from gluing a new DOI onto
// the previous one.
bool starts_fresh_doi(std::string_view text, std::size_t pos) {
    if (pos + 3 >= text.size()) return false;
    if (text.substr(pos, 3) != "10.") return false;
    std::size_t i = pos + 3;
    std::size_t digits = 0;
    while (i < text.size() && is_digit(text[i])) {
        ++digits;
        ++i;
    }
    return digits >= 4 && digits <= 9 && i < text.size() && text[i] == '/';
}

struct MatchResult {
    bool candidate = false;
    bool accepted = false;
    bool repaired = false;
    std::string doi;
    std::size_t end_raw = 0;
    const char* reason = nullptr;
};

std::size_t count_char(std::string_view s, char c) noexcept {
    std::size_t n = 0;
    for (char x : s) n += (x == c) ? 1 : 0;
    return n;
}

MatchResult try_match(std::string_view text, std::size_t start) {
    MatchResult m;
    const std::size_t n = text.size();
    std::size_t cur = start + 3;  // past "10."

    // Registrant: decoded digits up to the first '/'.
    std::string registrant;
    bool used_decode = false;
    bool have_slash = false;
    while (cur < n) {
        const Decoded d = decode_at(text, cur);
        if (is_digit(d.c)) {
            registrant.push_back(d.c);
            used_decode |= d.was_encoded;
            cur = d.next;
            continue;
        }
        if (d.c == '/') {
            have_slash = true;
            used_decode |= d.was_encoded;
            cur = d.next;
        }
        break;
    }
    m.end_raw = cur;
    if (registrant.empty()) return m;  // "10. " in prose, not a candidate
    if (!have_slash) {
        // A short digit run without a slash is an ordinary decimal number.
        if (registrant.size() < 4) return m;
        m.candidate = true;
        m.reason = "missing-slash";
        return m;
    }
    if (registrant.size() < 4 || registrant.size() > 9) {
        m.candidate = true;
        m.reason = "registrant";
        return m;
    }

    // Suffix: decoded characters from the allowed set, with line-break
    // rejoin. The rejoin only fires past this point — the fragment before
    // the break already contains "10." and "/".
    std::string out = "10." + registrant + "/";
    const std::size_t suffix_start = out.size();
    bool any_repair = used_decode;
    while (cur < n) {
        const char raw = text[cur];
        if (raw == '\n' || raw == '\r') {
            std::size_t next_line = cur + 1;
            if (raw == '\r' && next_line < n && text[next_line] == '\n') ++next_line;
            if (next_line < n && !starts_fresh_doi(text, next_line)) {
                const Decoded d2 = decode_at(text, next_line);
                if (d2.c != '\0' && allowed_suffix_char(d2.c)) {
                    cur = next_line;
                    any_repair = true;
                    continue;
                }
            }
            break;
        }
        const Decoded d = decode_at(text, cur);
        if (d.c == '\0' || !allowed_suffix_char(d.c)) break;
        out.push_back(d.c);
        any_repair |= d.was_encoded;
        cur = d.next;
    }
    m.end_raw = cur;
    m.candidate = true;

    // Trailing sentence punctuation and unbalanced closers.
    std::size_t stripped = 0;
    while (out.size() > suffix_start) {
        const char t = out.back();
        if (t == '.' || t == ',' || t == ';') {
            out.pop_back();
            ++stripped;
            continue;
        }
        if (t == ')' || t == ']' || t == '>') {
            const char open = t == ')' ? '(' : (t == ']' ? '[' : '<');
            const std::string_view suffix(out.data() + suffix_start,
                                          out.size() - suffix_start);
            if (count_char(suffix, open) < count_char(suffix, t)) {
                out.pop_back();
                ++stripped;
                continue;
            }
        }
        break;
    }
    if (out.size() == suffix_start) {
        m.reason = "empty-suffix";
        return m;
    }
    kernels::to_lower_ascii(out);
    m.accepted = true;
    m.repaired = any_repair || stripped > 0;
    m.doi = std::move(out);
    return m;
}

}  // namespace

ExtractionReport extract_dois(std::string_view text) {
    ExtractionReport rep;
    std::unordered_set<std::string> seen;
    const std::size_t n = text.size();
    std::size_t pos = 0;
    while (pos < n) {
        const std::size_t hit = kernels::find_char(text.substr(pos), '1');
        if (hit == std::string_view::npos) break;
        const std::size_t anchor = pos + hit;
        if (anchor + 2 >= n || text[anchor + 1] != '0' || text[anchor + 2] != '.') {
            pos = anchor + 1;
            continue;
        }
        if (anchor > 0) {
            const char prev = text[anchor - 1];
            if ((prev >= '0' && prev <= '9') || (prev >= 'a' && prev <= 'z') ||
                (prev >= 'A' && prev <= 'Z') || prev == '.') {
                pos = anchor + 1;
                continue;
            }
        }
        MatchResult m = try_match(text, anchor);
        if (m.accepted) {
            ++rep.raw_hits;
            if (m.repaired) ++rep.repaired;
            if (seen.insert(m.doi).second) rep.dois.emplace_back(std::move(m.doi));
            pos = std::max(m.end_raw, anchor + 1);
        } else if (m.candidate) {
            rep.rejected.push_back(
                {std::string(text.substr(anchor, m.end_raw - anchor)), m.reason});
            pos = anchor + 3;
        } else {
            pos = anchor + 3;
        }
    }
    return rep;
}

}  // namespace asnsim
