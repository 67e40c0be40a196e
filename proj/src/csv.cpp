#include "asnsim/csv.hpp"

#include "asnsim/kernels/bytescan.hpp"

namespace asnsim {

namespace {

// Parses one field starting at `pos` (which points at the opening quote).
// Appends the unescaped content to `arena` and returns the field view, or
// returns false on unbalanced quoting. Advances pos past the closing quote.
bool parse_quoted(std::string_view line, std::size_t& pos, std::string& arena,
                  std::string_view& out) {
    const std::size_t start = arena.size();
    ++pos;  // opening quote
    for (;;) {
        if (pos >= line.size()) return false;  // unterminated
        const char c = line[pos];
        if (c == '"') {
            if (pos + 1 < line.size() && line[pos + 1] == '"') {
                arena.push_back('"');
                pos += 2;
                continue;
            }
            ++pos;  // closing quote
            out = std::string_view(arena.data() + start, arena.size() - start);
            return true;
        }
        arena.push_back(c);
        ++pos;
    }
}

}  // namespace

bool split_csv_fields(std::string_view line, std::vector<std::string_view>& fields,
                      std::string& arena) {
    fields.clear();
    arena.clear();

    // Fast path: no quotes anywhere, split on commas.
    if (kernels::find_char(line, '"') == std::string_view::npos) {
        std::size_t pos = 0;
        for (;;) {
            std::string_view rest = line.substr(pos);
            const std::size_t comma = kernels::find_char(rest, ',');
            if (comma == std::string_view::npos) {
                fields.push_back(rest);
                return true;
            }
            fields.push_back(rest.substr(0, comma));
            pos += comma + 1;
        }
    }

    // Unescaped content never exceeds the input, so one reserve keeps every
    // arena-backed view stable.
    arena.reserve(line.size());
    std::size_t pos = 0;
    for (;;) {
        if (pos < line.size() && line[pos] == '"') {
            std::string_view field;
            if (!parse_quoted(line, pos, arena, field)) return false;
            if (pos < line.size() && line[pos] != ',') return false;  // junk after quote
            fields.push_back(field);
        } else {
            std::size_t next = pos;
            while (next < line.size() && line[next] != ',') ++next;
            fields.push_back(line.substr(pos, next - pos));
            pos = next;
        }
        if (pos >= line.size()) return true;
        ++pos;  // skip comma
    }
}

std::string csv_escape(std::string_view value) {
    bool needs_quotes = false;
    for (char c : value) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return std::string(value);
    std::string out;
    out.reserve(value.size() + 2);
    out.push_back('"');
    for (char c : value) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace asnsim
