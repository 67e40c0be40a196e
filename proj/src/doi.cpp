#include "asnsim/doi.hpp"

#include "asnsim/kernels/bytescan.hpp"
#include "asnsim/text.hpp"

namespace asnsim {

bool is_valid_doi_syntax(std::string_view s) noexcept {
    if (s.size() < 7 || s.substr(0, 3) != "10.") return false;
    std::size_t i = 3;
    std::size_t digits = 0;
    while (i < s.size() && is_digit(s[i])) {
        ++digits;
        ++i;
    }
    if (digits < 4 || digits > 9) return false;
    if (i >= s.size() || s[i] != '/') return false;
    ++i;
    if (i >= s.size()) return false;
    for (; i < s.size(); ++i) {
        if (is_ascii_space(s[i])) return false;
    }
    return true;
}

std::optional<Doi> normalize_doi(std::string_view raw) {
    std::string_view s = trim(raw);
    std::string lowered(s);
    kernels::to_lower_ascii(lowered);

    static constexpr std::string_view kPrefixes[] = {
        "doi:", "https://doi.org/", "http://doi.org/", "https://dx.doi.org/",
        "http://dx.doi.org/",
    };
    for (const auto& p : kPrefixes) {
        if (lowered.size() > p.size() && std::string_view(lowered).substr(0, p.size()) == p) {
            lowered.erase(0, p.size());
            break;
        }
    }
    if (!is_valid_doi_syntax(lowered)) return std::nullopt;
    return Doi(std::move(lowered));
}

}  // namespace asnsim
