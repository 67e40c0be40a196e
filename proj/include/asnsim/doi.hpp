#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace asnsim {

// A normalized DOI: lowercase, no surrounding whitespace, shaped
// 10.<4-9 digit registrant>/<non-empty suffix>.
struct Doi {
    std::string value;

    Doi() = default;
    explicit Doi(std::string v) : value(std::move(v)) {}

    bool operator==(const Doi&) const = default;
    auto operator<=>(const Doi&) const = default;
};

bool is_valid_doi_syntax(std::string_view s) noexcept;

// Trims, lowercases and syntax-checks a raw string; also strips a leading
// "doi:" or "https://doi.org/" style prefix. Returns nullopt when the result
// is not DOI-shaped.
std::optional<Doi> normalize_doi(std::string_view raw);

}  // namespace asnsim

template <>
struct std::hash<asnsim::Doi> {
    std::size_t operator()(const asnsim::Doi& d) const noexcept {
        return std::hash<std::string>{}(d.value);
    }
};
