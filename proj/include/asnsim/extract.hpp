#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "asnsim/doi.hpp"

// DOI harvesting from plain-text CVs: pattern scan plus the repair
// heuristics that recover DOIs mangled by PDF-to-text conversion (line
// splits, percent-escapes, HTML entities, trailing sentence punctuation).

namespace asnsim {

struct RejectedSpan {
    std::string span;    // raw text of the failed candidate
    std::string reason;  // "registrant", "missing-slash", "empty-suffix"
};

struct ExtractionReport {
    std::vector<Doi> dois;  // unique, first-occurrence order
    std::size_t raw_hits = 0;  // syntactically complete matches before dedup
    std::size_t repaired = 0;  // matches that needed any repair heuristic
    std::vector<RejectedSpan> rejected;
};

ExtractionReport extract_dois(std::string_view text);

}  // namespace asnsim
