#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

// Independent reference implementations used as test oracles. These stay
// deliberately naive (brute force, nested loops, global string passes) and
// share no code with the library paths they check.

namespace asnsim::testing {

// Largest h in 0..n such that at least h of the counts are >= h, checked by
// trying every h.
std::uint64_t brute_force_h_index(const std::vector<std::uint64_t>& counts);

// Two-pass distinct-pair in-degree count over raw (citing, cited) rows:
// pass one collects the distinct normalized pairs, pass two tallies the
// cited side.
std::map<std::string, std::uint64_t> two_pass_in_degrees(
    const std::vector<std::pair<std::string, std::string>>& edges);

// Distinct citers of one DOI by scanning the whole edge list.
std::uint64_t nested_loop_citations(
    const std::vector<std::pair<std::string, std::string>>& edges, const std::string& cited);

// Regex-free DOI scan over a whole document: global entity/percent decoding,
// whole-text line rejoining, then tokenization. Returns unique DOIs in
// first-occurrence order, lowercase.
std::vector<std::string> naive_doi_scan(const std::string& text);

}  // namespace asnsim::testing
