#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "asnsim/doi.hpp"

// Existence checking of harvested DOIs against a resolver oracle. Production
// uses the DOI proxy REST API; deterministic runs use a file-backed fixture.

namespace asnsim {

enum class Existence { yes, no, unavailable };

class DoiResolver {
public:
    virtual ~DoiResolver() = default;
    // Must be safe to call from multiple threads when validation runs with
    // parallelism > 1.
    virtual Existence exists(const Doi& doi) = 0;
};

// Newline-delimited file of valid DOIs; everything else resolves to no.
class FixtureResolver : public DoiResolver {
public:
    static FixtureResolver load(const std::filesystem::path& path);
    explicit FixtureResolver(std::unordered_set<std::string> valid) : valid_(std::move(valid)) {}

    Existence exists(const Doi& doi) override {
        return valid_.count(doi.value) ? Existence::yes : Existence::no;
    }

    std::size_t size() const noexcept { return valid_.size(); }

private:
    std::unordered_set<std::string> valid_;
};

struct ValidationPolicy {
    int max_retries = 2;  // extra attempts after an unavailable answer
    int parallelism = 1;
};

struct ValidationResult {
    std::vector<Doi> valid;
    std::vector<Doi> invalid;
    std::vector<Doi> unknown;  // resolver exhausted, never treated as invalid
};

// Classifies every input DOI. Buckets preserve input order regardless of the
// parallelism bound.
ValidationResult validate_dois(const std::vector<Doi>& dois, DoiResolver& resolver,
                               const ValidationPolicy& policy = {});

struct HttpConfig {
    std::string base_url;
    double requests_per_second = 1.0;
    std::string mailto;  // polite contact identifier
    int timeout_seconds = 30;
};

// DOI proxy REST client ("/api/handles/{doi}").
std::unique_ptr<DoiResolver> make_http_doi_resolver(const HttpConfig& config);

}  // namespace asnsim
