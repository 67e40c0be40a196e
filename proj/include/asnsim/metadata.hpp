#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "asnsim/doi.hpp"
#include "asnsim/resolve.hpp"  // HttpConfig

// Per-DOI publication metadata (type, year) from a Crossref-style works
// endpoint, with a persistent cache and a fully offline file-backed mode.

namespace asnsim {

struct PublicationRecord {
    Doi doi;
    std::optional<int> year;  // best available: print, then online, then issued
    std::string pub_type;
    bool is_journal_article = false;

    bool operator==(const PublicationRecord&) const = default;
};

// Single replaceable mapping from the source type vocabulary to the
// journal-article class; unknown types are counted, never dropped.
bool journal_article_type(std::string_view pub_type) noexcept;
bool known_publication_type(std::string_view pub_type) noexcept;

// Clamps to the plausible range [1800, current_year + 1].
std::optional<int> sanitize_year(std::optional<int> year) noexcept;

enum class FetchStatus { found, not_found, failed };

struct FetchResult {
    FetchStatus status = FetchStatus::failed;
    std::optional<PublicationRecord> record;
    std::string error;
};

class MetadataTransport {
public:
    enum class ReplyKind { found, not_found, rate_limited, transient_error, permanent_error };

    struct Reply {
        ReplyKind kind = ReplyKind::permanent_error;
        std::optional<PublicationRecord> record;
        std::string detail;
    };

    virtual ~MetadataTransport() = default;
    virtual Reply fetch(const Doi& doi) = 0;
};

// In-memory store loaded from the cache file format; misses are authoritative
// not_found answers. This is the offline transport.
class FileMetadataStore : public MetadataTransport {
public:
    static FileMetadataStore load(const std::filesystem::path& path);
    FileMetadataStore() = default;

    void put(const PublicationRecord& rec);
    void put_not_found(const Doi& doi);

    Reply fetch(const Doi& doi) override;

    std::size_t size() const noexcept { return entries_.size(); }

private:
    struct Entry {
        bool found = false;
        PublicationRecord record;
    };
    std::unordered_map<std::string, Entry> entries_;
};

std::unique_ptr<MetadataTransport> make_http_metadata_transport(const HttpConfig& config);

// Append-friendly persistent map doi -> (record | not_found) with fetch
// timestamps. Entries inside their validity window are never re-fetched.
class MetadataCache {
public:
    struct Entry {
        bool found = false;
        PublicationRecord record;
        std::int64_t fetched_at = 0;  // unix seconds
    };

    MetadataCache() = default;
    MetadataCache(MetadataCache&& other) noexcept
        : entries_(std::move(other.entries_)), path_(std::move(other.path_)) {}
    MetadataCache& operator=(MetadataCache&& other) noexcept {
        entries_ = std::move(other.entries_);
        path_ = std::move(other.path_);
        return *this;
    }

    static MetadataCache open(const std::filesystem::path& path);

    std::optional<Entry> get(const Doi& doi) const;
    void put(const Doi& doi, const Entry& entry);

    // Rewrites the whole file (sorted by DOI) — used when no backing file was
    // given at open time or to compact after a run.
    void save(const std::filesystem::path& path) const;

    std::size_t size() const;

private:
    void append_line(const Doi& doi, const Entry& entry);

    mutable std::mutex mu_;
    std::map<std::string, Entry> entries_;
    std::filesystem::path path_;  // empty: memory-only
};

struct MetadataClientConfig {
    int retry_budget = 3;          // transient errors per DOI
    int rate_limit_retries = 5;    // extra attempts after 429s
    double backoff_seconds = 0.5;  // base, doubled per retry (0 disables sleeping)
    int parallelism = 1;
    std::int64_t cache_ttl_seconds = 0;  // 0: entries never expire
};

struct MetadataRunStats {
    std::uint64_t found = 0;
    std::uint64_t not_found = 0;
    std::uint64_t failed = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t upstream_calls = 0;
    std::uint64_t unknown_types = 0;
};

class MetadataClient {
public:
    MetadataClient(MetadataTransport& transport, MetadataCache& cache,
                   MetadataClientConfig config = {});

    FetchResult fetch_record(const Doi& doi);

    // Total over the input; per-DOI failures are isolated. Deterministic
    // (sorted) result regardless of the parallelism bound.
    std::map<std::string, FetchResult> fetch_all(const std::vector<Doi>& dois);

    const MetadataRunStats& stats() const noexcept { return stats_; }

private:
    FetchResult fetch_uncached(const Doi& doi);

    MetadataTransport& transport_;
    MetadataCache& cache_;
    MetadataClientConfig config_;
    MetadataRunStats stats_;
    std::mutex stats_mu_;
};

}  // namespace asnsim
