#include "asnsim/metadata.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "asnsim/csv.hpp"
#include "asnsim/gzline.hpp"
#include "asnsim/text.hpp"

namespace asnsim {

namespace {

// Crossref works type vocabulary. Only "journal-article" feeds metric A.
constexpr std::array<std::string_view, 33> kKnownTypes = {
    "journal-article",   "journal-issue",    "journal-volume", "journal",
    "proceedings-article", "proceedings",    "proceedings-series",
    "book",              "book-chapter",     "book-part",      "book-section",
    "book-series",       "book-set",         "book-track",     "edited-book",
    "monograph",         "reference-book",   "reference-entry",
    "component",         "dataset",          "database",       "dissertation",
    "grant",             "other",            "peer-review",    "posted-content",
    "report",            "report-component", "report-series",  "standard",
    "standard-series",   "dictionary",       "encyclopedia",
};

int current_year() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return tm.tm_year + 1900;
}

std::once_flag warned_types_once;
std::mutex warned_types_mu;
std::set<std::string>& warned_types() {
    static std::set<std::string> s;
    return s;
}

void warn_unknown_type(std::string_view type) {
    std::lock_guard lock(warned_types_mu);
    if (warned_types().insert(std::string(type)).second) {
        std::fprintf(stderr, "asnsim: unknown publication type '%.*s' (mapped to non-journal)\n",
                     static_cast<int>(type.size()), type.data());
    }
}

}  // namespace

bool journal_article_type(std::string_view pub_type) noexcept {
    return pub_type == "journal-article";
}

bool known_publication_type(std::string_view pub_type) noexcept {
    for (const auto& t : kKnownTypes) {
        if (t == pub_type) return true;
    }
    return false;
}

std::optional<int> sanitize_year(std::optional<int> year) noexcept {
    if (!year) return std::nullopt;
    if (*year < 1800 || *year > current_year() + 1) return std::nullopt;
    return year;
}

// ---------------------------------------------------------------------------
// FileMetadataStore

FileMetadataStore FileMetadataStore::load(const std::filesystem::path& path) {
    LineReader in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open metadata store: " + path.string());
    FileMetadataStore store;
    std::string_view line;
    std::vector<std::string_view> fields;
    std::string arena;
    bool first = true;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        if (!split_csv_fields(line, fields, arena) || fields.size() < 2) continue;
        if (first) {
            first = false;
            if (to_lower_copy(trim(fields[0])) == "doi") continue;  // optional header
        }
        const std::string doi = to_lower_copy(trim(fields[0]));
        const std::string status = to_lower_copy(trim(fields[1]));
        if (status == "not_found") {
            store.entries_[doi] = Entry{};
            continue;
        }
        Entry e;
        e.found = true;
        e.record.doi = Doi(doi);
        e.record.pub_type = std::string(fields.size() > 2 ? trim(fields[2]) : std::string_view());
        if (fields.size() > 3) {
            const std::string_view y = trim(fields[3]);
            if (!y.empty()) {
                try {
                    e.record.year = sanitize_year(std::stoi(std::string(y)));
                } catch (...) {
                }
            }
        }
        e.record.is_journal_article = journal_article_type(e.record.pub_type);
        store.entries_[doi] = std::move(e);
    }
    if (in.failed()) throw std::runtime_error(path.string() + ": " + in.error());
    return store;
}

void FileMetadataStore::put(const PublicationRecord& rec) {
    Entry e;
    e.found = true;
    e.record = rec;
    e.record.is_journal_article = journal_article_type(rec.pub_type);
    entries_[rec.doi.value] = std::move(e);
}

void FileMetadataStore::put_not_found(const Doi& doi) { entries_[doi.value] = Entry{}; }

MetadataTransport::Reply FileMetadataStore::fetch(const Doi& doi) {
    Reply reply;
    const auto it = entries_.find(doi.value);
    if (it == entries_.end() || !it->second.found) {
        reply.kind = ReplyKind::not_found;
        return reply;
    }
    reply.kind = ReplyKind::found;
    reply.record = it->second.record;
    return reply;
}

// ---------------------------------------------------------------------------
// MetadataCache

MetadataCache MetadataCache::open(const std::filesystem::path& path) {
    MetadataCache cache;
    cache.path_ = path;
    if (!std::filesystem::exists(path)) return cache;
    LineReader in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open cache: " + path.string());
    std::string_view line;
    std::vector<std::string_view> fields;
    std::string arena;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        if (!split_csv_fields(line, fields, arena) || fields.size() < 5) continue;
        const std::string doi = to_lower_copy(trim(fields[0]));
        if (doi == "doi") continue;  // header
        Entry e;
        const std::string status = to_lower_copy(trim(fields[1]));
        e.found = status == "found";
        if (e.found) {
            e.record.doi = Doi(doi);
            e.record.pub_type = std::string(trim(fields[2]));
            const std::string_view y = trim(fields[3]);
            if (!y.empty()) {
                try {
                    e.record.year = sanitize_year(std::stoi(std::string(y)));
                } catch (...) {
                }
            }
            e.record.is_journal_article = journal_article_type(e.record.pub_type);
        }
        const std::string_view ts = trim(fields[4]);
        if (!ts.empty()) {
            try {
                e.fetched_at = std::stoll(std::string(ts));
            } catch (...) {
            }
        }
        cache.entries_[doi] = std::move(e);  // last write wins (append log)
    }
    if (in.failed()) throw std::runtime_error(path.string() + ": " + in.error());
    return cache;
}

std::optional<MetadataCache::Entry> MetadataCache::get(const Doi& doi) const {
    std::lock_guard lock(mu_);
    const auto it = entries_.find(doi.value);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void MetadataCache::put(const Doi& doi, const Entry& entry) {
    std::lock_guard lock(mu_);
    entries_[doi.value] = entry;
    if (!path_.empty()) append_line(doi, entry);
}

void MetadataCache::append_line(const Doi& doi, const Entry& entry) {
    std::ofstream out(path_, std::ios::app);
    if (!out) return;
    out << csv_escape(doi.value) << ',' << (entry.found ? "found" : "not_found") << ','
        << csv_escape(entry.record.pub_type) << ',';
    if (entry.found && entry.record.year) out << *entry.record.year;
    out << ',' << entry.fetched_at << '\n';
}

void MetadataCache::save(const std::filesystem::path& path) const {
    std::lock_guard lock(mu_);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache: " + path.string());
    out << "doi,status,pub_type,year,timestamp\n";
    for (const auto& [doi, entry] : entries_) {
        out << csv_escape(doi) << ',' << (entry.found ? "found" : "not_found") << ','
            << csv_escape(entry.record.pub_type) << ',';
        if (entry.found && entry.record.year) out << *entry.record.year;
        out << ',' << entry.fetched_at << '\n';
    }
}

std::size_t MetadataCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

// ---------------------------------------------------------------------------
// MetadataClient

MetadataClient::MetadataClient(MetadataTransport& transport, MetadataCache& cache,
                               MetadataClientConfig config)
    : transport_(transport), cache_(cache), config_(config) {}

FetchResult MetadataClient::fetch_uncached(const Doi& doi) {
    int transient_left = config_.retry_budget;
    int rate_left = config_.rate_limit_retries;
    double backoff = config_.backoff_seconds;
    for (;;) {
        {
            std::lock_guard lock(stats_mu_);
            ++stats_.upstream_calls;
        }
        MetadataTransport::Reply reply = transport_.fetch(doi);
        switch (reply.kind) {
            case MetadataTransport::ReplyKind::found: {
                FetchResult r;
                r.status = FetchStatus::found;
                PublicationRecord rec = reply.record.value_or(PublicationRecord{});
                rec.doi = doi;
                rec.year = sanitize_year(rec.year);
                rec.is_journal_article = journal_article_type(rec.pub_type);
                if (!rec.pub_type.empty() && !known_publication_type(rec.pub_type)) {
                    warn_unknown_type(rec.pub_type);
                    std::lock_guard lock(stats_mu_);
                    ++stats_.unknown_types;
                }
                r.record = std::move(rec);
                return r;
            }
            case MetadataTransport::ReplyKind::not_found: {
                FetchResult r;
                r.status = FetchStatus::not_found;
                return r;
            }
            case MetadataTransport::ReplyKind::rate_limited:
                if (rate_left-- <= 0) {
                    FetchResult r;
                    r.error = "rate limit retries exhausted";
                    return r;
                }
                break;
            case MetadataTransport::ReplyKind::transient_error:
                if (transient_left-- <= 0) {
                    FetchResult r;
                    r.error = reply.detail.empty() ? "transient retries exhausted" : reply.detail;
                    return r;
                }
                break;
            case MetadataTransport::ReplyKind::permanent_error: {
                FetchResult r;
                r.error = reply.detail.empty() ? "permanent failure" : reply.detail;
                return r;
            }
        }
        if (backoff > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2;
        }
    }
}

FetchResult MetadataClient::fetch_record(const Doi& doi) {
    const std::int64_t now = std::time(nullptr);
    if (const auto cached = cache_.get(doi)) {
        const bool fresh =
            config_.cache_ttl_seconds <= 0 || now - cached->fetched_at < config_.cache_ttl_seconds;
        if (fresh) {
            std::lock_guard lock(stats_mu_);
            ++stats_.cache_hits;
            FetchResult r;
            if (cached->found) {
                r.status = FetchStatus::found;
                r.record = cached->record;
                ++stats_.found;
            } else {
                r.status = FetchStatus::not_found;
                ++stats_.not_found;
            }
            return r;
        }
    }

    FetchResult r = fetch_uncached(doi);
    {
        std::lock_guard lock(stats_mu_);
        switch (r.status) {
            case FetchStatus::found:
                ++stats_.found;
                break;
            case FetchStatus::not_found:
                ++stats_.not_found;
                break;
            case FetchStatus::failed:
                ++stats_.failed;
                break;
        }
    }
    if (r.status != FetchStatus::failed) {
        MetadataCache::Entry e;
        e.found = r.status == FetchStatus::found;
        if (r.record) e.record = *r.record;
        e.fetched_at = now;
        cache_.put(doi, e);
    }
    return r;
}

std::map<std::string, FetchResult> MetadataClient::fetch_all(const std::vector<Doi>& dois) {
    std::vector<Doi> unique = dois;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

    std::vector<FetchResult> results(unique.size());
    const int jobs =
        static_cast<int>(std::min<std::size_t>(std::max(1, config_.parallelism), unique.size()));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < unique.size(); ++i) results[i] = fetch_record(unique[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= unique.size()) return;
                    results[i] = fetch_record(unique[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::map<std::string, FetchResult> out;
    for (std::size_t i = 0; i < unique.size(); ++i) out[unique[i].value] = std::move(results[i]);
    return out;
}

}  // namespace asnsim
