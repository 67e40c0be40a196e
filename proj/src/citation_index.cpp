#include "asnsim/citation_index.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <queue>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "asnsim/csv.hpp"
#include "asnsim/gzline.hpp"
#include "asnsim/kernels/bytescan.hpp"
#include "asnsim/text.hpp"

namespace asnsim {

namespace {

constexpr std::string_view kMagic = "asnsim-citation-index v1";
constexpr std::size_t kFlushThreshold = 1u << 18;

// Loose shape check for dump rows: lowercased, "10." prefix, a slash, no
// whitespace. ISBN-A style registrants ("10.978.88…") pass, which the strict
// harvested-DOI syntax would reject.
bool plausible_doi(std::string_view s) noexcept {
    if (s.size() < 5 || s.substr(0, 3) != "10.") return false;
    bool slash = false;
    for (const char c : s) {
        if (is_ascii_space(c)) return false;
        slash = slash || c == '/';
    }
    return slash;
}

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct PartitionSink {
    std::mutex mu;
    std::ofstream out;
};

// Per-thread buffered writer into the shared partition files.
class PartitionWriter {
public:
    PartitionWriter(std::vector<PartitionSink>& sinks) : sinks_(sinks), bufs_(sinks.size()) {}

    void write(std::size_t partition, std::string_view citing, std::string_view cited) {
        std::string& buf = bufs_[partition];
        buf.append(citing);
        buf.push_back('\t');
        buf.append(cited);
        buf.push_back('\n');
        if (buf.size() >= kFlushThreshold) flush(partition);
    }

    void flush_all() {
        for (std::size_t p = 0; p < bufs_.size(); ++p) flush(p);
    }

private:
    void flush(std::size_t partition) {
        if (bufs_[partition].empty()) return;
        std::lock_guard lock(sinks_[partition].mu);
        sinks_[partition].out << bufs_[partition];
        bufs_[partition].clear();
    }

    std::vector<PartitionSink>& sinks_;
    std::vector<std::string> bufs_;
};

struct FileScanResult {
    std::uint64_t rows = 0;
    std::uint64_t malformed = 0;
    bool ok = false;
    std::string error;
};

FileScanResult scan_dump_file(const std::filesystem::path& path, std::size_t partitions,
                              PartitionWriter& writer,
                              std::unordered_set<std::string>& entities) {
    FileScanResult result;
    LineReader in(path);
    if (!in.is_open()) {
        result.error = in.error();
        return result;
    }
    std::string_view line;
    std::vector<std::string_view> fields;
    std::string arena;
    std::string citing;
    std::string cited;
    bool first = true;
    while (in.next(line)) {
        if (first) {
            first = false;
            // Header: oci,citing,cited,creation,timespan,journal_sc,author_sc
            std::string head = to_lower_copy(line.substr(0, 4));
            if (head == "oci,") continue;
        }
        if (line.empty()) continue;
        ++result.rows;
        if (!split_csv_fields(line, fields, arena) || fields.size() != 7) {
            ++result.malformed;
            continue;
        }
        citing.assign(trim(fields[1]));
        cited.assign(trim(fields[2]));
        kernels::to_lower_ascii(citing);
        kernels::to_lower_ascii(cited);
        if (!plausible_doi(citing) || !plausible_doi(cited)) {
            ++result.malformed;
            continue;
        }
        const std::uint64_t h = fnv1a(citing) * 31 + fnv1a(cited);
        writer.write(h % partitions, citing, cited);
        entities.insert(citing);
        entities.insert(cited);
    }
    if (in.failed()) {
        result.error = in.error();
        return result;
    }
    result.ok = true;
    return result;
}

struct PartitionCount {
    std::unordered_map<std::string, std::uint64_t> in_degree;
    std::uint64_t pairs = 0;
    std::uint64_t duplicates = 0;
};

PartitionCount count_partition(const std::filesystem::path& spill) {
    PartitionCount pc;
    LineReader in(spill);
    if (!in.is_open()) return pc;  // partition never written
    std::unordered_set<std::string> seen;
    std::string_view line;
    while (in.next(line)) {
        if (line.empty()) continue;
        if (seen.insert(std::string(line)).second) {
            ++pc.pairs;
            const std::size_t tab = line.find('\t');
            ++pc.in_degree[std::string(line.substr(tab + 1))];
        } else {
            ++pc.duplicates;
        }
    }
    return pc;
}

void write_sorted_edges(const std::vector<std::filesystem::path>& spills,
                        const std::filesystem::path& edges_out) {
    // Sort each partition in memory, then k-way merge the runs.
    std::vector<std::vector<std::string>> runs(spills.size());
    for (std::size_t p = 0; p < spills.size(); ++p) {
        LineReader in(spills[p]);
        if (!in.is_open()) continue;
        std::unordered_set<std::string> seen;
        std::string_view line;
        while (in.next(line)) {
            if (!line.empty() && seen.insert(std::string(line)).second) {
                runs[p].emplace_back(line);
            }
        }
        std::sort(runs[p].begin(), runs[p].end());
    }
    std::ofstream out(edges_out, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write edge list: " + edges_out.string());
    out << "citing,cited\n";
    using HeapItem = std::pair<std::string_view, std::size_t>;
    auto cmp = [](const HeapItem& a, const HeapItem& b) { return a.first > b.first; };
    std::priority_queue<HeapItem, std::vector<HeapItem>, decltype(cmp)> heap(cmp);
    std::vector<std::size_t> cursor(runs.size(), 0);
    for (std::size_t p = 0; p < runs.size(); ++p) {
        if (!runs[p].empty()) heap.emplace(runs[p][0], p);
    }
    std::string field;
    while (!heap.empty()) {
        const auto [sv, p] = heap.top();
        heap.pop();
        const std::size_t tab = sv.find('\t');
        out << sv.substr(0, tab) << ',' << sv.substr(tab + 1) << '\n';
        if (++cursor[p] < runs[p].size()) heap.emplace(runs[p][cursor[p]], p);
    }
}

}  // namespace

CitationIndex CitationIndex::ingest(const std::vector<std::filesystem::path>& files,
                                    const IngestOptions& options, IngestStats& stats) {
    CitationIndex index;
    stats = IngestStats{};
    stats.files_requested = files.size();

    // Scratch area for the pair spills; always a fresh subdirectory so
    // cleanup cannot touch caller data.
    std::filesystem::path base = options.spill_dir;
    if (base.empty()) base = std::filesystem::temp_directory_path();
    std::random_device rd;
    const std::filesystem::path spill_root =
        base / ("asnsim-spill-" + std::to_string(rd()) + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(spill_root);

    const std::size_t partitions = static_cast<std::size_t>(std::max(1, options.partitions));
    std::vector<PartitionSink> sinks(partitions);
    std::vector<std::filesystem::path> spill_paths(partitions);
    for (std::size_t p = 0; p < partitions; ++p) {
        spill_paths[p] = spill_root / ("pairs-" + std::to_string(p) + ".tsv");
        sinks[p].out.open(spill_paths[p], std::ios::trunc);
        if (!sinks[p].out) {
            throw std::runtime_error("cannot create spill file: " + spill_paths[p].string());
        }
    }

    // Phase 1: stream every dump file into the pair partitions.
    const int jobs = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.jobs)),
                              std::max<std::size_t>(files.size(), 1)));
    std::vector<std::unordered_set<std::string>> entity_sets(jobs);
    std::vector<FileScanResult> file_results(files.size());
    if (jobs <= 1) {
        PartitionWriter writer(sinks);
        for (std::size_t i = 0; i < files.size(); ++i) {
            file_results[i] = scan_dump_file(files[i], partitions, writer, entity_sets[0]);
        }
        writer.flush_all();
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back([&, t] {
                PartitionWriter writer(sinks);
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= files.size()) break;
                    file_results[i] = scan_dump_file(files[i], partitions, writer, entity_sets[t]);
                }
                writer.flush_all();
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& sink : sinks) sink.out.close();

    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& r = file_results[i];
        if (r.ok) {
            ++stats.files_ok;
            stats.rows_read += r.rows;
            stats.malformed_rows += r.malformed;
        } else {
            stats.unreadable_sources.push_back(files[i].string() +
                                               (r.error.empty() ? "" : ": " + r.error));
            // Rows already streamed from a file that failed mid-way still
            // count; the pair spill keeps them and dedup stays exact.
            stats.rows_read += r.rows;
            stats.malformed_rows += r.malformed;
        }
    }

    // Entities seen on either side, merged across threads.
    std::unordered_set<std::string> entities;
    for (auto& s : entity_sets) {
        if (entities.empty()) {
            entities = std::move(s);
        } else {
            entities.merge(s);
        }
    }
    index.total_entities_ = entities.size();
    entities.clear();

    // Phase 2: exact distinct-pair counting per partition.
    std::vector<PartitionCount> counts(partitions);
    if (jobs <= 1 || partitions == 1) {
        for (std::size_t p = 0; p < partitions; ++p) counts[p] = count_partition(spill_paths[p]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int nthreads = static_cast<int>(std::min<std::size_t>(jobs, partitions));
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t p = next.fetch_add(1);
                    if (p >= partitions) return;
                    counts[p] = count_partition(spill_paths[p]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& pc : counts) {
        stats.duplicate_pairs += pc.duplicates;
        index.total_edges_ += pc.pairs;
        for (auto& [doi, n] : pc.in_degree) index.in_degree_[doi] += n;
    }

    if (options.keep_edges && !options.edges_out.empty()) {
        write_sorted_edges(spill_paths, options.edges_out);
    }

    std::error_code ec;
    std::filesystem::remove_all(spill_root, ec);
    return index;
}

std::uint64_t CitationIndex::citation_count(std::string_view doi) const {
    std::string key(trim(doi));
    kernels::to_lower_ascii(key);
    const auto it = in_degree_.find(key);
    return it == in_degree_.end() ? 0 : it->second;
}

std::uint64_t CitationIndex::citation_count(const Doi& doi) const {
    return citation_count(std::string_view(doi.value));
}

std::map<std::string, std::uint64_t> CitationIndex::restrict(std::span<const Doi> dois) const {
    std::map<std::string, std::uint64_t> out;
    for (const auto& d : dois) out[d.value] = citation_count(d);
    return out;
}

void CitationIndex::save(const std::filesystem::path& path) const {
    std::vector<std::pair<std::string_view, std::uint64_t>> rows;
    rows.reserve(in_degree_.size());
    for (const auto& [doi, n] : in_degree_) rows.emplace_back(doi, n);
    std::sort(rows.begin(), rows.end());

    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index snapshot: " + path.string());
    out << kMagic << '\n'
        << "total_edges " << total_edges_ << '\n'
        << "total_entities " << total_entities_ << '\n';
    for (const auto& [doi, n] : rows) out << doi << '\t' << n << '\n';
    if (!out) throw std::runtime_error("short write: " + path.string());
}

CitationIndex CitationIndex::load(const std::filesystem::path& path) {
    LineReader in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open index snapshot: " + path.string());
    std::string_view line;
    if (!in.next(line) || line != kMagic) {
        throw std::runtime_error(path.string() + ": not a citation index snapshot");
    }
    CitationIndex index;
    auto read_header = [&](std::string_view name) -> std::uint64_t {
        if (!in.next(line) || line.substr(0, name.size()) != name) {
            throw std::runtime_error(path.string() + ": missing header " + std::string(name));
        }
        const std::string_view v = trim(line.substr(name.size()));
        std::uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            throw std::runtime_error(path.string() + ": bad header " + std::string(name));
        }
        return value;
    };
    index.total_edges_ = read_header("total_edges");
    index.total_entities_ = read_header("total_entities");

    std::uint64_t sum = 0;
    while (in.next(line)) {
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw std::runtime_error(path.string() + ": malformed record");
        }
        const std::string_view v = line.substr(tab + 1);
        std::uint64_t n = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            throw std::runtime_error(path.string() + ": malformed count");
        }
        index.in_degree_.emplace(std::string(line.substr(0, tab)), n);
        sum += n;
    }
    if (in.failed()) throw std::runtime_error(path.string() + ": " + in.error());
    if (sum != index.total_edges_) {
        throw std::runtime_error(path.string() + ": in-degree sum does not match total_edges");
    }
    return index;
}

}  // namespace asnsim
