#include "asnsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "asnsim/agreement.hpp"
#include "asnsim/assessment.hpp"
#include "asnsim/citation_index.hpp"
#include "asnsim/csv.hpp"
#include "asnsim/extract.hpp"
#include "asnsim/gzline.hpp"
#include "asnsim/metadata.hpp"
#include "asnsim/metrics.hpp"
#include "asnsim/resolve.hpp"
#include "asnsim/taxonomy.hpp"
#include "asnsim/text.hpp"

namespace asnsim {

namespace {

using nlohmann::json;

// Canonical number formatting: integral values print without a decimal
// point, everything else with enough digits to round-trip runs bit-stable.
std::string fmt_num(double v) {
    char buf[64];
    if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    } else {
        std::snprintf(buf, sizeof(buf), "%.10g", v);
    }
    return buf;
}

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string fmt_opt_bool(const std::optional<bool>& b) { return b ? fmt_bool(*b) : ""; }

std::optional<bool> parse_opt_bool(std::string_view s) {
    const std::string v = to_lower_copy(trim(s));
    if (v.empty()) return std::nullopt;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    return std::nullopt;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<int> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

json load_run_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return json::object();
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return json::object();
    return doc;
}

void store_stage_report(const std::filesystem::path& path, const RunManifest& manifest,
                        const std::string& stage, json section) {
    json doc = load_run_report(path);
    doc["policy"] = {
        {"offline", manifest.offline},
        {"comparator", std::string(comparator_name(manifest.comparator))},
        {"normalization",
         {{"a", manifest.normalization.a == NormalizationMode::none ? "none" : "age"},
          {"b", manifest.normalization.b == NormalizationMode::none ? "none" : "age"},
          {"c", manifest.normalization.c == NormalizationMode::none ? "none" : "age"}}},
        {"jobs", manifest.jobs},
    };
    doc["stages"][stage] = std::move(section);
    std::ofstream out(path, std::ios::trunc);
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// applications.csv

constexpr std::string_view kApplicationsHeader =
    "app_id,rf,level,session_year,official_a,official_b,official_c,official_passed,dois";

struct AppLoadCounters {
    std::uint64_t rows = 0;
    std::uint64_t malformed_rows = 0;
    std::uint64_t nd_rejected = 0;
    std::uint64_t unknown_rf = 0;
    std::uint64_t duplicate_app_ids = 0;
    std::uint64_t bad_dois = 0;
    std::uint64_t partial_official = 0;
};

std::vector<Doi> parse_doi_list(std::string_view field, std::uint64_t& bad_dois) {
    std::vector<Doi> dois;
    std::unordered_set<std::string> seen;
    std::size_t pos = 0;
    while (pos <= field.size()) {
        std::size_t sp = field.find(' ', pos);
        if (sp == std::string_view::npos) sp = field.size();
        const std::string_view token = trim(field.substr(pos, sp - pos));
        pos = sp + 1;
        if (token.empty()) continue;
        if (const auto doi = normalize_doi(token)) {
            if (seen.insert(doi->value).second) dois.push_back(*doi);
        } else {
            ++bad_dois;
        }
    }
    return dois;
}

// Lenient application parser used at pipeline entry; bad rows are counted,
// never fatal. ND and unknown recruitment fields are rejected here.
std::optional<CandidateApplication> parse_application_row(
    const std::vector<std::string_view>& fields, const RecruitmentFieldList& rf_list,
    AppLoadCounters& counters) {
    if (fields.size() != 9) {
        ++counters.malformed_rows;
        return std::nullopt;
    }
    CandidateApplication app;
    app.app_id = std::string(trim(fields[0]));
    if (app.app_id.empty()) {
        ++counters.malformed_rows;
        return std::nullopt;
    }
    try {
        app.rf = parse_rf(fields[1]);
    } catch (const TaxonomyError&) {
        ++counters.malformed_rows;
        return std::nullopt;
    }
    const auto level = parse_level(fields[2]);
    const auto year = parse_int(fields[3]);
    if (!level || !year) {
        ++counters.malformed_rows;
        return std::nullopt;
    }
    app.level = *level;
    app.session_year = *year;

    if (!rf_list.contains(app.rf)) {
        ++counters.unknown_rf;
        return std::nullopt;
    }
    if (classify(app.rf) == DisciplineCategory::ND) {
        ++counters.nd_rejected;
        return std::nullopt;
    }

    const auto a = parse_double(fields[4]);
    const auto b = parse_double(fields[5]);
    const auto c = parse_double(fields[6]);
    if (a && b && c) {
        app.official_metrics = ThresholdTriple{*a, *b, *c};
    } else if (a || b || c) {
        ++counters.partial_official;
    }
    app.official_passed = parse_opt_bool(fields[7]);
    app.dois = parse_doi_list(fields[8], counters.bad_dois);
    return app;
}

std::string join_dois(const std::vector<Doi>& dois) {
    std::string out;
    for (const auto& d : dois) {
        if (!out.empty()) out.push_back(' ');
        out += d.value;
    }
    return out;
}

void write_applications(const std::filesystem::path& path,
                        std::vector<CandidateApplication> apps) {
    std::sort(apps.begin(), apps.end(),
              [](const CandidateApplication& x, const CandidateApplication& y) {
                  return x.app_id < y.app_id;
              });
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StageError("extract", "cannot write " + path.string());
    out << kApplicationsHeader << '\n';
    for (const auto& app : apps) {
        out << csv_escape(app.app_id) << ',' << format_rf(app.rf) << ',' << level_name(app.level)
            << ',' << app.session_year << ',';
        if (app.official_metrics) {
            out << fmt_num(app.official_metrics->t_a) << ',' << fmt_num(app.official_metrics->t_b)
                << ',' << fmt_num(app.official_metrics->t_c);
        } else {
            out << ",,";
        }
        out << ',' << fmt_opt_bool(app.official_passed) << ',' << csv_escape(join_dois(app.dois))
            << '\n';
    }
}

// Strict loader for the canonical artifact written by extract().
std::vector<CandidateApplication> load_canonical_applications(const std::filesystem::path& path,
                                                              const std::string& stage) {
    LineReader in(path);
    if (!in.is_open()) {
        throw StageError(stage, "missing applications artifact (run `extract` first): " +
                                    path.string());
    }
    std::vector<CandidateApplication> apps;
    std::string_view line;
    std::vector<std::string_view> fields;
    std::string arena;
    bool first = true;
    std::uint64_t bad = 0;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        if (first) {
            first = false;
            if (line == kApplicationsHeader) continue;
        }
        if (!split_csv_fields(line, fields, arena) || fields.size() != 9) {
            throw StageError(stage, path.string() + ": malformed applications row");
        }
        CandidateApplication app;
        app.app_id = std::string(trim(fields[0]));
        app.rf = parse_rf(fields[1]);
        const auto level = parse_level(fields[2]);
        const auto year = parse_int(fields[3]);
        if (!level || !year) throw StageError(stage, path.string() + ": bad level/session row");
        app.level = *level;
        app.session_year = *year;
        const auto a = parse_double(fields[4]);
        const auto b = parse_double(fields[5]);
        const auto c = parse_double(fields[6]);
        if (a && b && c) app.official_metrics = ThresholdTriple{*a, *b, *c};
        app.official_passed = parse_opt_bool(fields[7]);
        app.dois = parse_doi_list(fields[8], bad);
        apps.push_back(std::move(app));
    }
    if (in.failed()) throw StageError(stage, path.string() + ": " + in.error());
    return apps;
}

// ---------------------------------------------------------------------------
// dois.csv

constexpr std::string_view kDoisHeader = "doi,existence,meta_status,pub_type,year,is_journal_article";

struct DoiRow {
    std::string existence = "unknown";
    std::string meta_status = "skipped";
    std::string pub_type;
    std::optional<int> year;
    bool is_journal_article = false;
};

std::map<std::string, DoiRow> load_doi_table(const std::filesystem::path& path,
                                             const std::string& stage) {
    LineReader in(path);
    if (!in.is_open()) {
        throw StageError(stage,
                         "missing DOI artifact (run `resolve` first): " + path.string());
    }
    std::map<std::string, DoiRow> rows;
    std::string_view line;
    std::vector<std::string_view> fields;
    std::string arena;
    bool first = true;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        if (first) {
            first = false;
            if (line == kDoisHeader) continue;
        }
        if (!split_csv_fields(line, fields, arena) || fields.size() != 6) {
            throw StageError(stage, path.string() + ": malformed DOI row");
        }
        DoiRow row;
        row.existence = std::string(trim(fields[1]));
        row.meta_status = std::string(trim(fields[2]));
        row.pub_type = std::string(trim(fields[3]));
        row.year = parse_int(fields[4]);
        row.is_journal_article = parse_opt_bool(fields[5]).value_or(false);
        rows[std::string(trim(fields[0]))] = std::move(row);
    }
    if (in.failed()) throw StageError(stage, path.string() + ": " + in.error());
    return rows;
}

// ---------------------------------------------------------------------------
// results.csv

constexpr std::string_view kResultsHeader =
    "app_id,rf,level,session_year,n_dois,n_records,a,b,c,t_a,t_b,t_c,"
    "exceeds_a,exceeds_b,exceeds_c,passed,"
    "official_a,official_b,official_c,"
    "official_exceeds_a,official_exceeds_b,official_exceeds_c,"
    "official_passed,official_passed_stored,official_mismatch,"
    "agree_a,agree_b,agree_c,agree_overall";

struct ResultRow {
    CandidateApplication app;
    std::size_t n_records = 0;
    MetricsTriple metrics;
    ThresholdTriple thresholds;
    AssessmentResult assessment;
    std::optional<AssessmentResult> official_assessment;
    std::optional<bool> official_passed_used;
    bool official_mismatch = false;
    std::optional<AgreementRecord> agreement;
};

void write_results(const std::filesystem::path& path, std::vector<ResultRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ResultRow& x, const ResultRow& y) {
        return x.app.app_id < y.app.app_id;
    });
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StageError("evaluate", "cannot write " + path.string());
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << csv_escape(r.app.app_id) << ',' << format_rf(r.app.rf) << ','
            << level_name(r.app.level) << ',' << r.app.session_year << ',' << r.app.dois.size()
            << ',' << r.n_records << ',' << fmt_num(r.metrics.a_journals) << ','
            << fmt_num(r.metrics.b_citations) << ',' << fmt_num(r.metrics.c_hindex) << ','
            << fmt_num(r.thresholds.t_a) << ',' << fmt_num(r.thresholds.t_b) << ','
            << fmt_num(r.thresholds.t_c) << ',' << fmt_bool(r.assessment.exceeds[0]) << ','
            << fmt_bool(r.assessment.exceeds[1]) << ',' << fmt_bool(r.assessment.exceeds[2]) << ','
            << fmt_bool(r.assessment.passed) << ',';
        if (r.app.official_metrics) {
            out << fmt_num(r.app.official_metrics->t_a) << ','
                << fmt_num(r.app.official_metrics->t_b) << ','
                << fmt_num(r.app.official_metrics->t_c);
        } else {
            out << ",,";
        }
        out << ',';
        if (r.official_assessment) {
            out << fmt_bool(r.official_assessment->exceeds[0]) << ','
                << fmt_bool(r.official_assessment->exceeds[1]) << ','
                << fmt_bool(r.official_assessment->exceeds[2]);
        } else {
            out << ",,";
        }
        out << ',' << fmt_opt_bool(r.official_passed_used) << ','
            << fmt_opt_bool(r.app.official_passed) << ',' << fmt_bool(r.official_mismatch) << ',';
        if (r.agreement) {
            out << fmt_opt_bool(r.agreement->agree_a) << ',' << fmt_opt_bool(r.agreement->agree_b)
                << ',' << fmt_opt_bool(r.agreement->agree_c) << ','
                << fmt_opt_bool(r.agreement->agree_overall);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
}

std::vector<AgreementObservation> load_observations(const std::filesystem::path& path,
                                                    const std::string& stage) {
    LineReader in(path);
    if (!in.is_open()) {
        throw StageError(stage,
                         "missing results artifact (run `evaluate` first): " + path.string());
    }
    std::string_view line;
    std::vector<std::string_view> fields;
    std::string arena;
    if (!in.next(line) || line != kResultsHeader) {
        throw StageError(stage, path.string() + ": unexpected results header");
    }
    // Column indices from the fixed header.
    std::unordered_map<std::string, std::size_t> col;
    {
        std::vector<std::string_view> names;
        std::string harena;
        split_csv_fields(kResultsHeader, names, harena);
        for (std::size_t i = 0; i < names.size(); ++i) col[std::string(names[i])] = i;
    }
    std::vector<AgreementObservation> obs;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        if (!split_csv_fields(line, fields, arena) || fields.size() != col.size()) {
            throw StageError(stage, path.string() + ": malformed results row");
        }
        AgreementObservation o;
        o.rf = parse_rf(fields[col["rf"]]);
        const auto level = parse_level(fields[col["level"]]);
        if (!level) throw StageError(stage, path.string() + ": bad level in results row");
        o.level = *level;
        o.agree_a = parse_opt_bool(fields[col["agree_a"]]);
        o.agree_b = parse_opt_bool(fields[col["agree_b"]]);
        o.agree_c = parse_opt_bool(fields[col["agree_c"]]);
        o.agree_overall = parse_opt_bool(fields[col["agree_overall"]]);
        obs.push_back(o);
    }
    if (in.failed()) throw StageError(stage, path.string() + ": " + in.error());
    return obs;
}

// ---------------------------------------------------------------------------
// agreement tables

void write_wide_table(const std::filesystem::path& path,
                      const std::vector<AgreementReportRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StageError("report", "cannot write " + path.string());
    out << "row";
    for (const auto& r : rows) out << ',' << csv_escape(r.group_label());
    out << '\n';
    out << "n";
    for (const auto& r : rows) out << ',' << r.n;
    out << '\n';
    const auto emit = [&](const char* name, auto cell_of) {
        out << name;
        for (const auto& r : rows) {
            const AgreementCell& cell = cell_of(r);
            out << ',';
            if (cell.n > 0) out << fmt_pct(cell.pct());
        }
        out << '\n';
    };
    emit("overall", [](const AgreementReportRow& r) -> const AgreementCell& { return r.overall; });
    emit("journals_a", [](const AgreementReportRow& r) -> const AgreementCell& { return r.a; });
    emit("citations_b", [](const AgreementReportRow& r) -> const AgreementCell& { return r.b; });
    emit("hindex_c", [](const AgreementReportRow& r) -> const AgreementCell& { return r.c; });
}

void append_cells(std::ofstream& out, std::string_view grouping,
                  const std::vector<AgreementReportRow>& rows) {
    const auto emit = [&](const AgreementReportRow& r, const char* metric,
                          const AgreementCell& cell) {
        out << grouping << ',' << level_name(r.level) << ',';
        if (r.sa) out << *r.sa;
        out << ',';
        if (r.rf) out << format_rf(*r.rf);
        out << ',' << metric << ',' << cell.n << ',' << cell.agreed << ',';
        if (cell.n > 0) out << fmt_pct(cell.pct());
        out << '\n';
    };
    for (const auto& r : rows) {
        emit(r, "overall", r.overall);
        emit(r, "journals_a", r.a);
        emit(r, "citations_b", r.b);
        emit(r, "hindex_c", r.c);
    }
}

}  // namespace

// Defined in charts.cpp.
void write_agreement_chart(const std::filesystem::path& path, const std::string& title,
                           const AgreementReportRow* fp, const AgreementReportRow* ap);

PipelinePaths::PipelinePaths(const std::filesystem::path& out_dir)
    : applications(out_dir / "applications.csv"),
      extraction_report(out_dir / "extraction_report.jsonl"),
      dois(out_dir / "dois.csv"),
      index(out_dir / "citations.idx"),
      edges(out_dir / "edges.csv"),
      results(out_dir / "results.csv"),
      report_by_level(out_dir / "agreement_by_level.csv"),
      report_by_sa(out_dir / "agreement_by_sa.csv"),
      report_by_rf(out_dir / "agreement_by_rf.csv"),
      report_cells(out_dir / "agreement_cells.csv"),
      sa_ranking(out_dir / "sa_ranking.csv"),
      charts_dir(out_dir / "charts"),
      run_report(out_dir / "run_report.json") {}

Pipeline::Pipeline(RunManifest manifest)
    : manifest_(std::move(manifest)), paths_(manifest_.out_dir) {
    manifest_.validate();
}

void Pipeline::extract() {
    const StageTimer timer;
    RecruitmentFieldList rf_list;
    try {
        rf_list = RecruitmentFieldList::load(manifest_.rf_file);
    } catch (const TaxonomyError& e) {
        throw StageError("extract", e.what());
    }

    AppLoadCounters counters;
    std::vector<CandidateApplication> apps;
    std::uint64_t cvs_read = 0;
    std::uint64_t cv_files_missing = 0;
    std::uint64_t raw_hits = 0;
    std::uint64_t repaired = 0;
    std::uint64_t rejected_spans = 0;

    std::ofstream extraction_log;

    if (manifest_.applications_file) {
        LineReader in(*manifest_.applications_file);
        if (!in.is_open()) throw StageError("extract", in.error());
        std::string_view line;
        std::vector<std::string_view> fields;
        std::string arena;
        bool first = true;
        while (in.next(line)) {
            if (trim(line).empty()) continue;
            if (first) {
                first = false;
                if (to_lower_copy(trim(line)).rfind("app_id,", 0) == 0) continue;
            }
            ++counters.rows;
            if (!split_csv_fields(line, fields, arena)) {
                ++counters.malformed_rows;
                continue;
            }
            if (auto app = parse_application_row(fields, rf_list, counters)) {
                apps.push_back(std::move(*app));
            }
        }
        if (in.failed()) {
            throw StageError("extract", manifest_.applications_file->string() + ": " + in.error());
        }
    } else {
        // CV directory + sidecar: app_id,cv_file,rf,level,session_year,
        // official_a,official_b,official_c,official_passed
        extraction_log.open(paths_.extraction_report, std::ios::trunc);
        if (!extraction_log) {
            throw StageError("extract", "cannot write " + paths_.extraction_report.string());
        }
        LineReader in(*manifest_.cv_metadata);
        if (!in.is_open()) throw StageError("extract", in.error());
        std::string_view line;
        std::vector<std::string_view> fields;
        std::string arena;
        bool first = true;
        while (in.next(line)) {
            if (trim(line).empty()) continue;
            if (first) {
                first = false;
                if (to_lower_copy(trim(line)).rfind("app_id,", 0) == 0) continue;
            }
            ++counters.rows;
            if (!split_csv_fields(line, fields, arena) || fields.size() != 9) {
                ++counters.malformed_rows;
                continue;
            }
            // Rebuild an applications-shaped row with an empty DOI list, then
            // fill the list from the CV text.
            std::vector<std::string_view> app_fields = {fields[0], fields[2], fields[3],
                                                        fields[4], fields[5], fields[6],
                                                        fields[7], fields[8], {}};
            auto app = parse_application_row(app_fields, rf_list, counters);
            if (!app) continue;

            const std::filesystem::path cv_path = *manifest_.cv_dir / std::string(trim(fields[1]));
            std::ifstream cv(cv_path, std::ios::binary);
            if (!cv) {
                ++cv_files_missing;
                json entry = {{"app_id", app->app_id},
                              {"cv_file", std::string(trim(fields[1]))},
                              {"error", "missing CV file"}};
                extraction_log << entry.dump() << '\n';
                continue;
            }
            std::string text((std::istreambuf_iterator<char>(cv)),
                             std::istreambuf_iterator<char>());
            ++cvs_read;
            const ExtractionReport rep = extract_dois(text);
            raw_hits += rep.raw_hits;
            repaired += rep.repaired;
            rejected_spans += rep.rejected.size();
            app->dois = rep.dois;

            json rejected = json::array();
            for (const auto& r : rep.rejected) {
                rejected.push_back({{"span", r.span}, {"reason", r.reason}});
            }
            json entry = {{"app_id", app->app_id},
                          {"cv_file", std::string(trim(fields[1]))},
                          {"raw_hits", rep.raw_hits},
                          {"repaired", rep.repaired},
                          {"dois", rep.dois.size()},
                          {"rejected", std::move(rejected)}};
            extraction_log << entry.dump() << '\n';

            apps.push_back(std::move(*app));
        }
        if (in.failed()) {
            throw StageError("extract", manifest_.cv_metadata->string() + ": " + in.error());
        }
    }

    // Duplicate app_ids: keep the first, count the rest.
    {
        std::unordered_set<std::string> ids;
        std::vector<CandidateApplication> unique;
        unique.reserve(apps.size());
        for (auto& app : apps) {
            if (ids.insert(app.app_id).second) {
                unique.push_back(std::move(app));
            } else {
                ++counters.duplicate_app_ids;
            }
        }
        apps = std::move(unique);
    }

    std::uint64_t zero_doi = 0;
    for (const auto& app : apps) zero_doi += app.dois.empty() ? 1 : 0;

    write_applications(paths_.applications, std::move(apps));

    store_stage_report(paths_.run_report, manifest_, "extract",
                       {{"rows", counters.rows},
                        {"applications", counters.rows - counters.malformed_rows -
                                             counters.nd_rejected - counters.unknown_rf -
                                             counters.duplicate_app_ids - cv_files_missing},
                        {"malformed_rows", counters.malformed_rows},
                        {"nd_rejected", counters.nd_rejected},
                        {"unknown_rf", counters.unknown_rf},
                        {"duplicate_app_ids", counters.duplicate_app_ids},
                        {"partial_official", counters.partial_official},
                        {"bad_dois", counters.bad_dois},
                        {"zero_doi_applications", zero_doi},
                        {"cvs_read", cvs_read},
                        {"cv_files_missing", cv_files_missing},
                        {"raw_hits", raw_hits},
                        {"repaired", repaired},
                        {"rejected_spans", rejected_spans},
                        {"wall_ms", timer.elapsed_ms()}});
}

void Pipeline::resolve() {
    const StageTimer timer;
    const std::vector<CandidateApplication> apps =
        load_canonical_applications(paths_.applications, "resolve");

    std::set<std::string> unique;
    for (const auto& app : apps) {
        for (const auto& d : app.dois) unique.insert(d.value);
    }
    std::vector<Doi> dois;
    dois.reserve(unique.size());
    for (const auto& v : unique) dois.emplace_back(v);

    // Existence oracle.
    ValidationResult validation;
    if (manifest_.offline) {
        if (manifest_.resolver_fixture) {
            FixtureResolver resolver = FixtureResolver::load(*manifest_.resolver_fixture);
            ValidationPolicy policy;
            policy.parallelism = manifest_.jobs;
            validation = validate_dois(dois, resolver, policy);
        } else {
            validation.unknown = dois;  // no oracle available offline
        }
    } else {
        HttpConfig http;
        http.base_url = manifest_.doi_proxy_base_url;
        http.requests_per_second = manifest_.rate_limit_per_second;
        http.mailto = manifest_.mailto;
        const auto resolver = make_http_doi_resolver(http);
        ValidationPolicy policy;
        policy.parallelism = manifest_.jobs;
        validation = validate_dois(dois, *resolver, policy);
    }

    std::unordered_map<std::string, std::string> existence;
    for (const auto& d : validation.valid) existence[d.value] = "valid";
    for (const auto& d : validation.invalid) existence[d.value] = "invalid";
    for (const auto& d : validation.unknown) existence[d.value] = "unknown";

    // Metadata for everything not proven invalid.
    std::vector<Doi> to_fetch;
    to_fetch.reserve(validation.valid.size() + validation.unknown.size());
    to_fetch.insert(to_fetch.end(), validation.valid.begin(), validation.valid.end());
    to_fetch.insert(to_fetch.end(), validation.unknown.begin(), validation.unknown.end());

    MetadataCache cache = manifest_.metadata_cache ? MetadataCache::open(*manifest_.metadata_cache)
                                                   : MetadataCache();
    std::unique_ptr<MetadataTransport> transport;
    FileMetadataStore store;
    if (manifest_.offline) {
        if (manifest_.metadata_store) store = FileMetadataStore::load(*manifest_.metadata_store);
    } else {
        HttpConfig http;
        http.base_url = manifest_.crossref_base_url;
        http.requests_per_second = manifest_.rate_limit_per_second;
        http.mailto = manifest_.mailto;
        transport = make_http_metadata_transport(http);
    }
    MetadataClientConfig client_config;
    client_config.retry_budget = manifest_.retry_budget;
    client_config.backoff_seconds = manifest_.offline ? 0.0 : manifest_.backoff_seconds;
    client_config.parallelism = manifest_.jobs;
    MetadataClient client(transport ? *transport : static_cast<MetadataTransport&>(store), cache,
                          client_config);
    const std::map<std::string, FetchResult> fetched = client.fetch_all(to_fetch);

    std::ofstream out(paths_.dois, std::ios::trunc);
    if (!out) throw StageError("resolve", "cannot write " + paths_.dois.string());
    out << kDoisHeader << '\n';
    for (const auto& v : unique) {
        out << csv_escape(v) << ',' << existence[v] << ',';
        const auto it = fetched.find(v);
        if (it == fetched.end()) {
            out << "skipped,,,";
        } else {
            switch (it->second.status) {
                case FetchStatus::found: {
                    const PublicationRecord& rec = *it->second.record;
                    out << "found," << csv_escape(rec.pub_type) << ',';
                    if (rec.year) out << *rec.year;
                    out << ',' << fmt_bool(rec.is_journal_article);
                    break;
                }
                case FetchStatus::not_found:
                    out << "not_found,,,";
                    break;
                case FetchStatus::failed:
                    out << "failed,,,";
                    break;
            }
        }
        out << '\n';
    }

    store_stage_report(paths_.run_report, manifest_, "resolve",
                       {{"unique_dois", unique.size()},
                        {"valid", validation.valid.size()},
                        {"invalid", validation.invalid.size()},
                        {"unknown", validation.unknown.size()},
                        {"meta_found", client.stats().found},
                        {"meta_not_found", client.stats().not_found},
                        {"meta_failed", client.stats().failed},
                        {"cache_hits", client.stats().cache_hits},
                        {"upstream_calls", client.stats().upstream_calls},
                        {"unknown_types", client.stats().unknown_types},
                        {"wall_ms", timer.elapsed_ms()}});
}

void Pipeline::ingest() {
    const StageTimer timer;
    if (manifest_.index_snapshot) {
        // Adopt the prebuilt snapshot; validate it by loading.
        try {
            CitationIndex::load(*manifest_.index_snapshot);
        } catch (const std::exception& e) {
            throw StageError("ingest", e.what());
        }
        if (std::filesystem::absolute(*manifest_.index_snapshot) !=
            std::filesystem::absolute(paths_.index)) {
            std::filesystem::copy_file(*manifest_.index_snapshot, paths_.index,
                                       std::filesystem::copy_options::overwrite_existing);
        }
        store_stage_report(paths_.run_report, manifest_, "ingest",
                           {{"adopted_snapshot", manifest_.index_snapshot->string()},
                            {"wall_ms", timer.elapsed_ms()}});
        return;
    }

    const std::vector<std::filesystem::path> files = manifest_.expand_coci_inputs();
    IngestOptions options;
    options.jobs = manifest_.jobs;
    options.partitions = manifest_.partitions;
    options.spill_dir = manifest_.out_dir;
    options.keep_edges = manifest_.keep_edges;
    options.edges_out = paths_.edges;
    IngestStats stats;
    CitationIndex index;
    try {
        index = CitationIndex::ingest(files, options, stats);
    } catch (const std::exception& e) {
        throw StageError("ingest", e.what());
    }
    if (stats.files_ok == 0 && stats.files_requested > 0) {
        throw StageError("ingest", "no readable citation dump: " +
                                       (stats.unreadable_sources.empty()
                                            ? files.front().string()
                                            : stats.unreadable_sources.front()));
    }
    index.save(paths_.index);

    store_stage_report(paths_.run_report, manifest_, "ingest",
                       {{"files_requested", stats.files_requested},
                        {"files_ok", stats.files_ok},
                        {"rows_read", stats.rows_read},
                        {"malformed_rows", stats.malformed_rows},
                        {"duplicate_pairs", stats.duplicate_pairs},
                        {"distinct_pairs", index.total_edges()},
                        {"entities", index.total_entities()},
                        {"unreadable", stats.unreadable_sources},
                        {"wall_ms", timer.elapsed_ms()}});
}

void Pipeline::evaluate() {
    const StageTimer timer;
    ThresholdTable thresholds;
    try {
        thresholds = ThresholdTable::load(manifest_.thresholds_file);
    } catch (const TaxonomyError& e) {
        throw StageError("evaluate", e.what());
    }
    const std::vector<CandidateApplication> apps =
        load_canonical_applications(paths_.applications, "evaluate");
    const std::map<std::string, DoiRow> doi_table = load_doi_table(paths_.dois, "evaluate");
    CitationIndex index;
    try {
        index = CitationIndex::load(paths_.index);
    } catch (const std::exception& e) {
        throw StageError("evaluate", std::string("missing or bad index (run `ingest` first): ") +
                                         e.what());
    }

    RecordMap records;
    for (const auto& [doi, row] : doi_table) {
        if (row.existence == "invalid" || row.meta_status != "found") continue;
        PublicationRecord rec;
        rec.doi = Doi(doi);
        rec.pub_type = row.pub_type;
        rec.year = sanitize_year(row.year);
        rec.is_journal_article = journal_article_type(rec.pub_type);
        records.emplace(doi, std::move(rec));
    }

    std::vector<ResultRow> rows;
    rows.reserve(apps.size());
    std::uint64_t missing_thresholds = 0;
    std::uint64_t missing_official = 0;
    std::uint64_t zero_doi = 0;
    std::uint64_t mismatches = 0;

    std::vector<std::optional<ResultRow>> computed(apps.size());
    const auto evaluate_one = [&](std::size_t i) {
        const CandidateApplication& app = apps[i];
        const auto t = thresholds.find(app.rf, app.level, app.session_year);
        if (!t) return;  // counted below
        ResultRow row;
        row.app = app;
        row.thresholds = *t;
        for (const auto& d : app.dois) row.n_records += records.count(d.value);
        row.metrics = compute_metrics(app, records, index, manifest_.normalization);
        row.assessment = asnsim::evaluate(row.metrics, *t, manifest_.comparator);
        OfficialData official{app.official_metrics, app.official_passed};
        if (app.official_metrics) {
            const MetricsTriple m{app.official_metrics->t_a, app.official_metrics->t_b,
                                  app.official_metrics->t_c};
            row.official_assessment = asnsim::evaluate(m, *t, manifest_.comparator);
            row.official_passed_used = row.official_assessment->passed;
        } else if (app.official_passed) {
            row.official_passed_used = app.official_passed;
        }
        row.agreement =
            compare(app.app_id, row.assessment, official, *t, manifest_.comparator);
        if (row.agreement) row.official_mismatch = row.agreement->official_passed_mismatch;
        computed[i] = std::move(row);
    };

    const int jobs = static_cast<int>(
        std::min<std::size_t>(std::max(1, manifest_.jobs), std::max<std::size_t>(apps.size(), 1)));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < apps.size(); ++i) evaluate_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= apps.size()) return;
                    evaluate_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < apps.size(); ++i) {
        if (!computed[i]) {
            ++missing_thresholds;
            continue;
        }
        ResultRow& row = *computed[i];
        if (row.app.dois.empty()) ++zero_doi;
        if (!row.agreement) ++missing_official;
        if (row.official_mismatch) ++mismatches;
        rows.push_back(std::move(row));
    }

    write_results(paths_.results, rows);

    store_stage_report(paths_.run_report, manifest_, "evaluate",
                       {{"applications", apps.size()},
                        {"evaluated", rows.size()},
                        {"missing_thresholds", missing_thresholds},
                        {"zero_doi_applications", zero_doi},
                        {"missing_official", missing_official},
                        {"official_passed_mismatches", mismatches},
                        {"wall_ms", timer.elapsed_ms()}});
}

void Pipeline::report() {
    const StageTimer timer;
    const std::vector<AgreementObservation> obs = load_observations(paths_.results, "report");

    const std::vector<AgreementReportRow> by_level = aggregate(obs, Grouping::by_level);
    const std::vector<AgreementReportRow> by_sa = aggregate(obs, Grouping::by_level_sa);
    const std::vector<AgreementReportRow> by_rf = aggregate(obs, Grouping::by_level_rf);

    write_wide_table(paths_.report_by_level, by_level);
    write_wide_table(paths_.report_by_sa, by_sa);
    write_wide_table(paths_.report_by_rf, by_rf);

    {
        std::ofstream cells(paths_.report_cells, std::ios::trunc);
        if (!cells) throw StageError("report", "cannot write " + paths_.report_cells.string());
        cells << "grouping,level,sa,rf,metric,n,agreed,pct\n";
        append_cells(cells, "level", by_level);
        append_cells(cells, "sa", by_sa);
        append_cells(cells, "rf", by_rf);
    }

    // SA ranking in increasing overall agreement, per level.
    {
        std::ofstream out(paths_.sa_ranking, std::ios::trunc);
        if (!out) throw StageError("report", "cannot write " + paths_.sa_ranking.string());
        out << "level,rank,sa,n,pct_overall\n";
        for (const Level level : {Level::FP, Level::AP}) {
            std::vector<AgreementReportRow> rows;
            for (const auto& r : by_sa) {
                if (r.level == level) rows.push_back(r);
            }
            rank_groups(rows);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                out << level_name(level) << ',' << i + 1 << ',';
                char buf[8];
                std::snprintf(buf, sizeof(buf), "%02d", rows[i].sa.value_or(0));
                out << buf << ',' << rows[i].n << ',' << fmt_pct(rows[i].overall.pct()) << '\n';
            }
        }
    }

    if (manifest_.charts) {
        std::filesystem::create_directories(paths_.charts_dir);
        std::map<RecruitmentField, std::pair<const AgreementReportRow*, const AgreementReportRow*>>
            per_rf;
        for (const auto& r : by_rf) {
            auto& slot = per_rf[*r.rf];
            (r.level == Level::FP ? slot.first : slot.second) = &r;
        }
        for (const auto& [rf, slot] : per_rf) {
            std::string name = format_rf(rf);
            std::replace(name.begin(), name.end(), '/', '-');
            write_agreement_chart(paths_.charts_dir / ("rf-" + name + ".svg"), format_rf(rf),
                                  slot.first, slot.second);
        }
    }

    store_stage_report(paths_.run_report, manifest_, "report",
                       {{"observations", obs.size()},
                        {"groups_level", by_level.size()},
                        {"groups_sa", by_sa.size()},
                        {"groups_rf", by_rf.size()},
                        {"charts", manifest_.charts},
                        {"wall_ms", timer.elapsed_ms()}});
}

void Pipeline::run() {
    extract();
    resolve();
    ingest();
    evaluate();
    report();
}

}  // namespace asnsim
