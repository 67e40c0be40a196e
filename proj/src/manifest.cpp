#include "asnsim/manifest.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

namespace asnsim {

namespace {

using nlohmann::json;

std::filesystem::path resolve_relative(const std::filesystem::path& base,
                                       const std::filesystem::path& p) {
    if (p.is_absolute()) return p;
    return base / p;
}

std::optional<std::filesystem::path> opt_path(const json& obj, const char* key,
                                              const std::filesystem::path& base) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ManifestError(std::string("manifest: '") + key + "' must be a string");
    return resolve_relative(base, std::filesystem::path(it->get<std::string>()));
}

NormalizationMode parse_mode_or_throw(const std::string& s) {
    if (s == "none") return NormalizationMode::none;
    if (s == "age" || s == "divide_by_scientific_age") {
        return NormalizationMode::divide_by_scientific_age;
    }
    throw ManifestError("manifest: unknown normalization mode '" + s + "'");
}

}  // namespace

RunManifest RunManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest: " + path.string());
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ManifestError("manifest is not valid JSON: " + path.string());
    if (!doc.is_object()) throw ManifestError("manifest root must be an object");

    const std::filesystem::path base = path.has_parent_path()
                                           ? path.parent_path()
                                           : std::filesystem::path(".");
    RunManifest m;

    const json inputs = doc.value("inputs", json::object());
    m.applications_file = opt_path(inputs, "applications", base);
    m.cv_dir = opt_path(inputs, "cv_dir", base);
    m.cv_metadata = opt_path(inputs, "cv_metadata", base);
    if (const auto it = inputs.find("coci"); it != inputs.end() && !it->is_null()) {
        if (it->is_string()) {
            m.coci_inputs.push_back(resolve_relative(base, it->get<std::string>()).string());
        } else if (it->is_array()) {
            for (const auto& e : *it) {
                if (!e.is_string()) throw ManifestError("manifest: 'coci' entries must be strings");
                m.coci_inputs.push_back(resolve_relative(base, e.get<std::string>()).string());
            }
        } else {
            throw ManifestError("manifest: 'coci' must be a string or array");
        }
    }
    if (const auto p = opt_path(inputs, "thresholds", base)) m.thresholds_file = *p;
    if (const auto p = opt_path(inputs, "recruitment_fields", base)) m.rf_file = *p;

    const json resolver = doc.value("resolver", json::object());
    m.resolver_fixture = opt_path(resolver, "fixture", base);
    m.doi_proxy_base_url = resolver.value("base_url", std::string());

    const json metadata = doc.value("metadata", json::object());
    m.metadata_store = opt_path(metadata, "store", base);
    m.metadata_cache = opt_path(metadata, "cache", base);
    m.crossref_base_url = metadata.value("base_url", std::string());
    m.rate_limit_per_second = metadata.value("rate_limit_per_second", 1.0);
    m.mailto = metadata.value("mailto", std::string());
    m.retry_budget = metadata.value("retry_budget", 3);
    m.backoff_seconds = metadata.value("backoff_seconds", 0.5);

    const json index = doc.value("index", json::object());
    m.index_snapshot = opt_path(index, "snapshot", base);

    const json policy = doc.value("policy", json::object());
    m.offline = policy.value("offline", true);
    if (policy.contains("comparator")) {
        const auto c = parse_comparator(policy["comparator"].get<std::string>());
        if (!c) throw ManifestError("manifest: comparator must be 'ge' or 'gt'");
        m.comparator = *c;
    }
    if (policy.contains("normalization")) {
        const json& norm = policy["normalization"];
        if (norm.is_string()) {
            m.normalization = NormalizationPolicy::uniform(parse_mode_or_throw(norm.get<std::string>()));
        } else if (norm.is_object()) {
            m.normalization.a = parse_mode_or_throw(norm.value("a", "none"));
            m.normalization.b = parse_mode_or_throw(norm.value("b", "none"));
            m.normalization.c = parse_mode_or_throw(norm.value("c", "none"));
        } else {
            throw ManifestError("manifest: 'normalization' must be a string or object");
        }
    }
    m.jobs = policy.value("jobs", 1);
    m.partitions = policy.value("partitions", 8);
    if (m.jobs < 1) throw ManifestError("manifest: jobs must be >= 1");
    if (m.partitions < 1) throw ManifestError("manifest: partitions must be >= 1");

    const json output = doc.value("output", json::object());
    if (const auto p = opt_path(output, "dir", base)) m.out_dir = *p;
    m.charts = output.value("charts", false);
    m.keep_edges = output.value("keep_edges", false);

    return m;
}

void RunManifest::validate() const {
    const auto require_exists = [](const std::filesystem::path& p, const char* what) {
        if (p.empty()) throw ManifestError(std::string("manifest: missing ") + what);
        if (!std::filesystem::exists(p)) {
            throw ManifestError(std::string("manifest: ") + what + " does not exist: " +
                                p.string());
        }
    };

    const bool has_apps = applications_file.has_value();
    const bool has_cvs = cv_dir.has_value() || cv_metadata.has_value();
    if (has_apps == has_cvs) {
        throw ManifestError(
            "manifest: provide either inputs.applications or inputs.cv_dir + inputs.cv_metadata");
    }
    if (has_cvs && (!cv_dir || !cv_metadata)) {
        throw ManifestError("manifest: cv_dir and cv_metadata must be given together");
    }

    if (has_apps) require_exists(*applications_file, "applications file");
    if (has_cvs) {
        require_exists(*cv_dir, "cv directory");
        if (!std::filesystem::is_directory(*cv_dir)) {
            throw ManifestError("manifest: cv_dir is not a directory: " + cv_dir->string());
        }
        require_exists(*cv_metadata, "cv metadata table");
    }
    require_exists(thresholds_file, "thresholds file");
    require_exists(rf_file, "recruitment fields file");
    if (resolver_fixture) require_exists(*resolver_fixture, "resolver fixture");
    if (metadata_store) require_exists(*metadata_store, "metadata store");
    if (index_snapshot) require_exists(*index_snapshot, "index snapshot");
    if (!index_snapshot && coci_inputs.empty()) {
        throw ManifestError("manifest: provide inputs.coci or index.snapshot");
    }

    if (out_dir.empty()) throw ManifestError("manifest: missing output.dir");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw ManifestError("manifest: output dir not writable: " + out_dir.string());
    }
}

std::vector<std::filesystem::path> RunManifest::expand_coci_inputs() const {
    std::vector<std::filesystem::path> files;
    for (const std::string& entry : coci_inputs) {
        const std::filesystem::path p(entry);
        const std::string filename = p.filename().string();
        if (filename.find('*') == std::string::npos && filename.find('?') == std::string::npos) {
            files.push_back(p);
            continue;
        }
        const std::filesystem::path dir =
            p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
        if (!std::filesystem::is_directory(dir)) {
            throw ManifestError("manifest: coci pattern directory missing: " + dir.string());
        }
        std::size_t before = files.size();
        for (const auto& ent : std::filesystem::directory_iterator(dir)) {
            if (!ent.is_regular_file()) continue;
            const std::string name = ent.path().filename().string();
            if (fnmatch(filename.c_str(), name.c_str(), 0) == 0) files.push_back(ent.path());
        }
        if (files.size() == before) {
            throw ManifestError("manifest: coci pattern matched nothing: " + entry);
        }
    }
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    if (files.empty() && !index_snapshot) {
        throw ManifestError("manifest: no citation dump inputs");
    }
    return files;
}

}  // namespace asnsim
