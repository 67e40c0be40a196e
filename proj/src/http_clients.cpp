#include <chrono>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "asnsim/metadata.hpp"
#include "asnsim/resolve.hpp"

// Live transports: Crossref works endpoint for publication metadata and the
// DOI proxy REST API for existence checks. Both honor a polite contact
// identifier and a requests-per-second budget. Nothing in the test suite
// touches these; offline runs use the file-backed transports instead.

namespace asnsim {

namespace {

using nlohmann::json;

class RateLimiter {
public:
    explicit RateLimiter(double per_second)
        : min_interval_(per_second > 0 ? 1.0 / per_second : 0.0) {}

    void acquire() {
        if (min_interval_ <= 0) return;
        std::unique_lock lock(mu_);
        const auto now = std::chrono::steady_clock::now();
        const auto earliest = last_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                          std::chrono::duration<double>(min_interval_));
        if (now < earliest) {
            lock.unlock();
            std::this_thread::sleep_until(earliest);
            lock.lock();
        }
        last_ = std::chrono::steady_clock::now();
    }

private:
    std::mutex mu_;
    std::chrono::steady_clock::time_point last_{};
    double min_interval_;
};

std::string percent_encode_path(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (const unsigned char c : s) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' ||
                          c == '~' || c == '/' || c == '(' || c == ')' || c == ':' || c == ';';
        if (keep) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

std::string user_agent(const std::string& mailto) {
    std::string ua = "asnsim/1.0";
    if (!mailto.empty()) ua += " (mailto:" + mailto + ")";
    return ua;
}

std::optional<int> year_from_date_parts(const json& message, const char* field) {
    const auto it = message.find(field);
    if (it == message.end() || !it->is_object()) return std::nullopt;
    const auto parts = it->find("date-parts");
    if (parts == it->end() || !parts->is_array() || parts->empty()) return std::nullopt;
    const auto& first = (*parts)[0];
    if (!first.is_array() || first.empty() || !first[0].is_number_integer()) return std::nullopt;
    return first[0].get<int>();
}

class CrossrefTransport : public MetadataTransport {
public:
    explicit CrossrefTransport(const HttpConfig& config)
        : client_(config.base_url.empty() ? "https://api.crossref.org" : config.base_url),
          limiter_(config.requests_per_second),
          ua_(user_agent(config.mailto)) {
        client_.set_connection_timeout(config.timeout_seconds);
        client_.set_read_timeout(config.timeout_seconds);
        client_.set_follow_location(true);
    }

    Reply fetch(const Doi& doi) override {
        limiter_.acquire();
        httplib::Headers headers{{"User-Agent", ua_}};
        const auto res = client_.Get("/works/" + percent_encode_path(doi.value), headers);
        Reply reply;
        if (!res) {
            reply.kind = ReplyKind::transient_error;
            reply.detail = "connection failure: " + httplib::to_string(res.error());
            return reply;
        }
        if (res->status == 404) {
            reply.kind = ReplyKind::not_found;
            return reply;
        }
        if (res->status == 429) {
            reply.kind = ReplyKind::rate_limited;
            return reply;
        }
        if (res->status >= 500) {
            reply.kind = ReplyKind::transient_error;
            reply.detail = "HTTP " + std::to_string(res->status);
            return reply;
        }
        if (res->status != 200) {
            reply.kind = ReplyKind::permanent_error;
            reply.detail = "HTTP " + std::to_string(res->status);
            return reply;
        }
        const json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.contains("message")) {
            reply.kind = ReplyKind::permanent_error;
            reply.detail = "unparseable response body";
            return reply;
        }
        const json& message = body["message"];
        PublicationRecord rec;
        rec.doi = doi;
        if (message.contains("type") && message["type"].is_string()) {
            rec.pub_type = message["type"].get<std::string>();
        }
        rec.year = year_from_date_parts(message, "published-print");
        if (!rec.year) rec.year = year_from_date_parts(message, "published-online");
        if (!rec.year) rec.year = year_from_date_parts(message, "issued");
        reply.kind = ReplyKind::found;
        reply.record = std::move(rec);
        return reply;
    }

private:
    httplib::Client client_;
    RateLimiter limiter_;
    std::string ua_;
};

class DoiProxyResolver : public DoiResolver {
public:
    explicit DoiProxyResolver(const HttpConfig& config)
        : client_(config.base_url.empty() ? "https://doi.org" : config.base_url),
          limiter_(config.requests_per_second),
          ua_(user_agent(config.mailto)) {
        client_.set_connection_timeout(config.timeout_seconds);
        client_.set_read_timeout(config.timeout_seconds);
    }

    Existence exists(const Doi& doi) override {
        limiter_.acquire();
        httplib::Headers headers{{"User-Agent", ua_}};
        const auto res = client_.Get("/api/handles/" + percent_encode_path(doi.value), headers);
        if (!res) return Existence::unavailable;
        if (res->status == 404) return Existence::no;
        if (res->status != 200) return Existence::unavailable;
        const json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.contains("responseCode")) return Existence::unavailable;
        return body["responseCode"].get<int>() == 1 ? Existence::yes : Existence::no;
    }

private:
    httplib::Client client_;
    RateLimiter limiter_;
    std::string ua_;
};

}  // namespace

std::unique_ptr<MetadataTransport> make_http_metadata_transport(const HttpConfig& config) {
    return std::make_unique<CrossrefTransport>(config);
}

std::unique_ptr<DoiResolver> make_http_doi_resolver(const HttpConfig& config) {
    return std::make_unique<DoiProxyResolver>(config);
}

}  // namespace asnsim
