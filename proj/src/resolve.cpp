#include "asnsim/resolve.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

#include "asnsim/gzline.hpp"
#include "asnsim/text.hpp"

namespace asnsim {

FixtureResolver FixtureResolver::load(const std::filesystem::path& path) {
    LineReader in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open resolver fixture: " + path.string());
    std::unordered_set<std::string> valid;
    std::string_view line;
    while (in.next(line)) {
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        valid.insert(to_lower_copy(s));
    }
    if (in.failed()) throw std::runtime_error(path.string() + ": " + in.error());
    return FixtureResolver(std::move(valid));
}

ValidationResult validate_dois(const std::vector<Doi>& dois, DoiResolver& resolver,
                               const ValidationPolicy& policy) {
    std::vector<Existence> answers(dois.size(), Existence::unavailable);

    auto resolve_one = [&](std::size_t i) {
        Existence e = resolver.exists(dois[i]);
        for (int attempt = 0; e == Existence::unavailable && attempt < policy.max_retries;
             ++attempt) {
            e = resolver.exists(dois[i]);
        }
        answers[i] = e;
    };

    const int jobs = std::max(1, policy.parallelism);
    if (jobs == 1 || dois.size() < 2) {
        for (std::size_t i = 0; i < dois.size(); ++i) resolve_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int nthreads = static_cast<int>(std::min<std::size_t>(jobs, dois.size()));
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= dois.size()) return;
                    resolve_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Deterministic merge: buckets in input order.
    ValidationResult result;
    for (std::size_t i = 0; i < dois.size(); ++i) {
        switch (answers[i]) {
            case Existence::yes:
                result.valid.push_back(dois[i]);
                break;
            case Existence::no:
                result.invalid.push_back(dois[i]);
                break;
            case Existence::unavailable:
                result.unknown.push_back(dois[i]);
                break;
        }
    }
    return result;
}

}  // namespace asnsim
