#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Streaming line reader over plain or gzip files. zlib's gz layer sniffs the
// magic bytes, so callers never need to know which one they were handed.

namespace asnsim {

class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path);
    ~LineReader();

    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    bool is_open() const noexcept { return handle_ != nullptr; }

    // Yields the next line without its terminator (\n or \r\n). The view is
    // valid until the next call. Returns false at end of input or on error;
    // check failed() to tell the two apart.
    bool next(std::string_view& line);

    bool failed() const noexcept { return !error_.empty(); }
    const std::string& error() const noexcept { return error_; }

private:
    bool refill();

    void* handle_ = nullptr;  // gzFile
    std::vector<char> buf_;
    std::size_t begin_ = 0;
    std::size_t end_ = 0;
    bool eof_ = false;
    std::string error_;
};

}  // namespace asnsim
