#include "asnsim/gzline.hpp"

#include <zlib.h>

#include <cstring>

#include "asnsim/kernels/bytescan.hpp"

namespace asnsim {

namespace {
constexpr std::size_t kInitialBuf = 1u << 20;
}

LineReader::LineReader(const std::filesystem::path& path) {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (f == nullptr) {
        error_ = "cannot open " + path.string();
        return;
    }
    gzbuffer(f, 1u << 18);
    handle_ = f;
    buf_.resize(kInitialBuf);
}

LineReader::~LineReader() {
    if (handle_ != nullptr) gzclose(static_cast<gzFile>(handle_));
}

bool LineReader::refill() {
    if (eof_ || handle_ == nullptr) return false;
    // Compact, then grow if an unterminated line fills the whole buffer.
    if (begin_ > 0) {
        std::memmove(buf_.data(), buf_.data() + begin_, end_ - begin_);
        end_ -= begin_;
        begin_ = 0;
    } else if (end_ == buf_.size()) {
        buf_.resize(buf_.size() * 2);
    }
    const unsigned avail = static_cast<unsigned>(buf_.size() - end_);
    const int got = gzread(static_cast<gzFile>(handle_), buf_.data() + end_, avail);
    if (got < 0) {
        int errnum = 0;
        const char* msg = gzerror(static_cast<gzFile>(handle_), &errnum);
        error_ = msg != nullptr && errnum != Z_OK ? msg : "read error";
        eof_ = true;
        return false;
    }
    if (got == 0) {
        eof_ = true;
        return false;
    }
    end_ += static_cast<std::size_t>(got);
    return true;
}

bool LineReader::next(std::string_view& line) {
    if (handle_ == nullptr) return false;
    for (;;) {
        const unsigned char* base = reinterpret_cast<const unsigned char*>(buf_.data());
        const unsigned char* nl = kernels::find_byte(base + begin_, base + end_, '\n');
        if (nl != base + end_) {
            std::size_t len = static_cast<std::size_t>(nl - (base + begin_));
            line = std::string_view(buf_.data() + begin_, len);
            begin_ += len + 1;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            return true;
        }
        if (!refill()) {
            if (failed()) return false;
            if (begin_ < end_) {
                line = std::string_view(buf_.data() + begin_, end_ - begin_);
                begin_ = end_;
                if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                return true;
            }
            return false;
        }
    }
}

}  // namespace asnsim
