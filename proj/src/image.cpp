#include "seequant/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "seequant/errors.hpp"
#include "seequant/see.hpp"

namespace seequant {

namespace {

// PGM header tokens are separated by whitespace; '#' starts a comment that
// runs to end of line.
class HeaderScanner {
public:
    explicit HeaderScanner(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::string next_token() {
        skip_separators();
        if (pos_ >= bytes_.size()) {
            throw ParseError("PGM header truncated", pos_);
        }
        std::string token;
        while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#') {
            token.push_back(static_cast<char>(bytes_[pos_++]));
        }
        return token;
    }

    std::uint64_t next_uint(const char* what) {
        const std::size_t at = pos_;
        const std::string token = next_token();
        std::uint64_t value = 0;
        if (token.empty()) {
            throw ParseError(std::string("PGM header: missing ") + what, at);
        }
        for (char c : token) {
            if (c < '0' || c > '9') {
                throw ParseError(std::string("PGM header: bad ") + what + " '" + token + "'",
                                 at);
            }
            value = value * 10 + static_cast<std::uint64_t>(c - '0');
            if (value > 0xffffffffull) {
                throw ParseError(std::string("PGM header: ") + what + " out of range", at);
            }
        }
        return value;
    }

    /// Consumes the single whitespace byte that terminates the header.
    std::size_t finish_header() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
            throw ParseError("PGM header: expected whitespace before pixel data", pos_);
        }
        return ++pos_;
    }

    std::size_t pos() const { return pos_; }

private:
    static bool is_space(std::uint8_t c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
    }

    void skip_separators() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

} // namespace

ImageGrid load_pgm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2) {
        throw ParseError("PGM: input shorter than a magic number", 0);
    }
    if (bytes[0] != 'P' || bytes[1] != '5') {
        throw ParseError(std::string("PGM: expected binary magic \"P5\", got \"") +
                             static_cast<char>(bytes[0]) + static_cast<char>(bytes[1]) + "\"",
                         0);
    }
    HeaderScanner scanner(bytes);
    const std::string magic = scanner.next_token();
    if (magic != "P5") {
        throw ParseError("PGM: expected binary magic \"P5\"", 0);
    }
    const std::uint64_t width = scanner.next_uint("width");
    const std::uint64_t height = scanner.next_uint("height");
    const std::size_t maxval_at = scanner.pos();
    const std::uint64_t maxval = scanner.next_uint("maxval");
    if (width == 0 || height == 0) {
        throw ParseError("PGM: zero image dimension", maxval_at);
    }
    if (maxval == 0 || maxval > 65535) {
        throw ParseError("PGM: maxval must be in [1, 65535]", maxval_at);
    }
    const std::size_t data_at = scanner.finish_header();

    ImageGrid image;
    image.width = static_cast<std::uint32_t>(width);
    image.height = static_cast<std::uint32_t>(height);
    image.bits_per_sample = maxval <= 255 ? 8 : 16;
    const std::size_t sample_bytes = maxval <= 255 ? 1 : 2;
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (bytes.size() < data_at + count * sample_bytes) {
        throw ParseError("PGM: pixel payload truncated", bytes.size());
    }
    if (bytes.size() > data_at + count * sample_bytes) {
        throw ParseError("PGM: trailing bytes after pixel payload",
                         data_at + count * sample_bytes);
    }
    image.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t v;
        if (sample_bytes == 1) {
            v = bytes[data_at + i];
        } else {
            v = (static_cast<std::uint32_t>(bytes[data_at + 2 * i]) << 8) |
                bytes[data_at + 2 * i + 1];
        }
        if (v > maxval) {
            throw ParseError("PGM: sample exceeds maxval", data_at + i * sample_bytes);
        }
        image.samples[i] = v;
    }
    return image;
}

std::vector<std::uint8_t> write_pgm(const ImageGrid& image) {
    std::string header = "P5\n" + std::to_string(image.width) + " " +
                         std::to_string(image.height) + "\n" +
                         std::to_string(image.max_value()) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    for (std::uint32_t v : image.samples) {
        if (image.bits_per_sample == 8) {
            out.push_back(static_cast<std::uint8_t>(v));
        } else {
            out.push_back(static_cast<std::uint8_t>(v >> 8));
            out.push_back(static_cast<std::uint8_t>(v & 0xff));
        }
    }
    return out;
}

ImageGrid load_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return load_pgm(bytes);
}

void write_pgm_file(const std::string& path, const ImageGrid& image) {
    const std::vector<std::uint8_t> bytes = write_pgm(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ParseError("cannot open file for writing: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

VectorSet extract_blocks(const ImageGrid& image, const BlockSpec& spec) {
    if (spec.block_w == 0 || spec.block_h == 0) {
        throw InvalidInput("extract_blocks: block dimensions must be positive");
    }
    const std::size_t k = static_cast<std::size_t>(spec.block_w) * spec.block_h;
    VectorSet set(k, image.bits_per_sample);
    const std::uint32_t bx_count = (image.width + spec.block_w - 1) / spec.block_w;
    const std::uint32_t by_count = (image.height + spec.block_h - 1) / spec.block_h;
    std::vector<double> block(k);
    for (std::uint32_t by = 0; by < by_count; ++by) {
        for (std::uint32_t bx = 0; bx < bx_count; ++bx) {
            std::size_t t = 0;
            for (std::uint32_t dy = 0; dy < spec.block_h; ++dy) {
                for (std::uint32_t dx = 0; dx < spec.block_w; ++dx, ++t) {
                    const std::uint32_t x = bx * spec.block_w + dx;
                    const std::uint32_t y = by * spec.block_h + dy;
                    block[t] = (x < image.width && y < image.height)
                                   ? static_cast<double>(image.at(x, y))
                                   : static_cast<double>(spec.pad_value);
                }
            }
            set.push_back(block);
        }
    }
    return set;
}

ImageGrid assemble_blocks(const VectorSet& vectors, std::uint32_t width,
                          std::uint32_t height, unsigned bits_per_sample,
                          const BlockSpec& spec) {
    const std::uint32_t bx_count = (width + spec.block_w - 1) / spec.block_w;
    const std::uint32_t by_count = (height + spec.block_h - 1) / spec.block_h;
    const std::size_t k = static_cast<std::size_t>(spec.block_w) * spec.block_h;
    if (vectors.size() != static_cast<std::size_t>(bx_count) * by_count ||
        vectors.dim() != k) {
        throw InvalidInput("assemble_blocks: vector count or dimension mismatch");
    }
    ImageGrid image;
    image.width = width;
    image.height = height;
    image.bits_per_sample = bits_per_sample;
    image.samples.assign(static_cast<std::size_t>(width) * height, 0);
    const double max_value = static_cast<double>((1u << bits_per_sample) - 1u);
    for (std::uint32_t by = 0; by < by_count; ++by) {
        for (std::uint32_t bx = 0; bx < bx_count; ++bx) {
            const auto block = vectors[static_cast<std::size_t>(by) * bx_count + bx];
            std::size_t t = 0;
            for (std::uint32_t dy = 0; dy < spec.block_h; ++dy) {
                for (std::uint32_t dx = 0; dx < spec.block_w; ++dx, ++t) {
                    const std::uint32_t x = bx * spec.block_w + dx;
                    const std::uint32_t y = by * spec.block_h + dy;
                    if (x >= width || y >= height) {
                        continue;
                    }
                    const double v =
                        std::clamp(round_half_away(block[t]), 0.0, max_value);
                    image.samples[static_cast<std::size_t>(y) * width + x] =
                        static_cast<std::uint32_t>(v);
                }
            }
        }
    }
    return image;
}

} // namespace seequant
