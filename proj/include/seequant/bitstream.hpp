#pragma once

#include <cstdint>
#include <vector>

#include "seequant/errors.hpp"

namespace seequant {

/// Packs fixed-width fields most-significant-bit first.
class BitWriter {
public:
    void write(std::uint32_t value, unsigned width) {
        for (unsigned b = width; b-- > 0;) {
            const std::uint32_t bit = (value >> b) & 1u;
            if (fill_ == 0) {
                bytes_.push_back(0);
            }
            bytes_.back() = static_cast<std::uint8_t>(bytes_.back() | (bit << (7 - fill_)));
            fill_ = (fill_ + 1) % 8;
        }
    }

    /// Pads to a byte boundary with zero bits.
    void align() { fill_ = 0; }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
    unsigned fill_ = 0;
};

/// Reads MSB-first fixed-width fields from a byte range, reporting absolute
/// byte offsets in errors.
class BitReader {
public:
    BitReader(const std::vector<std::uint8_t>& bytes, std::size_t begin, std::size_t end,
              std::size_t base_offset)
        : bytes_(bytes), pos_(begin), end_(end), base_(base_offset) {}

    std::uint32_t read(unsigned width) {
        std::uint32_t value = 0;
        for (unsigned b = 0; b < width; ++b) {
            if (pos_ >= end_) {
                throw ParseError("bitstream truncated", base_ + pos_);
            }
            const std::uint32_t bit = (bytes_[pos_] >> (7 - fill_)) & 1u;
            value = (value << 1) | bit;
            fill_ = (fill_ + 1) % 8;
            if (fill_ == 0) {
                ++pos_;
            }
        }
        return value;
    }

    /// Consumes padding up to the next byte boundary, requiring zero bits.
    void align_checked() {
        while (fill_ != 0) {
            if (read(1) != 0) {
                throw ParseError("nonzero padding bit", base_ + pos_);
            }
        }
    }

    bool at_end() const { return pos_ == end_ && fill_ == 0; }
    std::size_t byte_pos() const { return pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_;
    std::size_t end_;
    std::size_t base_;
    unsigned fill_ = 0;
};

} // namespace seequant
