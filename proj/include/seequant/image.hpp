#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seequant/vq.hpp"

namespace seequant {

/// Row-major grayscale image; samples lie in [0, 2^bits_per_sample - 1].
struct ImageGrid {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    unsigned bits_per_sample = 8; // 8 or 16
    std::vector<std::uint32_t> samples;

    std::uint32_t max_value() const { return (1u << bits_per_sample) - 1u; }
    std::uint32_t at(std::uint32_t x, std::uint32_t y) const {
        return samples[static_cast<std::size_t>(y) * width + x];
    }

    bool operator==(const ImageGrid&) const = default;
};

struct BlockSpec {
    std::uint32_t block_w = 4;
    std::uint32_t block_h = 4;
    std::uint32_t pad_value = 0;
};

/// Parses a binary PGM (magic "P5", maxval <= 65535, '#' comments allowed in
/// the header). bits_per_sample is 8 when maxval <= 255, else 16 with
/// big-endian samples.
ImageGrid load_pgm(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> write_pgm(const ImageGrid& image);

ImageGrid load_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const ImageGrid& image);

/// Tiles the (padded) image left-to-right, top-to-bottom; each block
/// flattens row-major into one k = block_w*block_h vector.
VectorSet extract_blocks(const ImageGrid& image, const BlockSpec& spec);

/// Inverse of extract_blocks up to cropping the padding. Samples are rounded
/// half-away-from-zero and clamped to [0, 2^bits - 1].
ImageGrid assemble_blocks(const VectorSet& vectors, std::uint32_t width,
                          std::uint32_t height, unsigned bits_per_sample,
                          const BlockSpec& spec);

} // namespace seequant
