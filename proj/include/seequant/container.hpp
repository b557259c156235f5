#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seequant/image.hpp"
#include "seequant/see.hpp"

namespace seequant {

/// One stage of the multistage residual code. Level 0 stores unsigned P-bit
/// codevector samples; residual levels store signed (P+1)-bit two's-complement
/// samples. entries holds one index per still-active block, MSB-first packed
/// at width ceil(log2(N+1)); index 0 is the stop symbol, data indices are
/// 1-based.
struct ContainerLevel {
    unsigned sample_bits = 8;
    std::vector<std::vector<std::int64_t>> codebook;
    std::vector<std::uint32_t> entries;
};

/// Parsed form of the SEEQ byte format. serialize/parse round-trip
/// bit-exactly; parse validates structure and refuses trailing bytes.
struct Container {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    unsigned value_bits = 8; // P
    std::uint32_t block_w = 4;
    std::uint32_t block_h = 4;
    std::vector<ContainerLevel> levels;

    std::size_t block_count() const {
        const std::uint64_t bx = (width + block_w - 1) / block_w;
        const std::uint64_t by = (height + block_h - 1) / block_h;
        return static_cast<std::size_t>(bx * by);
    }
};

struct CompressionReport {
    double eq3_ratio = 0.0;      // flat-VQ ratio from the first level's fields
    double actual_ratio = 0.0;   // raw bits / container bits
    double distortion = 0.0;     // sum of per-block residual norms, padding excluded
    double see_bits = 0.0;       // tree value recomputed from the container
    double coverage_delta = 0.0; // max per-block residual norm
    double psnr = 0.0;           // dB; +infinity when lossless
};

struct EncodeResult {
    Container container;
    SeeTree tree;
};

/// Builds the greedy residual tree over the image blocks (integer
/// codevectors) and lays it out level by level. With config.max_depth == 0
/// and zero_tolerance 0 the container determines the image exactly.
EncodeResult encode(const ImageGrid& image, const BlockSpec& spec,
                    const SeeConfig& config);

/// Reconstructs the image: each block sums its selected codevectors across
/// levels until its stop symbol (or the container ends). depth_limit
/// truncates to the first depth_limit levels; 0 means all.
ImageGrid decode(const Container& container, std::size_t depth_limit = 0);

std::vector<std::uint8_t> serialize(const Container& container);
Container parse_container(const std::vector<std::uint8_t>& bytes);

Container load_container_file(const std::string& path);
void write_container_file(const std::string& path, const Container& container);

/// The tree value implied by the container's index streams (equals the
/// encoding tree's total_bits).
double container_see_bits(const Container& container);

CompressionReport report(const ImageGrid& original, const Container& container);

} // namespace seequant
