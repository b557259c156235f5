#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "seequant/bitstream.hpp"
#include "seequant/container.hpp"
#include "seequant/errors.hpp"
#include "seequant/image.hpp"
#include "seequant/rng.hpp"

using namespace seequant;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return {s.begin(), s.end()};
}

ImageGrid random_image(Rng& rng, std::uint32_t w, std::uint32_t h, unsigned bits = 8) {
    ImageGrid image;
    image.width = w;
    image.height = h;
    image.bits_per_sample = bits;
    image.samples.resize(static_cast<std::size_t>(w) * h);
    for (auto& s : image.samples) {
        s = static_cast<std::uint32_t>(rng.next_below(1u << bits));
    }
    return image;
}

ImageGrid constant_image(std::uint32_t w, std::uint32_t h, std::uint32_t value) {
    ImageGrid image;
    image.width = w;
    image.height = h;
    image.bits_per_sample = 8;
    image.samples.assign(static_cast<std::size_t>(w) * h, value);
    return image;
}

double psnr_of(const ImageGrid& a, const ImageGrid& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double d = static_cast<double>(a.samples[i]) - static_cast<double>(b.samples[i]);
        sq += d * d;
    }
    if (sq == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = sq / static_cast<double>(a.samples.size());
    const double maxv = static_cast<double>(a.max_value());
    return 10.0 * std::log10(maxv * maxv / mse);
}

} // namespace

TEST_CASE("bit packing is MSB-first") {
    BitWriter writer;
    writer.write(0b101, 3);
    writer.write(0b01, 2);
    writer.write(0b110, 3);
    // 101 01 110 -> 0xAE
    CHECK(writer.bytes() == std::vector<std::uint8_t>{0xAE});
    writer.write(0x3, 2);
    writer.align();
    const std::vector<std::uint8_t> packed = writer.take();
    CHECK(packed == std::vector<std::uint8_t>{0xAE, 0xC0});

    BitReader reader(packed, 0, packed.size(), 0);
    CHECK(reader.read(3) == 0b101);
    CHECK(reader.read(2) == 0b01);
    CHECK(reader.read(3) == 0b110);
    CHECK(reader.read(2) == 0x3);
    reader.align_checked();
    CHECK(reader.at_end());
}

TEST_CASE("bit reader rejects nonzero padding and truncation") {
    const std::vector<std::uint8_t> bad{0x01};
    BitReader reader(bad, 0, bad.size(), 0);
    CHECK(reader.read(4) == 0);
    CHECK_THROWS_AS(reader.align_checked(), ParseError);

    const std::vector<std::uint8_t> tiny{0xFF};
    BitReader short_reader(tiny, 0, tiny.size(), 0);
    short_reader.read(8);
    CHECK_THROWS_AS(short_reader.read(1), ParseError);
}

TEST_CASE("PGM parsing reads a known 2x2 image") {
    const auto bytes = bytes_of(std::string("P5\n2 2\n255\n") +
                                std::string("\x00\x80\xFF\x07", 4));
    const ImageGrid image = load_pgm(bytes);
    CHECK(image.width == 2);
    CHECK(image.height == 2);
    CHECK(image.bits_per_sample == 8);
    CHECK(image.samples == std::vector<std::uint32_t>{0, 128, 255, 7});
}

TEST_CASE("PGM parsing is restricted to the binary form") {
    CHECK_THROWS_AS(load_pgm(bytes_of("P2\n2 2\n255\n0 1 2 3")), ParseError);
}

TEST_CASE("PGM header comments do not change the parse") {
    const std::string payload("\x01\x02\x03\x04", 4);
    const ImageGrid plain = load_pgm(bytes_of("P5\n2 2\n255\n" + payload));
    const ImageGrid commented = load_pgm(
        bytes_of("P5\n# produced by a scanner\n2 2\n# maxval next\n255\n" + payload));
    CHECK(plain == commented);
}

TEST_CASE("PGM parse errors are structured") {
    CHECK_THROWS_AS(load_pgm(bytes_of("P5\n2 2\n0\n....")), ParseError);       // maxval 0
    CHECK_THROWS_AS(load_pgm(bytes_of("P5\n2 2\n255\n\x01\x02")), ParseError); // truncated
    CHECK_THROWS_AS(load_pgm(bytes_of(std::string("P5\n2 2\n255\n") +
                                      std::string(5, '\x00'))),
                    ParseError); // trailing byte
    CHECK_THROWS_AS(load_pgm(bytes_of("P5\n2 -2\n255\n")), ParseError);
}

TEST_CASE("16-bit PGM samples are big-endian") {
    const auto bytes = bytes_of(std::string("P5\n1 2\n65535\n") +
                                std::string("\x01\x00\xFF\xFE", 4));
    const ImageGrid image = load_pgm(bytes);
    CHECK(image.bits_per_sample == 16);
    CHECK(image.samples == std::vector<std::uint32_t>{256, 65534});
    CHECK(write_pgm(image) == bytes);
}

TEST_CASE("PGM write/load round-trips") {
    Rng rng(5);
    const ImageGrid image = random_image(rng, 7, 3);
    CHECK(load_pgm(write_pgm(image)) == image);
}

TEST_CASE("block extraction tiles row-major") {
    ImageGrid image;
    image.width = 4;
    image.height = 4;
    image.bits_per_sample = 8;
    image.samples = {0,  1,  2,  3,
                     10, 11, 12, 13,
                     20, 21, 22, 23,
                     30, 31, 32, 33};
    const VectorSet blocks = extract_blocks(image, BlockSpec{2, 2, 0});
    REQUIRE(blocks.size() == 4);
    REQUIRE(blocks.dim() == 4);
    const std::vector<double> first{0, 1, 10, 11};
    for (std::size_t h = 0; h < 4; ++h) {
        CHECK(blocks[0][h] == first[h]);
    }
}

TEST_CASE("block extraction pads the ragged edge") {
    ImageGrid image;
    image.width = 3;
    image.height = 3;
    image.bits_per_sample = 8;
    image.samples = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    const VectorSet blocks = extract_blocks(image, BlockSpec{2, 2, 0});
    REQUIRE(blocks.size() == 4);
    // bottom-right block holds only the corner sample
    const std::vector<double> corner{9, 0, 0, 0};
    for (std::size_t h = 0; h < 4; ++h) {
        CHECK(blocks[3][h] == corner[h]);
    }
}

TEST_CASE("extract/assemble round-trips arbitrary images") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t w = 1 + static_cast<std::uint32_t>(rng.next_below(17));
        const std::uint32_t h = 1 + static_cast<std::uint32_t>(rng.next_below(17));
        const ImageGrid image = random_image(rng, w, h);
        const BlockSpec spec{3, 2, 0};
        const VectorSet blocks = extract_blocks(image, spec);
        CHECK(assemble_blocks(blocks, w, h, 8, spec) == image);
    }
}

TEST_CASE("assembly clamps out-of-range samples") {
    VectorSet vectors(1, 8);
    const double high = 260.0;
    const double low = -3.0;
    vectors.push_back({&high, 1});
    vectors.push_back({&low, 1});
    const ImageGrid image = assemble_blocks(vectors, 2, 1, 8, BlockSpec{1, 1, 0});
    CHECK(image.samples == std::vector<std::uint32_t>{255, 0});
}

TEST_CASE("a constant image encodes as a single-level container") {
    const ImageGrid image = constant_image(8, 8, 77);
    const EncodeResult result = encode(image, BlockSpec{4, 4, 0}, SeeConfig{});
    CHECK(result.container.levels.size() == 1);
    REQUIRE(result.container.levels[0].codebook.size() == 1);
    for (std::uint32_t e : result.container.levels[0].entries) {
        CHECK(e == 1);
    }
    CHECK(decode(result.container) == image);
    CHECK(result.tree.total_bits == 1.0);
}

TEST_CASE("encode/decode round-trips bit-exactly at unbounded depth") {
    Rng rng(2024);
    for (int trial = 0; trial < 8; ++trial) {
        const std::uint32_t w = 4 + static_cast<std::uint32_t>(rng.next_below(29));
        const std::uint32_t h = 4 + static_cast<std::uint32_t>(rng.next_below(29));
        const ImageGrid image = random_image(rng, w, h);
        SeeConfig config;
        config.seed = static_cast<std::uint64_t>(trial);
        const EncodeResult result = encode(image, BlockSpec{4, 4, 0}, config);
        CHECK(decode(result.container) == image);
    }
}

TEST_CASE("16-bit images round-trip") {
    Rng rng(99);
    const ImageGrid image = random_image(rng, 9, 6, 16);
    const EncodeResult result = encode(image, BlockSpec{3, 3, 0}, SeeConfig{});
    CHECK(result.container.levels.front().sample_bits == 16);
    if (result.container.levels.size() > 1) {
        CHECK(result.container.levels[1].sample_bits == 17);
    }
    CHECK(decode(result.container) == image);
}

TEST_CASE("containers serialize deterministically and round-trip") {
    Rng rng(7);
    const ImageGrid image = random_image(rng, 13, 11);
    SeeConfig config;
    config.seed = 21;
    const EncodeResult a = encode(image, BlockSpec{4, 4, 0}, config);
    const EncodeResult b = encode(image, BlockSpec{4, 4, 0}, config);
    const auto bytes_a = serialize(a.container);
    const auto bytes_b = serialize(b.container);
    CHECK(bytes_a == bytes_b);

    const Container parsed = parse_container(bytes_a);
    CHECK(serialize(parsed) == bytes_a);
    CHECK(decode(parsed) == image);
}

TEST_CASE("decoding at depth 1 yields the first-level codevectors") {
    Rng rng(31);
    const ImageGrid image = random_image(rng, 8, 8);
    const EncodeResult result = encode(image, BlockSpec{2, 2, 0}, SeeConfig{});
    REQUIRE(result.container.levels.size() >= 2);
    const ImageGrid truncated = decode(result.container, 1);

    const ContainerLevel& level0 = result.container.levels[0];
    VectorSet vectors(4, 8);
    for (std::uint32_t e : level0.entries) {
        REQUIRE(e >= 1);
        std::vector<double> v(4);
        for (std::size_t h = 0; h < 4; ++h) {
            v[h] = static_cast<double>(level0.codebook[e - 1][h]);
        }
        vectors.push_back(v);
    }
    CHECK(assemble_blocks(vectors, 8, 8, 8, BlockSpec{2, 2, 0}) == truncated);
}

TEST_CASE("truncated encodes are legal lossy containers") {
    Rng rng(64);
    const ImageGrid image = random_image(rng, 16, 16);
    SeeConfig config;
    config.max_depth = 2;
    const EncodeResult result = encode(image, BlockSpec{4, 4, 0}, config);
    CHECK(result.container.levels.size() <= 2);
    const auto bytes = serialize(result.container);
    const Container parsed = parse_container(bytes);
    CHECK(decode(parsed) == decode(result.container));
}

TEST_CASE("PSNR is non-decreasing in decode depth") {
    Rng rng(512);
    for (int trial = 0; trial < 4; ++trial) {
        const ImageGrid image = random_image(rng, 20, 20);
        SeeConfig config;
        config.seed = static_cast<std::uint64_t>(trial + 100);
        const EncodeResult result = encode(image, BlockSpec{4, 4, 0}, config);
        double prev = -1.0;
        for (std::size_t d = 1; d <= result.container.levels.size(); ++d) {
            const double p = psnr_of(image, decode(result.container, d));
            CHECK(p >= prev - 1e-9);
            prev = p;
        }
        CHECK(std::isinf(prev));
    }
}

TEST_CASE("container parsing fails closed") {
    Rng rng(8);
    const ImageGrid image = random_image(rng, 8, 8);
    const EncodeResult result = encode(image, BlockSpec{4, 4, 0}, SeeConfig{});
    const std::vector<std::uint8_t> good = serialize(result.container);

    SUBCASE("corrupted magic") {
        std::vector<std::uint8_t> bad = good;
        bad[0] = 'X';
        CHECK_THROWS_AS(parse_container(bad), ParseError);
    }
    SUBCASE("unsupported version") {
        std::vector<std::uint8_t> bad = good;
        bad[4] = 9;
        CHECK_THROWS_AS(parse_container(bad), ParseError);
    }
    SUBCASE("truncated payload") {
        std::vector<std::uint8_t> bad = good;
        bad.pop_back();
        CHECK_THROWS_AS(parse_container(bad), ParseError);
    }
    SUBCASE("trailing byte") {
        std::vector<std::uint8_t> bad = good;
        bad.push_back(0);
        CHECK_THROWS_AS(parse_container(bad), ParseError);
    }
    SUBCASE("index out of range") {
        Container broken = result.container;
        REQUIRE(broken.levels[0].codebook.size() >= 2); // width >= 2 bits
        broken.levels[0].entries[0] =
            static_cast<std::uint32_t>(broken.levels[0].codebook.size() + 1);
        const auto bytes = serialize(broken);
        CHECK_THROWS_AS(parse_container(bytes), ParseError);
    }
}

TEST_CASE("report on a lossless container") {
    Rng rng(40);
    const ImageGrid image = random_image(rng, 12, 12);
    const EncodeResult result = encode(image, BlockSpec{4, 4, 0}, SeeConfig{});
    const CompressionReport rep = report(image, result.container);
    CHECK(rep.distortion == 0.0);
    CHECK(rep.coverage_delta == 0.0);
    CHECK(std::isinf(rep.psnr));
    CHECK(rep.see_bits == doctest::Approx(result.tree.total_bits).epsilon(1e-9));
    CHECK(rep.actual_ratio > 0.0);
}

TEST_CASE("report reproduces the flat-VQ ratio from the first level") {
    // synthetic container: 256x256 image, 4x4 blocks, first level N = 256
    Container container;
    container.width = 256;
    container.height = 256;
    container.value_bits = 8;
    container.block_w = 4;
    container.block_h = 4;
    ContainerLevel level;
    level.sample_bits = 8;
    Rng rng(1);
    for (int j = 0; j < 256; ++j) {
        std::vector<std::int64_t> code(16);
        for (auto& c : code) {
            c = static_cast<std::int64_t>(rng.next_below(256));
        }
        level.codebook.push_back(std::move(code));
    }
    for (int b = 0; b < 4096; ++b) {
        level.entries.push_back(1 + static_cast<std::uint32_t>(rng.next_below(256)));
    }
    container.levels.push_back(std::move(level));

    ImageGrid original;
    original.width = 256;
    original.height = 256;
    original.bits_per_sample = 8;
    original.samples.assign(256 * 256, 128);

    const CompressionReport rep = report(original, container);
    CHECK(rep.eq3_ratio == 8.0);

    // independent byte count: 29 header + 9 level header bytes, 256*16
    // codebook bytes, 4096 nine-bit indices padded to a byte boundary
    const std::size_t expected_bytes = 29 + 9 + 256 * 16 + (4096 * 9 + 7) / 8;
    CHECK(serialize(container).size() == expected_bytes);
    CHECK(rep.actual_ratio ==
          doctest::Approx((256.0 * 256.0 * 8.0) /
                          (static_cast<double>(expected_bytes) * 8.0))
              .epsilon(1e-12));
}

TEST_CASE("padding is excluded from distortion but coded losslessly") {
    Rng rng(77);
    const ImageGrid image = random_image(rng, 5, 7);
    const EncodeResult result = encode(image, BlockSpec{4, 4, 9}, SeeConfig{});
    CHECK(decode(result.container) == image);
    const CompressionReport rep = report(image, result.container);
    CHECK(rep.distortion == 0.0);
}
