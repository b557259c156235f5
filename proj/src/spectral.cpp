#include "seequant/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "seequant/errors.hpp"
#include "seequant/parallel.hpp"

namespace seequant {

namespace {

std::vector<std::complex<double>> twiddles(std::uint32_t n, double sign) {
    std::vector<std::complex<double>> w(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(i) /
                             static_cast<double>(n);
        w[i] = {std::cos(angle), std::sin(angle)};
    }
    return w;
}

// Separable O(N * W * H) transform; sign -1 for analysis, +1 for synthesis.
std::vector<std::complex<double>> transform2d(const std::vector<std::complex<double>>& in,
                                              std::uint32_t width, std::uint32_t height,
                                              double sign) {
    const auto wx = twiddles(width, sign);
    const auto wy = twiddles(height, sign);
    std::vector<std::complex<double>> rows(in.size());
    parallel_for(height, [&](std::size_t y) {
        for (std::uint32_t w1 = 0; w1 < width; ++w1) {
            std::complex<double> acc{0.0, 0.0};
            for (std::uint32_t x = 0; x < width; ++x) {
                acc += in[y * width + x] * wx[(static_cast<std::uint64_t>(w1) * x) % width];
            }
            rows[y * width + w1] = acc;
        }
    });
    std::vector<std::complex<double>> out(in.size());
    const double scale =
        1.0 / std::sqrt(static_cast<double>(width) * static_cast<double>(height));
    parallel_for(width, [&](std::size_t w1) {
        for (std::uint32_t w2 = 0; w2 < height; ++w2) {
            std::complex<double> acc{0.0, 0.0};
            for (std::uint32_t y = 0; y < height; ++y) {
                acc += rows[static_cast<std::size_t>(y) * width + w1] *
                       wy[(static_cast<std::uint64_t>(w2) * y) % height];
            }
            out[static_cast<std::size_t>(w2) * width + w1] = acc * scale;
        }
    });
    return out;
}

} // namespace

SpectrumGrid dft2(const ImageGrid& image) {
    std::vector<std::complex<double>> in(image.samples.size());
    for (std::size_t i = 0; i < image.samples.size(); ++i) {
        in[i] = {static_cast<double>(image.samples[i]), 0.0};
    }
    SpectrumGrid spectrum;
    spectrum.width = image.width;
    spectrum.height = image.height;
    spectrum.coefficients = transform2d(in, image.width, image.height, -1.0);
    return spectrum;
}

std::vector<std::complex<double>> idft2(const SpectrumGrid& spectrum) {
    return transform2d(spectrum.coefficients, spectrum.width, spectrum.height, 1.0);
}

double gate_residual(const CompressionOperator& op, const ImageGrid& image) {
    if (op.kind == GateKind::identity) {
        return 0.0;
    }
    SpectrumGrid spectrum = dft2(image);
    if (op.kind == GateKind::dft_truncate) {
        if (op.keep_mask.size() != spectrum.coefficients.size()) {
            throw InvalidInput("gate_residual: keep_mask size mismatch");
        }
        for (std::size_t i = 0; i < spectrum.coefficients.size(); ++i) {
            if (!op.keep_mask[i]) {
                spectrum.coefficients[i] = {0.0, 0.0};
            }
        }
    }
    const std::vector<std::complex<double>> rec = idft2(spectrum);
    double acc = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const std::complex<double> d =
            std::complex<double>(static_cast<double>(image.samples[i]), 0.0) - rec[i];
        acc += std::norm(d);
    }
    return std::sqrt(acc);
}

double default_spectrum_step(const SpectrumGrid& spectrum) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& c : spectrum.coefficients) {
        const double mag = std::abs(c);
        lo = std::min(lo, mag);
        hi = std::max(hi, mag);
    }
    const double step = (hi - lo) / 64.0;
    return step > 0.0 ? step : 1.0;
}

std::vector<SpectrumProfileRow> spectrum_profile(const SpectrumGrid& spectrum,
                                                 const BlockSpec& spec,
                                                 const SpectrumQuantizer& quant,
                                                 const SeeConfig& config) {
    if (quant.step <= 0.0) {
        throw InvalidInput("spectrum_profile: quantization step must be positive");
    }
    const std::uint32_t width = spectrum.width;
    const std::uint32_t height = spectrum.height;
    const std::uint32_t cx = width / 2;
    const std::uint32_t cy = height / 2;

    // center the spectrum so low frequencies sit in the middle blocks
    std::vector<std::complex<double>> centered(spectrum.coefficients.size());
    for (std::uint32_t v = 0; v < height; ++v) {
        for (std::uint32_t u = 0; u < width; ++u) {
            const std::uint32_t w1 = (u + width - cx) % width;
            const std::uint32_t w2 = (v + height - cy) % height;
            centered[static_cast<std::size_t>(v) * width + u] = spectrum.at(w1, w2);
        }
    }

    const std::uint32_t bx_count = (width + spec.block_w - 1) / spec.block_w;
    const std::uint32_t by_count = (height + spec.block_h - 1) / spec.block_h;
    std::vector<SpectrumProfileRow> rows;
    double max_dist = 0.0;
    std::vector<double> dists;
    for (std::uint32_t by = 0; by < by_count; ++by) {
        for (std::uint32_t bx = 0; bx < bx_count; ++bx) {
            const double center_x = (static_cast<double>(bx) + 0.5) * spec.block_w - 0.5;
            const double center_y = (static_cast<double>(by) + 0.5) * spec.block_h - 0.5;
            const double d = std::hypot(center_x - static_cast<double>(cx),
                                        center_y - static_cast<double>(cy));
            dists.push_back(d);
            max_dist = std::max(max_dist, d);
        }
    }

    SeeConfig block_config = config;
    block_config.strategy = SeeStrategy::greedy;
    block_config.zero_tolerance = 0.0; // quantized bins are integers

    std::size_t block_index = 0;
    for (std::uint32_t by = 0; by < by_count; ++by) {
        for (std::uint32_t bx = 0; bx < bx_count; ++bx, ++block_index) {
            VectorSet re_set(1, 32);
            VectorSet im_set(1, 32);
            for (std::uint32_t dy = 0; dy < spec.block_h; ++dy) {
                for (std::uint32_t dx = 0; dx < spec.block_w; ++dx) {
                    const std::uint32_t u = bx * spec.block_w + dx;
                    const std::uint32_t v = by * spec.block_h + dy;
                    std::complex<double> c{0.0, 0.0};
                    if (u < width && v < height) {
                        c = centered[static_cast<std::size_t>(v) * width + u];
                    }
                    const double re_bin = round_half_away(c.real() / quant.step);
                    const double im_bin = round_half_away(c.imag() / quant.step);
                    re_set.push_back({&re_bin, 1});
                    im_set.push_back({&im_bin, 1});
                }
            }
            SpectrumProfileRow row;
            row.block_x = bx;
            row.block_y = by;
            row.band = max_dist > 0.0
                           ? static_cast<unsigned>(std::min(
                                 7.0, std::floor(8.0 * dists[block_index] / max_dist)))
                           : 0;
            row.re_bits = see_estimate(re_set, block_config).first;
            row.im_bits = see_estimate(im_set, block_config).first;
            row.total_bits = row.re_bits + row.im_bits;
            rows.push_back(row);
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SpectrumProfileRow& a, const SpectrumProfileRow& b) {
                         return a.band < b.band;
                     });
    return rows;
}

std::vector<SpectrumProfileRow> spectrum_block_see(const ImageGrid& image,
                                                   const BlockSpec& spec,
                                                   const SpectrumQuantizer& quant,
                                                   const SeeConfig& config) {
    return spectrum_profile(dft2(image), spec, quant, config);
}

std::vector<GateRow> gate_entropy_table(const ImageGrid& image,
                                        const std::vector<CompressionOperator>& ops,
                                        const BlockSpec& spec,
                                        const SpectrumQuantizer& quant,
                                        const SeeConfig& config) {
    const double raw_bits = static_cast<double>(image.width) * image.height *
                            image.bits_per_sample;
    std::vector<GateRow> rows;
    for (const CompressionOperator& op : ops) {
        GateRow row;
        row.name = op.name;
        row.residual = gate_residual(op, image);
        if (op.kind == GateKind::identity) {
            row.bits = raw_bits;
        } else {
            SpectrumGrid spectrum = dft2(image);
            if (op.kind == GateKind::dft_truncate) {
                if (op.keep_mask.size() != spectrum.coefficients.size()) {
                    throw InvalidInput("gate_entropy_table: keep_mask size mismatch");
                }
                for (std::size_t i = 0; i < spectrum.coefficients.size(); ++i) {
                    if (!op.keep_mask[i]) {
                        spectrum.coefficients[i] = {0.0, 0.0};
                    }
                }
            }
            for (const SpectrumProfileRow& p :
                 spectrum_profile(spectrum, spec, quant, config)) {
                row.bits += p.total_bits;
            }
        }
        row.ratio = row.bits > 0.0 ? raw_bits / row.bits
                                   : std::numeric_limits<double>::infinity();
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const GateRow& a, const GateRow& b) { return a.bits < b.bits; });
    return rows;
}

} // namespace seequant
