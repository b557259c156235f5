#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "seequant/image.hpp"
#include "seequant/see.hpp"

namespace seequant {

/// 2-D frequency-domain image, row-major, natural (uncentered) indexing.
struct SpectrumGrid {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::complex<double>> coefficients;

    std::complex<double> at(std::uint32_t w1, std::uint32_t w2) const {
        return coefficients[static_cast<std::size_t>(w2) * width + w1];
    }
};

enum class GateKind { identity, dft_roundtrip, dft_truncate };

/// A fixed-point compression operator f. identity and dft_roundtrip satisfy
/// x = f(x) (exactly / numerically); dft_truncate keeps only the masked
/// frequencies.
struct CompressionOperator {
    GateKind kind = GateKind::identity;
    /// dft_truncate only: one flag per (w1, w2) in natural indexing.
    std::vector<std::uint8_t> keep_mask;
    std::string name;
};

/// Uniform quantization step applied to Re and Im before SEE.
struct SpectrumQuantizer {
    double step = 1.0;
};

struct SpectrumProfileRow {
    std::uint32_t block_x = 0;
    std::uint32_t block_y = 0;
    unsigned band = 0; // radial distance from the centered DC, 0..7
    double re_bits = 0.0;
    double im_bits = 0.0;
    double total_bits = 0.0;
};

struct GateRow {
    std::string name;
    double residual = 0.0; // ||x - f(x)||_2
    double bits = 0.0;     // SEE-based estimate of the operator's retained data
    double ratio = 0.0;    // raw bits / estimate
};

/// Unitary 2-D DFT (1/sqrt(WH) both ways), so analysis followed by synthesis
/// is the identity.
SpectrumGrid dft2(const ImageGrid& image);

/// Inverse unitary DFT; the imaginary parts of a real image's round trip
/// vanish to rounding error.
std::vector<std::complex<double>> idft2(const SpectrumGrid& spectrum);

/// L2 residual ||x - f(x)|| of the operator realized through the spectrum.
/// For a truncation this equals the discarded coefficient energy (Parseval).
double gate_residual(const CompressionOperator& op, const ImageGrid& image);

/// (max|X| - min|X|) / 64 over all coefficients, or 1 when degenerate.
double default_spectrum_step(const SpectrumGrid& spectrum);

/// Centers the spectrum (DC at the grid center), tiles it into blocks,
/// quantizes Re and Im, and reports each block's greedy SEE bits tagged with
/// its radial frequency band. Rows are sorted by band.
std::vector<SpectrumProfileRow> spectrum_block_see(const ImageGrid& image,
                                                   const BlockSpec& spec,
                                                   const SpectrumQuantizer& quant,
                                                   const SeeConfig& config);

/// Same profile computed on an explicit (uncentered) spectrum.
std::vector<SpectrumProfileRow> spectrum_profile(const SpectrumGrid& spectrum,
                                                 const BlockSpec& spec,
                                                 const SpectrumQuantizer& quant,
                                                 const SeeConfig& config);

/// One row per operator: gate residual, SEE bit estimate of the retained
/// data, and the raw/estimate ratio. Rows sorted by bit estimate.
std::vector<GateRow> gate_entropy_table(const ImageGrid& image,
                                        const std::vector<CompressionOperator>& ops,
                                        const BlockSpec& spec,
                                        const SpectrumQuantizer& quant,
                                        const SeeConfig& config);

} // namespace seequant
