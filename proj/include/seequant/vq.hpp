#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace seequant {

/// A group of M k-dimensional sample vectors plus the bit depth P of the
/// scalars they were read from. Storage is flat row-major.
class VectorSet {
public:
    VectorSet() = default;
    VectorSet(std::size_t dim, unsigned value_bits);

    static VectorSet from_rows(const std::vector<std::vector<double>>& rows,
                               unsigned value_bits);

    void push_back(std::span<const double> v);

    std::span<const double> operator[](std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

    std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    unsigned value_bits() const { return value_bits_; }
    const std::vector<double>& flat() const { return data_; }

    /// Indices (in order of first appearance) of the distinct vector values.
    std::vector<std::size_t> distinct_indices() const;

private:
    std::size_t dim_ = 0;
    unsigned value_bits_ = 8;
    std::vector<double> data_;
};

/// The N codevectors. Training merges exact duplicates, so entries are
/// pairwise distinct.
class Codebook {
public:
    Codebook() = default;
    explicit Codebook(std::size_t dim) : dim_(dim) {}

    static Codebook from_rows(const std::vector<std::vector<double>>& rows);

    void push_back(std::span<const double> v);

    std::span<const double> operator[](std::size_t j) const {
        return {data_.data() + j * dim_, dim_};
    }
    std::span<double> mutable_row(std::size_t j) {
        return {data_.data() + j * dim_, dim_};
    }

    std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const { return dim_; }

    /// Removes exact duplicates, keeping first occurrences.
    void dedupe();

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// class_of[i] = codevector index of vector i.
using Assignment = std::vector<std::size_t>;

struct ClassDistribution {
    std::vector<double> probabilities; // counts[j] / M
    std::vector<std::size_t> counts;
};

struct EntropyObjectiveParams {
    double radius_weight = 1.0;  // a
    double entropy_weight = 1.0; // b
};

struct TrainResult {
    Codebook codebook;
    Assignment assignment;
    double distortion = 0.0;
    std::vector<double> distortion_history; // one entry per accepted iteration
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Nearest-codevector index under Euclidean distance; ties go to the lowest
/// index so encode/decode stay bit-reproducible.
std::size_t classify(std::span<const double> v, const Codebook& codebook);

Assignment classify_all(const VectorSet& set, const Codebook& codebook);

/// Total distortion D = sum of (unsquared) Euclidean residual norms,
/// accumulated in index order.
double distortion(const VectorSet& set, const Codebook& codebook,
                  const Assignment& assignment);

/// T = P*k / (log2(N) + P*k*N/M).
double compression_ratio(unsigned value_bits, std::size_t dim, std::size_t codebook_size,
                         std::size_t vector_count);

ClassDistribution empirical_distribution(const Assignment& assignment,
                                         std::size_t codebook_size,
                                         std::size_t vector_count);

/// delta = max residual norm (0 for an empty set).
double coverage_radius(const VectorSet& set, const Codebook& codebook,
                       const Assignment& assignment);

/// Shannon entropy in bits; zero-probability terms contribute 0.
double shannon_entropy(std::span<const double> probabilities);

/// a*delta + b*H over the set's empirical class distribution.
double entropy_objective(const VectorSet& set, const Codebook& codebook,
                         const EntropyObjectiveParams& params);

/// LBG-style alternation: classify, recenter to class centroids, reseed empty
/// classes from the farthest vector. Stops when the relative distortion
/// improvement drops below 1e-9 or after 100 iterations. If a recenter step
/// would increase D, the previous codebook is kept (monotone guard). If the
/// set has fewer distinct values than the requested size, the codebook
/// shrinks to the distinct values.
TrainResult train_codebook(const VectorSet& set, std::size_t target_size,
                           std::uint64_t seed);

} // namespace seequant
