#include "seequant/vq.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "seequant/errors.hpp"
#include "seequant/parallel.hpp"
#include "seequant/rng.hpp"

namespace seequant {

VectorSet::VectorSet(std::size_t dim, unsigned value_bits)
    : dim_(dim), value_bits_(value_bits) {
    if (dim == 0) {
        throw InvalidInput("vector dimension must be positive");
    }
    if (value_bits == 0) {
        throw InvalidInput("value_bits must be positive");
    }
}

VectorSet VectorSet::from_rows(const std::vector<std::vector<double>>& rows,
                               unsigned value_bits) {
    if (rows.empty()) {
        throw InvalidInput("from_rows needs at least one row to fix the dimension");
    }
    VectorSet set(rows.front().size(), value_bits);
    for (const auto& r : rows) {
        set.push_back(r);
    }
    return set;
}

void VectorSet::push_back(std::span<const double> v) {
    if (v.size() != dim_) {
        throw InvalidInput("vector dimension mismatch");
    }
    data_.insert(data_.end(), v.begin(), v.end());
}

std::vector<std::size_t> VectorSet::distinct_indices() const {
    std::vector<std::size_t> out;
    const std::size_t m = size();
    for (std::size_t i = 0; i < m; ++i) {
        bool seen = false;
        for (std::size_t j : out) {
            if (std::memcmp((*this)[i].data(), (*this)[j].data(),
                            dim_ * sizeof(double)) == 0) {
                seen = true;
                break;
            }
        }
        if (!seen) {
            out.push_back(i);
        }
    }
    return out;
}

Codebook Codebook::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) {
        throw InvalidInput("a codebook needs at least one codevector");
    }
    Codebook cb(rows.front().size());
    for (const auto& r : rows) {
        cb.push_back(r);
    }
    return cb;
}

void Codebook::push_back(std::span<const double> v) {
    if (dim_ == 0) {
        dim_ = v.size();
    }
    if (v.size() != dim_ || dim_ == 0) {
        throw InvalidInput("codevector dimension mismatch");
    }
    data_.insert(data_.end(), v.begin(), v.end());
}

void Codebook::dedupe() {
    const std::size_t n = size();
    std::vector<double> kept;
    kept.reserve(data_.size());
    std::size_t kept_n = 0;
    for (std::size_t j = 0; j < n; ++j) {
        bool dup = false;
        for (std::size_t p = 0; p < kept_n; ++p) {
            if (std::memcmp((*this)[j].data(), kept.data() + p * dim_,
                            dim_ * sizeof(double)) == 0) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            kept.insert(kept.end(), (*this)[j].begin(), (*this)[j].end());
            ++kept_n;
        }
    }
    data_ = std::move(kept);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t h = 0; h < a.size(); ++h) {
        const double d = a[h] - b[h];
        acc += d * d;
    }
    return std::sqrt(acc);
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t h = 0; h < a.size(); ++h) {
        const double d = a[h] - b[h];
        acc += d * d;
    }
    return acc;
}

} // namespace

std::size_t classify(std::span<const double> v, const Codebook& codebook) {
    if (codebook.size() == 0) {
        throw InvalidInput("classify: empty codebook");
    }
    if (v.size() != codebook.dim()) {
        throw InvalidInput("classify: vector dimension mismatch");
    }
    std::size_t best = 0;
    double best_d = squared_distance(v, codebook[0]);
    for (std::size_t j = 1; j < codebook.size(); ++j) {
        const double d = squared_distance(v, codebook[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

Assignment classify_all(const VectorSet& set, const Codebook& codebook) {
    if (set.size() > 0 && set.dim() != codebook.dim()) {
        throw InvalidInput("classify_all: dimension mismatch");
    }
    Assignment assignment(set.size());
    parallel_for(set.size(), [&](std::size_t i) {
        assignment[i] = classify(set[i], codebook);
    });
    return assignment;
}

double distortion(const VectorSet& set, const Codebook& codebook,
                  const Assignment& assignment) {
    if (assignment.size() != set.size()) {
        throw InvalidInput("distortion: assignment size mismatch");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (assignment[i] >= codebook.size()) {
            throw InvalidInput("distortion: assignment index out of range");
        }
        d += euclidean_distance(set[i], codebook[assignment[i]]);
    }
    return d;
}

double compression_ratio(unsigned value_bits, std::size_t dim, std::size_t codebook_size,
                         std::size_t vector_count) {
    if (value_bits < 1 || dim < 1 || codebook_size < 1 || vector_count < 1) {
        throw InvalidInput("compression_ratio: all inputs must be >= 1");
    }
    const double pk = static_cast<double>(value_bits) * static_cast<double>(dim);
    const double denom = std::log2(static_cast<double>(codebook_size)) +
                         pk * static_cast<double>(codebook_size) /
                             static_cast<double>(vector_count);
    return pk / denom;
}

ClassDistribution empirical_distribution(const Assignment& assignment,
                                         std::size_t codebook_size,
                                         std::size_t vector_count) {
    if (assignment.size() != vector_count) {
        throw InvalidInput("empirical_distribution: assignment size mismatch");
    }
    ClassDistribution dist;
    dist.counts.assign(codebook_size, 0);
    for (std::size_t i : assignment) {
        if (i >= codebook_size) {
            throw InvalidInput("empirical_distribution: class index out of range");
        }
        ++dist.counts[i];
    }
    dist.probabilities.resize(codebook_size);
    for (std::size_t j = 0; j < codebook_size; ++j) {
        dist.probabilities[j] =
            vector_count == 0
                ? 0.0
                : static_cast<double>(dist.counts[j]) / static_cast<double>(vector_count);
    }
    return dist;
}

double coverage_radius(const VectorSet& set, const Codebook& codebook,
                       const Assignment& assignment) {
    if (assignment.size() != set.size()) {
        throw InvalidInput("coverage_radius: assignment size mismatch");
    }
    double radius = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        radius = std::max(radius, euclidean_distance(set[i], codebook[assignment[i]]));
    }
    return radius;
}

double shannon_entropy(std::span<const double> probabilities) {
    double h = 0.0;
    for (double p : probabilities) {
        if (p > 0.0) {
            h -= p * std::log2(p);
        }
    }
    return h;
}

double entropy_objective(const VectorSet& set, const Codebook& codebook,
                         const EntropyObjectiveParams& params) {
    if (set.size() == 0) {
        throw InvalidInput("entropy_objective: set must be non-empty");
    }
    if (params.radius_weight < 0.0 || params.entropy_weight < 0.0 ||
        (params.radius_weight == 0.0 && params.entropy_weight == 0.0)) {
        throw InvalidInput("entropy_objective: weights must be >= 0 and not both zero");
    }
    const Assignment assignment = classify_all(set, codebook);
    const double delta = coverage_radius(set, codebook, assignment);
    const ClassDistribution dist =
        empirical_distribution(assignment, codebook.size(), set.size());
    const double h = shannon_entropy(dist.probabilities);
    return params.radius_weight * delta + params.entropy_weight * h;
}

namespace {

Codebook initial_codebook(const VectorSet& set, std::size_t target_size,
                          std::uint64_t seed) {
    const std::vector<std::size_t> distinct = set.distinct_indices();
    std::vector<std::size_t> chosen;
    if (distinct.size() <= target_size) {
        chosen = distinct;
    } else {
        std::vector<std::size_t> pool = distinct;
        Rng rng(seed);
        rng.shuffle(pool);
        chosen.assign(pool.begin(), pool.begin() + static_cast<long>(target_size));
        std::sort(chosen.begin(), chosen.end());
    }
    Codebook cb(set.dim());
    for (std::size_t i : chosen) {
        cb.push_back(set[i]);
    }
    return cb;
}

// Recenter each class to its centroid; classes left empty are reseeded from
// the vector currently farthest from its codevector (one at a time, with a
// reclassification between reseeds).
Codebook recenter(const VectorSet& set, const Codebook& codebook,
                  Assignment& assignment) {
    const std::size_t n = codebook.size();
    const std::size_t k = set.dim();
    Codebook updated = codebook;
    for (;;) {
        std::vector<double> sums(n * k, 0.0);
        std::vector<std::size_t> counts(n, 0);
        for (std::size_t i = 0; i < set.size(); ++i) {
            const std::size_t j = assignment[i];
            ++counts[j];
            auto v = set[i];
            for (std::size_t h = 0; h < k; ++h) {
                sums[j * k + h] += v[h];
            }
        }
        std::size_t empty_class = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (counts[j] == 0) {
                empty_class = j;
                break;
            }
            auto row = updated.mutable_row(j);
            for (std::size_t h = 0; h < k; ++h) {
                row[h] = sums[j * k + h] / static_cast<double>(counts[j]);
            }
        }
        if (empty_class == n) {
            return updated;
        }
        // reseed from the farthest vector, ties to the lowest index
        std::size_t farthest = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double d = euclidean_distance(set[i], updated[assignment[i]]);
            if (d > far_d) {
                far_d = d;
                farthest = i;
            }
        }
        auto row = updated.mutable_row(empty_class);
        auto v = set[farthest];
        std::copy(v.begin(), v.end(), row.begin());
        assignment = classify_all(set, updated);
    }
}

} // namespace

TrainResult train_codebook(const VectorSet& set, std::size_t target_size,
                           std::uint64_t seed) {
    const std::size_t m = set.size();
    if (target_size < 1 || target_size > m) {
        throw InvalidInput("train_codebook: need 1 <= N <= M");
    }

    TrainResult result;
    result.codebook = initial_codebook(set, target_size, seed);
    result.assignment = classify_all(set, result.codebook);
    result.distortion = distortion(set, result.codebook, result.assignment);
    result.distortion_history.push_back(result.distortion);

    constexpr int kMaxIterations = 100;
    constexpr double kRelTolerance = 1e-9;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        Assignment assignment = result.assignment;
        Codebook candidate = recenter(set, result.codebook, assignment);
        assignment = classify_all(set, candidate);
        const double d = distortion(set, candidate, assignment);
        if (d > result.distortion) {
            break; // monotone guard: unsquared D may rise under centroid moves
        }
        const double improvement = result.distortion - d;
        result.codebook = std::move(candidate);
        result.assignment = std::move(assignment);
        result.distortion = d;
        result.distortion_history.push_back(d);
        if (improvement < kRelTolerance * std::max(result.distortion, 1.0)) {
            break;
        }
    }

    const std::size_t before = result.codebook.size();
    result.codebook.dedupe();
    if (result.codebook.size() != before) {
        result.assignment = classify_all(set, result.codebook);
        result.distortion = distortion(set, result.codebook, result.assignment);
    }
    return result;
}

} // namespace seequant
