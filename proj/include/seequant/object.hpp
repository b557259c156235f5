#pragma once

#include <cstdint>
#include <vector>

#include "seequant/see.hpp"

namespace seequant {

/// A finite ordered point set in R^(d+1). Duplicate points are legal and can
/// be queried.
class PointObject {
public:
    PointObject() = default;
    explicit PointObject(std::vector<std::vector<double>> points);

    const std::vector<double>& point(std::size_t i) const { return points_[i]; }
    const std::vector<std::vector<double>>& points() const { return points_; }

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return points_.empty() ? 0 : points_.front().size(); }
    bool has_duplicates() const;

    bool operator==(const PointObject&) const = default;

private:
    std::vector<std::vector<double>> points_;
};

/// Indicator embedding of a d-dimensional discrete signal: one point per
/// site, coordinates = site index tuple plus the sample value. Sites are
/// enumerated with the first dimension varying fastest.
PointObject embed_signal(const std::vector<double>& values,
                         const std::vector<std::size_t>& dims, double value_levels);

/// Coordinate-wise mean.
std::vector<double> object_center(const PointObject& object);

/// Pairwise Euclidean distances, N x N.
std::vector<std::vector<double>> auto_distance_matrix(const PointObject& object);

/// Lexicographic rank -> permutation (factorial number system); rank 0 is
/// the identity.
std::vector<std::size_t> permutation_from_index(std::uint64_t gamma, std::size_t n);

/// W with w(i, perm(i)) = 1; orthogonal by construction.
std::vector<std::vector<double>> permutation_matrix(std::uint64_t gamma, std::size_t n);

struct MatchParams {
    double alpha = 1.0;       // projection (scale) parameter, > 0
    std::uint64_t gamma = 0;  // lexicographic permutation index
};

/// Sum over ordered point pairs of |dist1(x,y) - alpha * dist2(match(x), match(y))|.
double chi_distance(const PointObject& o1, const PointObject& o2,
                    const MatchParams& params);

/// The same value computed through explicit matrix algebra with the
/// permutation matrix conjugating the second auto-distance matrix.
double chi_distance_matrix_form(const PointObject& o1, const PointObject& o2,
                                const MatchParams& params);

struct MatchResult {
    MatchParams params;
    double chi = 0.0;
};

/// Exhaustive search over all permutations (N <= 8); per permutation the
/// optimal alpha of the L1 objective is the weighted median of the distance
/// ratios. Ties break to the lowest gamma, then the lowest alpha.
MatchResult best_match(const PointObject& o1, const PointObject& o2);

/// Per-point scalar residuals ||(y_i - C1) - alpha * (match(y_i) - C2)||,
/// returned as a 1-D object in o1's point order.
PointObject object_diff(const PointObject& o1, const PointObject& o2,
                        const MatchParams& params);

/// Produces an object with exactly target_size points: farthest-point
/// subsampling (seeded at the point nearest the center) when shrinking,
/// appended center copies when growing.
PointObject generalize(const PointObject& object, std::size_t target_size);

/// The SEE recursion with vectors replaced by objects: candidate codebooks
/// are subsets of the input objects, classification minimizes chi after
/// generalization, residuals are object_diff results with near-zero scalars
/// dropped. 0 for fewer than two objects.
double object_see(const std::vector<PointObject>& objects, const SeeConfig& config);

struct PartitionResult {
    /// cell_of[i] = cell index of point i, in restricted-growth form.
    std::vector<std::size_t> cell_of;
    double bits = 0.0;
};

/// Exhaustive minimization of object_see over all set partitions of the
/// points (|O| <= 8), optionally restricted to cells of at most
/// max_cell_points points (0 = unrestricted). Ties break to fewer cells,
/// then the lexicographically smallest cell signature.
PartitionResult min_partition_see(const PointObject& object, std::size_t max_cell_points,
                                  const SeeConfig& config);

} // namespace seequant
