#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "seequant/vq.hpp"

namespace seequant {

struct SeeNode;

/// One level of the recursive entropy tree. A tree over a set with fewer
/// than two elements has no nodes and zero bits.
struct SeeTree {
    std::vector<SeeNode> nodes;
    double total_bits = 0.0;
    std::size_t depth = 0;
};

/// Per-class entry: the codevector, its empirical probability at this level,
/// the residual set it spawns, and its additive information contribution
///   info_bits = p * (log2(1/p) + 1 + residual_fraction * children.total_bits).
struct SeeNode {
    std::vector<double> codevector;
    double probability = 0.0;
    std::size_t count = 0;
    std::size_t parent_count = 0;
    std::size_t residual_count = 0;
    double residual_fraction = 0.0;
    SeeTree children;
    double info_bits = 0.0;
};

/// Recursive event hierarchy: each event may spawn a child group.
struct EventGroup {
    std::vector<double> probabilities;
    std::optional<std::vector<EventGroup>> children;
};

enum class SeeStrategy { exhaustive, greedy };

struct SeeConfig {
    SeeStrategy strategy = SeeStrategy::greedy;
    /// Tree truncation depth; 0 = unbounded.
    std::size_t max_depth = 0;
    /// Greedy only: fixed codebook size per level instead of the N scan.
    std::vector<std::size_t> per_level_codebook_sizes;
    /// Residuals with norm <= zero_tolerance count as exact matches.
    /// 0 suits integer-valued data; ~1e-9 suits real-valued data.
    double zero_tolerance = 0.0;
    std::uint64_t seed = 0;
    /// Exhaustive enumeration refuses sets larger than this.
    std::size_t exhaustive_cap = 8;
    /// Upper end of the greedy per-level N scan (clamped to the distinct count).
    std::size_t greedy_max_codebook = 16;
    /// Greedy recursion refuses beyond this depth.
    std::size_t depth_cap = 16;
};

/// Residuals v_i - v'_j of class j, input order preserved, exact matches
/// (norm <= tol) dropped.
VectorSet residual_set(const VectorSet& set, const Codebook& codebook,
                       const Assignment& assignment, std::size_t class_index,
                       double tol);

/// The Submerging Entropy Estimate of the set plus the realizing tree.
/// Exhaustive strategy minimizes over all codebooks drawn from the set's
/// distinct values (refusing sets over exhaustive_cap); greedy delegates to
/// greedy_minimize.
std::pair<double, SeeTree> see_estimate(const VectorSet& set, const SeeConfig& config);

/// Total entropy of a recursive event hierarchy: leaf groups contribute
/// their Shannon entropy, internal groups sum p_i*(log2(1/p_i) + H(child_i)).
double auto_generative_entropy(const EventGroup& group);

struct PruneResult {
    SeeTree tree;
    double dropped_bits = 0.0;
};

/// Truncates the tree below max_depth. Retained node info_bits lose their
/// removed recursion terms; dropped_bits collects exactly what was removed.
PruneResult prune_tree(const SeeTree& tree, std::size_t max_depth);

/// Concrete storage estimate: per level, M_level index entries of
/// ceil(log2(N_level+1)) bits (index 0 is reserved as the stop symbol)
/// plus P*k*N_level codebook bits.
std::uint64_t tree_storage_bits(const SeeTree& tree, unsigned value_bits,
                                std::size_t dim, std::size_t vector_count);

/// Greedy tree construction: per level, scans candidate codebook sizes,
/// keeps the one minimizing the optimistic level bound (recursion term
/// forced to zero), then recurses into each class's residual set.
SeeTree greedy_minimize(const VectorSet& set, const SeeConfig& config);

/// One greedy level: the chosen codebook and classification, or nullopt when
/// no candidate makes progress (no element sheds and distortion does not
/// improve), which terminates the branch. With integer_codevectors the
/// trained centroids are rounded half-away-from-zero before classification,
/// as required by the codec's fixed-width sample storage. Classes left empty
/// are removed from the returned codebook.
struct LevelPlan {
    Codebook codebook;
    Assignment assignment;
};
std::optional<LevelPlan> plan_greedy_level(const VectorSet& set, const SeeConfig& config,
                                           std::size_t depth, bool integer_codevectors);

double round_half_away(double v);

} // namespace seequant
