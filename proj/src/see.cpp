#include "seequant/see.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "seequant/errors.hpp"

namespace seequant {

double round_half_away(double v) {
    return std::round(v);
}

VectorSet residual_set(const VectorSet& set, const Codebook& codebook,
                       const Assignment& assignment, std::size_t class_index,
                       double tol) {
    if (assignment.size() != set.size()) {
        throw InvalidInput("residual_set: assignment size mismatch");
    }
    if (class_index >= codebook.size()) {
        throw InvalidInput("residual_set: class index out of range");
    }
    VectorSet out(set.dim(), set.value_bits());
    const auto code = codebook[class_index];
    std::vector<double> r(set.dim());
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (assignment[i] != class_index) {
            continue;
        }
        const auto v = set[i];
        double norm_sq = 0.0;
        for (std::size_t h = 0; h < set.dim(); ++h) {
            r[h] = v[h] - code[h];
            norm_sq += r[h] * r[h];
        }
        if (std::sqrt(norm_sq) > tol) {
            out.push_back(r);
        }
    }
    return out;
}

namespace {

// Assembles one tree level from a classified set, recursing per class via
// the supplied strategy.
template <typename Recurse>
SeeTree build_level(const VectorSet& set, const Codebook& codebook,
                    const Assignment& assignment, double tol, Recurse&& recurse) {
    const std::size_t m = set.size();
    std::vector<std::size_t> counts(codebook.size(), 0);
    for (std::size_t c : assignment) {
        ++counts[c];
    }
    SeeTree tree;
    std::size_t max_child_depth = 0;
    for (std::size_t j = 0; j < codebook.size(); ++j) {
        if (counts[j] == 0) {
            continue;
        }
        SeeNode node;
        node.codevector.assign(codebook[j].begin(), codebook[j].end());
        node.count = counts[j];
        node.parent_count = m;
        node.probability = static_cast<double>(counts[j]) / static_cast<double>(m);
        VectorSet residuals = residual_set(set, codebook, assignment, j, tol);
        node.residual_count = residuals.size();
        node.residual_fraction =
            static_cast<double>(node.residual_count) / static_cast<double>(node.count);
        node.children = recurse(residuals);
        node.info_bits = node.probability *
                         (std::log2(1.0 / node.probability) + 1.0 +
                          node.residual_fraction * node.children.total_bits);
        max_child_depth = std::max(max_child_depth, node.children.depth);
        tree.total_bits += node.info_bits;
        tree.nodes.push_back(std::move(node));
    }
    tree.depth = tree.nodes.empty() ? 0 : 1 + max_child_depth;
    return tree;
}

SeeTree see_exhaustive(const VectorSet& set, const SeeConfig& config, std::size_t depth) {
    const std::size_t m = set.size();
    if (m <= 1) {
        return {};
    }
    if (m > config.exhaustive_cap) {
        throw Refusal("exhaustive SEE refused: set size " + std::to_string(m) +
                      " exceeds cap " + std::to_string(config.exhaustive_cap));
    }
    if (config.max_depth != 0 && depth >= config.max_depth) {
        return {};
    }

    const std::vector<std::size_t> distinct = set.distinct_indices();
    const std::size_t d = distinct.size();

    // all non-empty subsets of the distinct values, smallest codebooks first
    std::vector<std::uint32_t> masks;
    masks.reserve((1u << d) - 1);
    for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
        masks.push_back(mask);
    }
    std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        const int pa = std::popcount(a);
        const int pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });

    SeeTree best;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask : masks) {
        Codebook codebook(set.dim());
        for (std::size_t bit = 0; bit < d; ++bit) {
            if (mask & (1u << bit)) {
                codebook.push_back(set[distinct[bit]]);
            }
        }
        const Assignment assignment = classify_all(set, codebook);
        SeeTree tree = build_level(set, codebook, assignment, config.zero_tolerance,
                                   [&](const VectorSet& residuals) {
                                       return see_exhaustive(residuals, config, depth + 1);
                                   });
        if (tree.total_bits < best_value) {
            best_value = tree.total_bits;
            best = std::move(tree);
        }
    }
    return best;
}

SeeTree greedy_recurse(const VectorSet& set, const SeeConfig& config, std::size_t depth) {
    const std::size_t m = set.size();
    if (m <= 1) {
        return {};
    }
    if (config.max_depth != 0 && depth >= config.max_depth) {
        return {};
    }
    if (depth >= config.depth_cap) {
        throw Refusal("greedy SEE refused: recursion depth cap " +
                      std::to_string(config.depth_cap) + " exceeded");
    }
    std::optional<LevelPlan> plan = plan_greedy_level(set, config, depth, false);
    if (!plan) {
        return {};
    }
    return build_level(set, plan->codebook, plan->assignment, config.zero_tolerance,
                       [&](const VectorSet& residuals) {
                           return greedy_recurse(residuals, config, depth + 1);
                       });
}

} // namespace

std::optional<LevelPlan> plan_greedy_level(const VectorSet& set, const SeeConfig& config,
                                           std::size_t depth, bool integer_codevectors) {
    const std::size_t m = set.size();
    if (m == 0) {
        return std::nullopt;
    }
    const std::size_t distinct_count = set.distinct_indices().size();

    std::vector<std::size_t> sizes;
    if (!config.per_level_codebook_sizes.empty() &&
        depth < config.per_level_codebook_sizes.size()) {
        sizes.push_back(
            std::clamp<std::size_t>(config.per_level_codebook_sizes[depth], 1, m));
    } else {
        const std::size_t n_max =
            std::max<std::size_t>(1, std::min(config.greedy_max_codebook, distinct_count));
        for (std::size_t n = 1; n <= n_max; ++n) {
            sizes.push_back(n);
        }
    }

    double before = 0.0;
    std::vector<double> zero(set.dim(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        before += euclidean_distance(set[i], zero);
    }

    std::optional<LevelPlan> best;
    double best_bound = std::numeric_limits<double>::infinity();
    for (std::size_t n : sizes) {
        TrainResult trained = train_codebook(set, n, config.seed);
        Codebook codebook = std::move(trained.codebook);
        Assignment assignment = std::move(trained.assignment);
        if (integer_codevectors) {
            for (std::size_t j = 0; j < codebook.size(); ++j) {
                auto row = codebook.mutable_row(j);
                for (double& x : row) {
                    x = round_half_away(x);
                }
            }
            codebook.dedupe();
            assignment = classify_all(set, codebook);
        }

        // drop codevectors that attract no vectors; assignments stay nearest
        std::vector<std::size_t> counts(codebook.size(), 0);
        for (std::size_t c : assignment) {
            ++counts[c];
        }
        if (std::find(counts.begin(), counts.end(), std::size_t{0}) != counts.end()) {
            Codebook filtered(set.dim());
            std::vector<std::size_t> remap(codebook.size(), 0);
            for (std::size_t j = 0; j < codebook.size(); ++j) {
                if (counts[j] > 0) {
                    remap[j] = filtered.size();
                    filtered.push_back(codebook[j]);
                }
            }
            for (std::size_t& c : assignment) {
                c = remap[c];
            }
            codebook = std::move(filtered);
        }

        double after = 0.0;
        std::size_t shed = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = euclidean_distance(set[i], codebook[assignment[i]]);
            after += r;
            if (r <= config.zero_tolerance) {
                ++shed;
            }
        }
        const bool useless =
            shed == 0 && (before - after) <= 1e-9 * std::max(before, 1.0);
        if (useless) {
            continue;
        }

        std::vector<std::size_t> final_counts(codebook.size(), 0);
        for (std::size_t c : assignment) {
            ++final_counts[c];
        }
        double bound = 0.0;
        for (std::size_t cnt : final_counts) {
            const double p = static_cast<double>(cnt) / static_cast<double>(m);
            bound += p * (std::log2(1.0 / p) + 1.0);
        }
        if (bound < best_bound) {
            best_bound = bound;
            best = LevelPlan{std::move(codebook), std::move(assignment)};
        }
    }
    return best;
}

SeeTree greedy_minimize(const VectorSet& set, const SeeConfig& config) {
    return greedy_recurse(set, config, 0);
}

std::pair<double, SeeTree> see_estimate(const VectorSet& set, const SeeConfig& config) {
    SeeTree tree = config.strategy == SeeStrategy::exhaustive
                       ? see_exhaustive(set, config, 0)
                       : greedy_recurse(set, config, 0);
    return {tree.total_bits, std::move(tree)};
}

double auto_generative_entropy(const EventGroup& group) {
    if (group.probabilities.empty()) {
        throw InvalidInput("auto_generative_entropy: empty event group");
    }
    double sum = 0.0;
    for (double p : group.probabilities) {
        if (p <= 0.0) {
            throw InvalidInput("auto_generative_entropy: probabilities must be positive");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidInput("auto_generative_entropy: probabilities must sum to 1");
    }
    if (!group.children) {
        return shannon_entropy(group.probabilities);
    }
    if (group.children->size() != group.probabilities.size()) {
        throw InvalidInput("auto_generative_entropy: children count mismatch");
    }
    double h = 0.0;
    for (std::size_t i = 0; i < group.probabilities.size(); ++i) {
        const double p = group.probabilities[i];
        h += p * (std::log2(1.0 / p) + auto_generative_entropy((*group.children)[i]));
    }
    return h;
}

namespace {

PruneResult prune_recurse(const SeeTree& tree, std::size_t depth_left) {
    if (depth_left == 0) {
        return {SeeTree{}, tree.total_bits};
    }
    PruneResult result;
    std::size_t max_child_depth = 0;
    for (const SeeNode& node : tree.nodes) {
        PruneResult child = prune_recurse(node.children, depth_left - 1);
        SeeNode kept = node;
        kept.children = std::move(child.tree);
        kept.info_bits = kept.probability *
                         (std::log2(1.0 / kept.probability) + 1.0 +
                          kept.residual_fraction * kept.children.total_bits);
        result.dropped_bits +=
            kept.probability * kept.residual_fraction * child.dropped_bits;
        result.tree.total_bits += kept.info_bits;
        max_child_depth = std::max(max_child_depth, kept.children.depth);
        result.tree.nodes.push_back(std::move(kept));
    }
    result.tree.depth = result.tree.nodes.empty() ? 0 : 1 + max_child_depth;
    return result;
}

} // namespace

PruneResult prune_tree(const SeeTree& tree, std::size_t max_depth) {
    return prune_recurse(tree, max_depth);
}

std::uint64_t tree_storage_bits(const SeeTree& tree, unsigned value_bits,
                                std::size_t dim, std::size_t vector_count) {
    std::uint64_t bits = 0;
    std::vector<const SeeTree*> level{&tree};
    std::uint64_t m_level = vector_count;
    while (true) {
        std::uint64_t n_level = 0;
        for (const SeeTree* t : level) {
            n_level += t->nodes.size();
        }
        if (n_level == 0) {
            break;
        }
        const std::uint64_t index_width = std::bit_width(n_level);
        bits += m_level * index_width +
                static_cast<std::uint64_t>(value_bits) * dim * n_level;
        std::uint64_t next_m = 0;
        std::vector<const SeeTree*> next;
        for (const SeeTree* t : level) {
            for (const SeeNode& node : t->nodes) {
                next_m += node.residual_count;
                next.push_back(&node.children);
            }
        }
        level = std::move(next);
        m_level = next_m;
    }
    return bits;
}

} // namespace seequant
