#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "seequant/errors.hpp"
#include "seequant/rng.hpp"
#include "seequant/see.hpp"

using namespace seequant;

namespace {

VectorSet scalars(const std::vector<double>& values) {
    VectorSet set(1, 8);
    for (double v : values) {
        set.push_back({&v, 1});
    }
    return set;
}

SeeConfig exhaustive_config() {
    SeeConfig config;
    config.strategy = SeeStrategy::exhaustive;
    return config;
}

// Independent scalar SEE oracle. Works on plain doubles with its own
// classification loop and uses the unsimplified correcting factor
// P * (1/P) * (|delta| / m), so it shares no code path with the library.
double oracle_see(const std::vector<double>& values, bool midpoints) {
    const std::size_t m = values.size();
    if (m <= 1) {
        return 0.0;
    }
    std::vector<double> candidates;
    for (double v : values) {
        if (std::find(candidates.begin(), candidates.end(), v) == candidates.end()) {
            candidates.push_back(v);
        }
    }
    if (midpoints) {
        const std::size_t d = candidates.size();
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i + 1; j < d; ++j) {
                const double mid = (candidates[i] + candidates[j]) / 2.0;
                if (std::find(candidates.begin(), candidates.end(), mid) ==
                    candidates.end()) {
                    candidates.push_back(mid);
                }
            }
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 1; mask < (1u << candidates.size()); ++mask) {
        std::vector<double> codebook;
        for (std::size_t bit = 0; bit < candidates.size(); ++bit) {
            if (mask & (1u << bit)) {
                codebook.push_back(candidates[bit]);
            }
        }
        std::vector<std::vector<double>> residuals(codebook.size());
        std::vector<std::size_t> counts(codebook.size(), 0);
        std::vector<double> pooled;
        for (double v : values) {
            std::size_t cls = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < codebook.size(); ++j) {
                const double d = std::abs(v - codebook[j]);
                if (d < best_d) {
                    best_d = d;
                    cls = j;
                }
            }
            ++counts[cls];
            if (v - codebook[cls] != 0.0) {
                residuals[cls].push_back(v - codebook[cls]);
                pooled.push_back(v - codebook[cls]);
            }
        }
        // a candidate that sheds nothing and reproduces the same multiset
        // recurses onto itself and can never be minimal
        if (pooled.size() == m) {
            std::vector<double> a = pooled;
            std::vector<double> b = values;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a == b) {
                continue;
            }
        }
        double value = 0.0;
        for (std::size_t j = 0; j < codebook.size(); ++j) {
            if (counts[j] == 0) {
                continue;
            }
            const double p = static_cast<double>(counts[j]) / static_cast<double>(m);
            value += p * (std::log2(1.0 / p) + 1.0) +
                     p * (1.0 / p) *
                         (static_cast<double>(residuals[j].size()) /
                          static_cast<double>(m)) *
                         oracle_see(residuals[j], midpoints);
        }
        best = std::min(best, value);
    }
    return best;
}

// all length-n tuples over {0..alphabet-1}, deduplicated into multisets
std::vector<std::vector<double>> small_multisets(std::size_t max_len, int alphabet) {
    std::vector<std::vector<double>> out;
    for (std::size_t len = 0; len <= max_len; ++len) {
        std::vector<int> digits(len, 0);
        for (;;) {
            std::vector<double> values(digits.begin(), digits.end());
            std::sort(values.begin(), values.end());
            if (std::find(out.begin(), out.end(), values) == out.end()) {
                out.push_back(values);
            }
            std::size_t i = len;
            while (i > 0 && digits[i - 1] == alphabet - 1) {
                digits[--i] = 0;
            }
            if (i == 0) {
                break;
            }
            ++digits[i - 1];
        }
        if (len == 0) {
            continue;
        }
    }
    return out;
}

// joint root-to-leaf path probabilities, independent of the recursion
void collect_paths(const EventGroup& group, double prefix, std::vector<double>& joint) {
    for (std::size_t i = 0; i < group.probabilities.size(); ++i) {
        const double p = prefix * group.probabilities[i];
        if (group.children) {
            collect_paths((*group.children)[i], p, joint);
        } else {
            joint.push_back(p);
        }
    }
}

double path_entropy(const EventGroup& group) {
    std::vector<double> joint;
    collect_paths(group, 1.0, joint);
    double h = 0.0;
    for (double p : joint) {
        if (p > 0.0) {
            h -= p * std::log2(p);
        }
    }
    return h;
}

EventGroup random_dyadic_group(Rng& rng, int levels) {
    EventGroup group;
    const std::size_t branches = 2 + rng.next_below(2); // 2 or 3
    // split 8 into `branches` positive dyadic parts
    std::vector<int> parts(branches, 1);
    int rest = 8 - static_cast<int>(branches);
    for (int r = 0; r < rest; ++r) {
        ++parts[rng.next_below(branches)];
    }
    for (int part : parts) {
        group.probabilities.push_back(part / 8.0);
    }
    if (levels > 1) {
        std::vector<EventGroup> children;
        for (std::size_t i = 0; i < branches; ++i) {
            children.push_back(random_dyadic_group(rng, levels - 1));
        }
        group.children = std::move(children);
    }
    return group;
}

// fresh recomputation of a tree's total from its stored counts
double recompute_total(const SeeTree& tree) {
    double total = 0.0;
    for (const SeeNode& node : tree.nodes) {
        const double p = static_cast<double>(node.count) /
                         static_cast<double>(node.parent_count);
        const double fraction = static_cast<double>(node.residual_count) /
                                static_cast<double>(node.count);
        total += p * (std::log2(1.0 / p) + 1.0 + fraction * recompute_total(node.children));
    }
    return total;
}

} // namespace

TEST_CASE("residual_set drops exact matches and preserves order") {
    SUBCASE("all members equal the codevector") {
        const VectorSet set = scalars({3, 3, 3});
        const Codebook cb = Codebook::from_rows({{3.0}});
        const VectorSet res = residual_set(set, cb, classify_all(set, cb), 0, 0.0);
        CHECK(res.size() == 0);
    }
    SUBCASE("single surviving residual") {
        const VectorSet set = scalars({3, 3, 5});
        const Codebook cb = Codebook::from_rows({{3.0}});
        const VectorSet res = residual_set(set, cb, classify_all(set, cb), 0, 0.0);
        REQUIRE(res.size() == 1);
        CHECK(res[0][0] == 2.0);
    }
    SUBCASE("random instance matches a filter-and-subtract oracle") {
        Rng rng(13);
        std::vector<double> values;
        for (int i = 0; i < 12; ++i) {
            values.push_back(static_cast<double>(rng.next_below(6)));
        }
        const VectorSet set = scalars(values);
        const Codebook cb = Codebook::from_rows({{1.0}, {4.0}});
        const Assignment assignment = classify_all(set, cb);
        for (std::size_t j = 0; j < 2; ++j) {
            std::vector<double> expected;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (assignment[i] == j && values[i] != cb[j][0]) {
                    expected.push_back(values[i] - cb[j][0]);
                }
            }
            const VectorSet res = residual_set(set, cb, assignment, j, 0.0);
            REQUIRE(res.size() == expected.size());
            for (std::size_t i = 0; i < expected.size(); ++i) {
                CHECK(res[i][0] == expected[i]);
            }
        }
    }
}

TEST_CASE("SEE base cases are exactly zero") {
    VectorSet empty(1, 8);
    CHECK(see_estimate(empty, exhaustive_config()).first == 0.0);
    CHECK(see_estimate(scalars({7}), exhaustive_config()).first == 0.0);
    CHECK(see_estimate(empty, exhaustive_config()).second.nodes.empty());
}

TEST_CASE("four identical vectors cost exactly one bit") {
    const VectorSet set = scalars({6, 6, 6, 6});
    const auto [value, tree] = see_estimate(set, exhaustive_config());
    CHECK(value == 1.0);
    CHECK(oracle_see({6, 6, 6, 6}, false) == 1.0);
    CHECK(tree.depth == 1);
}

TEST_CASE("the 0,0,4,4 set is cheapest through a single codevector") {
    const VectorSet set = scalars({0, 0, 4, 4});
    const auto [value, tree] = see_estimate(set, exhaustive_config());
    CHECK(value == doctest::Approx(1.5).epsilon(1e-12));
    // midpoint-augmented oracle finds nothing cheaper than the data values
    CHECK(oracle_see({0, 0, 4, 4}, true) == doctest::Approx(1.5).epsilon(1e-12));
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].residual_count == 2);
}

TEST_CASE("exhaustive SEE refuses oversized sets") {
    std::vector<double> values(9, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = static_cast<double>(i);
    }
    CHECK_THROWS_AS(see_estimate(scalars(values), exhaustive_config()), Refusal);
}

TEST_CASE("exhaustive SEE equals the independent oracle on small multisets") {
    for (const auto& values : small_multisets(5, 4)) {
        const double lib = see_estimate(scalars(values), exhaustive_config()).first;
        const double oracle = oracle_see(values, false);
        CHECK(lib == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("greedy never beats the exhaustive minimum on small multisets") {
    SeeConfig greedy;
    greedy.strategy = SeeStrategy::greedy;
    for (const auto& values : small_multisets(5, 4)) {
        if (values.empty()) {
            continue;
        }
        const double exhaustive =
            see_estimate(scalars(values), exhaustive_config()).first;
        const double upper = see_estimate(scalars(values), greedy).first;
        CHECK(upper >= exhaustive - 1e-12);
    }
}

TEST_CASE("greedy finds the one-bit cover of a constant set") {
    SeeConfig config;
    config.strategy = SeeStrategy::greedy;
    const SeeTree tree = greedy_minimize(scalars({9, 9, 9, 9, 9}), config);
    CHECK(tree.total_bits == 1.0);
    CHECK(tree.depth == 1);
}

TEST_CASE("greedy trees are deterministic for a fixed seed") {
    Rng rng(303);
    std::vector<double> values;
    for (int i = 0; i < 24; ++i) {
        values.push_back(static_cast<double>(rng.next_below(16)));
    }
    SeeConfig config;
    config.seed = 5;
    const SeeTree a = greedy_minimize(scalars(values), config);
    const SeeTree b = greedy_minimize(scalars(values), config);
    CHECK(a.total_bits == b.total_bits);
    CHECK(a.depth == b.depth);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].codevector == b.nodes[i].codevector);
        CHECK(a.nodes[i].count == b.nodes[i].count);
    }
}

TEST_CASE("SEE value ignores input order") {
    const std::vector<double> values{0, 1, 1, 3, 2, 0};
    std::vector<double> shuffled = values;
    Rng rng(44);
    rng.shuffle(shuffled);
    CHECK(see_estimate(scalars(values), exhaustive_config()).first ==
          doctest::Approx(see_estimate(scalars(shuffled), exhaustive_config()).first)
              .epsilon(1e-12));
}

TEST_CASE("SEE of two or more vectors is at least one bit") {
    for (const auto& values : small_multisets(4, 3)) {
        if (values.size() < 2) {
            continue;
        }
        CHECK(see_estimate(scalars(values), exhaustive_config()).first >= 1.0 - 1e-12);
    }
}

TEST_CASE("SEE is invariant under translating the whole set") {
    const std::vector<double> base{0, 2, 2, 5, 7, 7};
    std::vector<double> shifted;
    for (double v : base) {
        shifted.push_back(v + 11.0);
    }
    CHECK(see_estimate(scalars(base), exhaustive_config()).first ==
          doctest::Approx(see_estimate(scalars(shifted), exhaustive_config()).first)
              .epsilon(1e-12));
}

TEST_CASE("node info matches the unsimplified correcting factor") {
    // walk a tree and recompute info via P * [log2(1/P) + 1 + (1/P)(|D|/m) * child]
    const VectorSet set = scalars({0, 0, 1, 2, 4, 4});
    const auto [value, tree] = see_estimate(set, exhaustive_config());
    (void)value;
    std::vector<const SeeTree*> stack{&tree};
    while (!stack.empty()) {
        const SeeTree* t = stack.back();
        stack.pop_back();
        for (const SeeNode& node : t->nodes) {
            const double p = node.probability;
            const double unsimplified =
                p * (std::log2(1.0 / p) + 1.0) +
                p * (1.0 / p) *
                    (static_cast<double>(node.residual_count) /
                     static_cast<double>(node.parent_count)) *
                    node.children.total_bits;
            CHECK(node.info_bits == doctest::Approx(unsimplified).epsilon(1e-12));
            stack.push_back(&node.children);
        }
    }
}

TEST_CASE("auto-generative entropy on hand-checked groups") {
    SUBCASE("uniform over four events") {
        EventGroup group;
        group.probabilities = {0.25, 0.25, 0.25, 0.25};
        CHECK(auto_generative_entropy(group) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("two uniform levels compose to two bits") {
        EventGroup leaf;
        leaf.probabilities = {0.5, 0.5};
        EventGroup root;
        root.probabilities = {0.5, 0.5};
        root.children = std::vector<EventGroup>{leaf, leaf};
        CHECK(auto_generative_entropy(root) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(path_entropy(root) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("probability-one chains carry no information") {
        EventGroup leaf;
        leaf.probabilities = {1.0};
        EventGroup mid;
        mid.probabilities = {1.0};
        mid.children = std::vector<EventGroup>{leaf};
        EventGroup root;
        root.probabilities = {1.0};
        root.children = std::vector<EventGroup>{mid};
        CHECK(auto_generative_entropy(root) == 0.0);
    }
    SUBCASE("probabilities must sum to one") {
        EventGroup group;
        group.probabilities = {0.5, 0.4};
        CHECK_THROWS_AS(auto_generative_entropy(group), InvalidInput);
    }
}

TEST_CASE("auto-generative entropy equals the joint path entropy") {
    Rng rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        const int levels = 1 + static_cast<int>(rng.next_below(3));
        const EventGroup group = random_dyadic_group(rng, levels);
        CHECK(auto_generative_entropy(group) ==
              doctest::Approx(path_entropy(group)).epsilon(1e-9));
    }
}

TEST_CASE("pruning conserves information") {
    const VectorSet set = scalars({0, 0, 1, 2, 4, 4, 7, 7});
    const auto [value, tree] = see_estimate(set, exhaustive_config());
    (void)value;

    SUBCASE("deep enough cut is a no-op") {
        const PruneResult kept = prune_tree(tree, tree.depth + 3);
        CHECK(kept.dropped_bits == 0.0);
        CHECK(kept.tree.total_bits == doctest::Approx(tree.total_bits).epsilon(1e-12));
        CHECK(kept.tree.depth == tree.depth);
    }
    SUBCASE("cut at zero drops everything") {
        const PruneResult cut = prune_tree(tree, 0);
        CHECK(cut.tree.nodes.empty());
        CHECK(cut.dropped_bits == doctest::Approx(tree.total_bits).epsilon(1e-12));
    }
    SUBCASE("intermediate cuts conserve retained + dropped") {
        for (std::size_t d = 0; d <= tree.depth; ++d) {
            const PruneResult cut = prune_tree(tree, d);
            // both sides recomputed from raw counts, not from stored totals
            CHECK(recompute_total(cut.tree) + cut.dropped_bits ==
                  doctest::Approx(recompute_total(tree)).epsilon(1e-9));
            CHECK(cut.tree.total_bits <= tree.total_bits + 1e-12);
        }
    }
}

TEST_CASE("storage bits follow the per-level formula") {
    SUBCASE("single level with no residuals") {
        const VectorSet set = scalars({5, 5, 9, 9});
        const auto tree = see_estimate(set, exhaustive_config()).second;
        // cheapest tree here is one codevector with residuals, so build the
        // exact-cover tree through a fixed two-codevector config instead
        SeeConfig config;
        config.strategy = SeeStrategy::greedy;
        config.per_level_codebook_sizes = {2};
        const SeeTree exact = greedy_minimize(set, config);
        REQUIRE(exact.nodes.size() == 2);
        CHECK(exact.depth == 1);
        // M * ceil(log2(N+1)) + P*k*N = 4*2 + 8*1*2 = 24
        CHECK(tree_storage_bits(exact, 8, 1, 4) == 24);
    }
    SUBCASE("empty tree stores nothing") {
        CHECK(tree_storage_bits(SeeTree{}, 8, 16, 100) == 0);
    }
    SUBCASE("multi-level tree matches an independent level walk") {
        const VectorSet set = scalars({0, 0, 1, 2, 4, 4, 7, 7});
        const auto tree = see_estimate(set, exhaustive_config()).second;
        std::uint64_t expected = 0;
        // walk level by level, recounting nodes and active vectors
        std::vector<const SeeTree*> level{&tree};
        std::uint64_t m_level = 8;
        while (true) {
            std::uint64_t n = 0;
            std::uint64_t next_m = 0;
            std::vector<const SeeTree*> next;
            for (const SeeTree* t : level) {
                n += t->nodes.size();
                for (const SeeNode& node : t->nodes) {
                    next_m += node.residual_count;
                    next.push_back(&node.children);
                }
            }
            if (n == 0) {
                break;
            }
            std::uint64_t width = 0;
            while ((1ull << width) < n + 1) {
                ++width;
            }
            expected += m_level * width + 8ull * 1ull * n;
            level = std::move(next);
            m_level = next_m;
        }
        CHECK(tree_storage_bits(tree, 8, 1, 8) == expected);
    }
}

TEST_CASE("greedy respects fixed per-level codebook sizes") {
    const VectorSet set = scalars({0, 0, 4, 4});
    SeeConfig config;
    config.strategy = SeeStrategy::greedy;
    config.per_level_codebook_sizes = {2};
    const SeeTree tree = greedy_minimize(set, config);
    REQUIRE(tree.nodes.size() == 2);
    CHECK(tree.total_bits == doctest::Approx(2.0).epsilon(1e-12));
}
