#include "seequant/object.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "seequant/errors.hpp"

namespace seequant {

namespace {

constexpr double kZeroResidualTol = 1e-9;
constexpr std::size_t kMatchCap = 8;

double point_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t h = 0; h < a.size(); ++h) {
        const double d = a[h] - b[h];
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::uint64_t checked_factorial(std::size_t n) {
    if (n > 20) {
        throw Refusal("permutation index space for N = " + std::to_string(n) +
                      " does not fit in 64 bits");
    }
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

} // namespace

PointObject::PointObject(std::vector<std::vector<double>> points)
    : points_(std::move(points)) {
    for (const auto& p : points_) {
        if (p.size() != points_.front().size()) {
            throw InvalidInput("PointObject: points must share one dimension");
        }
    }
}

bool PointObject::has_duplicates() const {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        for (std::size_t j = i + 1; j < points_.size(); ++j) {
            if (points_[i] == points_[j]) {
                return true;
            }
        }
    }
    return false;
}

PointObject embed_signal(const std::vector<double>& values,
                         const std::vector<std::size_t>& dims, double value_levels) {
    std::size_t sites = 1;
    for (std::size_t n : dims) {
        if (n == 0) {
            throw InvalidInput("embed_signal: zero-sized dimension");
        }
        sites *= n;
    }
    if (values.size() != sites) {
        throw InvalidInput("embed_signal: value count does not match the site grid");
    }
    std::vector<std::vector<double>> points;
    points.reserve(sites);
    for (std::size_t i = 0; i < sites; ++i) {
        if (values[i] < 0.0 || values[i] >= value_levels) {
            throw InvalidInput("embed_signal: value out of [0, N_d) at site " +
                               std::to_string(i));
        }
        std::vector<double> p(dims.size() + 1);
        std::size_t rest = i;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            p[k] = static_cast<double>(rest % dims[k]);
            rest /= dims[k];
        }
        p[dims.size()] = values[i];
        points.push_back(std::move(p));
    }
    return PointObject(std::move(points));
}

std::vector<double> object_center(const PointObject& object) {
    if (object.size() == 0) {
        throw InvalidInput("object_center: empty object");
    }
    std::vector<double> c(object.dim(), 0.0);
    for (const auto& p : object.points()) {
        for (std::size_t h = 0; h < c.size(); ++h) {
            c[h] += p[h];
        }
    }
    for (double& v : c) {
        v /= static_cast<double>(object.size());
    }
    return c;
}

std::vector<std::vector<double>> auto_distance_matrix(const PointObject& object) {
    if (object.size() == 0) {
        throw InvalidInput("auto_distance_matrix: empty object");
    }
    const std::size_t n = object.size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = point_distance(object.point(i), object.point(j));
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    return d;
}

std::vector<std::size_t> permutation_from_index(std::uint64_t gamma, std::size_t n) {
    if (gamma >= checked_factorial(n)) {
        throw InvalidInput("permutation index out of range: gamma >= N!");
    }
    std::vector<std::size_t> remaining(n);
    for (std::size_t i = 0; i < n; ++i) {
        remaining[i] = i;
    }
    std::vector<std::size_t> perm(n);
    std::uint64_t rest = gamma;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t f = checked_factorial(n - 1 - i);
        const std::size_t digit = static_cast<std::size_t>(rest / f);
        rest %= f;
        perm[i] = remaining[digit];
        remaining.erase(remaining.begin() + static_cast<long>(digit));
    }
    return perm;
}

std::vector<std::vector<double>> permutation_matrix(std::uint64_t gamma, std::size_t n) {
    const std::vector<std::size_t> perm = permutation_from_index(gamma, n);
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        w[i][perm[i]] = 1.0;
    }
    return w;
}

namespace {

double chi_from_matrices(const std::vector<std::vector<double>>& d1,
                         const std::vector<std::vector<double>>& d2,
                         const std::vector<std::size_t>& perm, double alpha) {
    double chi = 0.0;
    const std::size_t n = d1.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            chi += std::abs(d1[i][j] - alpha * d2[perm[i]][perm[j]]);
        }
    }
    return chi;
}

void check_match_inputs(const PointObject& o1, const PointObject& o2) {
    if (o1.size() == 0 || o2.size() == 0) {
        throw InvalidInput("chi distance: objects must be non-empty");
    }
    if (o1.size() != o2.size()) {
        throw InvalidInput("chi distance: objects must have the same point count "
                           "(use generalize to bridge sizes)");
    }
}

} // namespace

double chi_distance(const PointObject& o1, const PointObject& o2,
                    const MatchParams& params) {
    check_match_inputs(o1, o2);
    const auto perm = permutation_from_index(params.gamma, o1.size());
    return chi_from_matrices(auto_distance_matrix(o1), auto_distance_matrix(o2), perm,
                             params.alpha);
}

double chi_distance_matrix_form(const PointObject& o1, const PointObject& o2,
                                const MatchParams& params) {
    check_match_inputs(o1, o2);
    const std::size_t n = o1.size();
    const auto d1 = auto_distance_matrix(o1);
    const auto d2 = auto_distance_matrix(o2);
    const auto w = permutation_matrix(params.gamma, n);

    // conjugated = W * D2 * W^T, which carries D2 into o1's index space
    std::vector<std::vector<double>> wd2(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                acc += w[i][t] * d2[t][j];
            }
            wd2[i][j] = acc;
        }
    }
    double chi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                acc += wd2[i][t] * w[j][t];
            }
            chi += std::abs(d1[i][j] - params.alpha * acc);
        }
    }
    return chi;
}

namespace {

// Minimizes sum |a_ij - alpha * b_ij| over alpha > 0: convex piecewise
// linear, so the weighted median of the ratios a/b (weights b) is optimal.
double optimal_alpha(const std::vector<std::vector<double>>& d1,
                     const std::vector<std::vector<double>>& d2,
                     const std::vector<std::size_t>& perm) {
    struct Breakpoint {
        double ratio;
        double weight;
    };
    std::vector<Breakpoint> breakpoints;
    const std::size_t n = d1.size();
    double total_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = d1[i][j];
            const double b = d2[perm[i]][perm[j]];
            if (b > 0.0) {
                breakpoints.push_back({a / b, b});
                total_weight += b;
            }
        }
    }
    if (breakpoints.empty()) {
        return 1.0;
    }
    std::sort(breakpoints.begin(), breakpoints.end(),
              [](const Breakpoint& x, const Breakpoint& y) { return x.ratio < y.ratio; });
    double cum = 0.0;
    double median = breakpoints.back().ratio;
    for (const Breakpoint& bp : breakpoints) {
        cum += bp.weight;
        if (cum >= total_weight / 2.0) {
            median = bp.ratio;
            break;
        }
    }
    if (median > 0.0) {
        return median;
    }
    for (const Breakpoint& bp : breakpoints) {
        if (bp.ratio > 0.0) {
            return bp.ratio;
        }
    }
    return 1.0;
}

} // namespace

MatchResult best_match(const PointObject& o1, const PointObject& o2) {
    check_match_inputs(o1, o2);
    const std::size_t n = o1.size();
    if (n > kMatchCap) {
        throw Refusal("best_match: refusing exhaustive search over " + std::to_string(n) +
                      "! permutations (cap " + std::to_string(kMatchCap) + ")");
    }
    const auto d1 = auto_distance_matrix(o1);
    const auto d2 = auto_distance_matrix(o2);
    const std::uint64_t count = checked_factorial(n);

    MatchResult best;
    best.chi = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> perm(n);
    for (std::uint64_t gamma = 0; gamma < count; ++gamma) {
        perm = permutation_from_index(gamma, n);
        const double alpha = optimal_alpha(d1, d2, perm);
        const double chi = chi_from_matrices(d1, d2, perm, alpha);
        if (chi < best.chi) {
            best.chi = chi;
            best.params = {alpha, gamma};
        }
    }
    return best;
}

PointObject object_diff(const PointObject& o1, const PointObject& o2,
                        const MatchParams& params) {
    check_match_inputs(o1, o2);
    if (o1.dim() != o2.dim()) {
        throw InvalidInput("object_diff: objects must share one dimension");
    }
    const auto perm = permutation_from_index(params.gamma, o1.size());
    const auto c1 = object_center(o1);
    const auto c2 = object_center(o2);
    std::vector<std::vector<double>> residuals;
    residuals.reserve(o1.size());
    for (std::size_t i = 0; i < o1.size(); ++i) {
        const auto& y = o1.point(i);
        const auto& match = o2.point(perm[i]);
        double acc = 0.0;
        for (std::size_t h = 0; h < y.size(); ++h) {
            const double d = (y[h] - c1[h]) - params.alpha * (match[h] - c2[h]);
            acc += d * d;
        }
        residuals.push_back({std::sqrt(acc)});
    }
    return PointObject(std::move(residuals));
}

PointObject generalize(const PointObject& object, std::size_t target_size) {
    if (object.size() == 0) {
        throw InvalidInput("generalize: empty object");
    }
    if (target_size == 0) {
        throw InvalidInput("generalize: target size must be positive");
    }
    if (object.size() == target_size) {
        return object;
    }
    const std::vector<double> center = object_center(object);
    std::vector<std::vector<double>> points;
    if (object.size() < target_size) {
        points = object.points();
        while (points.size() < target_size) {
            points.push_back(center);
        }
        return PointObject(std::move(points));
    }

    // farthest-point subsampling seeded at the point nearest the center
    std::size_t seed = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < object.size(); ++i) {
        const double d = point_distance(object.point(i), center);
        if (d < best_d) {
            best_d = d;
            seed = i;
        }
    }
    std::vector<std::size_t> selected{seed};
    std::vector<double> min_dist(object.size());
    for (std::size_t i = 0; i < object.size(); ++i) {
        min_dist[i] = point_distance(object.point(i), object.point(seed));
    }
    while (selected.size() < target_size) {
        std::size_t pick = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < object.size(); ++i) {
            if (min_dist[i] > far_d) {
                far_d = min_dist[i];
                pick = i;
            }
        }
        selected.push_back(pick);
        for (std::size_t i = 0; i < object.size(); ++i) {
            min_dist[i] = std::min(min_dist[i],
                                   point_distance(object.point(i), object.point(pick)));
        }
    }
    for (std::size_t i : selected) {
        points.push_back(object.point(i));
    }
    return PointObject(std::move(points));
}

namespace {

double object_see_recurse(const std::vector<PointObject>& objects, const SeeConfig& config,
                          std::size_t depth) {
    const std::size_t m = objects.size();
    if (m <= 1) {
        return 0.0;
    }
    if (m > config.exhaustive_cap) {
        throw Refusal("object_see refused: " + std::to_string(m) +
                      " objects exceed cap " + std::to_string(config.exhaustive_cap));
    }
    if (depth >= config.depth_cap) {
        throw Refusal("object_see refused: recursion depth cap exceeded");
    }
    for (const PointObject& o : objects) {
        if (o.size() == 0) {
            throw InvalidInput("object_see: objects must be non-empty");
        }
        if (o.size() > kMatchCap) {
            throw Refusal("object_see refused: object with more than " +
                          std::to_string(kMatchCap) + " points");
        }
        if (o.dim() != objects.front().dim()) {
            throw InvalidInput("object_see: objects must share one dimension");
        }
    }

    // candidate codewords: the distinct input objects, in first appearance order
    std::vector<std::size_t> distinct;
    for (std::size_t i = 0; i < m; ++i) {
        bool seen = false;
        for (std::size_t j : distinct) {
            if (objects[i] == objects[j]) {
                seen = true;
                break;
            }
        }
        if (!seen) {
            distinct.push_back(i);
        }
    }

    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 1; mask < (1u << distinct.size()); ++mask) {
        masks.push_back(mask);
    }
    std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        const int pa = std::popcount(a);
        const int pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });

    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask : masks) {
        std::vector<std::size_t> codewords;
        for (std::size_t bit = 0; bit < distinct.size(); ++bit) {
            if (mask & (1u << bit)) {
                codewords.push_back(distinct[bit]);
            }
        }

        // classify every object to the chi-minimizing codeword
        std::vector<std::vector<std::size_t>> members(codewords.size());
        std::vector<std::vector<PointObject>> residual_sets(codewords.size());
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t best_class = 0;
            double best_chi = std::numeric_limits<double>::infinity();
            MatchResult best_result;
            PointObject best_codeword;
            for (std::size_t c = 0; c < codewords.size(); ++c) {
                PointObject g = generalize(objects[codewords[c]], objects[j].size());
                MatchResult match = best_match(g, objects[j]);
                if (match.chi < best_chi) {
                    best_chi = match.chi;
                    best_class = c;
                    best_result = match;
                    best_codeword = std::move(g);
                }
            }
            members[best_class].push_back(j);
            PointObject diff = object_diff(best_codeword, objects[j], best_result.params);
            std::vector<std::vector<double>> kept;
            for (const auto& p : diff.points()) {
                if (p[0] > kZeroResidualTol) {
                    kept.push_back(p);
                }
            }
            if (!kept.empty()) {
                residual_sets[best_class].push_back(PointObject(std::move(kept)));
            }
        }

        double value = 0.0;
        for (std::size_t c = 0; c < codewords.size(); ++c) {
            if (members[c].empty()) {
                continue;
            }
            const double p =
                static_cast<double>(members[c].size()) / static_cast<double>(m);
            const double fraction = static_cast<double>(residual_sets[c].size()) /
                                    static_cast<double>(members[c].size());
            const double child = object_see_recurse(residual_sets[c], config, depth + 1);
            value += p * (std::log2(1.0 / p) + 1.0 + fraction * child);
        }
        if (value < best) {
            best = value;
        }
    }
    return best;
}

} // namespace

double object_see(const std::vector<PointObject>& objects, const SeeConfig& config) {
    return object_see_recurse(objects, config, 0);
}

PartitionResult min_partition_see(const PointObject& object, std::size_t max_cell_points,
                                  const SeeConfig& config) {
    const std::size_t n = object.size();
    if (n == 0) {
        throw InvalidInput("min_partition_see: empty object");
    }
    if (n > 8) {
        throw Refusal("min_partition_see: refusing partition enumeration over " +
                      std::to_string(n) + " points (cap 8)");
    }

    PartitionResult best;
    best.bits = std::numeric_limits<double>::infinity();
    std::size_t best_cells = 0;

    // restricted growth strings enumerate set partitions in lexicographic order
    std::vector<std::size_t> rgs(n, 0);
    for (;;) {
        std::size_t cell_count = 0;
        for (std::size_t v : rgs) {
            cell_count = std::max(cell_count, v + 1);
        }
        std::vector<std::size_t> sizes(cell_count, 0);
        for (std::size_t v : rgs) {
            ++sizes[v];
        }
        const bool admissible =
            max_cell_points == 0 ||
            std::all_of(sizes.begin(), sizes.end(),
                        [&](std::size_t s) { return s <= max_cell_points; });
        if (admissible) {
            std::vector<std::vector<std::vector<double>>> cell_points(cell_count);
            for (std::size_t i = 0; i < n; ++i) {
                cell_points[rgs[i]].push_back(object.point(i));
            }
            std::vector<PointObject> cells;
            cells.reserve(cell_count);
            for (auto& pts : cell_points) {
                cells.push_back(PointObject(std::move(pts)));
            }
            const double bits = object_see(cells, config);
            if (bits < best.bits ||
                (bits == best.bits && cell_count < best_cells)) {
                best.bits = bits;
                best.cell_of = rgs;
                best_cells = cell_count;
            }
        }

        // next restricted growth string
        std::size_t i = n;
        while (i-- > 1) {
            std::size_t prefix_max = 0;
            for (std::size_t t = 0; t < i; ++t) {
                prefix_max = std::max(prefix_max, rgs[t]);
            }
            if (rgs[i] <= prefix_max) {
                ++rgs[i];
                std::fill(rgs.begin() + static_cast<long>(i) + 1, rgs.end(), 0);
                break;
            }
        }
        if (i == 0) {
            break;
        }
    }
    return best;
}

} // namespace seequant
