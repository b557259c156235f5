#include "seequant/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "seequant/bitstream.hpp"
#include "seequant/errors.hpp"

namespace seequant {

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'E', 'E', 'Q'};
constexpr std::uint8_t kVersion = 1;

unsigned index_width(std::size_t codebook_size) {
    return static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(codebook_size)));
}

// Encoding-side tree node: a class at one level, with the block ids it
// covers and the subset whose residual stays nonzero.
struct EncNode {
    std::vector<double> codevector; // integer-valued components
    std::vector<std::size_t> members;
    std::vector<std::size_t> continuing;
    std::vector<EncNode> children;
    std::size_t parent_count = 0;
    std::size_t id = 0; // filled during flattening
};

struct EncodeState {
    const SeeConfig* config = nullptr;
    std::size_t sanity_cap = 0;
};

// Residual recursion over (ids, residual vectors). Every class sheds at
// least the blocks matching its codevector exactly; the exact-cover fallback
// guarantees progress even when the greedy scan rejects every candidate.
std::vector<EncNode> build_nodes(const EncodeState& state, const VectorSet& set,
                                 const std::vector<std::size_t>& ids, std::size_t depth) {
    const SeeConfig& config = *state.config;
    if (config.max_depth != 0 && depth >= config.max_depth) {
        return {};
    }
    if (depth > state.sanity_cap) {
        throw Refusal("encode: residual recursion failed to terminate");
    }

    Codebook codebook;
    Assignment assignment;
    if (auto plan = plan_greedy_level(set, config, depth, /*integer_codevectors=*/true)) {
        codebook = std::move(plan->codebook);
        assignment = std::move(plan->assignment);
    } else {
        // exact cover over the distinct values
        codebook = Codebook(set.dim());
        for (std::size_t i : set.distinct_indices()) {
            codebook.push_back(set[i]);
        }
        assignment = classify_all(set, codebook);
    }

    std::vector<EncNode> nodes;
    for (std::size_t j = 0; j < codebook.size(); ++j) {
        EncNode node;
        node.codevector.assign(codebook[j].begin(), codebook[j].end());
        node.parent_count = set.size();
        VectorSet residuals(set.dim(), set.value_bits());
        std::vector<std::size_t> residual_ids;
        std::vector<double> r(set.dim());
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (assignment[i] != j) {
                continue;
            }
            node.members.push_back(ids[i]);
            double norm_sq = 0.0;
            for (std::size_t h = 0; h < set.dim(); ++h) {
                r[h] = set[i][h] - node.codevector[h];
                norm_sq += r[h] * r[h];
            }
            if (std::sqrt(norm_sq) > config.zero_tolerance) {
                node.continuing.push_back(ids[i]);
                residuals.push_back(r);
                residual_ids.push_back(ids[i]);
            }
        }
        if (node.members.empty()) {
            continue;
        }
        if (!residual_ids.empty()) {
            node.children = build_nodes(state, residuals, residual_ids, depth + 1);
        }
        nodes.push_back(std::move(node));
    }
    return nodes;
}

SeeTree to_see_tree(const std::vector<EncNode>& nodes) {
    SeeTree tree;
    std::size_t max_child_depth = 0;
    for (const EncNode& enc : nodes) {
        SeeNode node;
        node.codevector = enc.codevector;
        node.count = enc.members.size();
        node.parent_count = enc.parent_count;
        node.probability =
            static_cast<double>(node.count) / static_cast<double>(enc.parent_count);
        node.residual_count = enc.continuing.size();
        node.residual_fraction =
            static_cast<double>(node.residual_count) / static_cast<double>(node.count);
        node.children = to_see_tree(enc.children);
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

} // namespace

EncodeResult encode(const ImageGrid& image, const BlockSpec& spec,
                    const SeeConfig& config) {
    const VectorSet blocks = extract_blocks(image, spec);
    const std::size_t m = blocks.size();
    std::vector<std::size_t> ids(m);
    for (std::size_t i = 0; i < m; ++i) {
        ids[i] = i;
    }

    SeeConfig enc_config = config;
    enc_config.strategy = SeeStrategy::greedy;
    enc_config.zero_tolerance = 0.0;
    EncodeState state{&enc_config, m + 2};
    std::vector<EncNode> roots = build_nodes(state, blocks, ids, 0);

    // flatten breadth-first: one concatenated codebook per level
    EncodeResult result;
    result.tree = to_see_tree(roots);
    Container& container = result.container;
    container.width = image.width;
    container.height = image.height;
    container.value_bits = image.bits_per_sample;
    container.block_w = spec.block_w;
    container.block_h = spec.block_h;

    std::vector<std::vector<EncNode*>> levels;
    std::vector<EncNode*> frontier;
    for (EncNode& n : roots) {
        frontier.push_back(&n);
    }
    while (!frontier.empty()) {
        levels.push_back(frontier);
        std::vector<EncNode*> next;
        for (EncNode* n : frontier) {
            for (EncNode& c : n->children) {
                next.push_back(&c);
            }
        }
        frontier = std::move(next);
    }

    // per block: which node covers it at each level, and whether it ends by
    // an exact match (stop symbol) or stays open past the last level
    std::vector<std::vector<const EncNode*>> paths(m);
    std::vector<bool> stops(m, false);
    for (std::size_t level = 0; level < levels.size(); ++level) {
        std::uint64_t node_id = 0;
        for (EncNode* n : levels[level]) {
            n->id = ++node_id; // 1-based; 0 is the stop symbol
            for (std::size_t b : n->members) {
                paths[b].push_back(n);
            }
        }
    }
    for (std::size_t b = 0; b < m; ++b) {
        const EncNode* last = paths[b].back();
        stops[b] = std::find(last->continuing.begin(), last->continuing.end(), b) ==
                   last->continuing.end();
    }

    for (std::size_t level = 0; level < levels.size(); ++level) {
        ContainerLevel out;
        out.sample_bits = level == 0 ? image.bits_per_sample : image.bits_per_sample + 1;
        for (const EncNode* n : levels[level]) {
            std::vector<std::int64_t> code(n->codevector.size());
            for (std::size_t h = 0; h < code.size(); ++h) {
                code[h] = static_cast<std::int64_t>(n->codevector[h]);
            }
            out.codebook.push_back(std::move(code));
        }
        for (std::size_t b = 0; b < m; ++b) {
            if (paths[b].size() > level) {
                out.entries.push_back(static_cast<std::uint32_t>(paths[b][level]->id));
            } else if (paths[b].size() == level && stops[b]) {
                out.entries.push_back(0);
            }
        }
        container.levels.push_back(std::move(out));
    }
    return result;
}

ImageGrid decode(const Container& container, std::size_t depth_limit) {
    const std::size_t m = container.block_count();
    const std::size_t k =
        static_cast<std::size_t>(container.block_w) * container.block_h;
    std::vector<double> sums(m * k, 0.0);
    std::vector<std::size_t> active(m);
    for (std::size_t b = 0; b < m; ++b) {
        active[b] = b;
    }
    const std::size_t use_levels =
        depth_limit == 0 ? container.levels.size()
                         : std::min(depth_limit, container.levels.size());
    for (std::size_t level = 0; level < use_levels; ++level) {
        const ContainerLevel& lv = container.levels[level];
        if (lv.entries.size() != active.size()) {
            throw ParseError("container level " + std::to_string(level) +
                             ": entry count does not match the active block set");
        }
        std::vector<std::size_t> next;
        for (std::size_t e = 0; e < lv.entries.size(); ++e) {
            const std::uint32_t idx = lv.entries[e];
            const std::size_t b = active[e];
            if (idx == 0) {
                continue; // stop symbol: the block is complete
            }
            if (idx > lv.codebook.size()) {
                throw ParseError("container level " + std::to_string(level) +
                                 ": index out of range");
            }
            const auto& code = lv.codebook[idx - 1];
            for (std::size_t h = 0; h < k; ++h) {
                sums[b * k + h] += static_cast<double>(code[h]);
            }
            next.push_back(b);
        }
        active = std::move(next);
    }

    VectorSet vectors(k, container.value_bits);
    for (std::size_t b = 0; b < m; ++b) {
        vectors.push_back({sums.data() + b * k, k});
    }
    return assemble_blocks(vectors, container.width, container.height,
                           container.value_bits,
                           BlockSpec{container.block_w, container.block_h, 0});
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    if (pos + 4 > bytes.size()) {
        throw ParseError("container header truncated", pos);
    }
    const std::uint32_t v = static_cast<std::uint32_t>(bytes[pos]) |
                            (static_cast<std::uint32_t>(bytes[pos + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[pos + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
    pos += 4;
    return v;
}

} // namespace

std::vector<std::uint8_t> serialize(const Container& container) {
    const std::size_t k =
        static_cast<std::size_t>(container.block_w) * container.block_h;
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(kVersion);
    put_u32(out, container.width);
    put_u32(out, container.height);
    put_u32(out, container.value_bits);
    put_u32(out, container.block_w);
    put_u32(out, container.block_h);
    put_u32(out, static_cast<std::uint32_t>(container.levels.size()));
    for (const ContainerLevel& lv : container.levels) {
        put_u32(out, static_cast<std::uint32_t>(lv.codebook.size()));
        put_u32(out, static_cast<std::uint32_t>(lv.entries.size()));
        out.push_back(static_cast<std::uint8_t>(lv.sample_bits));
    }

    BitWriter writer;
    for (std::size_t level = 0; level < container.levels.size(); ++level) {
        const ContainerLevel& lv = container.levels[level];
        const std::int64_t lo = level == 0 ? 0 : -(std::int64_t{1} << (lv.sample_bits - 1));
        const std::int64_t hi = level == 0 ? (std::int64_t{1} << lv.sample_bits) - 1
                                           : (std::int64_t{1} << (lv.sample_bits - 1)) - 1;
        const std::uint32_t mask = (lv.sample_bits >= 32)
                                       ? 0xffffffffu
                                       : ((1u << lv.sample_bits) - 1u);
        for (const auto& code : lv.codebook) {
            if (code.size() != k) {
                throw InvalidInput("serialize: codevector dimension mismatch");
            }
            for (std::int64_t v : code) {
                if (v < lo || v > hi) {
                    throw InvalidInput("serialize: codevector sample out of range");
                }
                writer.write(static_cast<std::uint32_t>(v) & mask, lv.sample_bits);
            }
        }
        writer.align();
    }
    for (const ContainerLevel& lv : container.levels) {
        const unsigned width = index_width(lv.codebook.size());
        for (std::uint32_t e : lv.entries) {
            writer.write(e, width);
        }
        writer.align();
    }
    const std::vector<std::uint8_t> payload = writer.take();
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Container parse_container(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
        throw ParseError("container: bad magic", 0);
    }
    std::size_t pos = 4;
    if (pos >= bytes.size() || bytes[pos] != kVersion) {
        throw ParseError("container: unsupported version", pos);
    }
    ++pos;

    Container container;
    container.width = get_u32(bytes, pos);
    container.height = get_u32(bytes, pos);
    container.value_bits = get_u32(bytes, pos);
    container.block_w = get_u32(bytes, pos);
    container.block_h = get_u32(bytes, pos);
    const std::uint32_t depth = get_u32(bytes, pos);
    if (container.width == 0 || container.height == 0) {
        throw ParseError("container: zero image dimension", 5);
    }
    if (container.value_bits != 8 && container.value_bits != 16) {
        throw ParseError("container: sample depth must be 8 or 16", 13);
    }
    if (container.block_w == 0 || container.block_h == 0) {
        throw ParseError("container: zero block dimension", 17);
    }
    if (depth == 0) {
        throw ParseError("container: must have at least one level", 25);
    }

    struct LevelHeader {
        std::uint32_t n = 0;
        std::uint32_t m = 0;
        unsigned sample_bits = 0;
    };
    std::vector<LevelHeader> headers(depth);
    for (std::uint32_t level = 0; level < depth; ++level) {
        headers[level].n = get_u32(bytes, pos);
        headers[level].m = get_u32(bytes, pos);
        if (pos >= bytes.size()) {
            throw ParseError("container header truncated", pos);
        }
        headers[level].sample_bits = bytes[pos++];
        const unsigned expected =
            level == 0 ? container.value_bits : container.value_bits + 1;
        if (headers[level].sample_bits != expected) {
            throw ParseError("container level " + std::to_string(level) +
                                 ": unexpected sample width",
                             pos - 1);
        }
        if (headers[level].n == 0 || headers[level].m == 0) {
            throw ParseError("container level " + std::to_string(level) +
                                 ": empty codebook or index stream",
                             pos - 9);
        }
    }

    const std::size_t k =
        static_cast<std::size_t>(container.block_w) * container.block_h;
    std::size_t expected_payload = 0;
    for (const LevelHeader& h : headers) {
        expected_payload +=
            (static_cast<std::size_t>(h.n) * k * h.sample_bits + 7) / 8;
        expected_payload +=
            (static_cast<std::size_t>(h.m) * index_width(h.n) + 7) / 8;
    }
    if (bytes.size() != pos + expected_payload) {
        throw ParseError("container: payload length does not match the header "
                         "(expected " +
                             std::to_string(pos + expected_payload) + " bytes, got " +
                             std::to_string(bytes.size()) + ")",
                         std::min(bytes.size(), pos + expected_payload));
    }

    BitReader reader(bytes, pos, bytes.size(), 0);
    for (const LevelHeader& h : headers) {
        ContainerLevel level;
        level.sample_bits = h.sample_bits;
        const bool is_signed = &h != &headers.front();
        for (std::uint32_t j = 0; j < h.n; ++j) {
            std::vector<std::int64_t> code(k);
            for (std::size_t c = 0; c < k; ++c) {
                std::int64_t v = reader.read(h.sample_bits);
                if (is_signed && (v & (std::int64_t{1} << (h.sample_bits - 1)))) {
                    v -= std::int64_t{1} << h.sample_bits;
                }
                code[c] = v;
            }
            level.codebook.push_back(std::move(code));
        }
        reader.align_checked();
        container.levels.push_back(std::move(level));
    }
    for (std::uint32_t level = 0; level < depth; ++level) {
        const unsigned width = index_width(headers[level].n);
        ContainerLevel& lv = container.levels[level];
        for (std::uint32_t e = 0; e < headers[level].m; ++e) {
            const std::uint32_t v = reader.read(width);
            if (v > headers[level].n) {
                throw ParseError("container level " + std::to_string(level) +
                                     ": index out of range",
                                 reader.byte_pos());
            }
            lv.entries.push_back(v);
        }
        reader.align_checked();
    }
    if (!reader.at_end()) {
        throw ParseError("container: trailing payload bytes", reader.byte_pos());
    }

    // the index streams must walk a consistent active-block set
    std::size_t active = container.block_count();
    for (std::uint32_t level = 0; level < depth; ++level) {
        if (headers[level].m != active) {
            throw ParseError("container level " + std::to_string(level) +
                             ": index stream size does not match the active block set");
        }
        std::size_t next = 0;
        for (std::uint32_t e : container.levels[level].entries) {
            if (e != 0) {
                ++next;
            }
        }
        active = next;
    }
    return container;
}

Container load_container_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_container(bytes);
}

void write_container_file(const std::string& path, const Container& container) {
    const std::vector<std::uint8_t> bytes = serialize(container);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ParseError("cannot open file for writing: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

namespace {

// Recomputes the tree value by regrouping blocks along their index paths.
// entries_by_block[b] holds block b's raw entry at each level it appears in.
double see_bits_walk(const std::vector<std::vector<std::uint32_t>>& entries_by_block,
                     const std::vector<std::size_t>& group, std::size_t level,
                     std::size_t total_levels) {
    const double m = static_cast<double>(group.size());
    std::map<std::uint32_t, std::vector<std::size_t>> classes;
    for (std::size_t b : group) {
        classes[entries_by_block[b][level]].push_back(b);
    }
    double bits = 0.0;
    for (const auto& [index, members] : classes) {
        const double p = static_cast<double>(members.size()) / m;
        std::vector<std::size_t> continuing;
        if (level + 1 < total_levels) {
            for (std::size_t b : members) {
                if (entries_by_block[b].size() > level + 1 &&
                    entries_by_block[b][level + 1] != 0) {
                    continuing.push_back(b);
                }
            }
        }
        const double fraction =
            static_cast<double>(continuing.size()) / static_cast<double>(members.size());
        const double child =
            continuing.empty()
                ? 0.0
                : see_bits_walk(entries_by_block, continuing, level + 1, total_levels);
        bits += p * (std::log2(1.0 / p) + 1.0 + fraction * child);
    }
    return bits;
}

} // namespace

double container_see_bits(const Container& container) {
    const std::size_t m = container.block_count();
    std::vector<std::vector<std::uint32_t>> entries_by_block(m);
    std::vector<std::size_t> active(m);
    for (std::size_t b = 0; b < m; ++b) {
        active[b] = b;
    }
    for (const ContainerLevel& lv : container.levels) {
        std::vector<std::size_t> next;
        for (std::size_t e = 0; e < lv.entries.size(); ++e) {
            entries_by_block[active[e]].push_back(lv.entries[e]);
            if (lv.entries[e] != 0) {
                next.push_back(active[e]);
            }
        }
        active = std::move(next);
    }
    if (m == 0) {
        return 0.0;
    }
    std::vector<std::size_t> all(m);
    for (std::size_t b = 0; b < m; ++b) {
        all[b] = b;
    }
    return see_bits_walk(entries_by_block, all, 0, container.levels.size());
}

CompressionReport report(const ImageGrid& original, const Container& container) {
    if (original.width != container.width || original.height != container.height) {
        throw InvalidInput("report: image and container dimensions differ");
    }
    if (container.levels.empty()) {
        throw InvalidInput("report: container has no levels");
    }
    const ImageGrid decoded = decode(container);

    CompressionReport rep;
    const std::size_t k =
        static_cast<std::size_t>(container.block_w) * container.block_h;
    rep.eq3_ratio = compression_ratio(container.value_bits, k,
                                      container.levels.front().codebook.size(),
                                      container.block_count());
    const double raw_bits = static_cast<double>(original.width) * original.height *
                            container.value_bits;
    rep.actual_ratio = raw_bits / (static_cast<double>(serialize(container).size()) * 8.0);
    rep.see_bits = container_see_bits(container);

    // distortion and coverage over in-image pixels only
    const std::uint32_t bx_count = (container.width + container.block_w - 1) / container.block_w;
    const std::uint32_t by_count = (container.height + container.block_h - 1) / container.block_h;
    double sq_error = 0.0;
    for (std::uint32_t by = 0; by < by_count; ++by) {
        for (std::uint32_t bx = 0; bx < bx_count; ++bx) {
            double norm_sq = 0.0;
            for (std::uint32_t dy = 0; dy < container.block_h; ++dy) {
                for (std::uint32_t dx = 0; dx < container.block_w; ++dx) {
                    const std::uint32_t x = bx * container.block_w + dx;
                    const std::uint32_t y = by * container.block_h + dy;
                    if (x >= container.width || y >= container.height) {
                        continue;
                    }
                    const double d = static_cast<double>(original.at(x, y)) -
                                     static_cast<double>(decoded.at(x, y));
                    norm_sq += d * d;
                }
            }
            const double norm = std::sqrt(norm_sq);
            rep.distortion += norm;
            rep.coverage_delta = std::max(rep.coverage_delta, norm);
            sq_error += norm_sq;
        }
    }
    const double pixels = static_cast<double>(container.width) * container.height;
    const double mse = sq_error / pixels;
    const double max_value = static_cast<double>((1u << container.value_bits) - 1u);
    rep.psnr = mse == 0.0 ? std::numeric_limits<double>::infinity()
                          : 10.0 * std::log10(max_value * max_value / mse);
    return rep;
}

} // namespace seequant
