// seequant — entropy-guided hierarchical residual quantization toolkit.
//
// Exit codes: 0 success, 2 parse/validation error, 3 refusal (a hard cap
// was exceeded).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seequant/container.hpp"
#include "seequant/errors.hpp"
#include "seequant/image.hpp"
#include "seequant/object.hpp"
#include "seequant/parallel.hpp"
#include "seequant/spectral.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace seequant;

std::string fmt_double(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void parse_block(const std::string& text, BlockSpec& spec) {
    const std::size_t x = text.find('x');
    if (x == std::string::npos) {
        throw InvalidInput("--block expects WxH, e.g. 4x4");
    }
    try {
        spec.block_w = static_cast<std::uint32_t>(std::stoul(text.substr(0, x)));
        spec.block_h = static_cast<std::uint32_t>(std::stoul(text.substr(x + 1)));
    } catch (const std::exception&) {
        throw InvalidInput("--block expects WxH, e.g. 4x4");
    }
    if (spec.block_w == 0 || spec.block_h == 0) {
        throw InvalidInput("--block dimensions must be positive");
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ParseError("cannot open file for writing: " + path);
    }
    out << text;
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PointObject load_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::vector<std::vector<double>> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) {
                    ++used;
                }
                if (used != cell.size()) {
                    throw std::invalid_argument(cell);
                }
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": expected a number, got '" + cell + "'");
            }
        }
        if (!points.empty() && row.size() != points.front().size()) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": inconsistent column count");
        }
        points.push_back(std::move(row));
    }
    if (points.empty()) {
        throw ParseError(path + ": no points");
    }
    return PointObject(std::move(points));
}

std::vector<PointObject> load_objects_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw ParseError(path + ": expected an array of objects");
    }
    std::vector<PointObject> objects;
    for (const auto& obj : doc) {
        if (!obj.is_array() || obj.empty()) {
            throw ParseError(path + ": each object must be a non-empty array of points");
        }
        std::vector<std::vector<double>> points;
        for (const auto& pt : obj) {
            if (!pt.is_array()) {
                throw ParseError(path + ": each point must be an array of coordinates");
            }
            std::vector<double> coords;
            for (const auto& c : pt) {
                if (!c.is_number()) {
                    throw ParseError(path + ": coordinates must be numbers");
                }
                coords.push_back(c.get<double>());
            }
            points.push_back(std::move(coords));
        }
        objects.push_back(PointObject(std::move(points)));
    }
    return objects;
}

json tree_to_json(const SeeTree& tree) {
    json out;
    out["total_bits"] = tree.total_bits;
    out["depth"] = tree.depth;
    out["nodes"] = json::array();
    for (const SeeNode& node : tree.nodes) {
        json n;
        n["codevector"] = node.codevector;
        n["count"] = node.count;
        n["parent_count"] = node.parent_count;
        n["residual_count"] = node.residual_count;
        n["info_bits"] = node.info_bits;
        n["children"] = tree_to_json(node.children);
        out["nodes"].push_back(std::move(n));
    }
    return out;
}

std::string report_csv(const CompressionReport& rep) {
    std::string csv = "metric,value\n";
    csv += "eq3_ratio," + fmt_double(rep.eq3_ratio) + "\n";
    csv += "actual_ratio," + fmt_double(rep.actual_ratio) + "\n";
    csv += "distortion," + fmt_double(rep.distortion) + "\n";
    csv += "see_bits," + fmt_double(rep.see_bits) + "\n";
    csv += "coverage_delta," + fmt_double(rep.coverage_delta) + "\n";
    csv += "psnr," + fmt_double(rep.psnr) + "\n";
    return csv;
}

int run_encode(const std::string& in_path, const std::string& out_path,
               const std::string& block_text, std::size_t depth, std::uint64_t seed,
               std::uint32_t pad_value, const std::string& report_path) {
    BlockSpec spec;
    parse_block(block_text, spec);
    spec.pad_value = pad_value;
    const ImageGrid image = load_pgm_file(in_path);
    SeeConfig config;
    config.seed = seed;
    config.max_depth = depth;
    EncodeResult result = encode(image, spec, config);
    write_container_file(out_path, result.container);
    if (!report_path.empty()) {
        write_text_file(report_path, report_csv(report(image, result.container)));
    }
    return 0;
}

int run_decode(const std::string& in_path, const std::string& out_path,
               std::size_t depth) {
    const Container container = load_container_file(in_path);
    write_pgm_file(out_path, decode(container, depth));
    return 0;
}

int run_analyze(const std::string& in_path, const std::string& block_text, double a,
                double b, std::uint64_t seed, const std::string& out_path,
                const std::string& tree_path) {
    BlockSpec spec;
    parse_block(block_text, spec);
    const ImageGrid image = load_pgm_file(in_path);
    const VectorSet blocks = extract_blocks(image, spec);

    SeeConfig config;
    config.strategy = SeeStrategy::greedy;
    config.seed = seed;
    auto [see_bits, tree] = see_estimate(blocks, config);

    Codebook first_level(blocks.dim());
    for (const SeeNode& node : tree.nodes) {
        first_level.push_back(node.codevector);
    }
    double delta = 0.0;
    double entropy_bits = 0.0;
    std::size_t first_n = tree.nodes.size();
    if (first_n == 0) {
        // degenerate single-block image: the block is its own codebook
        first_n = 1;
        delta = 0.0;
        entropy_bits = 0.0;
    } else {
        const Assignment assignment = classify_all(blocks, first_level);
        delta = coverage_radius(blocks, first_level, assignment);
        entropy_bits = shannon_entropy(
            empirical_distribution(assignment, first_level.size(), blocks.size())
                .probabilities);
    }
    EntropyObjectiveParams params{a, b};
    if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0)) {
        throw InvalidInput("--a and --b must be >= 0 and not both zero");
    }

    std::string csv = "metric,value\n";
    csv += "width," + std::to_string(image.width) + "\n";
    csv += "height," + std::to_string(image.height) + "\n";
    csv += "value_bits," + std::to_string(image.bits_per_sample) + "\n";
    csv += "block_w," + std::to_string(spec.block_w) + "\n";
    csv += "block_h," + std::to_string(spec.block_h) + "\n";
    csv += "vector_count," + std::to_string(blocks.size()) + "\n";
    csv += "dim," + std::to_string(blocks.dim()) + "\n";
    csv += "see_bits," + fmt_double(see_bits) + "\n";
    csv += "tree_depth," + std::to_string(tree.depth) + "\n";
    csv += "tree_storage_bits," +
           std::to_string(tree_storage_bits(tree, image.bits_per_sample, blocks.dim(),
                                            blocks.size())) +
           "\n";
    csv += "first_level_codebook," + std::to_string(first_n) + "\n";
    csv += "coverage_delta," + fmt_double(delta) + "\n";
    csv += "entropy_bits," + fmt_double(entropy_bits) + "\n";
    csv += "entropy_objective," + fmt_double(a * delta + b * entropy_bits) + "\n";
    csv += "eq3_ratio," +
           fmt_double(compression_ratio(image.bits_per_sample, blocks.dim(), first_n,
                                        blocks.size())) +
           "\n";
    write_text_file(out_path, csv);
    if (!tree_path.empty()) {
        write_text_file(tree_path, tree_to_json(tree).dump(2) + "\n");
    }
    return 0;
}

int run_spectrum(const std::string& in_path, const std::string& block_text, double step,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& gates_path) {
    BlockSpec spec;
    parse_block(block_text, spec);
    const ImageGrid image = load_pgm_file(in_path);
    const SpectrumGrid spectrum = dft2(image);
    SpectrumQuantizer quant;
    quant.step = step > 0.0 ? step : default_spectrum_step(spectrum);
    SeeConfig config;
    config.seed = seed;

    std::string csv = "block_x,block_y,band,re_bits,im_bits,total_bits\n";
    for (const SpectrumProfileRow& row : spectrum_profile(spectrum, spec, quant, config)) {
        csv += std::to_string(row.block_x) + "," + std::to_string(row.block_y) + "," +
               std::to_string(row.band) + "," + fmt_double(row.re_bits) + "," +
               fmt_double(row.im_bits) + "," + fmt_double(row.total_bits) + "\n";
    }
    write_text_file(out_path, csv);

    if (!gates_path.empty()) {
        std::vector<CompressionOperator> ops;
        ops.push_back({GateKind::identity, {}, "identity"});
        ops.push_back({GateKind::dft_roundtrip, {}, "dft_roundtrip"});
        const std::size_t count = spectrum.coefficients.size();
        std::vector<std::uint8_t> dc(count, 0);
        dc[0] = 1;
        ops.push_back({GateKind::dft_truncate, dc, "dc_only"});
        std::vector<std::uint8_t> low(count, 0);
        for (std::uint32_t w2 = 0; w2 < image.height; ++w2) {
            for (std::uint32_t w1 = 0; w1 < image.width; ++w1) {
                const std::uint32_t fx = std::min(w1, image.width - w1);
                const std::uint32_t fy = std::min(w2, image.height - w2);
                if (fx <= image.width / 4 && fy <= image.height / 4) {
                    low[static_cast<std::size_t>(w2) * image.width + w1] = 1;
                }
            }
        }
        ops.push_back({GateKind::dft_truncate, low, "low_quarter"});

        std::string gates = "operator,residual,bits,ratio\n";
        for (const GateRow& row : gate_entropy_table(image, ops, spec, quant, config)) {
            gates += row.name + "," + fmt_double(row.residual) + "," +
                     fmt_double(row.bits) + "," + fmt_double(row.ratio) + "\n";
        }
        write_text_file(gates_path, gates);
    }
    return 0;
}

int run_object_chi(const std::string& a_path, const std::string& b_path, bool search,
                   double alpha, std::uint64_t gamma) {
    const PointObject a = load_points_csv(a_path);
    const PointObject b = load_points_csv(b_path);
    if (search) {
        const MatchResult match = best_match(a, b);
        std::cout << "chi," << fmt_double(match.chi) << "\n";
        std::cout << "alpha," << fmt_double(match.params.alpha) << "\n";
        std::cout << "gamma," << match.params.gamma << "\n";
    } else {
        if (alpha <= 0.0) {
            throw InvalidInput("--alpha must be positive");
        }
        std::cout << "chi," << fmt_double(chi_distance(a, b, MatchParams{alpha, gamma}))
                  << "\n";
    }
    return 0;
}

int run_object_see(const std::string& in_path) {
    const std::vector<PointObject> objects = load_objects_json(in_path);
    SeeConfig config;
    std::cout << "objects," << objects.size() << "\n";
    std::cout << "see_bits," << fmt_double(object_see(objects, config)) << "\n";
    return 0;
}

int run_object_partition(const std::string& in_path, std::size_t max_cell) {
    const PointObject object = load_points_csv(in_path);
    SeeConfig config;
    const PartitionResult result = min_partition_see(object, max_cell, config);
    std::size_t cells = 0;
    for (std::size_t c : result.cell_of) {
        cells = std::max(cells, c + 1);
    }
    std::cout << "bits," << fmt_double(result.bits) << "\n";
    std::cout << "cells," << cells << "\n";
    std::cout << "cell_of,";
    for (std::size_t i = 0; i < result.cell_of.size(); ++i) {
        std::cout << (i ? " " : "") << result.cell_of[i];
    }
    std::cout << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"seequant: entropy-guided hierarchical residual vector quantization"};
    app.require_subcommand(1);

    unsigned threads = 1;
    app.add_option("--threads", threads, "cap on worker threads")->capture_default_str();

    std::string in_path, out_path, report_path, tree_path, gates_path;
    std::string block_text = "4x4";
    std::size_t depth = 0;
    std::uint64_t seed = 0;
    std::uint32_t pad_value = 0;

    auto* enc = app.add_subcommand("encode", "compress a PGM image into a SEEQ container");
    enc->add_option("--in", in_path, "input PGM (binary P5)")->required();
    enc->add_option("--out", out_path, "output .seeq container")->required();
    enc->add_option("--block", block_text, "block size WxH")->capture_default_str();
    enc->add_option("--depth", depth, "tree depth limit; 0 = unbounded (lossless)")
        ->capture_default_str();
    enc->add_option("--seed", seed, "training seed")->capture_default_str();
    enc->add_option("--pad", pad_value, "padding sample value")->capture_default_str();
    enc->add_option("--report", report_path, "also write a compression report CSV");

    auto* dec = app.add_subcommand("decode", "reconstruct a PGM from a SEEQ container");
    dec->add_option("--in", in_path, "input .seeq container")->required();
    dec->add_option("--out", out_path, "output PGM")->required();
    dec->add_option("--depth", depth, "decode only the first D levels; 0 = all")
        ->capture_default_str();

    double obj_a = 1.0;
    double obj_b = 1.0;
    auto* ana = app.add_subcommand("analyze", "greedy SEE analysis of an image");
    ana->add_option("--in", in_path, "input PGM")->required();
    ana->add_option("--block", block_text, "block size WxH")->capture_default_str();
    ana->add_option("--a", obj_a, "radius weight of the entropy objective")
        ->capture_default_str();
    ana->add_option("--b", obj_b, "entropy weight of the entropy objective")
        ->capture_default_str();
    ana->add_option("--seed", seed, "training seed")->capture_default_str();
    ana->add_option("--out", out_path, "metrics CSV")->required();
    ana->add_option("--tree", tree_path, "also dump the SEE tree as JSON");

    double step = 0.0;
    auto* spe = app.add_subcommand("spectrum", "per-block SEE profile of the DFT spectrum");
    spe->add_option("--in", in_path, "input PGM")->required();
    spe->add_option("--block", block_text, "block size WxH")->capture_default_str();
    spe->add_option("--step", step, "quantization step; 0 = automatic")
        ->capture_default_str();
    spe->add_option("--seed", seed, "training seed")->capture_default_str();
    spe->add_option("--out", out_path, "profile CSV")->required();
    spe->add_option("--gates", gates_path, "also write the compression-gate table CSV");

    auto* obj = app.add_subcommand("object", "object-quantization calculus");
    obj->require_subcommand(1);

    std::string a_path, b_path;
    bool search = false;
    double alpha = 1.0;
    std::uint64_t gamma = 0;
    auto* chi = obj->add_subcommand("chi", "chi distance between two point objects");
    chi->add_option("--a", a_path, "first object (points CSV)")->required();
    chi->add_option("--b", b_path, "second object (points CSV)")->required();
    chi->add_flag("--search", search, "search all permutations for the best match");
    chi->add_option("--alpha", alpha, "projection parameter")->capture_default_str();
    chi->add_option("--gamma", gamma, "permutation index")->capture_default_str();

    auto* osee = obj->add_subcommand("see", "SEE of a set of objects");
    osee->add_option("--in", in_path, "objects JSON (array of point arrays)")->required();

    std::size_t max_cell = 0;
    auto* opart = obj->add_subcommand("partition", "partition with minimal object SEE");
    opart->add_option("--in", in_path, "points CSV")->required();
    opart->add_option("--max-cell", max_cell, "cell size cap; 0 = unrestricted")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        seequant::set_max_threads(threads);
        if (enc->parsed()) {
            return run_encode(in_path, out_path, block_text, depth, seed, pad_value,
                              report_path);
        }
        if (dec->parsed()) {
            return run_decode(in_path, out_path, depth);
        }
        if (ana->parsed()) {
            return run_analyze(in_path, block_text, obj_a, obj_b, seed, out_path,
                               tree_path);
        }
        if (spe->parsed()) {
            return run_spectrum(in_path, block_text, step, seed, out_path, gates_path);
        }
        if (obj->parsed()) {
            if (chi->parsed()) {
                return run_object_chi(a_path, b_path, search, alpha, gamma);
            }
            if (osee->parsed()) {
                return run_object_see(in_path);
            }
            if (opart->parsed()) {
                return run_object_partition(in_path, max_cell);
            }
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const seequant::Refusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
