// specc: command-line front end for the prbp multispectral codec.
//
// Subcommands: encode, decode, metrics, rd-sweep, bdrate, synth.
// Exit codes: 0 success, 1 usage error, 2 data/format error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prbp/prbp.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

prbp::SpectralCube load_input_cube(const std::string& path,
                                   const std::optional<std::string>& descriptor) {
    if (fs::is_directory(path)) return prbp::load_cube_pgm_dir(path);
    const std::string desc_path = descriptor.value_or(path + ".json");
    return prbp::load_cube(path, prbp::load_descriptor(desc_path));
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw prbp::io_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw prbp::io_error("write failed: " + path);
}

std::string stats_csv(const prbp::EncodeResult& result, int width, int height) {
    std::ostringstream os;
    os << "band,coded_index,refs,bits,rate_bpppb,psnr_db,leaves,inter_leaves";
    for (int m = 0; m < prbp::kModeCount; ++m)
        os << ",n_" << prbp::mode_name(static_cast<prbp::PredMode>(m));
    os << "\n";
    const double pixels = static_cast<double>(width) * height;
    for (std::size_t k = 0; k < result.stats.bands.size(); ++k) {
        const auto& b = result.stats.bands[k];
        os << b.original_band << "," << k << ",";
        if (b.refs_available) {
            os << b.reference_bands[0] << ";" << b.reference_bands[1] << ";"
               << b.reference_bands[2];
        } else {
            os << "none";
        }
        char num[64];
        std::snprintf(num, sizeof(num), ",%llu,%.6f,%.4f",
                      static_cast<unsigned long long>(b.bits),
                      static_cast<double>(b.bits) / pixels, b.psnr);
        os << num << "," << b.leaves << "," << b.inter_leaves;
        for (int m = 0; m < prbp::kModeCount; ++m) os << "," << b.mode_counts[static_cast<std::size_t>(m)];
        os << "\n";
    }
    return os.str();
}

struct CurveRow {
    int qp;
    double rate;
    double psnr;
};

std::string curve_csv(const std::vector<CurveRow>& rows) {
    std::ostringstream os;
    os << "qp,rate_bpppb,psnr_db\n";
    for (const CurveRow& r : rows) {
        char line[96];
        if (std::isfinite(r.psnr))
            std::snprintf(line, sizeof(line), "%d,%.8f,%.6f\n", r.qp, r.rate, r.psnr);
        else
            std::snprintf(line, sizeof(line), "%d,%.8f,inf\n", r.qp, r.rate);
        os << line;
    }
    return os.str();
}

// Reads a sweep CSV back into an RD curve; rows with non-finite PSNR are
// excluded, remaining points sorted by rate.
prbp::RDCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw prbp::io_error("cannot open curve CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw prbp::format_error("empty curve CSV: " + path);
    std::vector<prbp::RDPoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string qp_s, rate_s, psnr_s;
        if (!std::getline(ls, qp_s, ',') || !std::getline(ls, rate_s, ',') ||
            !std::getline(ls, psnr_s, ','))
            throw prbp::format_error("malformed curve row: " + line);
        if (psnr_s == "inf") continue;
        try {
            points.push_back({std::stod(rate_s), std::stod(psnr_s)});
        } catch (const std::exception&) {
            throw prbp::format_error("malformed curve row: " + line);
        }
    }
    std::sort(points.begin(), points.end(),
              [](const prbp::RDPoint& a, const prbp::RDPoint& b) { return a.rate < b.rate; });
    try {
        return prbp::RDCurve(points);
    } catch (const std::invalid_argument& e) {
        throw prbp::format_error(std::string("curve CSV invalid: ") + e.what());
    }
}

struct EncodeArgs {
    std::string input;
    std::optional<std::string> descriptor;
    std::string output;
    int qp = 22;
    bool intra_only = false;
    bool no_ordering = false;
    int anchor = 2;
    std::optional<std::string> stats_out;
};

prbp::EncodeResult run_encode(const EncodeArgs& a, bool quiet) {
    const prbp::SpectralCube cube = load_input_cube(a.input, a.descriptor);
    prbp::EncodeOptions opt;
    opt.qp = a.qp;
    opt.intra_only = a.intra_only;
    opt.enable_ordering = !a.no_ordering;
    opt.anchor_band = a.anchor;
    prbp::EncodeResult result = prbp::encode_cube(cube, opt);

    prbp::detail::write_file(a.output, result.stream.data(), result.stream.size());
    if (a.stats_out) write_text_file(*a.stats_out, stats_csv(result, cube.width, cube.height));

    if (!quiet) {
        const double rate =
            prbp::bpppb(result.stream.size(), cube.width, cube.height, cube.band_count());
        std::printf("rate_bpppb %.6f\n", rate);
        for (std::size_t k = 0; k < result.stats.bands.size(); ++k) {
            const auto& b = result.stats.bands[k];
            std::printf("band %d psnr_db %.4f\n", b.original_band, b.psnr);
        }
        std::printf("inter_band_share %.4f\n", result.stats.inter_band_share());
    }
    return result;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prbp multispectral cube codec"};
    app.require_subcommand(1);

    // ---- encode ----
    EncodeArgs enc;
    CLI::App* cmd_encode = app.add_subcommand("encode", "encode a cube to a .prbp stream");
    cmd_encode->add_option("--input", enc.input, "raw cube file or PGM directory")->required();
    std::string enc_descriptor;
    CLI::Option* enc_desc_opt =
        cmd_encode->add_option("--descriptor", enc_descriptor, "descriptor JSON (default: <input>.json)");
    cmd_encode->add_option("--output", enc.output, "output .prbp path")->required();
    cmd_encode->add_option("--qp", enc.qp, "quantization parameter")->check(CLI::Range(0, 51));
    cmd_encode->add_flag("--intra-only", enc.intra_only, "disable inter-band modes");
    cmd_encode->add_flag("--no-ordering", enc.no_ordering, "keep original band order");
    cmd_encode->add_option("--anchor", enc.anchor, "anchor band for ordering")->check(CLI::NonNegativeNumber);
    std::string enc_stats;
    CLI::Option* enc_stats_opt = cmd_encode->add_option("--stats-out", enc_stats, "per-band stats CSV");

    // ---- decode ----
    std::string dec_input, dec_output;
    bool dec_big_endian = false;
    CLI::App* cmd_decode = app.add_subcommand("decode", "decode a .prbp stream to raw + descriptor");
    cmd_decode->add_option("--input", dec_input, "input .prbp path")->required();
    cmd_decode->add_option("--output", dec_output, "output raw cube path")->required();
    cmd_decode->add_flag("--big-endian", dec_big_endian, "write 16-bit samples big-endian");

    // ---- metrics ----
    std::string met_ref, met_test;
    std::optional<std::string> met_ref_desc, met_test_desc;
    std::string met_ref_desc_s, met_test_desc_s;
    CLI::App* cmd_metrics = app.add_subcommand("metrics", "PSNR/SSIM between two cubes");
    cmd_metrics->add_option("--reference", met_ref, "reference cube")->required();
    cmd_metrics->add_option("--test", met_test, "test cube")->required();
    CLI::Option* met_rd = cmd_metrics->add_option("--reference-descriptor", met_ref_desc_s, "");
    CLI::Option* met_td = cmd_metrics->add_option("--test-descriptor", met_test_desc_s, "");

    // ---- rd-sweep ----
    EncodeArgs swp;
    std::vector<int> swp_qps{17, 22, 27, 32, 37};
    std::string swp_output;
    CLI::App* cmd_sweep = app.add_subcommand("rd-sweep", "encode at a QP list and emit an RD curve CSV");
    cmd_sweep->add_option("--input", swp.input, "raw cube file or PGM directory")->required();
    std::string swp_descriptor;
    CLI::Option* swp_desc_opt = cmd_sweep->add_option("--descriptor", swp_descriptor, "descriptor JSON");
    cmd_sweep->add_option("--output", swp_output, "output curve CSV")->required();
    cmd_sweep->add_option("--qp-list", swp_qps, "QP values")->check(CLI::Range(0, 51));
    cmd_sweep->add_flag("--intra-only", swp.intra_only, "disable inter-band modes");
    cmd_sweep->add_flag("--no-ordering", swp.no_ordering, "keep original band order");
    cmd_sweep->add_option("--anchor", swp.anchor, "anchor band for ordering")->check(CLI::NonNegativeNumber);

    // ---- bdrate ----
    std::string bd_ref, bd_test;
    CLI::App* cmd_bdrate = app.add_subcommand("bdrate", "BD-rate between two RD curve CSVs");
    cmd_bdrate->add_option("--reference", bd_ref, "reference curve CSV")->required();
    cmd_bdrate->add_option("--test", bd_test, "test curve CSV")->required();

    // ---- synth ----
    std::string syn_output;
    int syn_w = 64, syn_h = 64, syn_bands = 8, syn_depth = 8;
    std::uint64_t syn_seed = 1;
    double syn_noise = 0.0;
    CLI::App* cmd_synth = app.add_subcommand("synth", "write a synthetic correlated cube (raw + descriptor)");
    cmd_synth->add_option("--output", syn_output, "output raw cube path")->required();
    cmd_synth->add_option("--width", syn_w, "width");
    cmd_synth->add_option("--height", syn_h, "height");
    cmd_synth->add_option("--bands", syn_bands, "bands (>= 4)");
    cmd_synth->add_option("--bit-depth", syn_depth, "bit depth (8..16)");
    cmd_synth->add_option("--seed", syn_seed, "RNG seed");
    cmd_synth->add_option("--noise", syn_noise, "noise amplitude in sample units");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (cmd_encode->parsed()) {
            if (enc_desc_opt->count()) enc.descriptor = enc_descriptor;
            if (enc_stats_opt->count()) enc.stats_out = enc_stats;
            if (enc.input == enc.output) {
                std::fprintf(stderr, "error: input and output paths must differ\n");
                return kExitUsage;
            }
            run_encode(enc, false);
        } else if (cmd_decode->parsed()) {
            if (dec_input == dec_output) {
                std::fprintf(stderr, "error: input and output paths must differ\n");
                return kExitUsage;
            }
            const auto stream = prbp::detail::read_file(dec_input);
            const prbp::SpectralCube cube = prbp::decode_cube(stream);
            prbp::store_cube(cube, dec_output,
                             dec_big_endian ? prbp::Endianness::Big : prbp::Endianness::Little);
        } else if (cmd_metrics->parsed()) {
            if (met_rd->count()) met_ref_desc = met_ref_desc_s;
            if (met_td->count()) met_test_desc = met_test_desc_s;
            const prbp::SpectralCube a = load_input_cube(met_ref, met_ref_desc);
            const prbp::SpectralCube b = load_input_cube(met_test, met_test_desc);
            if (a.width != b.width || a.height != b.height ||
                a.band_count() != b.band_count() || a.bit_depth != b.bit_depth)
                throw prbp::format_error("cube shapes differ");
            std::printf("band,psnr_db,ssim\n");
            for (int i = 0; i < a.band_count(); ++i) {
                const double p = prbp::psnr(a.band(i), b.band(i));
                const double s = prbp::ssim(a.band(i), b.band(i));
                if (std::isfinite(p))
                    std::printf("%d,%.6f,%.8f\n", i, p, s);
                else
                    std::printf("%d,inf,%.8f\n", i, s);
            }
            const double cube_psnr = prbp::psnr(a, b);
            if (std::isfinite(cube_psnr))
                std::printf("cube,%.6f,\n", cube_psnr);
            else
                std::printf("cube,inf,\n");
        } else if (cmd_sweep->parsed()) {
            if (swp_desc_opt->count()) swp.descriptor = swp_descriptor;
            if (swp.input == swp_output) {
                std::fprintf(stderr, "error: input and output paths must differ\n");
                return kExitUsage;
            }
            const prbp::SpectralCube cube = load_input_cube(swp.input, swp.descriptor);
            std::vector<int> qps = swp_qps;
            std::sort(qps.begin(), qps.end(), std::greater<>());  // ascending rate
            std::vector<CurveRow> rows;
            for (int qp : qps) {
                prbp::EncodeOptions opt;
                opt.qp = qp;
                opt.intra_only = swp.intra_only;
                opt.enable_ordering = !swp.no_ordering;
                opt.anchor_band = swp.anchor;
                const prbp::EncodeResult r = prbp::encode_cube(cube, opt);
                rows.push_back({qp,
                                prbp::bpppb(r.stream.size(), cube.width, cube.height,
                                            cube.band_count()),
                                prbp::psnr(cube, r.reconstruction)});
            }
            write_text_file(swp_output, curve_csv(rows));
        } else if (cmd_bdrate->parsed()) {
            const prbp::RDCurve ref = load_curve_csv(bd_ref);
            const prbp::RDCurve test = load_curve_csv(bd_test);
            std::printf("BD-rate: %.2f %%\n", prbp::bd_rate(ref, test));
        } else if (cmd_synth->parsed()) {
            if (syn_bands < 4 || syn_w < 4 || syn_h < 4 || !prbp::valid_bit_depth(syn_depth)) {
                std::fprintf(stderr, "error: synth needs bands >= 4, dims >= 4, bit depth 8..16\n");
                return kExitUsage;
            }
            const prbp::SpectralCube cube = prbp::synthesize_correlated_cube(
                syn_w, syn_h, syn_bands, syn_depth, syn_seed, syn_noise);
            prbp::store_cube(cube, syn_output);
        }
    } catch (const prbp::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}
