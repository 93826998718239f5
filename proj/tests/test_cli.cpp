#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prbp/prbp.hpp"

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "prbp_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(SPECC_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

int run_capture(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string(SPECC_BIN) + " " + args + " > " +
                            stdout_file.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::uint8_t> slurp_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli: synth -> encode -> decode -> metrics pipeline") {
    const fs::path cube = work_dir() / "cube.raw";
    const fs::path stream = work_dir() / "cube.prbp";
    const fs::path decoded = work_dir() / "decoded.raw";
    const fs::path stats = work_dir() / "stats.csv";

    REQUIRE(run("synth --output " + cube.string() +
                " --width 32 --height 32 --bands 5 --bit-depth 8 --seed 3 --noise 4") == 0);
    REQUIRE(fs::exists(cube));
    REQUIRE(fs::exists(cube.string() + ".json"));

    REQUIRE(run("encode --input " + cube.string() + " --output " + stream.string() +
                " --qp 27 --stats-out " + stats.string()) == 0);
    REQUIRE(fs::exists(stream));
    const std::string stats_text = slurp(stats);
    CHECK(stats_text.find("band,coded_index,refs,bits") == 0);

    REQUIRE(run("decode --input " + stream.string() + " --output " + decoded.string()) == 0);
    REQUIRE(fs::exists(decoded));
    REQUIRE(fs::exists(decoded.string() + ".json"));

    // decoded cube equals the encoder reconstruction (library cross-check)
    const prbp::SpectralCube orig = prbp::load_cube(cube);
    prbp::EncodeOptions opt;
    opt.qp = 27;
    const prbp::EncodeResult enc = prbp::encode_cube(orig, opt);
    const prbp::SpectralCube dec = prbp::load_cube(decoded);
    REQUIRE(dec == enc.reconstruction);

    const fs::path metrics_out = work_dir() / "metrics.txt";
    REQUIRE(run_capture("metrics --reference " + cube.string() + " --test " + decoded.string(),
                        metrics_out) == 0);
    const std::string mtext = slurp(metrics_out);
    CHECK(mtext.find("band,psnr_db,ssim") == 0);
    CHECK(mtext.find("cube,") != std::string::npos);
}

TEST_CASE("cli: reported rate matches the stream size") {
    const fs::path cube = work_dir() / "rate.raw";
    REQUIRE(run("synth --output " + cube.string() +
                " --width 32 --height 32 --bands 4 --bit-depth 8 --seed 12 --noise 3") == 0);
    const fs::path stream = work_dir() / "rate.prbp";
    const fs::path out = work_dir() / "rate.txt";
    REQUIRE(run_capture("encode --input " + cube.string() + " --output " + stream.string() +
                        " --qp 27", out) == 0);
    const std::string text = slurp(out);
    const auto pos = text.find("rate_bpppb ");
    REQUIRE(pos != std::string::npos);
    const double reported = std::stod(text.substr(pos + 11));
    const double expected =
        prbp::bpppb(fs::file_size(stream), 32, 32, 4);
    CHECK_THAT(reported, Catch::Matchers::WithinAbs(expected, 1e-5));
}

TEST_CASE("cli: full pipeline reproduces the inter-band benefit number") {
    // same fixture as the acceptance inter-band criterion: seed 4242, 64x64x8,
    // noise 5.1; sweep both configurations through the binary and compare the
    // BD-rate against the library-computed value
    const fs::path cube = work_dir() / "a3.raw";
    REQUIRE(run("synth --output " + cube.string() +
                " --width 64 --height 64 --bands 8 --bit-depth 8 --seed 4242 --noise 5.1") == 0);
    const fs::path inter_csv = work_dir() / "a3_inter.csv";
    const fs::path intra_csv = work_dir() / "a3_intra.csv";
    REQUIRE(run("rd-sweep --input " + cube.string() + " --output " + inter_csv.string() +
                " --qp-list 22 27 32 37") == 0);
    REQUIRE(run("rd-sweep --input " + cube.string() + " --output " + intra_csv.string() +
                " --qp-list 22 27 32 37 --intra-only") == 0);
    const fs::path bdout = work_dir() / "a3_bd.txt";
    REQUIRE(run_capture("bdrate --reference " + intra_csv.string() + " --test " +
                        inter_csv.string(), bdout) == 0);
    const std::string text = slurp(bdout);
    REQUIRE(text.rfind("BD-rate: ", 0) == 0);
    const double cli_bd = std::stod(text.substr(9));

    // library-side the same computation
    const prbp::SpectralCube fixture = prbp::load_cube(cube);
    auto sweep = [&](bool intra_only) {
        std::vector<prbp::RDPoint> pts;
        for (int qp : {22, 27, 32, 37}) {
            prbp::EncodeOptions opt;
            opt.qp = qp;
            opt.intra_only = intra_only;
            const prbp::EncodeResult r = prbp::encode_cube(fixture, opt);
            pts.push_back({prbp::bpppb(r.stream.size(), 64, 64, 8),
                           prbp::psnr(fixture, r.reconstruction)});
        }
        std::sort(pts.begin(), pts.end(),
                  [](auto a, auto b) { return a.rate < b.rate; });
        return prbp::RDCurve(pts);
    };
    const double lib_bd = prbp::bd_rate(sweep(true), sweep(false));
    CHECK_THAT(cli_bd, Catch::Matchers::WithinAbs(lib_bd, 0.01));
    CHECK(cli_bd <= -30.0);
}

TEST_CASE("cli: encode is deterministic") {
    const fs::path cube = work_dir() / "det.raw";
    REQUIRE(run("synth --output " + cube.string() +
                " --width 32 --height 16 --bands 4 --bit-depth 12 --seed 9 --noise 40") == 0);
    const fs::path s1 = work_dir() / "det1.prbp";
    const fs::path s2 = work_dir() / "det2.prbp";
    REQUIRE(run("encode --input " + cube.string() + " --output " + s1.string() + " --qp 22") == 0);
    REQUIRE(run("encode --input " + cube.string() + " --output " + s2.string() + " --qp 22") == 0);
    REQUIRE(slurp_bytes(s1) == slurp_bytes(s2));
}

TEST_CASE("cli: flag matrix streams decode with the same binary") {
    const fs::path cube = work_dir() / "flags.raw";
    REQUIRE(run("synth --output " + cube.string() +
                " --width 32 --height 32 --bands 5 --bit-depth 8 --seed 4 --noise 3") == 0);
    int variant = 0;
    for (const std::string flags : {"", " --intra-only", " --no-ordering",
                                    " --intra-only --no-ordering", " --anchor 1"}) {
        const fs::path stream = work_dir() / ("flags" + std::to_string(variant) + ".prbp");
        const fs::path out = work_dir() / ("flags" + std::to_string(variant) + ".raw");
        REQUIRE(run("encode --input " + cube.string() + " --output " + stream.string() +
                    " --qp 32" + flags) == 0);
        REQUIRE(run("decode --input " + stream.string() + " --output " + out.string()) == 0);
        ++variant;
    }
}

TEST_CASE("cli: rd-sweep emits monotone rows and bdrate of a curve against itself is zero") {
    const fs::path cube = work_dir() / "sweep.raw";
    REQUIRE(run("synth --output " + cube.string() +
                " --width 32 --height 32 --bands 5 --bit-depth 8 --seed 6 --noise 4") == 0);
    const fs::path curve = work_dir() / "curve.csv";
    REQUIRE(run("rd-sweep --input " + cube.string() + " --output " + curve.string()) == 0);

    std::ifstream in(curve);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "qp,rate_bpppb,psnr_db");
    double prev_rate = 0.0, prev_psnr = 0.0;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string qp_s, rate_s, psnr_s;
        std::getline(ls, qp_s, ',');
        std::getline(ls, rate_s, ',');
        std::getline(ls, psnr_s, ',');
        const double rate = std::stod(rate_s);
        const double psnr = std::stod(psnr_s);
        CHECK(rate > prev_rate);
        CHECK(psnr > prev_psnr);
        prev_rate = rate;
        prev_psnr = psnr;
        ++rows;
    }
    CHECK(rows == 5);

    const fs::path bdout = work_dir() / "bd.txt";
    REQUIRE(run_capture("bdrate --reference " + curve.string() + " --test " + curve.string(),
                        bdout) == 0);
    CHECK(slurp(bdout) == "BD-rate: 0.00 %\n");
}

TEST_CASE("cli: usage errors exit 1") {
    const fs::path cube = work_dir() / "usage.raw";
    REQUIRE(run("synth --output " + cube.string() +
                " --width 16 --height 16 --bands 4 --bit-depth 8 --seed 1 --noise 0") == 0);
    CHECK(run("encode --input " + cube.string() + " --output x.prbp --qp 99") == 1);
    CHECK(run("encode --input " + cube.string() + " --output " + cube.string() + " --qp 22") == 1);
    CHECK(run("nonsense") == 1);
    CHECK(run("encode") == 1);
}

TEST_CASE("cli: data errors exit 2") {
    CHECK(run("decode --input /nonexistent.prbp --output " +
              (work_dir() / "x.raw").string()) == 2);
    CHECK(run("encode --input /nonexistent.raw --output " +
              (work_dir() / "y.prbp").string() + " --qp 22") == 2);

    // corrupt stream
    const fs::path bogus = work_dir() / "bogus.prbp";
    std::ofstream(bogus) << "not a stream at all";
    CHECK(run("decode --input " + bogus.string() + " --output " +
              (work_dir() / "z.raw").string()) == 2);
}
