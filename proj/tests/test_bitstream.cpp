#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "prbp/bitstream.hpp"
#include "oracles.hpp"

using namespace prbp;

namespace {

std::string bits_of(const BitWriter& bw) {
    std::string s;
    for (std::uint64_t i = 0; i < bw.bit_count(); ++i) {
        const std::uint8_t byte = bw.bytes()[i >> 3];
        s.push_back(((byte >> (7 - (i & 7))) & 1) ? '1' : '0');
    }
    return s;
}

}  // namespace

TEST_CASE("exp-golomb: code table") {
    auto code = [](std::uint64_t v) {
        BitWriter bw;
        bw.put_ue(v);
        return bits_of(bw);
    };
    CHECK(code(0) == "1");
    CHECK(code(1) == "010");
    CHECK(code(2) == "011");
    CHECK(code(7) == "0001000");
}

TEST_CASE("exp-golomb: matches definition-based oracle on 2000 values") {
    std::mt19937_64 rng(1);
    BitWriter bw;
    std::vector<std::uint64_t> values;
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t v = rng() % 100000;
        values.push_back(v);
        BitWriter single;
        single.put_ue(v);
        CHECK(bits_of(single) == oracle::ue_bits(v));
        bw.put_ue(v);
    }
    BitReader br(bw.bytes());
    for (std::uint64_t v : values) REQUIRE(br.get_ue() == v);
    CHECK(br.only_padding_left());
}

TEST_CASE("signed exp-golomb: mapping and round-trip") {
    auto mapped = [](std::int64_t v) {
        BitWriter a;
        a.put_se(v);
        return bits_of(a);
    };
    auto ue = [](std::uint64_t v) {
        BitWriter w;
        w.put_ue(v);
        return bits_of(w);
    };
    CHECK(mapped(0) == ue(0));
    CHECK(mapped(1) == ue(1));
    CHECK(mapped(-1) == ue(2));
    CHECK(mapped(2) == ue(3));
    CHECK(mapped(-2) == ue(4));

    BitWriter bw;
    for (std::int64_t v = -1000; v <= 1000; ++v) bw.put_se(v);
    BitReader br(bw.bytes());
    for (std::int64_t v = -1000; v <= 1000; ++v) REQUIRE(br.get_se() == v);
}

TEST_CASE("reader: end of stream raises") {
    BitWriter bw;
    bw.put_bits(0b101, 3);
    BitReader br(bw.bytes());
    br.get_bits(8);  // consumes the padded byte
    CHECK_THROWS_AS(br.get_bit(), format_error);
}

TEST_CASE("coefficients: all-zero block is a single end-of-block symbol") {
    BitWriter bw;
    write_coefficients(bw, CoeffBlock(8, 22));
    CHECK(bits_of(bw) == "11");  // ue(0) + se(0)
    BitReader br(bw.bytes());
    const CoeffBlock back = read_coefficients(br, 8, 22);
    CHECK(back.all_zero());
}

TEST_CASE("coefficients: lone DC level") {
    CoeffBlock b(4, 10);
    b.at(0, 0) = 5;
    BitWriter bw;
    write_coefficients(bw, b);
    // run 0 ("1"), level 5 -> se(5)=ue(9)="0001010", EOB "11"
    CHECK(bits_of(bw) == "1" + oracle::ue_bits(9) + "11");
    BitReader br(bw.bytes());
    const CoeffBlock back = read_coefficients(br, 4, 10);
    CHECK(back.at(0, 0) == 5);
    for (int i = 1; i < 16; ++i) CHECK(back.level[static_cast<std::size_t>(i)] == 0);
}

TEST_CASE("coefficients: fuzzed sparse blocks round-trip bit-exactly") {
    std::mt19937 rng(7);
    for (int iter = 0; iter < 400; ++iter) {
        const int n = std::array{4, 8, 16, 32}[rng() % 4];
        CoeffBlock b(n, 22);
        const int nz = static_cast<int>(rng() % 20);
        for (int i = 0; i < nz; ++i) {
            const int pos = static_cast<int>(rng() % static_cast<std::uint32_t>(n * n));
            b.level[static_cast<std::size_t>(pos)] =
                static_cast<std::int32_t>(rng() % 2001) - 1000;
        }
        BitWriter bw;
        write_coefficients(bw, b);
        BitReader br(bw.bytes());
        const CoeffBlock back = read_coefficients(br, n, 22);
        REQUIRE(back.level == b.level);
        REQUIRE(br.bit_position() == bw.bit_count());
    }
}

TEST_CASE("coefficients: run beyond block size is malformed") {
    BitWriter bw;
    bw.put_ue(16);  // run of 16 in a 4x4 block
    bw.put_se(3);
    bw.put_ue(0);
    bw.put_se(0);
    BitReader br(bw.bytes());
    CHECK_THROWS_AS(read_coefficients(br, 4, 22), format_error);
}

TEST_CASE("modes: round-trip in both contexts") {
    for (int m = 0; m < kModeCount; ++m) {
        const auto mode = static_cast<PredMode>(m);
        BitWriter bw;
        write_mode(bw, mode, true);
        BitReader br(bw.bytes());
        CHECK(read_mode(br, true) == mode);
    }
    for (int m = 0; m < kIntraModeCount; ++m) {
        const auto mode = static_cast<PredMode>(m);
        BitWriter bw;
        write_mode(bw, mode, false);
        CHECK(bw.bit_count() == 2);  // intra-only context uses a fixed 2-bit code
        BitReader br(bw.bytes());
        CHECK(read_mode(br, false) == mode);
    }
}

TEST_CASE("modes: inter-band ids get the smallest codewords") {
    auto wire_bits = [](PredMode m) {
        BitWriter bw;
        write_mode(bw, m, true);
        return bw.bit_count();
    };
    CHECK(wire_bits(PredMode::Direct1) == 1);  // ue(0)
    // every inter-band codeword is at most as long as every intra codeword
    for (int inter = 4; inter < kModeCount; ++inter)
        for (int intra = 0; intra < kIntraModeCount; ++intra)
            CHECK(wire_bits(static_cast<PredMode>(inter)) <=
                  wire_bits(static_cast<PredMode>(intra)));
    CHECK(wire_bits(PredMode::BlockWise) < wire_bits(PredMode::IntraVertical));
}

TEST_CASE("modes: inter-band mode in intra-only context is a contract violation") {
    BitWriter bw;
    CHECK_THROWS_AS(write_mode(bw, PredMode::PelRecursive, false), std::invalid_argument);
}

TEST_CASE("header: round-trip is the identity on all fields") {
    StreamHeader h;
    h.width = 48;
    h.height = 32;
    h.bands = 6;
    h.bit_depth = 12;
    h.qp = 27;
    h.inter_band_enabled = true;
    h.ordering_enabled = true;
    h.anchor_band = 2;
    h.band_order = {0, 1, 2, 5, 3, 4};

    BitWriter bw;
    write_header(bw, h);
    BitReader br(bw.bytes());
    const StreamHeader back = read_header(br);
    CHECK(back == h);
    CHECK(br.bit_position() == bw.bit_count());
}

TEST_CASE("header: corrupt magic and bogus permutation rejected") {
    StreamHeader h;
    h.width = 16;
    h.height = 16;
    h.bands = 2;
    h.bit_depth = 8;
    h.band_order = {0, 1};
    BitWriter bw;
    write_header(bw, h);

    auto corrupted = bw.bytes();
    corrupted[0] = 'X';
    BitReader bad(corrupted);
    CHECK_THROWS_AS(read_header(bad), format_error);

    StreamHeader dup = h;
    dup.band_order = {0, 0};
    BitWriter bw2;
    write_header(bw2, dup);
    BitReader br2(bw2.bytes());
    CHECK_THROWS_AS(read_header(br2), format_error);

    StreamHeader future = h;
    future.version = kStreamVersion + 1;
    BitWriter bw3;
    write_header(bw3, future);
    BitReader br3(bw3.bytes());
    CHECK_THROWS_AS(read_header(br3), format_error);
}

TEST_CASE("property: random syntax-element sequences round-trip") {
    std::mt19937_64 rng(12345);
    for (int iter = 0; iter < 100; ++iter) {
        BitWriter bw;
        struct Elem {
            int kind;
            std::int64_t value;
            int width;
        };
        std::vector<Elem> elems;
        const int count = 1 + static_cast<int>(rng() % 200);
        for (int i = 0; i < count; ++i) {
            Elem e{};
            e.kind = static_cast<int>(rng() % 3);
            switch (e.kind) {
                case 0:
                    e.value = static_cast<std::int64_t>(rng() % 1000000);
                    bw.put_ue(static_cast<std::uint64_t>(e.value));
                    break;
                case 1:
                    e.value = static_cast<std::int64_t>(rng() % 2000000) - 1000000;
                    bw.put_se(e.value);
                    break;
                default:
                    e.width = 1 + static_cast<int>(rng() % 32);
                    e.value = static_cast<std::int64_t>(rng() & ((1ull << e.width) - 1));
                    bw.put_bits(static_cast<std::uint64_t>(e.value), e.width);
                    break;
            }
            elems.push_back(e);
        }
        BitReader br(bw.bytes());
        for (const Elem& e : elems) {
            switch (e.kind) {
                case 0: REQUIRE(br.get_ue() == static_cast<std::uint64_t>(e.value)); break;
                case 1: REQUIRE(br.get_se() == e.value); break;
                default: REQUIRE(br.get_bits(e.width) == static_cast<std::uint64_t>(e.value));
            }
        }
        REQUIRE(br.bit_position() == bw.bit_count());
        REQUIRE(br.only_padding_left());
    }
}
