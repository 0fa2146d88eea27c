#include <doctest.h>

#include <random>

#include "govi/error.hpp"
#include "govi/mp4_demux.hpp"
#include "oracles.hpp"

using namespace govi;
using namespace govi::mp4;
using oracle::Bytes;

namespace {

Errc code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::InvalidArgument;
}

std::vector<std::uint8_t> payload(std::size_t words, std::uint8_t seed)
{
    std::vector<std::uint8_t> b(words * 4);
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = std::uint8_t(seed + i * 7);
    return b;
}

std::size_t find_last(const std::vector<std::uint8_t>& bytes, const char* tag)
{
    for (std::size_t i = bytes.size() - 4; i-- > 0;)
        if (std::equal(tag, tag + 4, bytes.begin() + std::ptrdiff_t(i)))
            return i;
    FAIL("tag not found");
    return 0;
}

} // namespace

TEST_CASE("minimal ftyp + moov file gives two top-level boxes")
{
    Bytes ftyp;
    ftyp.be32(24).tag("ftyp").tag("mp41").be32(0).tag("mp41").tag("isom");
    Bytes file;
    file.raw(ftyp.v).raw(oracle::box("moov", {}));
    REQUIRE(file.size() == 32);

    MemorySource src(file.v);
    auto tree = parse_box_tree(src);
    REQUIRE(tree.boxes.size() == 2);
    CHECK(tree.boxes[0].header.type == FourCC("ftyp"));
    CHECK(tree.boxes[0].header.size == 24);
    CHECK(tree.boxes[0].header.offset == 0);
    CHECK(tree.boxes[0].header.header_len == 8);
    CHECK(tree.boxes[1].header.type == FourCC("moov"));
    CHECK(tree.boxes[1].header.size == 8);
    CHECK(tree.boxes[1].header.offset == 24);
    CHECK(tree.boxes[1].children.empty());
    CHECK(tree.file_size == 32);
}

TEST_CASE("box parsing errors")
{
    SUBCASE("empty file")
    {
        MemorySource src({});
        CHECK(code_of([&] { parse_box_tree(src); }) == Errc::NotMp4);
    }
    SUBCASE("declared size beyond the end of the file")
    {
        Bytes b;
        b.be32(0xFFFFFFFF).tag("ftyp").tag("isom").be32(0);
        MemorySource src(b.v);
        CHECK(code_of([&] { parse_box_tree(src); }) == Errc::TruncatedFile);
    }
    SUBCASE("size smaller than the header")
    {
        Bytes b;
        b.raw(oracle::box("ftyp", {0, 0, 0, 0})).be32(4).tag("moov");
        MemorySource src(b.v);
        CHECK(code_of([&] { parse_box_tree(src); }) == Errc::MalformedBox);
    }
    SUBCASE("child overflowing its parent")
    {
        Bytes moov;
        moov.be32(16).tag("moov").be32(32).tag("trak");
        Bytes b;
        b.raw(oracle::box("ftyp", {0, 0, 0, 0})).raw(moov.v).raw(std::vector<std::uint8_t>(64, 0));
        MemorySource src(b.v);
        CHECK(code_of([&] { parse_box_tree(src); }) == Errc::TruncatedFile);
    }
    SUBCASE("size 0 is only allowed at top level")
    {
        Bytes moov;
        moov.be32(16).tag("moov").be32(0).tag("trak");
        Bytes b;
        b.raw(oracle::box("ftyp", {0, 0, 0, 0})).raw(moov.v);
        MemorySource src(b.v);
        CHECK(code_of([&] { parse_box_tree(src); }) == Errc::MalformedBox);
    }
    SUBCASE("not an MP4 at all")
    {
        std::vector<std::uint8_t> text(64, 'a');
        MemorySource src(text);
        CHECK(code_of([&] { parse_box_tree(src); }) == Errc::NotMp4);
    }
}

TEST_CASE("64-bit box sizes and size 0 at top level")
{
    Bytes b;
    b.raw(oracle::box("ftyp", {'i', 's', 'o', 'm'}));
    b.be32(1).tag("free").be64(16 + 8).be64(0);   // largesize form
    b.be32(0).tag("mdat").be32(0xDEADBEEF).be32(1); // runs to end of file
    MemorySource src(b.v);
    auto tree = parse_box_tree(src);
    REQUIRE(tree.boxes.size() == 3);
    CHECK(tree.boxes[1].header.header_len == 16);
    CHECK(tree.boxes[1].header.size == 24);
    CHECK(tree.boxes[2].header.type == FourCC("mdat"));
    CHECK(tree.boxes[2].header.end() == b.size());
}

TEST_CASE("fixture with a video track and a 3-sample telemetry track")
{
    std::vector<FixtureSample> samples{{payload(3, 1), 1010}, {payload(5, 2), 1010}, {payload(2, 3), 980}};
    auto bytes = write_fixture_mp4(samples);
    MemorySource src(bytes);
    auto tree = parse_box_tree(src);
    auto table = find_gpmf_track(tree, src);
    CHECK(table.sample_format == FourCC("gpmd"));
    CHECK(table.handler == FourCC("meta"));
    CHECK(table.timescale == 1000);
    REQUIRE(table.samples.size() == 3);
    CHECK(table.samples[0].decode_time == 0);
    CHECK(table.samples[1].decode_time == 1010);
    CHECK(table.samples[2].decode_time == 2020);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(table.samples[i].size == samples[i].bytes.size());
        // the offset must point at the sample bytes
        CHECK(std::equal(samples[i].bytes.begin(), samples[i].bytes.end(),
                         bytes.begin() + std::ptrdiff_t(table.samples[i].file_offset)));
    }

    auto payloads = extract_payloads(table, src);
    REQUIRE(payloads.size() == 3);
    CHECK(payloads[0].start_time == 0.0);
    CHECK(payloads[1].start_time == doctest::Approx(1.010).epsilon(1e-12));
    CHECK(payloads[2].start_time == doctest::Approx(2.020).epsilon(1e-12));
    CHECK(payloads[2].duration == doctest::Approx(0.980).epsilon(1e-12));
}

TEST_CASE("telemetry track is found by sample format")
{
    FixtureOptions opts;
    opts.include_telemetry_track = false;
    auto bytes = write_fixture_mp4(std::vector<FixtureSample>{{payload(1, 0), 1000}}, opts);
    MemorySource src(bytes);
    auto tree = parse_box_tree(src);
    CHECK(code_of([&] { find_gpmf_track(tree, src); }) == Errc::NoTelemetryTrack);
}

TEST_CASE("payload extraction edge cases")
{
    SUBCASE("single payload")
    {
        auto bytes = write_fixture_mp4(std::vector<FixtureSample>{{payload(4, 9), 1001}});
        MemorySource src(bytes);
        auto p = read_gpmf_payloads(src);
        REQUIRE(p.size() == 1);
        CHECK(p[0].start_time == 0.0);
    }
    SUBCASE("payload length not a multiple of 4")
    {
        std::vector<std::uint8_t> seven(7, 0x11);
        auto bytes = write_fixture_mp4(std::vector<FixtureSample>{{seven, 1000}});
        MemorySource src(bytes);
        CHECK(code_of([&] { read_gpmf_payloads(src); }) == Errc::AlignmentError);
    }
    SUBCASE("time-to-sample table disagreeing with the size table")
    {
        std::vector<FixtureSample> s{{payload(1, 0), 1000}, {payload(1, 1), 1000}, {payload(1, 2), 1000}};
        auto bytes = write_fixture_mp4(s);
        auto at = find_last(bytes, "stts");
        // first run: sample_count at +12 after the type (entry_count at +8)
        bytes[at + 15] = std::uint8_t(bytes[at + 15] - 1);
        MemorySource src(bytes);
        CHECK(code_of([&] { read_gpmf_payloads(src); }) == Errc::InconsistentSampleTable);
    }
}

TEST_CASE("round trip over random payload lists, 32- and 64-bit chunk offsets")
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        std::uniform_int_distribution<int> count(1, 12), words(0, 40), ticks(1, 3000), per_chunk(1, 4);
        std::vector<FixtureSample> samples(std::size_t(count(rng)));
        for (auto& s : samples) {
            s.bytes.resize(std::size_t(words(rng)) * 4);
            for (auto& b : s.bytes)
                b = std::uint8_t(rng());
            s.duration_ticks = std::uint32_t(ticks(rng));
        }
        FixtureOptions opts;
        opts.timescale = trial % 2 ? 90000 : 1000;
        opts.use_co64 = trial % 3 == 0;
        opts.samples_per_chunk = std::uint32_t(per_chunk(rng));
        auto bytes = write_fixture_mp4(samples, opts);
        MemorySource src(bytes);
        auto out = read_gpmf_payloads(src);
        REQUIRE(out.size() == samples.size());
        std::uint64_t tick = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            CHECK(out[i].bytes == samples[i].bytes);
            CHECK(out[i].start_ticks == tick);
            CHECK(std::abs(out[i].start_time * opts.timescale - double(tick)) < 1e-6);
            if (i > 0)
                CHECK(out[i].start_time > out[i - 1].start_time);
            tick += samples[i].duration_ticks;
        }
    }
}

TEST_CASE("box parsing reads headers, not payload bytes")
{
    auto small = write_fixture_mp4(std::vector<FixtureSample>{{payload(4, 0), 1000}});
    auto large = write_fixture_mp4(std::vector<FixtureSample>{{payload(1 << 20, 0), 1000}});
    MemorySource a(small), b(large);
    parse_box_tree(a);
    parse_box_tree(b);
    CHECK(a.read_calls() == b.read_calls());
    CHECK(b.bytes_read() == a.bytes_read());
    CHECK(b.bytes_read() < 4096);
}
