#include "govi/mp4_demux.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "govi/error.hpp"

namespace govi::mp4 {

namespace {

constexpr std::array kContainerTypes = {
    FourCC("moov"), FourCC("trak"), FourCC("mdia"), FourCC("minf"), FourCC("stbl"), FourCC("edts"),
    FourCC("dinf"), FourCC("mvex"), FourCC("moof"), FourCC("traf"), FourCC("mfra"),
};

// Box types that may legitimately open an ISO-BMFF file.
constexpr std::array kTopLevelTypes = {
    FourCC("ftyp"), FourCC("styp"), FourCC("moov"), FourCC("mdat"), FourCC("free"), FourCC("skip"),
    FourCC("wide"), FourCC("uuid"), FourCC("pdin"), FourCC("moof"), FourCC("mfra"), FourCC("meta"),
    FourCC("sidx"),
};

bool is_container(FourCC type)
{
    return std::find(kContainerTypes.begin(), kContainerTypes.end(), type) != kContainerTypes.end();
}

std::string at_offset(std::uint64_t offset) { return " (at byte " + std::to_string(offset) + ")"; }

BoxHeader read_header(ByteSource& src, std::uint64_t offset, std::uint64_t limit, bool top_level)
{
    if (limit - offset < 8)
        fail(Errc::TruncatedFile, "box header runs past end of parent" + at_offset(offset));
    std::array<std::uint8_t, 16> raw{};
    src.read(offset, std::span(raw).first(8));

    BoxHeader h;
    h.offset = offset;
    h.type = FourCC::from_bytes(std::span(raw).subspan<4, 4>());
    std::uint64_t size = be::load32(raw.data());
    h.header_len = 8;
    if (size == 1) {
        if (limit - offset < 16)
            fail(Errc::TruncatedFile, "64-bit box header runs past end" + at_offset(offset));
        src.read(offset + 8, std::span(raw).subspan(8, 8));
        size = be::load64(raw.data() + 8);
        h.header_len = 16;
    } else if (size == 0) {
        if (!top_level)
            fail(Errc::MalformedBox, "size 0 is only allowed at top level" + at_offset(offset));
        size = limit - offset;
    }
    if (size < h.header_len)
        fail(Errc::MalformedBox,
             "box '" + h.type.str() + "' declares size " + std::to_string(size) + " below its header length" +
                 at_offset(offset));
    if (size > limit - offset)
        fail(Errc::TruncatedFile,
             "box '" + h.type.str() + "' declares size " + std::to_string(size) + " but only " +
                 std::to_string(limit - offset) + " bytes remain" + at_offset(offset));
    h.size = size;
    return h;
}

std::vector<Box> parse_children(ByteSource& src, std::uint64_t begin, std::uint64_t end, bool top_level)
{
    std::vector<Box> out;
    std::uint64_t pos = begin;
    while (pos < end) {
        Box box;
        box.header = read_header(src, pos, end, top_level);
        if (is_container(box.header.type))
            box.children = parse_children(src, box.header.payload_offset(), box.header.end(), false);
        pos = box.header.end();
        out.push_back(std::move(box));
    }
    return out;
}

// Cursor over a fully loaded leaf box payload.
class Reader {
public:
    Reader(std::vector<std::uint8_t> bytes, FourCC type, std::uint64_t offset)
        : bytes_(std::move(bytes)), type_(type), offset_(offset)
    {
    }

    std::uint8_t u8() { return *take(1); }
    std::uint32_t u24()
    {
        auto p = take(3);
        return (std::uint32_t(p[0]) << 16) | (std::uint32_t(p[1]) << 8) | p[2];
    }
    std::uint32_t u32() { return be::load32(take(4)); }
    std::uint64_t u64() { return be::load64(take(8)); }
    FourCC fourcc() { return FourCC(u32()); }
    void skip(std::size_t n) { take(n); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    const std::uint8_t* take(std::size_t n)
    {
        if (bytes_.size() - pos_ < n)
            fail(Errc::InconsistentSampleTable, "'" + type_.str() + "' box too short" + at_offset(offset_));
        const std::uint8_t* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    std::vector<std::uint8_t> bytes_;
    FourCC type_;
    std::uint64_t offset_;
    std::size_t pos_ = 0;
};

Reader load(const Box& box, ByteSource& src)
{
    return Reader(src.read_vector(box.header.payload_offset(), box.header.payload_size()), box.header.type,
                  box.header.offset);
}

const Box& require(const Box* box, const char* what)
{
    if (!box)
        fail(Errc::InconsistentSampleTable, std::string("track lacks required '") + what + "' box");
    return *box;
}

} // namespace

// ---------------------------------------------------------------------------

void ByteSource::read(std::uint64_t offset, std::span<std::uint8_t> out)
{
    if (offset > size() || out.size() > size() - offset)
        fail(Errc::TruncatedFile, "read of " + std::to_string(out.size()) + " bytes past end" + at_offset(offset));
    ++read_calls_;
    bytes_read_ += out.size();
    do_read(offset, out);
}

std::vector<std::uint8_t> ByteSource::read_vector(std::uint64_t offset, std::uint64_t length)
{
    if (offset > size() || length > size() - offset)
        fail(Errc::TruncatedFile, "read of " + std::to_string(length) + " bytes past end" + at_offset(offset));
    std::vector<std::uint8_t> out(length);
    read(offset, out);
    return out;
}

FileSource::FileSource(const std::filesystem::path& path) : stream_(path, std::ios::binary)
{
    if (!stream_)
        fail(Errc::IoError, "cannot open '" + path.string() + "'");
    stream_.seekg(0, std::ios::end);
    size_ = std::uint64_t(stream_.tellg());
    stream_.seekg(0);
}

void FileSource::do_read(std::uint64_t offset, std::span<std::uint8_t> out)
{
    stream_.clear();
    stream_.seekg(std::streamoff(offset));
    stream_.read(reinterpret_cast<char*>(out.data()), std::streamsize(out.size()));
    if (std::uint64_t(stream_.gcount()) != out.size())
        fail(Errc::IoError, "short read" + at_offset(offset));
}

void MemorySource::do_read(std::uint64_t offset, std::span<std::uint8_t> out)
{
    std::copy_n(bytes_.begin() + std::ptrdiff_t(offset), out.size(), out.begin());
}

const Box* Box::child(FourCC type) const
{
    for (const auto& c : children)
        if (c.header.type == type)
            return &c;
    return nullptr;
}

const Box* Box::descend(std::initializer_list<FourCC> path) const
{
    const Box* cur = this;
    for (FourCC t : path) {
        cur = cur->child(t);
        if (!cur)
            return nullptr;
    }
    return cur;
}

const Box* BoxTree::top(FourCC type) const
{
    for (const auto& b : boxes)
        if (b.header.type == type)
            return &b;
    return nullptr;
}

BoxTree parse_box_tree(ByteSource& source)
{
    BoxTree tree;
    tree.file_size = source.size();
    if (tree.file_size < 8)
        fail(Errc::NotMp4, "file too short for an MP4 (" + std::to_string(tree.file_size) + " bytes)");

    std::array<std::uint8_t, 8> first{};
    source.read(0, first);
    auto first_type = FourCC::from_bytes(std::span(first).subspan<4, 4>());
    if (std::find(kTopLevelTypes.begin(), kTopLevelTypes.end(), first_type) == kTopLevelTypes.end())
        fail(Errc::NotMp4, "first box type '" + first_type.str() + "' is not an ISO-BMFF top-level box");

    tree.boxes = parse_children(source, 0, tree.file_size, true);
    if (!tree.top("ftyp") && !tree.top("moov"))
        fail(Errc::NotMp4, "neither 'ftyp' nor 'moov' present");
    return tree;
}

TrackSampleTable read_track(const Box& trak, ByteSource& source)
{
    TrackSampleTable table;

    {
        auto r = load(require(trak.child("tkhd"), "tkhd"), source);
        std::uint8_t version = r.u8();
        r.u24();
        r.skip(version == 1 ? 16 : 8);
        table.track_id = r.u32();
    }
    const Box& mdia = require(trak.child("mdia"), "mdia");
    {
        auto r = load(require(mdia.child("mdhd"), "mdhd"), source);
        std::uint8_t version = r.u8();
        r.u24();
        r.skip(version == 1 ? 16 : 8);
        table.timescale = r.u32();
        if (table.timescale == 0)
            fail(Errc::InconsistentSampleTable, "track " + std::to_string(table.track_id) + " has timescale 0");
    }
    {
        auto r = load(require(mdia.child("hdlr"), "hdlr"), source);
        r.skip(8);
        table.handler = r.fourcc();
    }
    const Box& stbl = require(mdia.descend({"minf", "stbl"}), "minf/stbl");
    {
        auto r = load(require(stbl.child("stsd"), "stsd"), source);
        r.skip(4);
        if (r.u32() == 0)
            fail(Errc::InconsistentSampleTable, "empty sample description");
        r.skip(4);
        table.sample_format = r.fourcc();
    }

    // sizes
    std::vector<std::uint32_t> sizes;
    {
        auto r = load(require(stbl.child("stsz"), "stsz"), source);
        r.skip(4);
        std::uint32_t uniform = r.u32();
        std::uint32_t count = r.u32();
        if (uniform != 0) {
            sizes.assign(count, uniform);
        } else {
            if (r.remaining() / 4 < count)
                fail(Errc::InconsistentSampleTable, "stsz declares more entries than it holds");
            sizes.resize(count);
            for (auto& s : sizes)
                s = r.u32();
        }
    }

    // decode times
    std::vector<std::uint32_t> durations;
    {
        auto r = load(require(stbl.child("stts"), "stts"), source);
        r.skip(4);
        std::uint32_t entries = r.u32();
        for (std::uint32_t i = 0; i < entries; ++i) {
            std::uint32_t count = r.u32();
            std::uint32_t delta = r.u32();
            if (durations.size() + count > sizes.size())
                fail(Errc::InconsistentSampleTable, "stts covers more samples than stsz declares");
            durations.insert(durations.end(), count, delta);
        }
    }
    if (durations.size() != sizes.size())
        fail(Errc::InconsistentSampleTable,
             "stts covers " + std::to_string(durations.size()) + " samples, stsz declares " +
                 std::to_string(sizes.size()));

    // chunk offsets
    std::vector<std::uint64_t> chunk_offsets;
    if (const Box* stco = stbl.child("stco")) {
        auto r = load(*stco, source);
        r.skip(4);
        std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i)
            chunk_offsets.push_back(r.u32());
    } else if (const Box* co64 = stbl.child("co64")) {
        auto r = load(*co64, source);
        r.skip(4);
        std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i)
            chunk_offsets.push_back(r.u64());
    } else {
        fail(Errc::InconsistentSampleTable, "track lacks 'stco'/'co64'");
    }

    struct ChunkRun {
        std::uint32_t first_chunk;
        std::uint32_t samples_per_chunk;
    };
    std::vector<ChunkRun> runs;
    {
        auto r = load(require(stbl.child("stsc"), "stsc"), source);
        r.skip(4);
        std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            ChunkRun run{r.u32(), r.u32()};
            r.u32(); // sample description index
            if (run.first_chunk == 0 || (!runs.empty() && run.first_chunk <= runs.back().first_chunk))
                fail(Errc::InconsistentSampleTable, "stsc first_chunk values not increasing");
            runs.push_back(run);
        }
    }
    if (!sizes.empty() && (runs.empty() || runs.front().first_chunk != 1))
        fail(Errc::InconsistentSampleTable, "stsc must start at chunk 1");

    table.samples.reserve(sizes.size());
    std::size_t sample = 0;
    std::uint64_t decode_time = 0;
    for (std::size_t chunk = 0; chunk < chunk_offsets.size() && sample < sizes.size(); ++chunk) {
        auto it = std::upper_bound(runs.begin(), runs.end(), std::uint32_t(chunk + 1),
                                   [](std::uint32_t c, const ChunkRun& run) { return c < run.first_chunk; });
        std::uint32_t per_chunk = std::prev(it)->samples_per_chunk;
        std::uint64_t offset = chunk_offsets[chunk];
        for (std::uint32_t k = 0; k < per_chunk; ++k) {
            if (sample >= sizes.size())
                fail(Errc::InconsistentSampleTable, "stsc maps more samples than stsz declares");
            SampleEntry e{offset, sizes[sample], decode_time, durations[sample]};
            if (e.file_offset > source.size() || e.size > source.size() - e.file_offset)
                fail(Errc::TruncatedFile, "sample " + std::to_string(sample) + " lies outside the file");
            if (e.duration == 0 && sample + 1 < sizes.size())
                fail(Errc::InconsistentSampleTable, "zero sample duration breaks monotonic decode times");
            table.samples.push_back(e);
            offset += e.size;
            decode_time += e.duration;
            ++sample;
        }
    }
    if (sample != sizes.size())
        fail(Errc::InconsistentSampleTable,
             "chunk tables map " + std::to_string(sample) + " samples, stsz declares " +
                 std::to_string(sizes.size()));
    return table;
}

TrackSampleTable find_gpmf_track(const BoxTree& tree, ByteSource& source)
{
    const Box* moov = tree.top("moov");
    if (!moov)
        fail(Errc::NoTelemetryTrack, "no 'moov' box");
    for (const auto& box : moov->children) {
        if (box.header.type != FourCC("trak"))
            continue;
        const Box* stsd = box.descend({"mdia", "minf", "stbl", "stsd"});
        if (!stsd || stsd->header.payload_size() < 16)
            continue;
        std::array<std::uint8_t, 4> fmt{};
        source.read(stsd->header.payload_offset() + 12, fmt);
        if (FourCC::from_bytes(fmt) == FourCC("gpmd"))
            return read_track(box, source);
    }
    fail(Errc::NoTelemetryTrack, "no track with sample format 'gpmd'");
}

std::vector<RawPayload> extract_payloads(const TrackSampleTable& table, ByteSource& source)
{
    std::vector<RawPayload> out;
    out.reserve(table.samples.size());
    for (std::size_t i = 0; i < table.samples.size(); ++i) {
        const auto& s = table.samples[i];
        if (s.size % 4 != 0)
            fail(Errc::AlignmentError, "payload " + std::to_string(i) + " has " + std::to_string(s.size) +
                                           " bytes, not a multiple of 4" + at_offset(s.file_offset));
        RawPayload p;
        p.bytes = source.read_vector(s.file_offset, s.size);
        p.start_ticks = s.decode_time;
        p.duration_ticks = s.duration;
        p.timescale = table.timescale;
        p.start_time = double(s.decode_time) / table.timescale;
        p.duration = double(s.duration) / table.timescale;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<RawPayload> read_gpmf_payloads(ByteSource& source)
{
    auto tree = parse_box_tree(source);
    auto table = find_gpmf_track(tree, source);
    return extract_payloads(table, source);
}

// ---------------------------------------------------------------------------

namespace {

class BoxWriter {
public:
    std::vector<std::uint8_t> bytes;

    void begin(FourCC type)
    {
        open_.push_back(bytes.size());
        be::store32(bytes, 0);
        be::store32(bytes, type.value());
    }
    void begin_full(FourCC type, std::uint8_t version = 0)
    {
        begin(type);
        be::store32(bytes, std::uint32_t(version) << 24);
    }
    void end()
    {
        std::size_t start = open_.back();
        open_.pop_back();
        auto size = std::uint32_t(bytes.size() - start);
        for (int i = 0; i < 4; ++i)
            bytes[start + i] = std::uint8_t(size >> (24 - 8 * i));
    }
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u16(std::uint16_t v) { be::store16(bytes, v); }
    void u32(std::uint32_t v) { be::store32(bytes, v); }
    void u64(std::uint64_t v) { be::store64(bytes, v); }
    void zeros(std::size_t n) { bytes.insert(bytes.end(), n, 0); }
    void append(std::span<const std::uint8_t> data) { bytes.insert(bytes.end(), data.begin(), data.end()); }

private:
    std::vector<std::size_t> open_;
};

struct TrackSpec {
    std::uint32_t id;
    FourCC handler;
    FourCC format;
    std::uint32_t timescale;
    std::vector<std::uint32_t> sizes;
    std::vector<std::uint32_t> durations;
    std::vector<std::uint64_t> chunk_offsets;
    std::uint32_t samples_per_chunk;
    bool co64;
};

void write_track(BoxWriter& w, const TrackSpec& t)
{
    w.begin("trak");
    w.begin_full("tkhd");
    w.u32(0);
    w.u32(0);
    w.u32(t.id);
    w.zeros(4 + 4 + 8 + 2 + 2 + 2 + 2 + 36 + 4 + 4);
    w.end();

    w.begin("mdia");
    w.begin_full("mdhd");
    w.u32(0);
    w.u32(0);
    w.u32(t.timescale);
    std::uint32_t total = 0;
    for (auto d : t.durations)
        total += d;
    w.u32(total);
    w.u16(0x55c4); // 'und'
    w.u16(0);
    w.end();

    w.begin_full("hdlr");
    w.u32(0);
    w.u32(t.handler.value());
    w.zeros(12);
    w.u8(0);
    w.end();

    w.begin("minf");
    w.begin("stbl");

    w.begin_full("stsd");
    w.u32(1);
    w.begin(t.format);
    w.zeros(6);
    w.u16(1);
    w.end();
    w.end();

    // run-length encoded durations
    std::vector<std::pair<std::uint32_t, std::uint32_t>> runs;
    for (auto d : t.durations) {
        if (!runs.empty() && runs.back().second == d)
            ++runs.back().first;
        else
            runs.emplace_back(1, d);
    }
    w.begin_full("stts");
    w.u32(std::uint32_t(runs.size()));
    for (auto [count, delta] : runs) {
        w.u32(count);
        w.u32(delta);
    }
    w.end();

    w.begin_full("stsc");
    if (t.sizes.empty()) {
        w.u32(0);
    } else {
        auto n = std::uint32_t(t.sizes.size());
        std::uint32_t full = n / t.samples_per_chunk;
        std::uint32_t last = n % t.samples_per_chunk;
        w.u32((full ? 1 : 0) + (last ? 1 : 0));
        if (full) {
            w.u32(1);
            w.u32(t.samples_per_chunk);
            w.u32(1);
        }
        if (last) {
            w.u32(full + 1);
            w.u32(last);
            w.u32(1);
        }
    }
    w.end();

    w.begin_full("stsz");
    w.u32(0);
    w.u32(std::uint32_t(t.sizes.size()));
    for (auto s : t.sizes)
        w.u32(s);
    w.end();

    w.begin_full(t.co64 ? FourCC("co64") : FourCC("stco"));
    w.u32(std::uint32_t(t.chunk_offsets.size()));
    for (auto off : t.chunk_offsets) {
        if (t.co64)
            w.u64(off);
        else
            w.u32(std::uint32_t(off));
    }
    w.end();

    w.end(); // stbl
    w.end(); // minf
    w.end(); // mdia
    w.end(); // trak
}

} // namespace

std::vector<std::uint8_t> write_fixture_mp4(std::span<const FixtureSample> telemetry, const FixtureOptions& options)
{
    if (options.samples_per_chunk == 0 || options.timescale == 0)
        fail(Errc::InvalidArgument, "fixture needs positive timescale and samples_per_chunk");

    BoxWriter w;
    w.begin("ftyp");
    w.u32(FourCC("mp41").value());
    w.u32(0);
    w.u32(FourCC("mp41").value());
    w.u32(FourCC("isom").value());
    w.end();

    // mdat: one placeholder video frame followed by the telemetry samples
    const std::vector<std::uint8_t> video_frame(64, 0xAB);
    w.begin("mdat");
    std::uint64_t video_offset = w.bytes.size();
    if (options.include_video_track)
        w.append(video_frame);
    TrackSpec gpmd{2, "meta", "gpmd", options.timescale, {}, {}, {}, options.samples_per_chunk, options.use_co64};
    for (std::size_t i = 0; i < telemetry.size(); ++i) {
        if (i % options.samples_per_chunk == 0)
            gpmd.chunk_offsets.push_back(w.bytes.size());
        w.append(telemetry[i].bytes);
        gpmd.sizes.push_back(std::uint32_t(telemetry[i].bytes.size()));
        gpmd.durations.push_back(telemetry[i].duration_ticks);
    }
    w.end();

    w.begin("moov");
    w.begin_full("mvhd");
    w.u32(0);
    w.u32(0);
    w.u32(options.timescale);
    w.u32(0);
    w.u32(0x00010000);
    w.u16(0x0100);
    w.zeros(10 + 36 + 24);
    w.u32(3);
    w.end();
    if (options.include_video_track) {
        TrackSpec video{1, "vide", "hvc1", 30000, {std::uint32_t(video_frame.size())}, {1001}, {video_offset}, 1,
                        options.use_co64};
        write_track(w, video);
    }
    if (options.include_telemetry_track)
        write_track(w, gpmd);
    w.end();
    return std::move(w.bytes);
}

} // namespace govi::mp4
