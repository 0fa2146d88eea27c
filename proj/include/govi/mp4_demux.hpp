#pragma once

// ISO-BMFF navigation down to the GoPro telemetry (`gpmd`) track.
//
// Only box headers and the handful of sample-table boxes are ever read; media
// payloads stay on disk until extract_payloads() copies the telemetry samples.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <vector>

#include "govi/fourcc.hpp"

namespace govi::mp4 {

/// Random-access byte source. Counts calls so tests can check that box
/// parsing is proportional to the number of boxes, not the file size.
class ByteSource {
public:
    virtual ~ByteSource() = default;

    virtual std::uint64_t size() const = 0;

    /// Fills `out` from `offset`; throws TruncatedFile past the end.
    void read(std::uint64_t offset, std::span<std::uint8_t> out);
    std::vector<std::uint8_t> read_vector(std::uint64_t offset, std::uint64_t length);

    std::uint64_t read_calls() const { return read_calls_; }
    std::uint64_t bytes_read() const { return bytes_read_; }

protected:
    virtual void do_read(std::uint64_t offset, std::span<std::uint8_t> out) = 0;

private:
    std::uint64_t read_calls_ = 0;
    std::uint64_t bytes_read_ = 0;
};

class FileSource final : public ByteSource {
public:
    explicit FileSource(const std::filesystem::path& path);
    std::uint64_t size() const override { return size_; }

protected:
    void do_read(std::uint64_t offset, std::span<std::uint8_t> out) override;

private:
    std::ifstream stream_;
    std::uint64_t size_ = 0;
};

class MemorySource final : public ByteSource {
public:
    explicit MemorySource(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
    std::uint64_t size() const override { return bytes_.size(); }

protected:
    void do_read(std::uint64_t offset, std::span<std::uint8_t> out) override;

private:
    std::vector<std::uint8_t> bytes_;
};

struct BoxHeader {
    FourCC type;
    std::uint64_t size = 0;   // whole box including header
    std::uint64_t offset = 0; // absolute position of the box start
    std::uint32_t header_len = 8;

    std::uint64_t payload_offset() const { return offset + header_len; }
    std::uint64_t payload_size() const { return size - header_len; }
    std::uint64_t end() const { return offset + size; }
};

struct Box {
    BoxHeader header;
    std::vector<Box> children;

    const Box* child(FourCC type) const;
    /// Follows a path of child types, e.g. {"mdia", "minf", "stbl"}.
    const Box* descend(std::initializer_list<FourCC> path) const;
};

struct BoxTree {
    std::uint64_t file_size = 0;
    std::vector<Box> boxes;

    const Box* top(FourCC type) const;
};

/// Parses the nested box structure. Container boxes are recursed, leaf boxes
/// are described by offset and size only.
BoxTree parse_box_tree(ByteSource& source);

struct SampleEntry {
    std::uint64_t file_offset = 0;
    std::uint32_t size = 0;
    std::uint64_t decode_time = 0; // ticks
    std::uint32_t duration = 0;    // ticks
};

struct TrackSampleTable {
    std::uint32_t track_id = 0;
    FourCC handler;
    FourCC sample_format;
    std::uint32_t timescale = 0;
    std::vector<SampleEntry> samples;
};

/// Resolves the sample table of a single `trak` box.
TrackSampleTable read_track(const Box& trak, ByteSource& source);

/// Locates the telemetry track by its `gpmd` sample-description format.
/// When several exist the first in file order is used.
TrackSampleTable find_gpmf_track(const BoxTree& tree, ByteSource& source);

struct RawPayload {
    std::vector<std::uint8_t> bytes;
    double start_time = 0.0; // seconds since recording start
    double duration = 0.0;   // seconds
    std::uint64_t start_ticks = 0;
    std::uint32_t duration_ticks = 0;
    std::uint32_t timescale = 0;
};

std::vector<RawPayload> extract_payloads(const TrackSampleTable& table, ByteSource& source);

/// Convenience: parse + find + extract.
std::vector<RawPayload> read_gpmf_payloads(ByteSource& source);

// ---------------------------------------------------------------------------
// Fixture writer: minimal but structurally valid MP4 files for tests and demos.

struct FixtureSample {
    std::vector<std::uint8_t> bytes;
    std::uint32_t duration_ticks = 0;
};

struct FixtureOptions {
    std::uint32_t timescale = 1000;
    bool include_video_track = true;
    bool include_telemetry_track = true;
    bool use_co64 = false;
    std::uint32_t samples_per_chunk = 1;
};

std::vector<std::uint8_t> write_fixture_mp4(std::span<const FixtureSample> telemetry,
                                            const FixtureOptions& options = {});

} // namespace govi::mp4
