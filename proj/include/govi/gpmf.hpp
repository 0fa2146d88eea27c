#pragma once

// GPMF key-length-value telemetry.
//
// Every entry is an 8-byte header (FourCC key, type letter, item size, 16-bit
// big-endian repeat count) followed by item_size * repeat bytes padded to a
// 4-byte boundary. Type 0 marks a nested container.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "govi/fourcc.hpp"

namespace govi::gpmf {

inline constexpr FourCC kDevc{"DEVC"};
inline constexpr FourCC kStrm{"STRM"};
inline constexpr FourCC kAccl{"ACCL"};
inline constexpr FourCC kGyro{"GYRO"};
inline constexpr FourCC kShut{"SHUT"};
inline constexpr FourCC kGps5{"GPS5"};
inline constexpr FourCC kScal{"SCAL"};
inline constexpr FourCC kSiun{"SIUN"};
inline constexpr FourCC kUnit{"UNIT"};
inline constexpr FourCC kOrin{"ORIN"};

struct KlvHeader {
    FourCC key;
    char type = 0;
    std::uint8_t item_size = 0;
    std::uint16_t repeat = 0;

    std::size_t data_size() const { return std::size_t(item_size) * repeat; }
    std::size_t padded_size() const { return (data_size() + 3) & ~std::size_t(3); }
    bool is_container() const { return type == 0; }

    bool operator==(const KlvHeader&) const = default;
};

struct KlvNode {
    KlvHeader header;
    std::vector<KlvNode> children;  // containers
    std::vector<std::uint8_t> raw;  // leaves, unpadded

    bool is_container() const { return header.is_container(); }
    const KlvNode* child(FourCC key) const;
};

/// Bytes per scalar for a type letter, 0 for letters without a fixed width.
std::size_t scalar_size(char type);
bool is_numeric_type(char type);

/// Parses a payload. The result is a synthetic container (key 0, type 0)
/// whose children are the top-level entries, normally one or more DEVC.
KlvNode parse_klv(std::span<const std::uint8_t> bytes);

/// Encodes one entry including its header and trailing padding.
std::vector<std::uint8_t> encode_klv(const KlvNode& node);
/// Encodes the children of a synthetic root as a payload.
std::vector<std::uint8_t> encode_payload(const KlvNode& root);

KlvNode make_container(FourCC key, std::vector<KlvNode> children);
/// Numeric leaf with `channels` scalars per item. Values must be exactly
/// representable in the target type.
KlvNode make_numeric(FourCC key, char type, std::span<const double> values, std::size_t channels = 1);
KlvNode make_text(FourCC key, std::string_view text);
KlvNode make_fourccs(FourCC key, std::span<const FourCC> codes);
KlvNode make_root(std::vector<KlvNode> children);

/// Decodes every scalar of a numeric leaf; BadTypeCode for other letters.
std::vector<double> decode_numeric(const KlvNode& leaf);
std::string decode_text(const KlvNode& leaf);
std::vector<FourCC> decode_fourccs(const KlvNode& leaf);

/// Indented listing, one entry per line: key, type, item size, repeat.
std::string dump_tree(const KlvNode& root);

/// Where each output axis comes from: out[a] = sign[a] * in[source[a]].
struct AxisMapping {
    std::array<int, 3> source{0, 1, 2};
    std::array<int, 3> sign{1, 1, 1};

    static AxisMapping identity() { return {}; }
    /// From a GPMF orientation string such as "ZXY" or "yxZ": character i
    /// names the camera axis carried by channel i, lowercase meaning negated.
    static AxisMapping from_orientation(std::string_view orin);
    std::string describe() const;
    bool operator==(const AxisMapping&) const = default;
};

struct SensorStream {
    FourCC key;
    std::size_t channels = 0;
    std::vector<double> values; // row-major, rows() x channels, physical units
    std::vector<double> scale;  // per-channel divisors actually applied
    std::string units;
    AxisMapping axes;           // identity unless the stream carried ORIN

    std::size_t rows() const { return channels ? values.size() / channels : 0; }
    double at(std::size_t row, std::size_t channel) const { return values[row * channels + channel]; }
};

/// Finds every container holding `key` (normally STRM), divides by the
/// sibling SCAL and concatenates the rows. Three-channel streams are
/// re-ordered to camera (x, y, z) when an ORIN sibling is present.
SensorStream extract_stream(const KlvNode& root, FourCC key);

/// Item counts of the data entry (last leaf) of every STRM, summed per key.
std::map<FourCC, std::size_t> stream_counts(const KlvNode& root);

} // namespace govi::gpmf
