#include "govi/gpmf.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "govi/error.hpp"

namespace govi::gpmf {

namespace {

constexpr int kMaxDepth = 64;

std::vector<KlvNode> parse_entries(std::span<const std::uint8_t> data, int depth)
{
    if (depth > kMaxDepth)
        fail(Errc::MalformedKlv, "nesting deeper than " + std::to_string(kMaxDepth));

    std::vector<KlvNode> out;
    std::size_t pos = 0;
    while (pos < data.size()) {
        if (data.size() - pos < 8)
            fail(Errc::TruncatedKlv, "header needs 8 bytes, " + std::to_string(data.size() - pos) + " remain");
        const std::uint8_t* p = data.data() + pos;
        KlvNode node;
        node.header.key = FourCC(be::load32(p));
        if (node.header.key.value() == 0) {
            // zero padding closes the block
            for (std::size_t i = pos; i < data.size(); ++i)
                if (data[i] != 0)
                    fail(Errc::MalformedKlv, "non-zero bytes after null key at offset " + std::to_string(pos));
            break;
        }
        if (!node.header.key.is_printable())
            fail(Errc::MalformedKlv, "key '" + node.header.key.str() + "' is not printable ASCII");
        node.header.type = char(p[4]);
        node.header.item_size = p[5];
        node.header.repeat = be::load16(p + 6);

        std::size_t available = data.size() - pos - 8;
        if (node.header.padded_size() > available)
            fail(Errc::TruncatedKlv, "'" + node.header.key.str() + "' declares " +
                                         std::to_string(node.header.data_size()) + " bytes, " +
                                         std::to_string(available) + " remain");
        auto body = data.subspan(pos + 8, node.header.data_size());
        if (node.is_container()) {
            if (body.size() % 4 != 0)
                fail(Errc::MalformedKlv, "container '" + node.header.key.str() + "' length not 32-bit aligned");
            node.children = parse_entries(body, depth + 1);
        } else {
            node.raw.assign(body.begin(), body.end());
        }
        pos += 8 + node.header.padded_size();
        out.push_back(std::move(node));
    }
    return out;
}

void encode_into(const KlvNode& node, std::vector<std::uint8_t>& out)
{
    be::store32(out, node.header.key.value());
    out.push_back(std::uint8_t(node.header.type));
    out.push_back(node.header.item_size);
    be::store16(out, node.header.repeat);
    std::size_t body_start = out.size();
    if (node.is_container()) {
        for (const auto& c : node.children)
            encode_into(c, out);
    } else {
        out.insert(out.end(), node.raw.begin(), node.raw.end());
    }
    if (out.size() - body_start != node.header.data_size())
        fail(Errc::InvalidArgument, "'" + node.header.key.str() + "' header declares " +
                                        std::to_string(node.header.data_size()) + " bytes, body has " +
                                        std::to_string(out.size() - body_start));
    while ((out.size() - body_start) % 4)
        out.push_back(0);
}

template <typename T> T load_scalar(const std::uint8_t* p)
{
    if constexpr (sizeof(T) == 1) {
        return std::bit_cast<T>(p[0]);
    } else if constexpr (sizeof(T) == 2) {
        return std::bit_cast<T>(be::load16(p));
    } else if constexpr (sizeof(T) == 4) {
        return std::bit_cast<T>(be::load32(p));
    } else {
        return std::bit_cast<T>(be::load64(p));
    }
}

template <typename T> void store_scalar(std::vector<std::uint8_t>& out, double v)
{
    T x{};
    if constexpr (std::is_floating_point_v<T>) {
        x = T(v);
        if (!std::isnan(v) && double(x) != v)
            fail(Errc::InvalidArgument, "value not representable in float32");
    } else {
        if (!(v >= double(std::numeric_limits<T>::min()) && v <= double(std::numeric_limits<T>::max())) ||
            std::trunc(v) != v)
            fail(Errc::InvalidArgument, "value " + std::to_string(v) + " out of range for integer type");
        x = T(v);
    }
    if constexpr (sizeof(T) == 1) {
        out.push_back(std::bit_cast<std::uint8_t>(x));
    } else if constexpr (sizeof(T) == 2) {
        be::store16(out, std::bit_cast<std::uint16_t>(x));
    } else if constexpr (sizeof(T) == 4) {
        be::store32(out, std::bit_cast<std::uint32_t>(x));
    } else {
        be::store64(out, std::bit_cast<std::uint64_t>(x));
    }
}

void collect_holders(const KlvNode& node, FourCC key, std::vector<const KlvNode*>& out)
{
    if (!node.is_container())
        return;
    bool holds = false;
    for (const auto& c : node.children)
        if (!c.is_container() && c.header.key == key)
            holds = true;
    if (holds)
        out.push_back(&node);
    for (const auto& c : node.children)
        collect_holders(c, key, out);
}

void count_streams(const KlvNode& node, std::map<FourCC, std::size_t>& counts)
{
    if (!node.is_container())
        return;
    if (node.header.key == kStrm) {
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
            if (!it->is_container()) {
                counts[it->header.key] += it->header.repeat;
                break;
            }
        }
    }
    for (const auto& c : node.children)
        count_streams(c, counts);
}

void dump_into(const KlvNode& node, int depth, std::ostringstream& os)
{
    os << std::string(std::size_t(depth) * 2, ' ') << node.header.key.str() << " type="
       << (node.is_container() ? std::string("0") : std::string(1, node.header.type))
       << " size=" << int(node.header.item_size) << " repeat=" << node.header.repeat;
    if (!node.is_container()) {
        if (node.header.type == 'c' || node.header.type == 'U') {
            os << " \"" << decode_text(node) << '"';
        } else if (node.header.type == 'F') {
            os << ' ';
            for (auto f : decode_fourccs(node))
                os << f.str() << ' ';
        } else if (is_numeric_type(node.header.type)) {
            auto values = decode_numeric(node);
            os << " [";
            for (std::size_t i = 0; i < values.size() && i < 6; ++i)
                os << (i ? " " : "") << values[i];
            if (values.size() > 6)
                os << " ...";
            os << ']';
        }
    }
    os << '\n';
    for (const auto& c : node.children)
        dump_into(c, depth + 1, os);
}

} // namespace

const KlvNode* KlvNode::child(FourCC key) const
{
    for (const auto& c : children)
        if (c.header.key == key)
            return &c;
    return nullptr;
}

std::size_t scalar_size(char type)
{
    switch (type) {
    case 'b':
    case 'B':
    case 'c':
        return 1;
    case 's':
    case 'S':
        return 2;
    case 'l':
    case 'L':
    case 'f':
    case 'F':
        return 4;
    case 'd':
    case 'j':
    case 'J':
        return 8;
    case 'U':
        return 16;
    default:
        return 0;
    }
}

bool is_numeric_type(char type)
{
    switch (type) {
    case 'b':
    case 'B':
    case 's':
    case 'S':
    case 'l':
    case 'L':
    case 'f':
    case 'd':
        return true;
    default:
        return false;
    }
}

KlvNode parse_klv(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() % 4 != 0)
        fail(Errc::AlignmentError, "payload of " + std::to_string(bytes.size()) + " bytes is not 32-bit aligned");
    KlvNode root;
    root.children = parse_entries(bytes, 0);
    return root;
}

std::vector<std::uint8_t> encode_klv(const KlvNode& node)
{
    std::vector<std::uint8_t> out;
    encode_into(node, out);
    return out;
}

std::vector<std::uint8_t> encode_payload(const KlvNode& root)
{
    std::vector<std::uint8_t> out;
    for (const auto& c : root.children)
        encode_into(c, out);
    return out;
}

KlvNode make_container(FourCC key, std::vector<KlvNode> children)
{
    std::size_t bytes = 0;
    for (const auto& c : children)
        bytes += 8 + c.header.padded_size();
    if (bytes / 4 > std::numeric_limits<std::uint16_t>::max())
        fail(Errc::InvalidArgument, "container '" + key.str() + "' too large");
    KlvNode node;
    node.header = {key, 0, 4, std::uint16_t(bytes / 4)};
    node.children = std::move(children);
    return node;
}

KlvNode make_numeric(FourCC key, char type, std::span<const double> values, std::size_t channels)
{
    std::size_t width = scalar_size(type);
    if (!is_numeric_type(type))
        fail(Errc::BadTypeCode, std::string("'") + type + "' is not a numeric type letter");
    if (channels == 0 || values.size() % channels != 0 || width * channels > 255 ||
        values.size() / channels > std::numeric_limits<std::uint16_t>::max())
        fail(Errc::InvalidArgument, "bad shape for numeric entry '" + key.str() + "'");

    KlvNode node;
    node.header = {key, type, std::uint8_t(width * channels), std::uint16_t(values.size() / channels)};
    node.raw.reserve(values.size() * width);
    for (double v : values) {
        switch (type) {
        case 'b': store_scalar<std::int8_t>(node.raw, v); break;
        case 'B': store_scalar<std::uint8_t>(node.raw, v); break;
        case 's': store_scalar<std::int16_t>(node.raw, v); break;
        case 'S': store_scalar<std::uint16_t>(node.raw, v); break;
        case 'l': store_scalar<std::int32_t>(node.raw, v); break;
        case 'L': store_scalar<std::uint32_t>(node.raw, v); break;
        case 'f': store_scalar<float>(node.raw, v); break;
        case 'd': store_scalar<double>(node.raw, v); break;
        }
    }
    return node;
}

KlvNode make_text(FourCC key, std::string_view text)
{
    if (text.size() > 255)
        fail(Errc::InvalidArgument, "text entry longer than 255 characters");
    KlvNode node;
    node.header = {key, 'c', std::uint8_t(text.size()), std::uint16_t(text.empty() ? 0 : 1)};
    node.raw.assign(text.begin(), text.end());
    return node;
}

KlvNode make_fourccs(FourCC key, std::span<const FourCC> codes)
{
    KlvNode node;
    node.header = {key, 'F', 4, std::uint16_t(codes.size())};
    for (auto c : codes)
        be::store32(node.raw, c.value());
    return node;
}

KlvNode make_root(std::vector<KlvNode> children)
{
    KlvNode root;
    root.children = std::move(children);
    return root;
}

std::vector<double> decode_numeric(const KlvNode& leaf)
{
    char type = leaf.header.type;
    if (!is_numeric_type(type))
        fail(Errc::BadTypeCode, "'" + leaf.header.key.str() + "' has non-numeric type letter '" +
                                    std::string(1, type ? type : '0') + "'");
    std::size_t width = scalar_size(type);
    if (leaf.header.item_size % width != 0)
        fail(Errc::MalformedKlv, "'" + leaf.header.key.str() + "' item size " +
                                     std::to_string(leaf.header.item_size) + " not a multiple of " +
                                     std::to_string(width));
    std::vector<double> out(leaf.raw.size() / width);
    const std::uint8_t* p = leaf.raw.data();
    for (std::size_t i = 0; i < out.size(); ++i, p += width) {
        switch (type) {
        case 'b': out[i] = load_scalar<std::int8_t>(p); break;
        case 'B': out[i] = load_scalar<std::uint8_t>(p); break;
        case 's': out[i] = load_scalar<std::int16_t>(p); break;
        case 'S': out[i] = load_scalar<std::uint16_t>(p); break;
        case 'l': out[i] = load_scalar<std::int32_t>(p); break;
        case 'L': out[i] = load_scalar<std::uint32_t>(p); break;
        case 'f': out[i] = load_scalar<float>(p); break;
        case 'd': out[i] = load_scalar<double>(p); break;
        }
    }
    return out;
}

std::string decode_text(const KlvNode& leaf)
{
    if (leaf.header.type != 'c' && leaf.header.type != 'U')
        fail(Errc::BadTypeCode, "'" + leaf.header.key.str() + "' is not a text entry");
    std::string s(leaf.raw.begin(), leaf.raw.end());
    while (!s.empty() && s.back() == '\0')
        s.pop_back();
    return s;
}

std::vector<FourCC> decode_fourccs(const KlvNode& leaf)
{
    if (leaf.header.type != 'F')
        fail(Errc::BadTypeCode, "'" + leaf.header.key.str() + "' is not a FourCC entry");
    std::vector<FourCC> out;
    for (std::size_t i = 0; i + 4 <= leaf.raw.size(); i += 4)
        out.emplace_back(be::load32(leaf.raw.data() + i));
    return out;
}

std::string dump_tree(const KlvNode& root)
{
    std::ostringstream os;
    if (root.header.key.value() == 0) {
        for (const auto& c : root.children)
            dump_into(c, 0, os);
    } else {
        dump_into(root, 0, os);
    }
    return os.str();
}

AxisMapping AxisMapping::from_orientation(std::string_view orin)
{
    if (orin.size() != 3)
        fail(Errc::MalformedKlv, "orientation string must have 3 characters: '" + std::string(orin) + "'");
    AxisMapping m;
    std::array<bool, 3> seen{};
    for (int channel = 0; channel < 3; ++channel) {
        char c = orin[std::size_t(channel)];
        int axis = -1;
        switch (c) {
        case 'X': case 'x': axis = 0; break;
        case 'Y': case 'y': axis = 1; break;
        case 'Z': case 'z': axis = 2; break;
        }
        if (axis < 0 || seen[std::size_t(axis)])
            fail(Errc::MalformedKlv, "invalid orientation string '" + std::string(orin) + "'");
        seen[std::size_t(axis)] = true;
        m.source[std::size_t(axis)] = channel;
        m.sign[std::size_t(axis)] = (c >= 'a') ? -1 : 1;
    }
    return m;
}

std::string AxisMapping::describe() const
{
    static constexpr char names[] = "xyz";
    std::string s;
    for (std::size_t a = 0; a < 3; ++a) {
        if (a)
            s += ',';
        s += names[a];
        s += '=';
        s += sign[a] < 0 ? '-' : '+';
        s += "ch" + std::to_string(source[a]);
    }
    return s;
}

SensorStream extract_stream(const KlvNode& root, FourCC key)
{
    std::vector<const KlvNode*> holders;
    collect_holders(root, key, holders);
    if (holders.empty())
        fail(Errc::StreamNotFound, "no '" + key.str() + "' entry in payload");

    SensorStream out;
    out.key = key;
    for (const KlvNode* holder : holders) {
        const KlvNode* data = nullptr;
        for (const auto& c : holder->children)
            if (!c.is_container() && c.header.key == key)
                data = &c;

        std::size_t width = scalar_size(data->header.type);
        if (!is_numeric_type(data->header.type))
            fail(Errc::BadTypeCode, "stream '" + key.str() + "' uses unsupported type letter '" +
                                        std::string(1, data->header.type) + "'");
        std::size_t channels = data->header.item_size / width;
        if (channels == 0 || channels * width != data->header.item_size)
            fail(Errc::MalformedKlv, "stream '" + key.str() + "' item size does not match its type");
        if (out.channels != 0 && out.channels != channels)
            fail(Errc::MalformedKlv, "stream '" + key.str() + "' changes channel count between blocks");
        out.channels = channels;

        std::vector<double> scale(channels, 1.0);
        if (const KlvNode* scal = holder->child(kScal)) {
            auto divisors = decode_numeric(*scal);
            if (divisors.size() == 1) {
                scale.assign(channels, divisors[0]);
            } else if (divisors.size() == channels) {
                scale = divisors;
            } else {
                fail(Errc::ScaleMismatch, "SCAL has " + std::to_string(divisors.size()) + " values for " +
                                              std::to_string(channels) + " channels of '" + key.str() + "'");
            }
            for (double d : scale)
                if (d == 0.0)
                    fail(Errc::ScaleMismatch, "SCAL divisor of zero for '" + key.str() + "'");
        }
        out.scale = scale;

        for (FourCC units_key : {kSiun, kUnit}) {
            const KlvNode* u = holder->child(units_key);
            if (u && (u->header.type == 'c' || u->header.type == 'U')) {
                out.units = decode_text(*u);
                break;
            }
        }

        AxisMapping axes;
        if (const KlvNode* orin = holder->child(kOrin); orin && channels == 3 && orin->header.type == 'c')
            axes = AxisMapping::from_orientation(decode_text(*orin));
        out.axes = axes;

        auto raw = decode_numeric(*data);
        std::size_t rows = raw.size() / channels;
        out.values.reserve(out.values.size() + raw.size());
        for (std::size_t r = 0; r < rows; ++r) {
            if (channels == 3) {
                for (std::size_t a = 0; a < 3; ++a) {
                    auto ch = std::size_t(axes.source[a]);
                    out.values.push_back(axes.sign[a] * raw[r * 3 + ch] / scale[ch]);
                }
            } else {
                for (std::size_t c = 0; c < channels; ++c)
                    out.values.push_back(raw[r * channels + c] / scale[c]);
            }
        }
    }
    return out;
}

std::map<FourCC, std::size_t> stream_counts(const KlvNode& root)
{
    std::map<FourCC, std::size_t> counts;
    count_streams(root, counts);
    return counts;
}

} // namespace govi::gpmf
