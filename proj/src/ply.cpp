#include "govi/ply.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "govi/error.hpp"
#include "govi/text.hpp"

namespace govi::ply {

namespace {

enum class Scalar { I8, U8, I16, U16, I32, U32, F32, F64 };

Scalar scalar_from_name(const std::string& name)
{
    if (name == "char" || name == "int8")
        return Scalar::I8;
    if (name == "uchar" || name == "uint8")
        return Scalar::U8;
    if (name == "short" || name == "int16")
        return Scalar::I16;
    if (name == "ushort" || name == "uint16")
        return Scalar::U16;
    if (name == "int" || name == "int32")
        return Scalar::I32;
    if (name == "uint" || name == "uint32")
        return Scalar::U32;
    if (name == "float" || name == "float32")
        return Scalar::F32;
    if (name == "double" || name == "float64")
        return Scalar::F64;
    fail(Errc::MalformedPly, "unknown property type '" + name + "'");
}

std::size_t scalar_bytes(Scalar s)
{
    switch (s) {
    case Scalar::I8:
    case Scalar::U8: return 1;
    case Scalar::I16:
    case Scalar::U16: return 2;
    case Scalar::I32:
    case Scalar::U32:
    case Scalar::F32: return 4;
    case Scalar::F64: return 8;
    }
    return 0;
}

double load_scalar(const char* p, Scalar s, bool big_endian)
{
    unsigned char b[8];
    std::size_t n = scalar_bytes(s);
    std::memcpy(b, p, n);
    if (big_endian != (std::endian::native == std::endian::big))
        for (std::size_t i = 0; i < n / 2; ++i)
            std::swap(b[i], b[n - 1 - i]);
    switch (s) {
    case Scalar::I8: { std::int8_t v; std::memcpy(&v, b, 1); return v; }
    case Scalar::U8: return b[0];
    case Scalar::I16: { std::int16_t v; std::memcpy(&v, b, 2); return v; }
    case Scalar::U16: { std::uint16_t v; std::memcpy(&v, b, 2); return v; }
    case Scalar::I32: { std::int32_t v; std::memcpy(&v, b, 4); return v; }
    case Scalar::U32: { std::uint32_t v; std::memcpy(&v, b, 4); return v; }
    case Scalar::F32: { float v; std::memcpy(&v, b, 4); return v; }
    case Scalar::F64: { double v; std::memcpy(&v, b, 8); return v; }
    }
    return 0;
}

template <typename T> void put_le(std::string& out, T v)
{
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(b[i], b[sizeof(T) - 1 - i]);
    out.append(b, sizeof(T));
}

struct Property {
    std::string name;
    Scalar type;
};

} // namespace

void write(const std::filesystem::path& path, const VertexData& data, Format format)
{
    const std::size_t n = data.points.size();
    const bool colors = !data.colors.empty() || data.declare_colors;
    const bool normals = !data.normals.empty() || data.declare_normals;
    const bool quality = !data.quality.empty() || data.declare_quality;
    if ((colors && data.colors.size() != n) || (normals && data.normals.size() != n) ||
        (quality && data.quality.size() != n))
        fail(Errc::InvalidArgument, "vertex attribute counts differ");

    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(Errc::IoError, "cannot write '" + path.string() + "'");

    std::ostringstream header;
    header << "ply\nformat " << (format == Format::Ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
           << "element vertex " << n << "\n"
           << "property float x\nproperty float y\nproperty float z\n";
    if (colors)
        header << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (normals)
        header << "property float nx\nproperty float ny\nproperty float nz\n";
    if (quality)
        header << "property float quality\n";
    header << "end_header\n";
    os << header.str();

    std::string buf;
    for (std::size_t i = 0; i < n; ++i) {
        if (format == Format::Ascii) {
            for (int a = 0; a < 3; ++a)
                buf += (a ? " " : "") + text::shortest(float(data.points[i][a]));
            if (colors)
                for (auto c : data.colors[i])
                    buf += " " + std::to_string(int(c));
            if (normals)
                for (int a = 0; a < 3; ++a)
                    buf += " " + text::shortest(float(data.normals[i][a]));
            if (quality)
                buf += " " + text::shortest(data.quality[i]);
            buf += '\n';
        } else {
            for (int a = 0; a < 3; ++a)
                put_le(buf, float(data.points[i][a]));
            if (colors)
                buf.append(reinterpret_cast<const char*>(data.colors[i].data()), 3);
            if (normals)
                for (int a = 0; a < 3; ++a)
                    put_le(buf, float(data.normals[i][a]));
            if (quality)
                put_le(buf, data.quality[i]);
        }
        if (buf.size() > (1u << 20)) {
            os << buf;
            buf.clear();
        }
    }
    os << buf;
    if (!os)
        fail(Errc::IoError, "write failed for '" + path.string() + "'");
}

VertexData read(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        fail(Errc::IoError, "cannot read '" + path.string() + "'");

    std::string line;
    std::getline(is, line);
    if (text::trim(line) != "ply")
        fail(Errc::MalformedPly, "'" + path.string() + "' lacks the ply magic line");

    enum class Enc { Ascii, Le, Be } enc = Enc::Ascii;
    bool have_format = false;
    std::size_t vertex_count = 0;
    bool in_vertex = false;
    bool vertex_seen = false;
    std::vector<Property> props;
    while (true) {
        if (!std::getline(is, line))
            fail(Errc::MalformedPly, "header not terminated");
        auto tok = text::tokens(line);
        if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info")
            continue;
        if (tok[0] == "end_header")
            break;
        if (tok[0] == "format" && tok.size() >= 2) {
            have_format = true;
            if (tok[1] == "ascii")
                enc = Enc::Ascii;
            else if (tok[1] == "binary_little_endian")
                enc = Enc::Le;
            else if (tok[1] == "binary_big_endian")
                enc = Enc::Be;
            else
                fail(Errc::MalformedPly, "unknown format '" + std::string(tok[1]) + "'");
        } else if (tok[0] == "element" && tok.size() == 3) {
            in_vertex = tok[1] == "vertex";
            if (in_vertex) {
                if (vertex_seen)
                    fail(Errc::MalformedPly, "duplicate vertex element");
                vertex_seen = true;
                vertex_count = std::size_t(text::parse_uint(tok[2], "vertex count"));
            } else if (!vertex_seen) {
                fail(Errc::MalformedPly, "elements before 'vertex' are not supported");
            }
        } else if (tok[0] == "property") {
            if (!in_vertex)
                continue;
            if (tok.size() != 3)
                fail(Errc::MalformedPly, "list properties on vertices are not supported");
            props.push_back({std::string(tok[2]), scalar_from_name(std::string(tok[1]))});
        } else {
            fail(Errc::MalformedPly, "unexpected header line '" + line + "'");
        }
    }
    if (!have_format || !vertex_seen)
        fail(Errc::MalformedPly, "header lacks format or vertex element");

    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, inx = -1, iny = -1, inz = -1, iq = -1;
    for (std::size_t i = 0; i < props.size(); ++i) {
        const auto& n = props[i].name;
        int k = int(i);
        if (n == "x") ix = k;
        else if (n == "y") iy = k;
        else if (n == "z") iz = k;
        else if (n == "red" || n == "r" || n == "diffuse_red") ir = k;
        else if (n == "green" || n == "g" || n == "diffuse_green") ig = k;
        else if (n == "blue" || n == "b" || n == "diffuse_blue") ib = k;
        else if (n == "nx") inx = k;
        else if (n == "ny") iny = k;
        else if (n == "nz") inz = k;
        else if (n == "quality" || n == "scalar_quality") iq = k;
    }
    if (ix < 0 || iy < 0 || iz < 0)
        fail(Errc::MalformedPly, "vertex element lacks x/y/z");
    const bool colors = ir >= 0 && ig >= 0 && ib >= 0;
    const bool normals = inx >= 0 && iny >= 0 && inz >= 0;

    VertexData out;
    out.points.reserve(vertex_count);
    std::vector<double> row(props.size());
    std::size_t stride = 0;
    for (const auto& p : props)
        stride += scalar_bytes(p.type);
    std::string raw(stride, '\0');
    for (std::size_t v = 0; v < vertex_count; ++v) {
        if (enc == Enc::Ascii) {
            if (!std::getline(is, line))
                fail(Errc::MalformedPly, "file ends after " + std::to_string(v) + " of " +
                                             std::to_string(vertex_count) + " vertices");
            auto tok = text::tokens(line);
            if (tok.size() < props.size())
                fail(Errc::MalformedPly, "vertex " + std::to_string(v) + " has too few values");
            for (std::size_t i = 0; i < props.size(); ++i)
                row[i] = text::parse_double(tok[i], "vertex value");
        } else {
            if (!is.read(raw.data(), std::streamsize(stride)))
                fail(Errc::MalformedPly, "file ends after " + std::to_string(v) + " of " +
                                             std::to_string(vertex_count) + " vertices");
            std::size_t off = 0;
            for (std::size_t i = 0; i < props.size(); ++i) {
                row[i] = load_scalar(raw.data() + off, props[i].type, enc == Enc::Be);
                off += scalar_bytes(props[i].type);
            }
        }
        out.points.emplace_back(row[std::size_t(ix)], row[std::size_t(iy)], row[std::size_t(iz)]);
        if (colors) {
            auto to8 = [&](int idx) {
                double c = row[std::size_t(idx)];
                if (props[std::size_t(idx)].type == Scalar::F32 || props[std::size_t(idx)].type == Scalar::F64)
                    c *= 255.0;
                return std::uint8_t(std::clamp(std::lround(c), 0L, 255L));
            };
            out.colors.push_back({to8(ir), to8(ig), to8(ib)});
        }
        if (normals)
            out.normals.emplace_back(row[std::size_t(inx)], row[std::size_t(iny)], row[std::size_t(inz)]);
        if (iq >= 0)
            out.quality.push_back(float(row[std::size_t(iq)]));
    }
    return out;
}

} // namespace govi::ply
