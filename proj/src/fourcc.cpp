#include "govi/fourcc.hpp"

#include "govi/error.hpp"

namespace govi {

FourCC FourCC::from_string(std::string_view text)
{
    if (text.size() != 4)
        fail(Errc::InvalidArgument, "FourCC must have exactly 4 characters: '" + std::string(text) + "'");
    std::uint32_t v = 0;
    for (char c : text)
        v = (v << 8) | std::uint8_t(c);
    return FourCC(v);
}

bool FourCC::is_printable() const
{
    for (char c : chars()) {
        auto u = std::uint8_t(c);
        if (u < 0x20 || u > 0x7e)
            return false;
    }
    return true;
}

std::string FourCC::str() const
{
    std::string s;
    for (char c : chars()) {
        auto u = std::uint8_t(c);
        if (u >= 0x20 && u <= 0x7e) {
            s.push_back(c);
        } else {
            static constexpr char hex[] = "0123456789abcdef";
            s += "\\x";
            s.push_back(hex[u >> 4]);
            s.push_back(hex[u & 0xf]);
        }
    }
    return s;
}

} // namespace govi
