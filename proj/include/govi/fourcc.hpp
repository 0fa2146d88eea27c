#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace govi {

/// Four-character code as stored on the wire: four raw bytes, first byte
/// most significant.
class FourCC {
public:
    constexpr FourCC() = default;
    constexpr explicit FourCC(std::uint32_t value) : value_(value) {}
    constexpr FourCC(const char (&text)[5])
        : value_((std::uint32_t(std::uint8_t(text[0])) << 24) | (std::uint32_t(std::uint8_t(text[1])) << 16) |
                 (std::uint32_t(std::uint8_t(text[2])) << 8) | std::uint32_t(std::uint8_t(text[3])))
    {
    }

    static FourCC from_string(std::string_view text);
    static FourCC from_bytes(std::span<const std::uint8_t, 4> bytes)
    {
        return FourCC((std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
                      (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]));
    }

    constexpr std::uint32_t value() const { return value_; }
    std::array<char, 4> chars() const
    {
        return {char(value_ >> 24), char(value_ >> 16), char(value_ >> 8), char(value_)};
    }
    /// Printable 7-bit ASCII in all four positions (space allowed).
    bool is_printable() const;
    std::string str() const;

    constexpr auto operator<=>(const FourCC&) const = default;

private:
    std::uint32_t value_ = 0;
};

namespace be {

inline std::uint16_t load16(const std::uint8_t* p) { return std::uint16_t((p[0] << 8) | p[1]); }
inline std::uint32_t load32(const std::uint8_t* p)
{
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}
inline std::uint64_t load64(const std::uint8_t* p) { return (std::uint64_t(load32(p)) << 32) | load32(p + 4); }

template <typename Out> void store16(Out& out, std::uint16_t v)
{
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}
template <typename Out> void store32(Out& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(std::uint8_t(v >> shift));
}
template <typename Out> void store64(Out& out, std::uint64_t v)
{
    store32(out, std::uint32_t(v >> 32));
    store32(out, std::uint32_t(v));
}

} // namespace be

} // namespace govi

template <> struct std::hash<govi::FourCC> {
    std::size_t operator()(const govi::FourCC& f) const noexcept { return std::hash<std::uint32_t>{}(f.value()); }
};
