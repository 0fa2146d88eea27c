#include "govi/text.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "govi/error.hpp"

namespace govi::text {

std::string shortest(double value)
{
    if (value == 0.0)
        return "0"; // also folds -0
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string fixed(double value, int decimals)
{
    char buf[64];
    int n = std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return std::string(buf, std::size_t(n));
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> tokens(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view token, std::string_view what)
{
    token = trim(token);
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    double v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty())
        fail(Errc::InvalidArgument, "cannot parse " + std::string(what) + " from '" + std::string(token) + "'");
    return v;
}

long long parse_int(std::string_view token, std::string_view what)
{
    token = trim(token);
    long long v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty())
        fail(Errc::InvalidArgument, "cannot parse " + std::string(what) + " from '" + std::string(token) + "'");
    return v;
}

unsigned long long parse_uint(std::string_view token, std::string_view what)
{
    token = trim(token);
    unsigned long long v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty())
        fail(Errc::InvalidArgument, "cannot parse " + std::string(what) + " from '" + std::string(token) + "'");
    return v;
}

} // namespace govi::text
