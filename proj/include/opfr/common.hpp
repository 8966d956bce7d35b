#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <system_error>

namespace opfr {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleSplit : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingleClassTraining : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateDensity : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotApplicable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips the exact double.
inline std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError(context + ": invalid number '" + std::string(text) + "'");
    return value;
}

inline long long parse_int(std::string_view text, const std::string& context) {
    long long value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError(context + ": invalid integer '" + std::string(text) + "'");
    return value;
}

// Deterministic RNG helpers. Draws do not depend on the standard library's
// distribution implementations, so results are stable across toolchains.
inline std::uint64_t draw_bounded(std::mt19937_64& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

template <typename T>
void shuffle_deterministic(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(draw_bounded(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace opfr
