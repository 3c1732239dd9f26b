#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xsum {

// Process exit codes shared by every command.
enum class ExitCode : int {
    ok = 0,
    config_error = 2,
    data_error = 3,
    numeric_failure = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::config_error, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ExitCode::data_error, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ExitCode::numeric_failure, what) {}
};

// 64-bit FNV-1a. The seed is folded into the offset basis so that distinct
// seeds give independent hash functions over the same bytes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0) noexcept;
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0) noexcept;

std::string hex64(std::uint64_t value);

// Portable random stream. std::mt19937_64 output is fixed by the standard;
// the distributions below are written out so results do not depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    double normal();

    template <class It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

    // Child stream whose sequence is a pure function of (parent seed, tag).
    static Rng derive(std::uint64_t seed, std::string_view tag);

private:
    std::mt19937_64 engine_;
};

std::string trim(std::string_view s);

}  // namespace xsum
