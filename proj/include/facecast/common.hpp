#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace facecast {

/// Base class of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller violated an operation precondition (bad size, bad range, ...).
class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& msg) : Error(msg) {}
};

/// A file could not be parsed; message names the file and line.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& msg)
        : Error(path + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Geometric configuration too degenerate to solve (e.g. collinear landmarks).
class DegenerateConfiguration : public Error {
public:
    explicit DegenerateConfiguration(const std::string& msg) : Error(msg) {}
};

/// An unconstrained node of a deformation graph cannot reach the constrained set.
class GraphConnectivityError : public Error {
public:
    explicit GraphConnectivityError(const std::string& msg) : Error(msg) {}
};

/// Training hit a non-finite gradient; message names the offending tensor.
class TrainingAbort : public Error {
public:
    explicit TrainingAbort(const std::string& msg) : Error(msg) {}
};

/// A condition that should be impossible given validated inputs.
class InternalError : public Error {
public:
    explicit InternalError(const std::string& msg) : Error(msg) {}
};

/// Deterministic random source. Wraps a fixed 64-bit generator and derives
/// all floating-point draws with explicit arithmetic so sequences are
/// reproducible independently of the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {
        // warm up so nearby seeds decorrelate quickly
        for (int i = 0; i < 4; ++i) next();
    }

    std::uint64_t next() {
        // xorshift* variant
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (cached spare).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Fisher-Yates shuffle, deterministic under the seed.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independent child seed (e.g. one per generated case).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 on master ^ f(index)
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace facecast
