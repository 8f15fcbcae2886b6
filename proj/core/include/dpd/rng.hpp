#pragma once

#include <cstdint>
#include <random>

namespace dpd {

// Deterministic random stream. The engine (mt19937_64) has a
// standard-mandated sequence; the distributions below are written out here
// because the std:: ones are implementation-defined, and model files must be
// byte-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform();

    bool chance(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

} // namespace dpd
