#pragma once

#include <array>
#include <cstdint>

namespace pins {

// splitmix64; used for seeding and for deriving independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna). Small state, passes BigCrush, and fast
// enough that coordinate draws do not dominate the MC step cost.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed = 1)
    {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next()
    {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [-1, 1)
    double uniform_symmetric() { return 2.0 * uniform() - 1.0; }

    void fill_uniform_symmetric(double* out, int n)
    {
        for (int i = 0; i < n; ++i) out[i] = uniform_symmetric();
    }

    // uniform integer in [0, n); n must be > 0
    std::uint64_t uniform_below(std::uint64_t n)
    {
        // Lemire rejection; bias-free.
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_;
};

// Four interleaved xoshiro256++ lanes. The scalar generator's 5-cycle
// dependency chain caps coordinate draws at ~1.7 ns each; four independent
// chains pipeline to well under 1 ns. Lane l produces out[4k + l].
class Xoshiro256x4 {
public:
    explicit Xoshiro256x4(std::uint64_t seed = 1)
    {
        std::uint64_t sm = seed;
        for (int l = 0; l < 4; ++l)
            for (int w = 0; w < 4; ++w) s_[w][l] = splitmix64(sm);
    }

    void fill_uniform_symmetric(double* out, int n)
    {
        int i = 0;
        for (; i + 4 <= n; i += 4) {
            for (int l = 0; l < 4; ++l) {
                const std::uint64_t r = rotl(s_[0][l] + s_[3][l], 23) + s_[0][l];
                const std::uint64_t t = s_[1][l] << 17;
                s_[2][l] ^= s_[0][l];
                s_[3][l] ^= s_[1][l];
                s_[1][l] ^= s_[2][l];
                s_[0][l] ^= s_[3][l];
                s_[2][l] ^= t;
                s_[3][l] = rotl(s_[3][l], 45);
                out[i + l] = static_cast<double>(r >> 11) * 0x1.0p-52 - 1.0;
            }
        }
        for (; i < n; ++i) {
            const std::uint64_t r = rotl(s_[0][0] + s_[3][0], 23) + s_[0][0];
            const std::uint64_t t = s_[1][0] << 17;
            s_[2][0] ^= s_[0][0];
            s_[3][0] ^= s_[1][0];
            s_[1][0] ^= s_[2][0];
            s_[0][0] ^= s_[3][0];
            s_[2][0] ^= t;
            s_[3][0] = rotl(s_[3][0], 45);
            out[i] = static_cast<double>(r >> 11) * 0x1.0p-52 - 1.0;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4][4];  // [state word][lane]
};

// All randomness in a nested-sampling run flows from one 64-bit seed.
// Independent streams are addressed by up to three integers; walker streams
// use (run seed, iteration, slot) so results cannot depend on worker
// scheduling.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t a,
                                        std::uint64_t b = 0, std::uint64_t c = 0)
{
    std::uint64_t s = seed ^ 0x6a09e667f3bcc908ULL;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0x3c6ef372fe94f82bULL;
    h ^= splitmix64(s);
    s ^= c + 0xa54ff53a5f1d36f1ULL;
    h ^= splitmix64(s);
    return h;
}

}  // namespace pins
