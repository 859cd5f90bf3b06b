#ifndef QFPC_RNG_HPP
#define QFPC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace qfpc {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic random stream.  All randomness in a run flows from one user
/// seed; independent streams are derived from (seed, tag, index) so results
/// do not depend on evaluation order or worker count.  Gaussians use the
/// Marsaglia polar method on top of mt19937_64, so the sequence is fixed by
/// this header alone, not by the standard library's distribution internals.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
        std::uint64_t s = seed;
        detail::splitmix64(s);
        s ^= 0x5851f42d4c957f2dULL * tag;
        detail::splitmix64(s);
        s ^= 0x14057b7ef767814fULL * (index + 1);
        engine_.seed(detail::splitmix64(s));
    }

    double uniform01() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stream tags for the named streams of a run.
namespace stream_tag {
inline constexpr std::uint64_t kOptimize = 0x6f7074ULL;  // "opt"
inline constexpr std::uint64_t kTesting = 0x74657374ULL; // "test"
}  // namespace stream_tag

inline RngStream optimization_stream(std::uint64_t seed) {
    return RngStream(seed, stream_tag::kOptimize);
}

inline RngStream member_stream(std::uint64_t seed, std::uint64_t member) {
    return RngStream(seed, stream_tag::kTesting, member);
}

}  // namespace qfpc

#endif  // QFPC_RNG_HPP
