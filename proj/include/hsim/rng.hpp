#pragma once

#include <cstdint>
#include <string_view>

namespace hsim {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent seed for substream `stream` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// SplitMix64 generator with inverse-CDF standard normals.
///
/// Streams are keyed by (seed, stream); the output sequence depends only on
/// the key, so replications can be generated in any order or on any thread.
class RandomStream {
public:
    static constexpr std::string_view kAlgorithm = "splitmix64-v1+boost-normal-quantile";

    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(derive_seed(seed, stream)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal();

private:
    std::uint64_t state_;
};

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace hsim
