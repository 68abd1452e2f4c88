#pragma once

#include <cstdint>
#include <random>

namespace arl {

/// SplitMix64 finalizer. Used to turn (master seed, index) pairs into
/// well-mixed engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream id from a master seed, a trajectory index
/// and a role tag (policy run, CI run, cross-validation, ...).
constexpr std::uint64_t derive_stream_id(std::uint64_t master_seed,
                                         std::uint64_t index,
                                         std::uint64_t role = 0) noexcept {
    return splitmix64(splitmix64(splitmix64(master_seed) ^ index) ^ (role * 0xD1B54A32D192ED03ULL));
}

/// Caller-owned random stream. One per trajectory; never shared between
/// concurrently simulated trajectories.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t stream_id)
        : id_(stream_id), engine_(splitmix64(stream_id)) {}

    std::uint64_t id() const noexcept { return id_; }

    /// Standard normal draw.
    double normal() { return normal_(engine_); }

    /// Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n) {
        std::uniform_int_distribution<std::size_t> dist(0, n - 1);
        return dist(engine_);
    }

    engine_type& engine() noexcept { return engine_; }

private:
    std::uint64_t id_;
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace arl
