#pragma once

#include <array>
#include <cstdint>

namespace bifbm::rng {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Key of substream `stream` under `seed`; distinct (seed, stream) pairs give
// unrelated keys.
std::uint64_t substream_key(std::uint64_t seed, std::uint64_t stream) noexcept;

// Philox4x32-10 (Salmon et al., SC'11): a counter-based bijection keyed by
// a 64-bit key. Block i of a stream is a pure function of (key, i).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t key) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}
    explicit Philox4x32(Key key) noexcept : key_(key) {}

    Counter block(Counter ctr) const noexcept;
    Counter block(std::uint64_t index) const noexcept {
        return block(Counter{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0u, 0u});
    }

private:
    Key key_;
};

// Sequential view of a Philox substream: uniforms and standard normals.
// Normals come from Box-Muller on pairs of 53-bit uniforms, so the sequence is
// bit-reproducible across platforms with IEEE libm.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream) noexcept : gen_(substream_key(seed, stream)) {}

    std::uint64_t next_u64() noexcept;
    // Uniform on (0, 1].
    double uniform() noexcept;
    double normal() noexcept;

private:
    Philox4x32 gen_;
    std::uint64_t counter_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bifbm::rng
