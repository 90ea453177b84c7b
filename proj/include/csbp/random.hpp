#pragma once

#include <array>
#include <cstdint>

namespace csbp {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Counter-based stream: the key is the base seed, the counter carries the
// stream id and a block index. Streams with distinct ids never overlap.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t id);

    std::uint64_t next_u64();
    double uniform(); // in (0, 1)
    double exponential();
    double normal();
    double gamma(double shape); // unit scale
    std::int64_t poisson(double mean);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t id() const { return id_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace csbp
