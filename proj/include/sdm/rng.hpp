#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sdm {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: the output block is a pure function of (counter, key), which
/// lets every particle own an independent stream without storing state.
struct Philox4x32 {
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Block generate(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// What a stream is used for; separates the draws of one particle in one step.
enum class StreamPurpose : std::uint32_t {
    Prediction = 1,
    Boundary = 2,
    Recycle = 3,
    Initialization = 4,
    Test = 15,
};

/// Random stream keyed by (seed, particle id, step, purpose).
class ParticleStream {
public:
    ParticleStream(std::uint64_t seed, std::uint64_t id, std::uint64_t step,
                   StreamPurpose purpose = StreamPurpose::Prediction)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0u, static_cast<std::uint32_t>(step),
               static_cast<std::uint32_t>(id),
               static_cast<std::uint32_t>((id >> 32) & 0xFFFFu) |
                   (static_cast<std::uint32_t>(step >> 32) & 0xFFFu) << 16 |
                   static_cast<std::uint32_t>(purpose) << 28} {}

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() {
        if (cursor_ >= 2) refill();
        const std::uint64_t hi = block_[2 * cursor_];
        const std::uint64_t lo = block_[2 * cursor_ + 1];
        ++cursor_;
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the sine branch is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    void refill() {
        block_ = Philox4x32::generate(ctr_, key_);
        ++ctr_[0];
        cursor_ = 0;
    }

    Philox4x32::Key key_;
    Philox4x32::Block ctr_;
    Philox4x32::Block block_{};
    int cursor_ = 2;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sdm
