#pragma once

// Counter-based random numbers. Every draw is a pure function of a key, so
// streams are reproducible bit-for-bit and independent of scheduling.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace jcbeat::rng {

constexpr std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t key(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto p : parts) h = splitmix(h ^ p);
    return h;
}

// Uniform on the open interval (0, 1).
constexpr double unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

inline double normal(std::uint64_t k) {
    const double u1 = unit(splitmix(k));
    const double u2 = unit(splitmix(k ^ 0xd1b54a32d192ed03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return key({master, index, 0x7472616a6563ULL});
}

class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t tag = 0) : base_(key({seed, tag})) {}
    std::uint64_t next() { return splitmix(base_ + 0x632be59bd9b4e019ULL * ++counter_); }
    double uniform() { return unit(next()); }
    std::uint64_t count() const { return counter_; }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

} // namespace jcbeat::rng
