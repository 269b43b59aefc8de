#pragma once
// shared plumbing: resource-guard errors, counter-based RNG, deterministic parallel sweeps

#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lrlab {

// violating a resource guard (Fock dimension, commutator depth) is reported
// distinctly so the CLI can map it to its own exit code
struct GuardError : std::runtime_error {
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::size_t kMaxFockDim = std::size_t{1} << 12;
inline constexpr int kMaxCommutatorDepth = 9;

// the CLI's --override-guards flag lifts the two guards above (at the caller's
// own risk); everything else stays hard
inline std::atomic<bool>& guard_override_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}
inline void set_guard_override(bool on) { guard_override_flag().store(on); }
inline bool guards_overridden() { return guard_override_flag().load(); }

// splitmix64: counter-based, so draws depend only on (seed, counter), never on
// evaluation order -- the backbone of run-to-run determinism
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// uniform in [0,1)
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t z = splitmix64(seed ^ splitmix64(counter));
    return double(z >> 11) * 0x1.0p-53;
}

// uniform in [-1,1]
inline double uniform_pm1(std::uint64_t seed, std::uint64_t counter) {
    return 2.0 * uniform01(seed, counter) - 1.0;
}

// static block partition; results must be written to per-index slots by fn so
// that any thread count yields the identical output
inline void parallel_for_indexed(std::size_t n, int threads,
                                 const std::function<void(std::size_t)>& fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace lrlab
