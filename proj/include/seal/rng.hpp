#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace seal {

// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the
// standard, but std::uniform_int_distribution is implementation-defined, so
// bounded draws are done here with rejection sampling to stay identical
// across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, bound)
    std::uint64_t bounded(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::bounded: bound must be > 0");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    std::size_t index(std::size_t size) {
        return static_cast<std::size_t>(bounded(static_cast<std::uint64_t>(size)));
    }

    // uniform double in [0, 1)
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

    // Deterministic sample of n items without replacement, preserving no
    // particular order beyond the shuffle (Fisher-Yates prefix).
    template <typename T>
    std::vector<T> sample(const std::vector<T>& items, std::size_t n) {
        if (n > items.size()) throw std::invalid_argument("Rng::sample: n exceeds population");
        std::vector<std::size_t> idx(items.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + index(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        std::vector<T> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(items[idx[i]]);
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace seal
