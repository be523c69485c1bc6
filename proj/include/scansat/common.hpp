#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace scansat {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bits are stored one per byte; values are strictly 0/1.
using BitVec = std::vector<uint8_t>;

inline std::string bits_to_string(const BitVec& bits)
{
    std::string s;
    s.reserve(bits.size());
    for (uint8_t b : bits)
        s.push_back(b ? '1' : '0');
    return s;
}

inline BitVec bits_from_string(const std::string& s)
{
    BitVec bits;
    bits.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw Error("bit string must contain only 0/1, got '" + s + "'");
        bits.push_back(c == '1');
    }
    return bits;
}

// Deterministic RNG wrapper. Draw algorithms are pinned here so that a given
// seed produces the same object placements on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // uniform in [0, n)
    uint64_t below(uint64_t n)
    {
        if (n == 0)
            throw Error("Rng::below(0)");
        uint64_t threshold = (~uint64_t{0} - n + 1) % n;  // rejection sampling
        for (;;) {
            uint64_t r = eng_();
            if (r >= threshold)
                return r % n;
        }
    }

    bool coin() { return eng_() & 1; }

    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    // k distinct values from [0, n), in random order
    std::vector<size_t> sample(size_t n, size_t k)
    {
        if (k > n)
            throw Error("Rng::sample: k > n");
        std::vector<size_t> all(n);
        for (size_t i = 0; i < n; ++i)
            all[i] = i;
        shuffle(all);
        all.resize(k);
        return all;
    }

    BitVec random_bits(size_t n)
    {
        BitVec v(n);
        for (auto& b : v)
            b = coin();
        return v;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace scansat
