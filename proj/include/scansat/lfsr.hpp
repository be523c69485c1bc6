#pragma once

// Fibonacci LFSR over GF(2). One step: feedback bit = XOR of the tapped state
// bits, state shifts toward higher indices, feedback enters at index 0:
//   next[0] = XOR_{t in taps} state[t-1];  next[i] = state[i-1] for i >= 1.
// Taps are 1-based state positions. With a primitive polynomial the nonzero
// states form a single cycle of length 2^width - 1.

#include <vector>

#include "scansat/common.hpp"

namespace scansat {

// One maximal-length tap set per width. Entries up to width 20 are verified
// exhaustively by the test suite (full period check); larger ones are the
// standard published sets.
inline const std::vector<int>& default_taps(int width)
{
    static const std::vector<std::vector<int>> table = {
        {},           {},           {2, 1},       {3, 2},        {4, 3},
        {5, 3},       {6, 5},       {7, 6},       {8, 6, 5, 4},  {9, 5},
        {10, 7},      {11, 9},      {12, 6, 4, 1}, {13, 4, 3, 1}, {14, 5, 3, 1},
        {15, 14},     {16, 15, 13, 4}, {17, 14},  {18, 11},      {19, 6, 2, 1},
        {20, 17},     {21, 19},     {22, 21},     {23, 18},      {24, 23, 22, 17},
        {25, 22},     {26, 6, 2, 1}, {27, 5, 2, 1}, {28, 25},    {29, 27},
        {30, 6, 4, 1}, {31, 28},    {32, 22, 2, 1}};
    if (width < 2 || width >= static_cast<int>(table.size()))
        throw Error("no default polynomial for width " + std::to_string(width));
    return table[width];
}

inline void check_taps(const std::vector<int>& taps, int width)
{
    if (width < 2)
        throw Error("LFSR width must be at least 2");
    if (taps.empty())
        throw Error("empty tap set");
    std::vector<bool> seen(width + 1, false);
    for (int t : taps) {
        if (t < 1 || t > width)
            throw Error("tap " + std::to_string(t) + " out of range for width " +
                        std::to_string(width));
        if (seen[t])
            throw Error("duplicate tap " + std::to_string(t));
        seen[t] = true;
    }
}

inline BitVec lfsr_next(const BitVec& state, const std::vector<int>& taps)
{
    int width = static_cast<int>(state.size());
    check_taps(taps, width);
    bool all_zero = true;
    for (uint8_t b : state)
        if (b)
            all_zero = false;
    if (all_zero)
        throw Error("LFSR state must be nonzero");
    BitVec next(width);
    uint8_t fb = 0;
    for (int t : taps)
        fb ^= state[t - 1];
    next[0] = fb;
    for (int i = 1; i < width; ++i)
        next[i] = state[i - 1];
    return next;
}

// j-th dynamic key: key_1 = seed, key_{m+1} = lfsr_next(key_m).
inline BitVec key_at(const BitVec& seed, const std::vector<int>& taps, int key_index)
{
    if (key_index < 1)
        throw Error("key index must be >= 1");
    BitVec k = seed;
    for (int i = 1; i < key_index; ++i)
        k = lfsr_next(k, taps);
    return k;
}

// Exact primitivity decision by cycle-length enumeration; only practical for
// small widths.
inline bool exhaustive_primitive_check(const std::vector<int>& taps, int width)
{
    check_taps(taps, width);
    BitVec state(width, 0);
    state[0] = 1;
    BitVec start = state;
    uint64_t period = 0;
    uint64_t limit = (uint64_t(1) << width) - 1;
    do {
        state = lfsr_next(state, taps);
        ++period;
        if (period > limit)
            return false;
    } while (state != start);
    return period == limit;
}

// Validation policy: exact check where cheap, table lookup up to width 32,
// trusted input above that.
inline void validate_polynomial(const std::vector<int>& taps, int width)
{
    check_taps(taps, width);
    if (width <= 20) {
        if (!exhaustive_primitive_check(taps, width))
            throw Error("polynomial is not primitive for width " + std::to_string(width));
    } else if (width <= 32) {
        if (taps != default_taps(width))
            throw Error("unrecognized polynomial for width " + std::to_string(width) +
                        "; widths 21..32 accept only the built-in tap set");
    }
}

// Symbolic LFSR state: masks[i] = set of seed indices (as a bit matrix row)
// whose XOR gives state bit i after j-1 steps. key_1 = seed itself.
using SeedMask = std::vector<uint64_t>;

inline bool mask_bit(const SeedMask& m, int i) { return (m[i / 64] >> (i % 64)) & 1; }

inline std::vector<SeedMask> seed_to_key_masks(const std::vector<int>& taps, int width,
                                               int key_index)
{
    if (key_index < 1)
        throw Error("key index must be >= 1");
    check_taps(taps, width);
    size_t words = (width + 63) / 64;
    std::vector<SeedMask> masks(width, SeedMask(words, 0));
    for (int i = 0; i < width; ++i)
        masks[i][i / 64] |= uint64_t(1) << (i % 64);
    for (int step = 1; step < key_index; ++step) {
        std::vector<SeedMask> next(width, SeedMask(words, 0));
        for (int t : taps)
            for (size_t w = 0; w < words; ++w)
                next[0][w] ^= masks[t - 1][w];
        for (int i = 1; i < width; ++i)
            next[i] = masks[i - 1];
        masks = std::move(next);
    }
    return masks;
}

// Applies the symbolic masks to a concrete seed (reference path for tests and
// for reconstructing the key schedule from a recovered seed).
inline BitVec apply_seed_masks(const std::vector<SeedMask>& masks, const BitVec& seed)
{
    BitVec key(masks.size(), 0);
    for (size_t i = 0; i < masks.size(); ++i) {
        uint8_t v = 0;
        for (size_t b = 0; b < seed.size(); ++b)
            if (mask_bit(masks[i], static_cast<int>(b)))
                v ^= seed[b];
        key[i] = v;
    }
    return key;
}

}  // namespace scansat
