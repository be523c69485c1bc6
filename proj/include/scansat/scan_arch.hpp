#pragma once

// Scan chain stitching and optional test compression. Position 0 of a chain
// is adjacent to the Scan-in pin; the last position drives Scan-out, so the
// bit shifted in first ends at the highest position. Chains shorter than the
// scan depth are padded at the Scan-out end with phantom cells (capture 0,
// drive nothing) so that all slices are full.

#include <numeric>
#include <vector>

#include "scansat/netlist.hpp"

namespace scansat {

enum class StitchPolicy { DeclarationOrder, SeededRandom };

struct ScanArchitecture {
    // chains[j][i] = flip-flop index at chain j, position i (scan-in side = 0)
    std::vector<std::vector<int>> chains;
    int depth = 0;  // max chain length
    StitchPolicy policy = StitchPolicy::DeclarationOrder;
    uint64_t stitch_seed = 0;

    int chain_count() const { return static_cast<int>(chains.size()); }
    int chain_length(int j) const { return static_cast<int>(chains[j].size()); }
    int total_cells() const
    {
        int n = 0;
        for (auto& c : chains)
            n += static_cast<int>(c.size());
        return n;
    }
    bool is_real_cell(int chain, int pos) const { return pos < chain_length(chain); }
};

struct CompressionSpec {
    int ratio = 1;                              // R = internal chains / external channels
    std::vector<int> channel_of_chain;          // decompressor: chain -> scan-in channel
    std::vector<std::vector<int>> chains_of_channel;  // compactor: channel -> XORed chains

    int channels() const { return static_cast<int>(chains_of_channel.size()); }
    bool identity() const { return ratio == 1; }
};

inline ScanArchitecture build_scan(const Netlist& n, int chain_count,
                                   StitchPolicy policy = StitchPolicy::DeclarationOrder,
                                   uint64_t seed = 0)
{
    int ffs = n.num_ffs();
    if (chain_count < 1 || chain_count > ffs)
        throw Error("build_scan: chain count " + std::to_string(chain_count) +
                    " out of range for " + std::to_string(ffs) + " flip-flops");
    std::vector<int> order(ffs);
    std::iota(order.begin(), order.end(), 0);
    if (policy == StitchPolicy::SeededRandom) {
        Rng rng(seed);
        rng.shuffle(order);
    }
    ScanArchitecture arch;
    arch.policy = policy;
    arch.stitch_seed = seed;
    arch.depth = (ffs + chain_count - 1) / chain_count;
    int base = ffs / chain_count;
    int extra = ffs % chain_count;
    size_t next = 0;
    for (int j = 0; j < chain_count; ++j) {
        int len = base + (j < extra ? 1 : 0);
        std::vector<int> chain;
        chain.reserve(len);
        for (int i = 0; i < len; ++i)
            chain.push_back(order[next++]);
        arch.chains.push_back(std::move(chain));
    }
    return arch;
}

// Fanout decompression / XOR compaction over groups of R consecutive chains.
// R = 1 yields identity maps.
inline CompressionSpec build_compression(const ScanArchitecture& arch, int ratio)
{
    int x = arch.chain_count();
    if (ratio < 1 || x % ratio != 0)
        throw Error("build_compression: ratio " + std::to_string(ratio) +
                    " does not divide chain count " + std::to_string(x));
    CompressionSpec spec;
    spec.ratio = ratio;
    int channels = x / ratio;
    spec.channel_of_chain.resize(x);
    spec.chains_of_channel.resize(channels);
    for (int j = 0; j < x; ++j) {
        int c = j / ratio;
        spec.channel_of_chain[j] = c;
        spec.chains_of_channel[c].push_back(j);
    }
    return spec;
}

inline CompressionSpec identity_compression(const ScanArchitecture& arch)
{
    return build_compression(arch, 1);
}

}  // namespace scansat
