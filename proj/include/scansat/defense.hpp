#pragma once

// The four supported defenses and their insertion transforms.
//
// Scan-path defenses (static XOR obfuscation, scrambling MUXes, dynamic DOS
// obfuscation) are represented as placement specs over the scan architecture;
// the oracle and the attack models interpret them. Random logic locking (RLL)
// rewrites the functional netlist, appending key inputs.
//
// Secret material lives in fields named secret_*; the attack modules never
// touch those fields (enforced by a source-level check in the test suite).
// A boundary i on chain j sits on the scan path between cell i-1 and cell i;
// boundary 0 is right after the Scan-in pin.

#include <cmath>
#include <optional>
#include <utility>

#include "scansat/lfsr.hpp"
#include "scansat/scan_arch.hpp"

namespace scansat {

struct Placement {
    int chain = 0;
    int boundary = 0;
    bool operator==(const Placement&) const = default;
    bool operator<(const Placement& o) const
    {
        return chain != o.chain ? chain < o.chain : boundary < o.boundary;
    }
};

struct StaticObfSpec {
    std::vector<Placement> placements;  // sorted, at most one per boundary
    std::optional<BitVec> secret_key;   // one bit per placement

    void validate(const ScanArchitecture& arch) const
    {
        for (size_t i = 0; i < placements.size(); ++i) {
            const Placement& p = placements[i];
            if (p.chain < 0 || p.chain >= arch.chain_count() || p.boundary < 0 ||
                p.boundary >= arch.chain_length(p.chain))
                throw Error("static obfuscation placement out of range");
            if (i > 0 && !(placements[i - 1] < p))
                throw Error("static obfuscation placements must be sorted and distinct");
        }
        if (secret_key && secret_key->size() != placements.size())
            throw Error("static key width must equal placement count");
    }
};

// MUX on the scan input of cell (chain, slice); data inputs are the cells
// (src0_chain, slice-1) and (src1_chain, slice-1). select=0 routes src0.
struct MuxPlacement {
    int chain = 0;
    int slice = 0;
    int key_index = 0;
    int src0_chain = 0;
    int src1_chain = 0;
};

struct ScrambleSpec {
    std::vector<MuxPlacement> muxes;
    std::vector<std::vector<int>> intended_paths;  // designer's correct chain orderings
    std::optional<BitVec> secret_key;              // one select bit per mux

    void validate(const ScanArchitecture& arch) const
    {
        std::vector<std::vector<bool>> used(arch.chain_count());
        for (int j = 0; j < arch.chain_count(); ++j)
            used[j].assign(arch.chain_length(j), false);
        for (auto& m : muxes) {
            if (m.chain < 0 || m.chain >= arch.chain_count() || m.slice < 1 ||
                m.slice >= arch.chain_length(m.chain))
                throw Error("scramble MUX position out of range");
            if (used[m.chain][m.slice])
                throw Error("duplicate scramble MUX position");
            used[m.chain][m.slice] = true;
            for (int src : {m.src0_chain, m.src1_chain})
                if (src < 0 || src >= arch.chain_count() || arch.chain_length(src) < m.slice)
                    throw Error("scramble MUX source out of range");
            if (m.src0_chain == m.src1_chain)
                throw Error("scramble MUX data inputs must be distinct cells");
            if (m.key_index < 0 || m.key_index >= static_cast<int>(muxes.size()))
                throw Error("scramble key index out of range");
        }
        if (secret_key && secret_key->size() != muxes.size())
            throw Error("scramble key width must equal MUX count");
    }
};

struct DosSpec {
    int key_width = 0;             // = max chain length
    std::vector<int> taps;         // primitive feedback polynomial
    double lock_fraction = 0.0;    // fraction of cells locked per chain
    std::vector<Placement> placements;  // key-bit index = boundary slice index

    std::optional<BitVec> secret_seed;
    std::optional<int> secret_update_period;  // key update frequency in capture pulses
    std::optional<int> secret_max_updates;    // key freezes once exhausted

    void validate(const ScanArchitecture& arch) const
    {
        if (key_width != arch.depth)
            throw Error("DOS key width must equal the scan depth");
        if (lock_fraction <= 0.0 || lock_fraction > 1.0)
            throw Error("DOS lock fraction must be in (0, 1]");
        validate_polynomial(taps, key_width);
        for (size_t i = 0; i < placements.size(); ++i) {
            const Placement& p = placements[i];
            if (p.chain < 0 || p.chain >= arch.chain_count() || p.boundary < 0 ||
                p.boundary >= arch.chain_length(p.chain))
                throw Error("DOS placement out of range");
            if (i > 0 && !(placements[i - 1] < p))
                throw Error("DOS placements must be sorted and distinct");
        }
        if (secret_seed) {
            if (static_cast<int>(secret_seed->size()) != key_width)
                throw Error("DOS seed width must equal key width");
            bool nz = false;
            for (uint8_t b : *secret_seed)
                nz |= b;
            if (!nz)
                throw Error("DOS seed must be nonzero");
        }
        if (secret_update_period && *secret_update_period < 1)
            throw Error("DOS update period must be >= 1");
        if (secret_max_updates && *secret_max_updates < 0)
            throw Error("DOS max updates must be >= 0");
    }
};

struct RllSpec {
    // original net each key gate was spliced on, and the gate kind used
    std::vector<std::pair<std::string, GateKind>> placements;
    std::vector<std::string> key_input_names;  // appended primary inputs, in key order
    std::optional<BitVec> secret_key;          // XOR -> 0, XNOR -> 1

    int key_size() const { return static_cast<int>(key_input_names.size()); }
};

// ---------------------------------------------------------------------------

inline std::vector<Placement> all_boundaries(const ScanArchitecture& arch)
{
    std::vector<Placement> all;
    for (int j = 0; j < arch.chain_count(); ++j)
        for (int i = 0; i < arch.chain_length(j); ++i)
            all.push_back({j, i});
    return all;
}

// Key gates on the scan path only; the functional D-path is untouched.
inline StaticObfSpec insert_static(const ScanArchitecture& arch, int count, uint64_t rng_seed)
{
    auto boundaries = all_boundaries(arch);
    if (count < 0 || count > static_cast<int>(boundaries.size()))
        throw Error("insert_static: key size " + std::to_string(count) + " exceeds " +
                    std::to_string(boundaries.size()) + " available boundaries");
    Rng rng(rng_seed);
    StaticObfSpec spec;
    for (size_t idx : rng.sample(boundaries.size(), count))
        spec.placements.push_back(boundaries[idx]);
    std::sort(spec.placements.begin(), spec.placements.end());
    spec.secret_key = rng.random_bits(count);
    spec.validate(arch);
    return spec;
}

// Each MUX keeps the natural predecessor on one data input and a random
// same-slice cell from another chain on the other; the correct select bit is
// whichever side the natural predecessor landed on.
inline ScrambleSpec insert_scramble(const ScanArchitecture& arch, int mux_count,
                                    uint64_t rng_seed)
{
    if (arch.chain_count() < 2)
        throw Error("insert_scramble: need at least 2 chains for cross-chain inputs");
    struct Pos {
        int chain, slice;
    };
    std::vector<Pos> feasible;
    for (int j = 0; j < arch.chain_count(); ++j)
        for (int i = 1; i < arch.chain_length(j); ++i) {
            bool has_cross = false;
            for (int j2 = 0; j2 < arch.chain_count(); ++j2)
                if (j2 != j && arch.chain_length(j2) >= i)
                    has_cross = true;
            if (has_cross)
                feasible.push_back({j, i});
        }
    if (mux_count < 0 || mux_count > static_cast<int>(feasible.size()))
        throw Error("insert_scramble: MUX count " + std::to_string(mux_count) + " exceeds " +
                    std::to_string(feasible.size()) + " feasible positions");
    Rng rng(rng_seed);
    std::vector<Pos> chosen;
    for (size_t idx : rng.sample(feasible.size(), mux_count))
        chosen.push_back(feasible[idx]);
    std::sort(chosen.begin(), chosen.end(), [](const Pos& a, const Pos& b) {
        return a.chain != b.chain ? a.chain < b.chain : a.slice < b.slice;
    });

    ScrambleSpec spec;
    BitVec key;
    for (size_t k = 0; k < chosen.size(); ++k) {
        auto [j, i] = chosen[k];
        std::vector<int> cross;
        for (int j2 = 0; j2 < arch.chain_count(); ++j2)
            if (j2 != j && arch.chain_length(j2) >= i)
                cross.push_back(j2);
        int other = cross[rng.below(cross.size())];
        MuxPlacement m;
        m.chain = j;
        m.slice = i;
        m.key_index = static_cast<int>(k);
        bool natural_on_1 = rng.coin();
        m.src0_chain = natural_on_1 ? other : j;
        m.src1_chain = natural_on_1 ? j : other;
        key.push_back(natural_on_1);
        spec.muxes.push_back(m);
    }
    spec.secret_key = std::move(key);
    spec.intended_paths = arch.chains;
    spec.validate(arch);
    return spec;
}

// Derives the DOS placement list: ceil(lock_fraction * length) locked
// boundaries per chain, chosen by the seeded RNG. The key bit driving a gate
// at boundary i is bit i of the current dynamic key.
inline DosSpec make_dos(const ScanArchitecture& arch, double lock_fraction, int update_period,
                        int max_updates, BitVec seed, std::vector<int> taps, uint64_t rng_seed)
{
    DosSpec spec;
    spec.key_width = arch.depth;
    spec.taps = taps.empty() ? default_taps(arch.depth) : std::move(taps);
    spec.lock_fraction = lock_fraction;
    spec.secret_seed = std::move(seed);
    spec.secret_update_period = update_period;
    spec.secret_max_updates = max_updates;
    Rng rng(rng_seed);
    for (int j = 0; j < arch.chain_count(); ++j) {
        int len = arch.chain_length(j);
        int count = static_cast<int>(std::ceil(lock_fraction * len));
        if (lock_fraction > 0.0 && count == 0)
            count = 1;
        for (size_t idx : rng.sample(len, count))
            spec.placements.push_back({j, static_cast<int>(idx)});
    }
    std::sort(spec.placements.begin(), spec.placements.end());
    spec.validate(arch);
    return spec;
}

// ---------------------------------------------------------------------------

struct RllResult {
    Netlist locked;
    RllSpec spec;
};

inline Netlist clone_netlist(const Netlist& n)
{
    Netlist out;
    for (int i = 0; i < n.num_nets(); ++i)
        out.add_net(n.net_name(i));
    for (int pi : n.primary_inputs())
        out.add_primary_input(pi);
    for (int po : n.primary_outputs())
        out.add_primary_output(po);
    for (auto& ff : n.flip_flops())
        out.add_flip_flop(ff.q, ff.d);
    for (auto& g : n.gates())
        out.add_gate(g.kind, g.inputs, g.output);
    out.finalize();
    return out;
}

// Splices key gates of the given kinds onto the named nets. All former
// consumers of a net (gate inputs, flip-flop D, primary outputs) are
// redirected through the key gate.
inline RllResult apply_rll_spec(const Netlist& n,
                                const std::vector<std::pair<std::string, GateKind>>& placements)
{
    Netlist out;
    for (int i = 0; i < n.num_nets(); ++i)
        out.add_net(n.net_name(i));

    std::unordered_map<int, int> remap;  // original net -> locked net
    RllSpec spec;
    BitVec key;
    for (auto& [name, kind] : placements) {
        if (kind != GateKind::Xor && kind != GateKind::Xnor)
            throw Error("RLL key gates must be XOR or XNOR");
        auto net = n.find_net(name);
        if (!net)
            throw Error("RLL placement on unknown net '" + name + "'");
        if (remap.count(*net))
            throw Error("duplicate RLL placement on net '" + name + "'");
        int key_in = out.fresh_net("keyinput" + std::to_string(key.size()));
        int locked = out.fresh_net(name + "_rll");
        remap[*net] = locked;
        out.add_gate(kind, {*net, key_in}, locked);
        spec.placements.push_back({name, kind});
        spec.key_input_names.push_back(out.net_name(key_in));
        key.push_back(kind == GateKind::Xnor);
    }
    auto mapped = [&](int net) {
        auto it = remap.find(net);
        return it == remap.end() ? net : it->second;
    };
    for (int pi : n.primary_inputs())
        out.add_primary_input(pi);
    for (auto& kn : spec.key_input_names)
        out.add_primary_input(*out.find_net(kn));
    for (int po : n.primary_outputs())
        out.add_primary_output(mapped(po));
    for (auto& ff : n.flip_flops())
        out.add_flip_flop(ff.q, mapped(ff.d));
    for (auto& g : n.gates()) {
        std::vector<int> ins;
        ins.reserve(g.inputs.size());
        for (int in : g.inputs)
            ins.push_back(mapped(in));
        out.add_gate(g.kind, std::move(ins), g.output);
    }
    out.finalize();
    spec.secret_key = std::move(key);
    return RllResult{std::move(out), std::move(spec)};
}

// Evaluates an RLL-locked netlist with the key bound to its key inputs.
inline EvalResult eval_with_key(const Netlist& locked, const RllSpec& spec, const BitVec& pi,
                                const BitVec& key, const BitVec& state)
{
    if (key.size() != spec.key_input_names.size())
        throw Error("eval_with_key: key width mismatch");
    BitVec full = pi;
    full.insert(full.end(), key.begin(), key.end());
    return locked.evaluate(full, state);
}

// Random placements on internal wires; deterministic for a given seed. The
// correct key is fixed by gate polarity, and equivalence under it is checked
// by simulation at insertion time.
inline RllResult apply_rll(const Netlist& n, int key_size, uint64_t rng_seed)
{
    // candidates: driven nets with at least one consumer
    std::vector<bool> consumed(n.num_nets(), false);
    for (auto& g : n.gates())
        for (int in : g.inputs)
            consumed[in] = true;
    for (auto& ff : n.flip_flops())
        consumed[ff.d] = true;
    for (int po : n.primary_outputs())
        consumed[po] = true;
    std::vector<bool> driven(n.num_nets(), false);
    for (auto& g : n.gates())
        driven[g.output] = true;
    for (int pi : n.primary_inputs())
        driven[pi] = true;
    for (auto& ff : n.flip_flops())
        driven[ff.q] = true;
    std::vector<int> candidates;
    for (int i = 0; i < n.num_nets(); ++i)
        if (driven[i] && consumed[i])
            candidates.push_back(i);
    if (key_size < 0 || key_size > static_cast<int>(candidates.size()))
        throw Error("apply_rll: key size " + std::to_string(key_size) + " exceeds " +
                    std::to_string(candidates.size()) + " candidate nets");

    Rng rng(rng_seed);
    std::vector<std::pair<std::string, GateKind>> placements;
    for (size_t idx : rng.sample(candidates.size(), key_size))
        placements.push_back(
            {n.net_name(candidates[idx]), rng.coin() ? GateKind::Xnor : GateKind::Xor});
    RllResult r = apply_rll_spec(n, placements);

    // sanity: the correct key restores the original function
    Rng check(rng_seed ^ 0x5eedULL);
    for (int t = 0; t < 1000; ++t) {
        BitVec pi = check.random_bits(n.num_pis());
        BitVec st = check.random_bits(n.num_ffs());
        EvalResult ref = n.evaluate(pi, st);
        EvalResult got = eval_with_key(r.locked, r.spec, pi, *r.spec.secret_key, st);
        if (ref.po != got.po || ref.next_state != got.next_state)
            throw Error("apply_rll: locked netlist is not equivalent under the correct key");
    }
    return r;
}

// ---------------------------------------------------------------------------

// A scan-equipped design plus whichever defenses are installed. The netlist
// is the functional (possibly RLL-locked) circuit; scan-path defenses are
// interpreted against the architecture by the oracle and the model builders.
struct LockedDesign {
    std::string name;
    Netlist netlist;
    ScanArchitecture arch;
    std::optional<CompressionSpec> compression;
    std::optional<StaticObfSpec> static_obf;
    std::optional<ScrambleSpec> scramble;
    std::optional<DosSpec> dos;
    std::optional<RllSpec> rll;

    int channels() const
    {
        return compression ? compression->channels() : arch.chain_count();
    }
    int depth() const { return arch.depth; }
    int functional_pis() const
    {
        return netlist.num_pis() - (rll ? rll->key_size() : 0);
    }

    void validate() const
    {
        // every flip-flop in exactly one chain exactly once
        std::vector<int> seen(netlist.num_ffs(), 0);
        for (auto& chain : arch.chains)
            for (int ff : chain) {
                if (ff < 0 || ff >= netlist.num_ffs())
                    throw Error("scan chain references unknown flip-flop");
                ++seen[ff];
            }
        for (int c : seen)
            if (c != 1)
                throw Error("every flip-flop must appear in exactly one chain exactly once");
        int longest = 0, shortest = netlist.num_ffs();
        for (auto& chain : arch.chains) {
            longest = std::max(longest, static_cast<int>(chain.size()));
            shortest = std::min(shortest, static_cast<int>(chain.size()));
        }
        if (arch.chain_count() > 0 && longest - shortest > 1)
            throw Error("chain lengths may differ by at most 1");
        if (arch.depth != longest)
            throw Error("scan depth must equal the longest chain");
        if (compression) {
            if (arch.chain_count() % compression->ratio != 0)
                throw Error("compression ratio must divide the chain count");
            if (scramble && compression->ratio > 1)
                throw Error("scrambling with compression is not supported");
        }
        if (dos && (static_obf || scramble))
            throw Error("DOS cannot be combined with other scan-path defenses");
        if (static_obf)
            static_obf->validate(arch);
        if (scramble)
            scramble->validate(arch);
        if (dos)
            dos->validate(arch);
        if (rll) {
            for (auto& name : rll->key_input_names) {
                auto net = netlist.find_net(name);
                if (!net)
                    throw Error("RLL key input '" + name + "' missing from netlist");
                bool is_pi = false;
                for (int pi : netlist.primary_inputs())
                    if (pi == *net)
                        is_pi = true;
                if (!is_pi)
                    throw Error("RLL key input '" + name + "' is not a primary input");
            }
        }
    }
};

// A candidate secret assignment, e.g. as recovered by an attack.
struct RecoveredSecret {
    std::optional<BitVec> static_key;
    std::optional<BitVec> scramble_key;
    std::optional<BitVec> seed;
    std::optional<BitVec> rll_key;
    std::optional<int> update_period;
};

// Installs a candidate secret into a (public) design so an oracle can be
// instantiated from it. Returns false when the shape does not match the
// design's defenses.
inline bool install_candidate_secrets(LockedDesign& d, const RecoveredSecret& s)
{
    if (d.static_obf) {
        if (!s.static_key)
            return false;
        d.static_obf->secret_key = s.static_key;
    }
    if (d.scramble) {
        if (!s.scramble_key)
            return false;
        d.scramble->secret_key = s.scramble_key;
    }
    if (d.dos) {
        if (!s.seed || !s.update_period)
            return false;
        d.dos->secret_seed = s.seed;
        d.dos->secret_update_period = s.update_period;
        d.dos->secret_max_updates = 1 << 30;  // cap unknown to the attacker
    }
    if (d.rll) {
        if (!s.rll_key)
            return false;
        d.rll->secret_key = s.rll_key;
    }
    return true;
}

// Copy with all secret material removed: this is the attacker's view.
inline LockedDesign strip_secrets(const LockedDesign& d)
{
    LockedDesign pub = d;
    if (pub.static_obf)
        pub.static_obf->secret_key.reset();
    if (pub.scramble)
        pub.scramble->secret_key.reset();
    if (pub.dos) {
        pub.dos->secret_seed.reset();
        pub.dos->secret_update_period.reset();
        pub.dos->secret_max_updates.reset();
    }
    if (pub.rll)
        pub.rll->secret_key.reset();
    return pub;
}

}  // namespace scansat
