#pragma once

// Builds the combinational logic-locked equivalent of the n-cycle obfuscated
// scan operation. The model's input groups are the scan-in pattern a, the
// primary inputs, and key (or seed) inputs; outputs are the scan-out pattern
// b and the primary outputs. Under the correct secret the model reproduces
// Oracle::scan_transaction bit for bit — the keystone property the attack
// rests on, checked by the test suite for every defense/compression
// combination.
//
// The model circuit's primary input order is a, then pi, then key inputs;
// output order is b, then po. Key inputs are named keyinput0.. so exported
// models plug into standard logic-locking tooling.

#include "scansat/defense.hpp"

namespace scansat {

struct LockedModel {
    Netlist circuit;                 // purely combinational
    std::vector<int> scan_in_nets;   // [channel*depth + slice]
    std::vector<int> pi_nets;
    std::vector<int> key_nets;       // scan key or seed bits, then RLL key bits
    std::vector<int> scan_out_nets;  // [channel*depth + slice]
    std::vector<int> po_nets;
    int depth = 0;
    int scan_key_width = 0;  // leading entries of key_nets that are scan/seed keys
    int key_index = 0;       // dynamic key window this model was built for; 0 = static
    std::vector<std::string> key_labels;  // key position -> placement description

    int channels() const
    {
        return depth == 0 ? 0 : static_cast<int>(scan_in_nets.size()) / depth;
    }
};

struct ModelIo {
    BitVec response;
    BitVec po;
};

inline ModelIo eval_model(const LockedModel& m, const BitVec& a, const BitVec& pi,
                          const BitVec& key)
{
    BitVec in = a;
    in.insert(in.end(), pi.begin(), pi.end());
    in.insert(in.end(), key.begin(), key.end());
    EvalResult r = m.circuit.evaluate(in, {});
    ModelIo io;
    io.response.assign(r.po.begin(), r.po.begin() + m.scan_out_nets.size());
    io.po.assign(r.po.begin() + m.scan_out_nets.size(), r.po.end());
    return io;
}

// Pure XOR network computing the key_index-th dynamic key from the seed;
// inputs seed0..seedW-1, outputs key0..keyW-1. For key_index = 1 this is
// identity wiring.
inline Netlist seed_to_key_block(const std::vector<int>& taps, int width, int key_index)
{
    auto masks = seed_to_key_masks(taps, width, key_index);
    Netlist n;
    std::vector<int> seeds;
    for (int i = 0; i < width; ++i) {
        int net = n.add_net("seed" + std::to_string(i));
        n.add_primary_input(net);
        seeds.push_back(net);
    }
    for (int i = 0; i < width; ++i) {
        std::vector<int> terms;
        for (int b = 0; b < width; ++b)
            if (mask_bit(masks[i], b))
                terms.push_back(seeds[b]);
        if (terms.empty())
            throw Error("seed-to-key block: constant key bit (polynomial not invertible)");
        int out = n.add_net("key" + std::to_string(i));
        if (terms.size() == 1) {
            n.add_gate(GateKind::Buf, {terms[0]}, out);
        } else {
            int acc = terms[0];
            for (size_t t = 1; t + 1 < terms.size(); ++t) {
                int mid = n.fresh_net("key" + std::to_string(i) + "_x" + std::to_string(t));
                n.add_gate(GateKind::Xor, {acc, terms[t]}, mid);
                acc = mid;
            }
            n.add_gate(GateKind::Xor, {acc, terms.back()}, out);
        }
        n.add_primary_output(out);
    }
    n.finalize();
    return n;
}

namespace detail {

class ModelBuilder {
public:
    ModelBuilder(const LockedDesign& d, int key_index) : d_(d), key_index_(key_index)
    {
        d_.validate();
        depth_ = d_.arch.depth;
        channels_ = d_.channels();
    }

    LockedModel build()
    {
        add_scan_inputs();
        add_functional_pis();
        add_key_inputs();
        build_boundary_key_nets();

        std::vector<std::vector<int>> delivered;  // a' per (chain, real position)
        if (d_.scramble)
            delivered = scramble_load();
        else
            delivered = xor_load();

        copy_combinational(delivered);  // fills captured_ (b' nets) and po map

        std::vector<std::vector<int>> observed =
            d_.scramble ? scramble_unload() : xor_unload();

        add_outputs(observed);
        m_.circuit.finalize();
        m_.depth = depth_;
        m_.key_index = key_index_;
        return std::move(m_);
    }

private:
    // -- interface nets ------------------------------------------------------
    void add_scan_inputs()
    {
        for (int c = 0; c < channels_; ++c)
            for (int s = 0; s < depth_; ++s) {
                int net = m_.circuit.fresh_net("si" + std::to_string(c) + "_" +
                                               std::to_string(s));
                m_.circuit.add_primary_input(net);
                m_.scan_in_nets.push_back(net);
            }
    }

    void add_functional_pis()
    {
        const Netlist& n = d_.netlist;
        int func = d_.functional_pis();
        for (int i = 0; i < func; ++i) {
            int orig = n.primary_inputs()[i];
            int net = m_.circuit.fresh_net(n.net_name(orig));
            m_.circuit.add_primary_input(net);
            m_.pi_nets.push_back(net);
            net_map_[orig] = net;
        }
    }

    int new_key_input(const std::string& label)
    {
        int net = m_.circuit.fresh_net("keyinput" + std::to_string(m_.key_nets.size()));
        m_.circuit.add_primary_input(net);
        m_.key_nets.push_back(net);
        m_.key_labels.push_back(label);
        return net;
    }

    void add_key_inputs()
    {
        if (d_.dos) {
            for (int i = 0; i < d_.dos->key_width; ++i)
                new_key_input("seed bit " + std::to_string(i));
        } else {
            if (d_.scramble)
                for (auto& mx : d_.scramble->muxes)
                    new_key_input("scramble mux chain " + std::to_string(mx.chain) +
                                  " slice " + std::to_string(mx.slice));
            if (d_.static_obf)
                for (auto& p : d_.static_obf->placements)
                    new_key_input("xor gate chain " + std::to_string(p.chain) + " boundary " +
                                  std::to_string(p.boundary));
        }
        m_.scan_key_width = static_cast<int>(m_.key_nets.size());
        // RLL key inputs of the locked netlist become model key inputs too
        if (d_.rll) {
            const Netlist& n = d_.netlist;
            for (int i = 0; i < d_.rll->key_size(); ++i) {
                int orig = n.primary_inputs()[d_.functional_pis() + i];
                int net = new_key_input("logic locking key " + std::to_string(i));
                net_map_[orig] = net;
            }
        }
    }

    // boundary_key_net_[j][i]: model net driving the XOR gate at boundary i of
    // chain j, or -1 when no gate sits there.
    void build_boundary_key_nets()
    {
        boundary_key_net_.assign(d_.arch.chain_count(), std::vector<int>(depth_, -1));
        scramble_sel_net_.assign(d_.arch.chain_count(), std::vector<int>(depth_, -1));
        if (d_.static_obf) {
            for (size_t k = 0; k < d_.static_obf->placements.size(); ++k) {
                auto& p = d_.static_obf->placements[k];
                int key_net =
                    m_.key_nets[(d_.scramble ? d_.scramble->muxes.size() : 0) + k];
                boundary_key_net_[p.chain][p.boundary] = key_net;
            }
        }
        if (d_.scramble)
            for (size_t k = 0; k < d_.scramble->muxes.size(); ++k) {
                auto& mx = d_.scramble->muxes[k];
                scramble_sel_net_[mx.chain][mx.slice] = m_.key_nets[mx.key_index];
            }
        if (d_.dos) {
            // dynamic key bit i = XOR of the seed bits selected by the window's
            // seed-to-key masks (the seed-to-key block, built in place)
            auto masks = seed_to_key_masks(d_.dos->taps, d_.dos->key_width, key_index_);
            std::vector<int> dynkey(depth_, -1);
            auto key_bit_net = [&](int slice) {
                if (dynkey[slice] != -1)
                    return dynkey[slice];
                std::vector<int> terms;
                for (int b = 0; b < d_.dos->key_width; ++b)
                    if (mask_bit(masks[slice], b))
                        terms.push_back(m_.key_nets[b]);
                if (terms.empty())
                    throw Error("dynamic key bit has empty seed support");
                int acc = terms[0];
                for (size_t t = 1; t < terms.size(); ++t) {
                    int mid = m_.circuit.fresh_net("dynkey" + std::to_string(slice) + "_x" +
                                                   std::to_string(t));
                    m_.circuit.add_gate(GateKind::Xor, {acc, terms[t]}, mid);
                    acc = mid;
                }
                dynkey[slice] = acc;
                return acc;
            };
            for (auto& p : d_.dos->placements)
                boundary_key_net_[p.chain][p.boundary] = key_bit_net(p.boundary);
        }
    }

    int xor_net(int a, int b, const std::string& base)
    {
        int out = m_.circuit.fresh_net(base);
        m_.circuit.add_gate(GateKind::Xor, {a, b}, out);
        return out;
    }

    int const_zero()
    {
        if (zero_net_ == -1) {
            int any = m_.scan_in_nets.at(0);
            zero_net_ = m_.circuit.fresh_net("const0");
            m_.circuit.add_gate(GateKind::Xor, {any, any}, zero_net_);
        }
        return zero_net_;
    }

    int stimulus_net(int chain, int slice) const
    {
        int ch = d_.compression ? d_.compression->channel_of_chain[chain] : chain;
        return m_.scan_in_nets[ch * depth_ + slice];
    }

    // a'_i = a_i xor L(k,i), built as a prefix chain: L for consecutive cells
    // differ by at most one key term, so gates are shared instead of
    // instantiating one XOR tree per cell.
    std::vector<std::vector<int>> xor_load()
    {
        std::vector<std::vector<int>> delivered(d_.arch.chain_count());
        for (int j = 0; j < d_.arch.chain_count(); ++j) {
            int len = d_.arch.chain_length(j);
            int prefix = -1;
            for (int i = 0; i < len; ++i) {
                int key = boundary_key_net_[j][i];
                if (key != -1)
                    prefix = prefix == -1
                                 ? key
                                 : xor_net(prefix, key,
                                           "lpar" + std::to_string(j) + "_" + std::to_string(i));
                int a = stimulus_net(j, i);
                delivered[j].push_back(
                    prefix == -1
                        ? a
                        : xor_net(a, prefix,
                                  "adel" + std::to_string(j) + "_" + std::to_string(i)));
            }
        }
        return delivered;
    }

    // b_i = b'_i xor R(k,i) as a suffix chain.
    std::vector<std::vector<int>> xor_unload()
    {
        std::vector<std::vector<int>> observed(d_.arch.chain_count());
        for (int j = 0; j < d_.arch.chain_count(); ++j) {
            int len = d_.arch.chain_length(j);
            observed[j].assign(len, -1);
            int suffix = -1;
            for (int i = len - 1; i >= 0; --i) {
                observed[j][i] =
                    suffix == -1
                        ? captured_[j][i]
                        : xor_net(captured_[j][i], suffix,
                                  "bobs" + std::to_string(j) + "_" + std::to_string(i));
                int key = boundary_key_net_[j][i];
                if (key != -1)
                    suffix = suffix == -1
                                 ? key
                                 : xor_net(suffix, key,
                                           "rpar" + std::to_string(j) + "_" + std::to_string(i));
            }
        }
        return observed;
    }

    int routed_source(int chain, int slice, const std::vector<std::vector<int>>& prev_slice)
    {
        int sel = scramble_sel_net_[chain][slice];
        if (sel == -1)
            return prev_slice[chain][slice - 1];
        auto& mx = d_.scramble->muxes[mux_index(chain, slice)];
        int d0 = prev_slice[mx.src0_chain][slice - 1];
        int d1 = prev_slice[mx.src1_chain][slice - 1];
        int out = m_.circuit.fresh_net("route" + std::to_string(chain) + "_" +
                                       std::to_string(slice));
        m_.circuit.add_gate(GateKind::Mux, {sel, d0, d1}, out);
        return out;
    }

    int mux_index(int chain, int slice) const
    {
        for (size_t k = 0; k < d_.scramble->muxes.size(); ++k)
            if (d_.scramble->muxes[k].chain == chain && d_.scramble->muxes[k].slice == slice)
                return static_cast<int>(k);
        throw Error("mux lookup failed");
    }

    // Unrolled shift network for scrambled (optionally also XOR-locked)
    // chains: one layer of the keyed routing network per shift cycle.
    // content[j][i] == -1 marks power-up residue that no delivered bit can
    // depend on.
    std::vector<std::vector<int>> scramble_load()
    {
        int x = d_.arch.chain_count();
        std::vector<std::vector<int>> content(x, std::vector<int>(depth_, -1));
        for (int t = 0; t < depth_; ++t) {
            std::vector<std::vector<int>> next(x, std::vector<int>(depth_, -1));
            for (int j = 0; j < x; ++j) {
                int len = d_.arch.chain_length(j);
                for (int i = 0; i < depth_; ++i) {
                    int src;
                    if (i == 0) {
                        src = stimulus_net(j, depth_ - 1 - t);
                    } else if (i < len) {
                        if (i > t) {
                            next[j][i] = -1;  // still power-up residue
                            continue;
                        }
                        src = routed_source(j, i, content);
                    } else {
                        next[j][i] = content[j][i - 1];
                        continue;
                    }
                    int key = i < len ? boundary_key_net_[j][i] : -1;
                    next[j][i] = key == -1
                                     ? src
                                     : xor_net(src, key,
                                               "ld" + std::to_string(t) + "_" +
                                                   std::to_string(j) + "_" + std::to_string(i));
                }
            }
            content = std::move(next);
        }
        std::vector<std::vector<int>> delivered(x);
        for (int j = 0; j < x; ++j)
            for (int i = 0; i < d_.arch.chain_length(j); ++i) {
                if (content[j][i] == -1)
                    throw Error("scramble load left an undefined delivered bit");
                delivered[j].push_back(content[j][i]);
            }
        return delivered;
    }

    // Unload through the same routing network; phantom tail positions are
    // plain wires and capture constant 0.
    std::vector<std::vector<int>> scramble_unload()
    {
        int x = d_.arch.chain_count();
        std::vector<std::vector<int>> content(x, std::vector<int>(depth_, -1));
        for (int j = 0; j < x; ++j) {
            int len = d_.arch.chain_length(j);
            for (int i = 0; i < depth_; ++i)
                content[j][i] = i < len ? captured_[j][i] : const_zero();
        }
        // obs[t][j] = scan-out of chain j after t unload pulses
        std::vector<std::vector<int>> obs(depth_, std::vector<int>(x, -1));
        for (int j = 0; j < x; ++j)
            obs[0][j] = content[j][depth_ - 1];
        for (int t = 1; t < depth_; ++t) {
            std::vector<std::vector<int>> next(x, std::vector<int>(depth_, -1));
            for (int j = 0; j < x; ++j) {
                int len = d_.arch.chain_length(j);
                for (int i = 0; i < depth_; ++i) {
                    int src;
                    if (i == 0) {
                        src = const_zero();
                    } else if (i < len) {
                        src = routed_source(j, i, content);
                    } else {
                        next[j][i] = content[j][i - 1];
                        continue;
                    }
                    int key = i < len ? boundary_key_net_[j][i] : -1;
                    next[j][i] = key == -1
                                     ? src
                                     : xor_net(src, key,
                                               "ul" + std::to_string(t) + "_" +
                                                   std::to_string(j) + "_" + std::to_string(i));
                }
            }
            content = std::move(next);
            for (int j = 0; j < x; ++j)
                obs[t][j] = content[j][depth_ - 1];
        }
        // reindex to b[j][i] = observation at unload cycle depth-1-i
        std::vector<std::vector<int>> observed(x, std::vector<int>(depth_, -1));
        for (int j = 0; j < x; ++j)
            for (int i = 0; i < depth_; ++i)
                observed[j][i] = obs[depth_ - 1 - i][j];
        return observed;
    }

    // Copies the (possibly RLL-locked) combinational logic; PPIs read the
    // delivered pattern, PPOs become the captured response nets.
    void copy_combinational(const std::vector<std::vector<int>>& delivered)
    {
        const Netlist& n = d_.netlist;
        for (int j = 0; j < d_.arch.chain_count(); ++j)
            for (int i = 0; i < d_.arch.chain_length(j); ++i)
                net_map_[n.flip_flops()[d_.arch.chains[j][i]].q] = delivered[j][i];
        for (int g : n.topo_order()) {
            const Gate& gate = n.gates()[g];
            std::vector<int> ins;
            ins.reserve(gate.inputs.size());
            for (int in : gate.inputs)
                ins.push_back(mapped(in));
            int out = m_.circuit.fresh_net("c_" + n.net_name(gate.output));
            net_map_[gate.output] = out;
            m_.circuit.add_gate(gate.kind, std::move(ins), out);
        }
        captured_.assign(d_.arch.chain_count(), {});
        for (int j = 0; j < d_.arch.chain_count(); ++j)
            for (int i = 0; i < d_.arch.chain_length(j); ++i)
                captured_[j].push_back(mapped(n.flip_flops()[d_.arch.chains[j][i]].d));
    }

    int mapped(int orig_net)
    {
        auto it = net_map_.find(orig_net);
        if (it == net_map_.end())
            throw Error("model: unmapped net " + d_.netlist.net_name(orig_net));
        return it->second;
    }

    // One compactor instance per slice: the per-channel observation is the
    // XOR of that slice's (response-transformed) bits across the channel's
    // chains; slices past the end of every chain in the group read 0.
    void add_outputs(const std::vector<std::vector<int>>& observed)
    {
        for (int c = 0; c < channels_; ++c) {
            std::vector<int> group;
            if (d_.compression)
                group = d_.compression->chains_of_channel[c];
            else
                group = {c};
            for (int s = 0; s < depth_; ++s) {
                std::vector<int> terms;
                for (int j : group)
                    if (s < static_cast<int>(observed[j].size()) && observed[j][s] != -1)
                        terms.push_back(observed[j][s]);
                int out = m_.circuit.fresh_net("so" + std::to_string(c) + "_" +
                                               std::to_string(s));
                if (terms.empty()) {
                    int z = const_zero();
                    m_.circuit.add_gate(GateKind::Buf, {z}, out);
                } else if (terms.size() == 1) {
                    m_.circuit.add_gate(GateKind::Buf, {terms[0]}, out);
                } else {
                    int acc = terms[0];
                    for (size_t t = 1; t + 1 < terms.size(); ++t)
                        acc = xor_net(acc, terms[t],
                                      "cmp" + std::to_string(c) + "_" + std::to_string(s));
                    m_.circuit.add_gate(GateKind::Xor, {acc, terms.back()}, out);
                }
                m_.circuit.add_primary_output(out);
                m_.scan_out_nets.push_back(out);
            }
        }
        for (int po : d_.netlist.primary_outputs()) {
            int out = m_.circuit.fresh_net("po_" + d_.netlist.net_name(po));
            m_.circuit.add_gate(GateKind::Buf, {mapped(po)}, out);
            m_.circuit.add_primary_output(out);
            m_.po_nets.push_back(out);
        }
    }

    LockedDesign d_;
    int key_index_;
    int depth_ = 0;
    int channels_ = 0;
    LockedModel m_;
    std::unordered_map<int, int> net_map_;
    std::vector<std::vector<int>> boundary_key_net_;
    std::vector<std::vector<int>> scramble_sel_net_;
    std::vector<std::vector<int>> captured_;
    int zero_net_ = -1;
};

}  // namespace detail

// Static XOR obfuscation (optionally with compression and/or RLL). With an
// empty placement list this degenerates to the plain unrolled scan model.
inline LockedModel model_static(const LockedDesign& design)
{
    if (design.dos)
        throw Error("model_static: design carries a DOS spec; use model_dynamic");
    if (design.scramble)
        throw Error("model_static: design carries a scramble spec; use model_scramble");
    return detail::ModelBuilder(design, 0).build();
}

// Keyed MUX routing network, unrolled once per shift cycle for load and
// unload. Optional static XOR gates ride on the same layers.
inline LockedModel model_scramble(const LockedDesign& design)
{
    if (!design.scramble)
        throw Error("model_scramble: no scramble spec");
    if (design.dos)
        throw Error("model_scramble: DOS designs use model_dynamic");
    return detail::ModelBuilder(design, 0).build();
}

// Compression-aware static model; identical to model_static when R = 1.
inline LockedModel model_compression(const LockedDesign& design)
{
    if (!design.compression)
        throw Error("model_compression: no compression spec attached");
    return model_static(design);
}

// Dynamic model for the key_index-th key window: the static model structure
// with key inputs replaced by the seed-to-key block for that window. The
// model's free key inputs are the seed bits, shared by all windows.
inline LockedModel model_dynamic(const LockedDesign& design, int key_index)
{
    if (!design.dos)
        throw Error("model_dynamic: no DOS spec");
    if (key_index < 1)
        throw Error("model_dynamic: key index must be >= 1");
    return detail::ModelBuilder(design, key_index).build();
}

// The naive attacker's view: scan obfuscation ignored, so the model is the
// plain unrolled scan around the (possibly RLL-locked) logic.
inline LockedModel model_ignoring_scan_obfuscation(const LockedDesign& design)
{
    LockedDesign naive = design;
    naive.static_obf.reset();
    naive.scramble.reset();
    naive.dos.reset();
    return detail::ModelBuilder(naive, 0).build();
}

}  // namespace scansat
