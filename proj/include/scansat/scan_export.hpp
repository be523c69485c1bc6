#pragma once

// Emits the scan-equipped netlist as structural BENCH: scan-enable muxes in
// front of every flip-flop D input, the scan path with its obfuscation gates,
// fanout/compaction wiring, and padding cells for short chains. Key inputs
// continue the keyinput numbering after any RLL keys; DOS key bits appear as
// dynkey inputs since on silicon they come from the key generator, not pins.

#include "scansat/defense.hpp"
#include "scansat/bench_io.hpp"

namespace scansat {

inline std::string scan_inserted_bench(const LockedDesign& d)
{
    d.validate();
    Netlist n = clone_netlist(d.netlist);
    int scan_en = n.fresh_net("scan_enable");
    n.add_primary_input(scan_en);

    int channels = d.channels();
    std::vector<int> si(channels), so_src;
    for (int c = 0; c < channels; ++c) {
        si[c] = n.fresh_net("test_si" + std::to_string(c));
        n.add_primary_input(si[c]);
    }

    int next_key = d.rll ? d.rll->key_size() : 0;
    std::vector<std::vector<int>> xor_key_net(d.arch.chain_count(),
                                              std::vector<int>(d.arch.depth, -1));
    if (d.static_obf)
        for (auto& p : d.static_obf->placements) {
            int net = n.fresh_net("keyinput" + std::to_string(next_key++));
            n.add_primary_input(net);
            xor_key_net[p.chain][p.boundary] = net;
        }
    std::vector<int> dyn_key(d.arch.depth, -1);
    if (d.dos) {
        for (auto& p : d.dos->placements) {
            if (dyn_key[p.boundary] == -1) {
                // driven by the on-chip key generator; exposed as an input here
                int net = n.fresh_net("dynkey" + std::to_string(p.boundary));
                n.add_primary_input(net);
                dyn_key[p.boundary] = net;
            }
            xor_key_net[p.chain][p.boundary] = dyn_key[p.boundary];
        }
    }
    std::vector<int> sel_net;
    if (d.scramble)
        for (size_t k = 0; k < d.scramble->muxes.size(); ++k) {
            int net = n.fresh_net("keyinput" + std::to_string(next_key++));
            n.add_primary_input(net);
            sel_net.push_back(net);
        }

    int const0 = -1;
    auto zero = [&] {
        if (const0 == -1) {
            const0 = n.fresh_net("scan_const0");
            n.add_gate(GateKind::Xor, {scan_en, scan_en}, const0);
        }
        return const0;
    };

    // cell_q[j][i]: Q net of the (real or padding) cell at position i
    std::vector<std::vector<int>> cell_q(d.arch.chain_count(),
                                         std::vector<int>(d.arch.depth, -1));
    std::vector<std::vector<int>> pad_d(d.arch.chain_count(),
                                        std::vector<int>(d.arch.depth, -1));
    for (int j = 0; j < d.arch.chain_count(); ++j) {
        for (int i = 0; i < d.arch.depth; ++i) {
            if (d.arch.is_real_cell(j, i)) {
                cell_q[j][i] = d.netlist.flip_flops()[d.arch.chains[j][i]].q;
            } else {
                int q = n.fresh_net("pad_q" + std::to_string(j) + "_" + std::to_string(i));
                int dd = n.fresh_net("pad_d" + std::to_string(j) + "_" + std::to_string(i));
                n.add_flip_flop(q, dd);
                cell_q[j][i] = q;
                pad_d[j][i] = dd;
            }
        }
    }

    for (int j = 0; j < d.arch.chain_count(); ++j) {
        int len = d.arch.chain_length(j);
        int ch = d.compression ? d.compression->channel_of_chain[j] : j;
        for (int i = 0; i < d.arch.depth; ++i) {
            int src;
            if (i == 0) {
                src = si[ch];
            } else {
                src = cell_q[j][i - 1];
                if (d.scramble)
                    for (size_t k = 0; k < d.scramble->muxes.size(); ++k) {
                        auto& m = d.scramble->muxes[k];
                        if (m.chain == j && m.slice == i) {
                            int out = n.fresh_net("scan_route" + std::to_string(j) + "_" +
                                                  std::to_string(i));
                            n.add_gate(GateKind::Mux,
                                       {sel_net[m.key_index], cell_q[m.src0_chain][i - 1],
                                        cell_q[m.src1_chain][i - 1]},
                                       out);
                            src = out;
                        }
                    }
            }
            if (i < len && xor_key_net[j][i] != -1) {
                int out = n.fresh_net("scan_in" + std::to_string(j) + "_" + std::to_string(i));
                n.add_gate(GateKind::Xor, {src, xor_key_net[j][i]}, out);
                src = out;
            }
            if (d.arch.is_real_cell(j, i)) {
                // rewire the flip-flop: D = scan_enable ? scan_path : functional D
                int ff_index = d.arch.chains[j][i];
                int orig_d = n.flip_flops()[ff_index].d;
                int new_d = n.fresh_net("scan_d" + std::to_string(j) + "_" + std::to_string(i));
                n.add_gate(GateKind::Mux, {scan_en, orig_d, src}, new_d);
                n.set_flip_flop_input(ff_index, new_d);
            } else {
                int dd = pad_d[j][i];
                n.add_gate(GateKind::Mux, {scan_en, zero(), src}, dd);
            }
        }
    }

    for (int c = 0; c < channels; ++c) {
        int out = n.fresh_net("test_so" + std::to_string(c));
        if (d.compression && d.compression->ratio > 1) {
            auto& group = d.compression->chains_of_channel[c];
            int acc = cell_q[group[0]][d.arch.depth - 1];
            for (size_t g = 1; g + 1 < group.size(); ++g) {
                int mid = n.fresh_net("compact" + std::to_string(c) + "_" + std::to_string(g));
                n.add_gate(GateKind::Xor, {acc, cell_q[group[g]][d.arch.depth - 1]}, mid);
                acc = mid;
            }
            if (group.size() == 1)
                n.add_gate(GateKind::Buf, {acc}, out);
            else
                n.add_gate(GateKind::Xor, {acc, cell_q[group.back()][d.arch.depth - 1]}, out);
        } else {
            n.add_gate(GateKind::Buf, {cell_q[c][d.arch.depth - 1]}, out);
        }
        n.add_primary_output(out);
    }
    n.finalize();
    return write_bench(n, d.name + " with scan obfuscation inserted");
}

}  // namespace scansat
