#pragma once

// Black-box chip simulator. The only window into the design is the scan/PI/PO
// transaction interface; no accessor exposes any secret.
//
// Conventions (shared with the model builders):
//  - One shift pulse moves every cell's content one position toward Scan-out
//    (higher index). Scan-out pins are observed before the pulse.
//  - A transaction is load (depth pulses), one capture pulse, then unload
//    (depth observations, so depth-1 further pulses). Load/unload overlap of
//    adjacent patterns is deliberately serialized; with DOS the key used for
//    the unload of a pattern equals the key used for its load, and a pending
//    key update takes effect starting with the next load.
//  - Stimulus bit a[ch][i] is the bit that reaches cell position i when no
//    obfuscation is installed; response bit b[ch][i] is the observation at
//    unload cycle depth-1-i. Phantom padding positions capture 0.
//  - For DOS designs the first readout after power-up is masked to all zeros
//    (shadow chain, modeled behaviorally).

#include <ostream>

#include "scansat/defense.hpp"

namespace scansat {

struct ScanIo {
    BitVec response;  // channels x depth, [ch*depth + position]
    BitVec po;
};

class Oracle {
public:
    explicit Oracle(LockedDesign design) : d_(std::move(design))
    {
        d_.validate();
        if (d_.static_obf && !d_.static_obf->secret_key)
            throw Error("oracle requires the static obfuscation key");
        if (d_.scramble && !d_.scramble->secret_key)
            throw Error("oracle requires the scramble key");
        if (d_.dos && (!d_.dos->secret_seed || !d_.dos->secret_update_period ||
                       !d_.dos->secret_max_updates))
            throw Error("oracle requires the DOS seed, update period and update cap");
        if (d_.rll && !d_.rll->secret_key)
            throw Error("oracle requires the logic locking key");

        pos_of_ff_.assign(d_.netlist.num_ffs(), {0, 0});
        for (int j = 0; j < d_.arch.chain_count(); ++j)
            for (int i = 0; i < d_.arch.chain_length(j); ++i)
                pos_of_ff_[d_.arch.chains[j][i]] = {j, i};

        gate_key_index_.assign(d_.arch.chain_count(),
                               std::vector<int>(d_.arch.depth, -1));
        if (d_.static_obf)
            for (size_t k = 0; k < d_.static_obf->placements.size(); ++k) {
                auto& p = d_.static_obf->placements[k];
                gate_key_index_[p.chain][p.boundary] = static_cast<int>(k);
            }
        if (d_.dos)
            for (auto& p : d_.dos->placements)
                gate_key_index_[p.chain][p.boundary] = p.boundary;  // key bit = slice index

        mux_at_.assign(d_.arch.chain_count(), std::vector<int>(d_.arch.depth, -1));
        if (d_.scramble)
            for (size_t k = 0; k < d_.scramble->muxes.size(); ++k) {
                auto& m = d_.scramble->muxes[k];
                mux_at_[m.chain][m.slice] = static_cast<int>(k);
            }
        power_up();
    }

    // Visible interface dimensions.
    int channels() const { return d_.channels(); }
    int depth() const { return d_.depth(); }
    int num_pis() const { return d_.functional_pis(); }
    int num_pos() const { return d_.netlist.num_pos(); }
    // Transactions issued since power-up (the attacker counts these anyway).
    int captures() const { return captures_; }

    void set_transcript(std::ostream* out) { transcript_ = out; }

    void power_up()
    {
        cells_.assign(d_.arch.chain_count(), BitVec(d_.arch.depth, 0));
        captures_ = 0;
        updates_used_ = 0;
        pending_update_ = false;
        capture_counter_ = 0;
        if (d_.dos) {
            current_key_ = *d_.dos->secret_seed;
            shadow_pending_ = true;
        } else {
            current_key_.clear();
            shadow_pending_ = false;
        }
    }

    ScanIo scan_transaction(const BitVec& stimulus, const BitVec& pi)
    {
        check_stimulus(stimulus);
        if (static_cast<int>(pi.size()) != num_pis())
            throw Error("scan_transaction: expected " + std::to_string(num_pis()) +
                        " primary input bits, got " + std::to_string(pi.size()));
        apply_pending_update();
        load(stimulus);
        ScanIo io;
        io.po = capture(pi);
        io.response = unload();
        if (d_.dos && capture_counter_ >= *d_.dos->secret_update_period)
            pending_update_ = true;  // takes effect with the next load
        if (shadow_pending_) {
            io.response.assign(io.response.size(), 0);
            shadow_pending_ = false;
        }
        log("txn", &stimulus, &pi, &io.response, &io.po);
        return io;
    }

    // Shift a pattern fully in, then fully out, with no capture pulse.
    BitVec flush(const BitVec& stimulus)
    {
        check_stimulus(stimulus);
        apply_pending_update();
        load(stimulus);
        BitVec out = unload();
        if (shadow_pending_) {
            out.assign(out.size(), 0);
            shadow_pending_ = false;
        }
        log("flush", &stimulus, nullptr, &out, nullptr);
        return out;
    }

private:
    void check_stimulus(const BitVec& a) const
    {
        size_t want = static_cast<size_t>(channels()) * depth();
        if (a.size() != want)
            throw Error("expected " + std::to_string(want) + " stimulus bits (" +
                        std::to_string(channels()) + " channels x depth " +
                        std::to_string(depth()) + "), got " + std::to_string(a.size()));
    }

    uint8_t boundary_key_bit(int chain, int boundary) const
    {
        int k = gate_key_index_[chain][boundary];
        if (k < 0)
            return 0;
        if (d_.dos)
            return current_key_[k];
        return (*d_.static_obf->secret_key)[k];
    }

    // One shift pulse for all chains; returns the per-channel observation
    // taken before the pulse.
    BitVec shift_pulse(const BitVec& in_bits)
    {
        BitVec observed = observe();
        int x = d_.arch.chain_count();
        std::vector<BitVec> next(x, BitVec(d_.arch.depth, 0));
        for (int j = 0; j < x; ++j) {
            int len = d_.arch.chain_length(j);
            int ch = d_.compression ? d_.compression->channel_of_chain[j] : j;
            for (int i = 0; i < d_.arch.depth; ++i) {
                uint8_t src;
                if (i == 0) {
                    src = in_bits[ch];
                } else if (i < len && mux_at_[j][i] >= 0) {
                    auto& m = d_.scramble->muxes[mux_at_[j][i]];
                    uint8_t sel = (*d_.scramble->secret_key)[m.key_index];
                    src = sel ? cells_[m.src1_chain][i - 1] : cells_[m.src0_chain][i - 1];
                } else {
                    src = cells_[j][i - 1];
                }
                if (i < len)
                    src ^= boundary_key_bit(j, i);
                next[j][i] = src;
            }
        }
        cells_ = std::move(next);
        return observed;
    }

    BitVec observe() const
    {
        BitVec out(channels(), 0);
        if (d_.compression) {
            for (int c = 0; c < channels(); ++c) {
                uint8_t v = 0;
                for (int j : d_.compression->chains_of_channel[c])
                    v ^= cells_[j][d_.arch.depth - 1];
                out[c] = v;
            }
        } else {
            for (int j = 0; j < channels(); ++j)
                out[j] = cells_[j][d_.arch.depth - 1];
        }
        return out;
    }

    void load(const BitVec& a)
    {
        int dep = d_.arch.depth;
        BitVec in_bits(channels(), 0);
        for (int t = 0; t < dep; ++t) {
            for (int c = 0; c < channels(); ++c)
                in_bits[c] = a[c * dep + (dep - 1 - t)];
            shift_pulse(in_bits);
        }
    }

    BitVec capture(const BitVec& pi)
    {
        BitVec state(d_.netlist.num_ffs(), 0);
        for (int f = 0; f < d_.netlist.num_ffs(); ++f) {
            auto [j, i] = pos_of_ff_[f];
            state[f] = cells_[j][i];
        }
        BitVec full_pi = pi;
        if (d_.rll)
            full_pi.insert(full_pi.end(), d_.rll->secret_key->begin(),
                           d_.rll->secret_key->end());
        EvalResult r = d_.netlist.evaluate(full_pi, state);
        for (auto& chain : cells_)
            chain.assign(chain.size(), 0);  // phantom positions capture 0
        for (int f = 0; f < d_.netlist.num_ffs(); ++f) {
            auto [j, i] = pos_of_ff_[f];
            cells_[j][i] = r.next_state[f];
        }
        ++captures_;
        if (d_.dos)
            ++capture_counter_;
        return r.po;
    }

    BitVec unload()
    {
        int dep = d_.arch.depth;
        BitVec zeros(channels(), 0);
        std::vector<BitVec> obs;  // obs[t] = observation after t pulses
        obs.push_back(observe());
        for (int t = 1; t < dep; ++t) {
            shift_pulse(zeros);
            obs.push_back(observe());
        }
        BitVec b(static_cast<size_t>(channels()) * dep, 0);
        for (int c = 0; c < channels(); ++c)
            for (int i = 0; i < dep; ++i)
                b[c * dep + i] = obs[dep - 1 - i][c];
        return b;
    }

    void apply_pending_update()
    {
        if (!pending_update_)
            return;
        pending_update_ = false;
        if (updates_used_ < *d_.dos->secret_max_updates) {
            current_key_ = lfsr_next(current_key_, d_.dos->taps);
            ++updates_used_;
        }
        capture_counter_ = 0;
    }

    void log(const char* kind, const BitVec* a, const BitVec* pi, const BitVec* b,
             const BitVec* po)
    {
        if (!transcript_)
            return;
        auto field = [&](const char* name, const BitVec* v) {
            return std::string("\"") + name + "\":" +
                   (v ? "\"" + bits_to_string(*v) + "\"" : "null");
        };
        (*transcript_) << "{\"kind\":\"" << kind << "\"," << field("a", a) << ","
                       << field("pi", pi) << "," << field("b", b) << "," << field("po", po)
                       << ",\"captures\":" << captures_ << "}\n";
    }

    LockedDesign d_;
    std::vector<std::pair<int, int>> pos_of_ff_;
    std::vector<std::vector<int>> gate_key_index_;  // [chain][boundary] -> key idx or -1
    std::vector<std::vector<int>> mux_at_;          // [chain][slice] -> mux idx or -1

    std::vector<BitVec> cells_;
    BitVec current_key_;
    int captures_ = 0;
    int capture_counter_ = 0;
    int updates_used_ = 0;
    bool pending_update_ = false;
    bool shadow_pending_ = false;
    std::ostream* transcript_ = nullptr;
};

}  // namespace scansat
