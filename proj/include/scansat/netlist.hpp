#pragma once

// Gate-level circuit IR. Combinational gates plus D flip-flops; the
// combinational portion must be acyclic and every net has exactly one driver
// (gate output, primary input, or flip-flop Q). Immutable once finalized.

#include <algorithm>
#include <cassert>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scansat/common.hpp"

namespace scansat {

enum class GateKind { And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Mux };

inline const char* gate_kind_name(GateKind k)
{
    switch (k) {
    case GateKind::And: return "AND";
    case GateKind::Nand: return "NAND";
    case GateKind::Or: return "OR";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Not: return "NOT";
    case GateKind::Buf: return "BUF";
    case GateKind::Mux: return "MUX";
    }
    return "?";
}

inline std::optional<GateKind> gate_kind_from_name(std::string name)
{
    for (auto& c : name)
        c = static_cast<char>(toupper(static_cast<unsigned char>(c)));
    if (name == "AND") return GateKind::And;
    if (name == "NAND") return GateKind::Nand;
    if (name == "OR") return GateKind::Or;
    if (name == "NOR") return GateKind::Nor;
    if (name == "XOR") return GateKind::Xor;
    if (name == "XNOR") return GateKind::Xnor;
    if (name == "NOT") return GateKind::Not;
    if (name == "BUF" || name == "BUFF") return GateKind::Buf;
    if (name == "MUX" || name == "MUX2") return GateKind::Mux;
    return std::nullopt;
}

// MUX input order is (select, in0, in1): out = select ? in1 : in0.
struct Gate {
    GateKind kind;
    std::vector<int> inputs;
    int output;
};

struct FlipFlop {
    int q;  // state output net
    int d;  // next-state input net
};

struct EvalResult {
    BitVec po;
    BitVec next_state;
};

class Netlist {
public:
    // -- construction ------------------------------------------------------
    int add_net(const std::string& name)
    {
        auto it = net_id_.find(name);
        if (it != net_id_.end())
            return it->second;
        int id = static_cast<int>(net_names_.size());
        net_names_.push_back(name);
        net_id_.emplace(name, id);
        return id;
    }

    // A name guaranteed not to collide with existing nets.
    int fresh_net(const std::string& base)
    {
        if (!net_id_.count(base))
            return add_net(base);
        for (int i = 0;; ++i) {
            std::string name = base + "_" + std::to_string(i);
            if (!net_id_.count(name))
                return add_net(name);
        }
    }

    void add_gate(GateKind kind, std::vector<int> inputs, int output)
    {
        check_arity(kind, inputs.size());
        gates_.push_back(Gate{kind, std::move(inputs), output});
        finalized_ = false;
    }

    void add_primary_input(int net) { primary_inputs_.push_back(net); finalized_ = false; }
    void add_primary_output(int net) { primary_outputs_.push_back(net); finalized_ = false; }
    void add_flip_flop(int q, int d) { flip_flops_.push_back(FlipFlop{q, d}); finalized_ = false; }
    void set_flip_flop_input(int index, int d)
    {
        flip_flops_.at(index).d = d;
        finalized_ = false;
    }

    // Validates the one-driver/acyclicity invariants and computes the
    // topological order used by evaluate(). Throws Error on violation.
    void finalize()
    {
        const int n = num_nets();
        std::vector<int> driver(n, -1);  // gate index, or marker
        constexpr int kDrivenByPi = -2;
        constexpr int kDrivenByFf = -3;
        auto claim = [&](int net, int who, const std::string& what) {
            if (driver[net] != -1)
                throw Error("net '" + net_names_[net] + "' is multiply driven (" + what + ")");
            driver[net] = who;
        };
        for (int pi : primary_inputs_)
            claim(pi, kDrivenByPi, "primary input");
        for (auto& ff : flip_flops_)
            claim(ff.q, kDrivenByFf, "flip-flop output");
        for (size_t g = 0; g < gates_.size(); ++g)
            claim(gates_[g].output, static_cast<int>(g), "gate output");

        auto require_driven = [&](int net, const std::string& where) {
            if (driver[net] == -1)
                throw Error("net '" + net_names_[net] + "' is undriven (used as " + where + ")");
        };
        for (auto& g : gates_)
            for (int in : g.inputs)
                require_driven(in, "gate input");
        for (int po : primary_outputs_)
            require_driven(po, "primary output");
        for (auto& ff : flip_flops_)
            require_driven(ff.d, "flip-flop input");

        // Kahn topological sort over gates; flip-flops break cycles.
        std::vector<int> indeg(gates_.size(), 0);
        std::vector<std::vector<int>> fanout(n);  // net -> consuming gate idx
        for (size_t g = 0; g < gates_.size(); ++g)
            for (int in : gates_[g].inputs) {
                if (driver[in] >= 0)
                    ++indeg[g];
                fanout[in].push_back(static_cast<int>(g));
            }
        topo_order_.clear();
        topo_order_.reserve(gates_.size());
        std::vector<int> queue;
        for (size_t g = 0; g < gates_.size(); ++g)
            if (indeg[g] == 0)
                queue.push_back(static_cast<int>(g));
        while (!queue.empty()) {
            int g = queue.back();
            queue.pop_back();
            topo_order_.push_back(g);
            for (int succ : fanout[gates_[g].output])
                if (--indeg[succ] == 0)
                    queue.push_back(succ);
        }
        if (topo_order_.size() != gates_.size())
            throw Error("combinational cycle detected");
        finalized_ = true;
    }

    // -- accessors -----------------------------------------------------------
    int num_nets() const { return static_cast<int>(net_names_.size()); }
    int num_pis() const { return static_cast<int>(primary_inputs_.size()); }
    int num_pos() const { return static_cast<int>(primary_outputs_.size()); }
    int num_ffs() const { return static_cast<int>(flip_flops_.size()); }
    int num_gates() const { return static_cast<int>(gates_.size()); }

    const std::string& net_name(int id) const { return net_names_.at(id); }
    std::optional<int> find_net(const std::string& name) const
    {
        auto it = net_id_.find(name);
        if (it == net_id_.end())
            return std::nullopt;
        return it->second;
    }

    const std::vector<Gate>& gates() const { return gates_; }
    const std::vector<int>& primary_inputs() const { return primary_inputs_; }
    const std::vector<int>& primary_outputs() const { return primary_outputs_; }
    const std::vector<FlipFlop>& flip_flops() const { return flip_flops_; }
    const std::vector<int>& topo_order() const { return topo_order_; }
    bool finalized() const { return finalized_; }

    // -- simulation ----------------------------------------------------------
    static uint8_t eval_gate(GateKind kind, const std::vector<int>& ins,
                             const std::vector<uint8_t>& val)
    {
        switch (kind) {
        case GateKind::And:
        case GateKind::Nand: {
            uint8_t v = 1;
            for (int in : ins)
                v &= val[in];
            return kind == GateKind::And ? v : !v;
        }
        case GateKind::Or:
        case GateKind::Nor: {
            uint8_t v = 0;
            for (int in : ins)
                v |= val[in];
            return kind == GateKind::Or ? v : !v;
        }
        case GateKind::Xor:
            return val[ins[0]] ^ val[ins[1]];
        case GateKind::Xnor:
            return !(val[ins[0]] ^ val[ins[1]]);
        case GateKind::Not:
            return !val[ins[0]];
        case GateKind::Buf:
            return val[ins[0]];
        case GateKind::Mux:
            return val[ins[0]] ? val[ins[2]] : val[ins[1]];
        }
        return 0;
    }

    // Two-valued simulation in topological order. Pure function of (pi, state).
    EvalResult evaluate(const BitVec& pi, const BitVec& state) const
    {
        if (!finalized_)
            throw Error("evaluate on non-finalized netlist");
        if (static_cast<int>(pi.size()) != num_pis())
            throw Error("evaluate: expected " + std::to_string(num_pis()) +
                        " primary input bits, got " + std::to_string(pi.size()));
        if (static_cast<int>(state.size()) != num_ffs())
            throw Error("evaluate: expected " + std::to_string(num_ffs()) +
                        " state bits, got " + std::to_string(state.size()));
        std::vector<uint8_t> val(num_nets(), 0);
        for (int i = 0; i < num_pis(); ++i)
            val[primary_inputs_[i]] = pi[i] & 1;
        for (int i = 0; i < num_ffs(); ++i)
            val[flip_flops_[i].q] = state[i] & 1;
        for (int g : topo_order_) {
            const Gate& gate = gates_[g];
            val[gate.output] = eval_gate(gate.kind, gate.inputs, val);
        }
        EvalResult r;
        r.po.reserve(num_pos());
        for (int po : primary_outputs_)
            r.po.push_back(val[po]);
        r.next_state.reserve(num_ffs());
        for (auto& ff : flip_flops_)
            r.next_state.push_back(val[ff.d]);
        return r;
    }

private:
    static void check_arity(GateKind kind, size_t n)
    {
        switch (kind) {
        case GateKind::Not:
        case GateKind::Buf:
            if (n != 1)
                throw Error(std::string(gate_kind_name(kind)) + " takes exactly 1 input");
            break;
        case GateKind::Xor:
        case GateKind::Xnor:
            if (n != 2)
                throw Error(std::string(gate_kind_name(kind)) +
                            " is restricted to 2 inputs; decompose wider gates");
            break;
        case GateKind::Mux:
            if (n != 3)
                throw Error("MUX takes exactly 3 inputs (select, in0, in1)");
            break;
        default:
            if (n < 1)
                throw Error(std::string(gate_kind_name(kind)) + " needs at least 1 input");
            break;
        }
    }

    std::vector<std::string> net_names_;
    std::unordered_map<std::string, int> net_id_;
    std::vector<Gate> gates_;
    std::vector<int> primary_inputs_;
    std::vector<int> primary_outputs_;
    std::vector<FlipFlop> flip_flops_;
    std::vector<int> topo_order_;
    bool finalized_ = false;
};

}  // namespace scansat
