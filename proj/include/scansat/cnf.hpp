#pragma once

// Tseitin encoding of the combinational view of a netlist. Flip-flop Q nets
// are treated as free inputs (PPIs) and D nets as outputs (PPOs). An instance
// tag namespaces variables so several unrolled copies can share one clause
// store. For every total assignment to the inputs the unique satisfying
// extension agrees with Netlist::evaluate.

#include <functional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "scansat/netlist.hpp"

namespace scansat {

struct Cnf {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;
    std::unordered_map<std::string, int> var_of;  // "tag:net-name" -> variable

    int new_var() { return ++num_vars; }

    void add_clause(std::vector<int> lits)
    {
        if (lits.empty())
            throw Error("empty clause");
        clauses.push_back(std::move(lits));
    }

    int lookup(const std::string& tag, const std::string& net_name) const
    {
        auto it = var_of.find(tag + ":" + net_name);
        if (it == var_of.end())
            throw Error("no CNF variable for " + tag + ":" + net_name);
        return it->second;
    }
};

namespace detail {

// Emits the Tseitin clauses for one gate. Literals may be negative.
template <typename Sink>
void encode_gate(GateKind kind, const std::vector<int>& in, int out, Sink&& emit)
{
    switch (kind) {
    case GateKind::And:
    case GateKind::Nand: {
        int y = (kind == GateKind::And) ? out : -out;
        for (int a : in)
            emit({-y, a});
        std::vector<int> c{y};
        for (int a : in)
            c.push_back(-a);
        emit(c);
        break;
    }
    case GateKind::Or:
    case GateKind::Nor: {
        int y = (kind == GateKind::Or) ? out : -out;
        for (int a : in)
            emit({y, -a});
        std::vector<int> c{-y};
        for (int a : in)
            c.push_back(a);
        emit(c);
        break;
    }
    case GateKind::Xor:
    case GateKind::Xnor: {
        int y = (kind == GateKind::Xor) ? out : -out;
        int a = in[0], b = in[1];
        emit({-y, a, b});
        emit({-y, -a, -b});
        emit({y, a, -b});
        emit({y, -a, b});
        break;
    }
    case GateKind::Not: {
        emit({out, in[0]});
        emit({-out, -in[0]});
        break;
    }
    case GateKind::Buf: {
        emit({out, -in[0]});
        emit({-out, in[0]});
        break;
    }
    case GateKind::Mux: {
        int s = in[0], d0 = in[1], d1 = in[2];
        emit({-s, -d1, out});
        emit({-s, d1, -out});
        emit({s, -d0, out});
        emit({s, d0, -out});
        // redundant but strengthens propagation
        emit({-d0, -d1, out});
        emit({d0, d1, -out});
        break;
    }
    }
}

}  // namespace detail

// Generic encoder: `fresh` allocates a new variable, `emit` receives clauses,
// `pinned` maps net id -> existing literal (shared or constant inputs).
// Returns the literal assigned to every net of the instance.
template <typename Fresh, typename Emit>
std::unordered_map<int, int> tseitin_encode(const Netlist& n, Fresh&& fresh, Emit&& emit,
                                            const std::unordered_map<int, int>* pinned = nullptr)
{
    if (!n.finalized())
        throw Error("tseitin_encode: netlist not finalized");
    std::unordered_map<int, int> lit_of;
    lit_of.reserve(n.num_nets());
    auto lit_for = [&](int net) {
        auto it = lit_of.find(net);
        if (it != lit_of.end())
            return it->second;
        int l;
        if (pinned) {
            auto p = pinned->find(net);
            if (p != pinned->end()) {
                lit_of.emplace(net, p->second);
                return p->second;
            }
        }
        l = fresh();
        lit_of.emplace(net, l);
        return l;
    };
    for (int g : n.topo_order()) {
        const Gate& gate = n.gates()[g];
        std::vector<int> in;
        in.reserve(gate.inputs.size());
        for (int net : gate.inputs)
            in.push_back(lit_for(net));
        int out = lit_for(gate.output);
        detail::encode_gate(gate.kind, in, out, emit);
    }
    // make sure unconnected interface nets still get variables
    for (int pi : n.primary_inputs())
        lit_for(pi);
    for (auto& ff : n.flip_flops()) {
        lit_for(ff.q);
        lit_for(ff.d);
    }
    for (int po : n.primary_outputs())
        lit_for(po);
    return lit_of;
}

// Appends one tagged instance of the netlist's combinational view to `cnf`.
inline std::unordered_map<int, int> append_cnf(Cnf& cnf, const Netlist& n, const std::string& tag)
{
    auto lits = tseitin_encode(
        n, [&] { return cnf.new_var(); },
        [&](std::vector<int> c) { cnf.add_clause(std::move(c)); });
    for (auto& [net, lit] : lits)
        cnf.var_of[tag + ":" + n.net_name(net)] = lit;
    return lits;
}

inline Cnf to_cnf(const Netlist& n, const std::string& tag)
{
    Cnf cnf;
    append_cnf(cnf, n, tag);
    return cnf;
}

// Standard DIMACS: `p cnf V C` header, clauses terminated by 0.
inline void write_dimacs(std::ostream& out, const Cnf& cnf,
                         const std::vector<std::string>& comments = {})
{
    for (auto& c : comments)
        out << "c " << c << "\n";
    out << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
    for (auto& clause : cnf.clauses) {
        for (int l : clause)
            out << l << " ";
        out << "0\n";
    }
}

}  // namespace scansat
