#pragma once

// BENCH-format front end. Grammar:
//   INPUT(x)   OUTPUT(y)   y = GATE(a, b, ...)   q = DFF(d)
// Comments start with '#'. Net identifiers are case-sensitive; gate keywords
// are not. Flip-flop order is declaration order.

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "scansat/netlist.hpp"

namespace scansat {

namespace detail {

struct BenchLine {
    const std::string& text;
    int line_no;
    size_t pos = 0;

    void skip_ws()
    {
        while (pos < text.size() && isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }
    bool at_end()
    {
        skip_ws();
        return pos >= text.size();
    }
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw Error("BENCH syntax error at line " + std::to_string(line_no) + ", column " +
                    std::to_string(pos + 1) + ": " + msg);
    }
    char peek()
    {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    void expect(char c)
    {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            fail(std::string("expected '") + c + "'");
        ++pos;
    }
    static bool ident_char(char c)
    {
        return isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' ||
               c == ']' || c == '$' || c == '-' || c == '/';
    }
    std::string ident()
    {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() && ident_char(text[pos]))
            ++pos;
        if (pos == start)
            fail("expected identifier");
        return text.substr(start, pos - start);
    }
};

}  // namespace detail

inline Netlist parse_bench(const std::string& text)
{
    Netlist n;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        size_t hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        detail::BenchLine lx{line, line_no};
        if (lx.at_end())
            continue;

        std::string head = lx.ident();
        std::string head_uc = head;
        for (auto& c : head_uc)
            c = static_cast<char>(toupper(static_cast<unsigned char>(c)));

        if (lx.peek() == '(' && (head_uc == "INPUT" || head_uc == "OUTPUT")) {
            lx.expect('(');
            std::string name = lx.ident();
            lx.expect(')');
            if (!lx.at_end())
                lx.fail("trailing characters");
            int net = n.add_net(name);
            if (head_uc == "INPUT")
                n.add_primary_input(net);
            else
                n.add_primary_output(net);
            continue;
        }

        // assignment form: out = KIND(in, ...)
        if (lx.peek() != '=')
            lx.fail("expected INPUT(...), OUTPUT(...), or assignment");
        lx.expect('=');
        std::string kind_name = lx.ident();
        lx.expect('(');
        std::vector<std::string> args;
        if (lx.peek() != ')') {
            args.push_back(lx.ident());
            while (lx.peek() == ',') {
                lx.expect(',');
                args.push_back(lx.ident());
            }
        }
        lx.expect(')');
        if (!lx.at_end())
            lx.fail("trailing characters");

        int out = n.add_net(head);
        std::string kind_uc = kind_name;
        for (auto& c : kind_uc)
            c = static_cast<char>(toupper(static_cast<unsigned char>(c)));
        if (kind_uc == "DFF") {
            if (args.size() != 1)
                lx.fail("DFF takes exactly 1 input");
            n.add_flip_flop(out, n.add_net(args[0]));
            continue;
        }
        auto kind = gate_kind_from_name(kind_name);
        if (!kind)
            lx.fail("unknown gate kind '" + kind_name + "'");
        std::vector<int> ins;
        ins.reserve(args.size());
        for (auto& a : args)
            ins.push_back(n.add_net(a));
        try {
            n.add_gate(*kind, std::move(ins), out);
        } catch (const Error& e) {
            lx.fail(e.what());
        }
    }
    n.finalize();
    return n;
}

inline Netlist parse_bench_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open BENCH file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_bench(ss.str());
}

inline std::string write_bench(const Netlist& n, const std::string& title = "")
{
    std::ostringstream out;
    if (!title.empty())
        out << "# " << title << "\n";
    for (int pi : n.primary_inputs())
        out << "INPUT(" << n.net_name(pi) << ")\n";
    for (int po : n.primary_outputs())
        out << "OUTPUT(" << n.net_name(po) << ")\n";
    for (auto& ff : n.flip_flops())
        out << n.net_name(ff.q) << " = DFF(" << n.net_name(ff.d) << ")\n";
    for (auto& g : n.gates()) {
        out << n.net_name(g.output) << " = " << gate_kind_name(g.kind) << "(";
        for (size_t i = 0; i < g.inputs.size(); ++i)
            out << (i ? ", " : "") << n.net_name(g.inputs[i]);
        out << ")\n";
    }
    return out.str();
}

}  // namespace scansat
