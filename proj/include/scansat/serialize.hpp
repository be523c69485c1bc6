#pragma once

// JSON formats for the file-based workflow. The public design file carries
// everything an attacker legitimately has (netlist text, scan architecture,
// gate placements, LFSR polynomial); the golden file carries only secrets.
// Attack results serialize to JSON plus a CSV row for sweep tables.

#include <fstream>
#include <json.hpp>

#include "scansat/attack.hpp"
#include "scansat/bench_io.hpp"

namespace scansat {

using Json = nlohmann::ordered_json;

// -- public design -----------------------------------------------------------

inline Json design_to_json(const LockedDesign& d)
{
    Json j;
    j["name"] = d.name;
    j["netlist_bench"] = write_bench(d.netlist, d.name);
    Json scan;
    Json chains = Json::array();
    for (auto& chain : d.arch.chains) {
        Json c = Json::array();
        for (int ff : chain)
            c.push_back(d.netlist.net_name(d.netlist.flip_flops()[ff].q));
        chains.push_back(c);
    }
    scan["chains"] = chains;
    scan["depth"] = d.arch.depth;
    scan["stitch"] = d.arch.policy == StitchPolicy::SeededRandom ? "random" : "declaration";
    scan["stitch_seed"] = d.arch.stitch_seed;
    j["scan"] = scan;
    if (d.compression) {
        j["compression"] = {{"ratio", d.compression->ratio},
                            {"channel_of_chain", d.compression->channel_of_chain},
                            {"chains_of_channel", d.compression->chains_of_channel}};
    }
    if (d.static_obf) {
        Json placements = Json::array();
        for (auto& p : d.static_obf->placements)
            placements.push_back({p.chain, p.boundary});
        j["static"] = {{"placements", placements}};
    }
    if (d.scramble) {
        Json muxes = Json::array();
        for (auto& m : d.scramble->muxes)
            muxes.push_back({{"chain", m.chain},
                             {"slice", m.slice},
                             {"key_index", m.key_index},
                             {"src0", m.src0_chain},
                             {"src1", m.src1_chain}});
        Json paths = Json::array();
        for (auto& path : d.scramble->intended_paths) {
            Json c = Json::array();
            for (int ff : path)
                c.push_back(d.netlist.net_name(d.netlist.flip_flops()[ff].q));
            paths.push_back(c);
        }
        j["scramble"] = {{"muxes", muxes}, {"intended_paths", paths}};
    }
    if (d.dos) {
        Json placements = Json::array();
        for (auto& p : d.dos->placements)
            placements.push_back({p.chain, p.boundary});
        j["dos"] = {{"key_width", d.dos->key_width},
                    {"taps", d.dos->taps},
                    {"lock_fraction", d.dos->lock_fraction},
                    {"placements", placements}};
    }
    if (d.rll) {
        Json placements = Json::array();
        for (auto& [net, kind] : d.rll->placements)
            placements.push_back({net, gate_kind_name(kind)});
        j["rll"] = {{"placements", placements}, {"key_inputs", d.rll->key_input_names}};
    }
    return j;
}

inline LockedDesign design_from_json(const Json& j)
{
    LockedDesign d;
    d.name = j.value("name", "design");
    d.netlist = parse_bench(j.at("netlist_bench").get<std::string>());

    const Json& scan = j.at("scan");
    std::unordered_map<std::string, int> ff_by_q;
    for (int f = 0; f < d.netlist.num_ffs(); ++f)
        ff_by_q[d.netlist.net_name(d.netlist.flip_flops()[f].q)] = f;
    int depth = 0;
    for (auto& chain : scan.at("chains")) {
        std::vector<int> c;
        for (auto& q : chain) {
            auto it = ff_by_q.find(q.get<std::string>());
            if (it == ff_by_q.end())
                throw Error("scan chain references unknown flip-flop '" +
                            q.get<std::string>() + "'");
            c.push_back(it->second);
        }
        depth = std::max(depth, static_cast<int>(c.size()));
        d.arch.chains.push_back(std::move(c));
    }
    d.arch.depth = depth;
    d.arch.policy = scan.value("stitch", "declaration") == std::string("random")
                        ? StitchPolicy::SeededRandom
                        : StitchPolicy::DeclarationOrder;
    d.arch.stitch_seed = scan.value("stitch_seed", uint64_t{0});

    if (j.contains("compression")) {
        CompressionSpec comp;
        comp.ratio = j["compression"].at("ratio").get<int>();
        comp.channel_of_chain =
            j["compression"].at("channel_of_chain").get<std::vector<int>>();
        comp.chains_of_channel =
            j["compression"].at("chains_of_channel").get<std::vector<std::vector<int>>>();
        d.compression = std::move(comp);
    }
    if (j.contains("static")) {
        StaticObfSpec spec;
        for (auto& p : j["static"].at("placements"))
            spec.placements.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        d.static_obf = std::move(spec);
    }
    if (j.contains("scramble")) {
        ScrambleSpec spec;
        for (auto& m : j["scramble"].at("muxes"))
            spec.muxes.push_back({m.at("chain").get<int>(), m.at("slice").get<int>(),
                                  m.at("key_index").get<int>(), m.at("src0").get<int>(),
                                  m.at("src1").get<int>()});
        for (auto& chain : j["scramble"].at("intended_paths")) {
            std::vector<int> c;
            for (auto& q : chain)
                c.push_back(ff_by_q.at(q.get<std::string>()));
            spec.intended_paths.push_back(std::move(c));
        }
        d.scramble = std::move(spec);
    }
    if (j.contains("dos")) {
        DosSpec spec;
        spec.key_width = j["dos"].at("key_width").get<int>();
        spec.taps = j["dos"].at("taps").get<std::vector<int>>();
        spec.lock_fraction = j["dos"].at("lock_fraction").get<double>();
        for (auto& p : j["dos"].at("placements"))
            spec.placements.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        d.dos = std::move(spec);
    }
    if (j.contains("rll")) {
        RllSpec spec;
        for (auto& p : j["rll"].at("placements")) {
            auto kind = gate_kind_from_name(p.at(1).get<std::string>());
            if (!kind)
                throw Error("unknown RLL gate kind in design file");
            spec.placements.push_back({p.at(0).get<std::string>(), *kind});
        }
        spec.key_input_names = j["rll"].at("key_inputs").get<std::vector<std::string>>();
        d.rll = std::move(spec);
    }
    d.validate();
    return d;
}

// -- golden secrets ----------------------------------------------------------

inline Json secrets_to_json(const LockedDesign& d)
{
    Json j;
    j["name"] = d.name;
    if (d.static_obf && d.static_obf->secret_key)
        j["static_key"] = bits_to_string(*d.static_obf->secret_key);
    if (d.scramble && d.scramble->secret_key)
        j["scramble_key"] = bits_to_string(*d.scramble->secret_key);
    if (d.dos && d.dos->secret_seed) {
        j["dos"] = {{"seed", bits_to_string(*d.dos->secret_seed)},
                    {"update_period", *d.dos->secret_update_period},
                    {"max_updates", *d.dos->secret_max_updates}};
    }
    if (d.rll && d.rll->secret_key)
        j["rll_key"] = bits_to_string(*d.rll->secret_key);
    return j;
}

inline void apply_secrets_from_json(LockedDesign& d, const Json& j)
{
    if (d.static_obf && j.contains("static_key"))
        d.static_obf->secret_key = bits_from_string(j["static_key"].get<std::string>());
    if (d.scramble && j.contains("scramble_key"))
        d.scramble->secret_key = bits_from_string(j["scramble_key"].get<std::string>());
    if (d.dos && j.contains("dos")) {
        d.dos->secret_seed = bits_from_string(j["dos"].at("seed").get<std::string>());
        d.dos->secret_update_period = j["dos"].at("update_period").get<int>();
        d.dos->secret_max_updates = j["dos"].at("max_updates").get<int>();
    }
    if (d.rll && j.contains("rll_key"))
        d.rll->secret_key = bits_from_string(j["rll_key"].get<std::string>());
    d.validate();
}

// -- recovered secrets -------------------------------------------------------

inline Json recovered_to_json(const RecoveredSecret& s)
{
    Json j = Json::object();
    if (s.static_key)
        j["static_key"] = bits_to_string(*s.static_key);
    if (s.scramble_key)
        j["scramble_key"] = bits_to_string(*s.scramble_key);
    if (s.seed)
        j["seed"] = bits_to_string(*s.seed);
    if (s.rll_key)
        j["rll_key"] = bits_to_string(*s.rll_key);
    if (s.update_period)
        j["update_period"] = *s.update_period;
    return j;
}

inline RecoveredSecret recovered_from_json(const Json& j)
{
    RecoveredSecret s;
    if (j.contains("static_key"))
        s.static_key = bits_from_string(j["static_key"].get<std::string>());
    if (j.contains("scramble_key"))
        s.scramble_key = bits_from_string(j["scramble_key"].get<std::string>());
    if (j.contains("seed"))
        s.seed = bits_from_string(j["seed"].get<std::string>());
    if (j.contains("rll_key"))
        s.rll_key = bits_from_string(j["rll_key"].get<std::string>());
    if (j.contains("update_period"))
        s.update_period = j["update_period"].get<int>();
    return s;
}

// -- attack results ----------------------------------------------------------

inline Json result_to_json(const AttackResult& r, const std::string& circuit,
                           const std::string& mode, int ratio, int key_size)
{
    Json j;
    j["circuit"] = circuit;
    j["mode"] = mode;
    j["compression_ratio"] = ratio;
    j["key_size"] = key_size;
    j["success"] = r.success;
    j["unsat"] = r.unsat;
    j["timed_out"] = r.timed_out;
    j["partial"] = r.partial;
    j["dips"] = r.dips;
    j["iterations"] = r.iterations;
    if (r.detected_p)
        j["detected_p"] = r.detected_p;
    j["seconds"] = r.seconds;
    j["solver"] = {{"conflicts", r.solver_conflicts}, {"vars", r.solver_vars}};
    j["recovered"] = recovered_to_json(r.recovered);
    if (!r.dips_per_iteration.empty())
        j["dips_per_iteration"] = r.dips_per_iteration;
    if (!r.resolved_after_iteration.empty())
        j["resolved_after_iteration"] = r.resolved_after_iteration;
    if (r.partial && !r.key_resolved.empty()) {
        // resolved subset, '-' marking still-unknown bits
        std::string bits;
        for (size_t i = 0; i < r.key_resolved.size(); ++i)
            bits.push_back(r.key_resolved[i] ? (r.model_key[i] ? '1' : '0') : '-');
        j["key_partial"] = bits;
    }
    return j;
}

inline std::string csv_header()
{
    return "circuit,mode,R,key_size,dips,iterations,detected_p,seconds,success,unsat";
}

inline std::string result_to_csv_row(const AttackResult& r, const std::string& circuit,
                                     const std::string& mode, int ratio, int key_size)
{
    std::ostringstream row;
    row << circuit << ',' << mode << ',' << ratio << ',' << key_size << ',' << r.dips << ','
        << r.iterations << ',' << (r.detected_p ? std::to_string(r.detected_p) : "") << ','
        << r.seconds << ',' << (r.success ? 1 : 0) << ',' << (r.unsat ? 1 : 0);
    return row.str();
}

// -- small file helpers ------------------------------------------------------

inline Json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open '" + path + "'");
    Json j;
    in >> j;
    return j;
}

inline void save_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write '" + path + "'");
    out << text;
}

inline void save_json(const std::string& path, const Json& j)
{
    save_text(path, j.dump(2) + "\n");
}

}  // namespace scansat
