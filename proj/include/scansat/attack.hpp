#pragma once

// Oracle-guided attacks. The classic DIP loop builds a miter over two copies
// of the locked model with shared inputs and independent key variables; each
// satisfying assignment yields a distinguishing input pattern, the oracle's
// answer prunes the key space, and convergence (miter UNSAT) means every key
// consistent with the logged I/O is behaviorally correct.
//
// For dynamic (DOS) designs the key inputs are the seed bits, shared by the
// per-window models, and each window's SAT run is capped at the update period
// so the CNF carries over from run to run. Everything here operates on the
// public design view only; secrets stay behind the Oracle.

#include <chrono>
#include <fstream>
#include <numeric>

#include "scansat/cnf.hpp"
#include "scansat/locked_model.hpp"
#include "scansat/oracle.hpp"
#include "scansat/solver.hpp"

namespace scansat {

// Grow-only incremental solver session; mirrors every clause into a Cnf store
// so the final formula can be dumped as DIMACS.
class SolverSession {
public:
    int new_var()
    {
        int v = solver.new_var();
        int c = cnf.new_var();
        if (v != c)
            throw Error("solver/cnf variable counters diverged");
        return v;
    }
    bool add_clause(std::vector<int> lits)
    {
        cnf.add_clause(lits);
        return solver.add_clause(lits);
    }
    int const_lit(bool value)
    {
        if (const_true_ == 0) {
            const_true_ = new_var();
            add_clause({const_true_});
        }
        return value ? const_true_ : -const_true_;
    }

    Cnf cnf;
    Solver solver;

private:
    int const_true_ = 0;
};

struct EncodedModel {
    std::vector<int> a, pi, key, b, po;  // solver literals per interface group
};

// Encodes one copy of the model circuit; pins map model nets to existing
// literals (shared inputs, shared key variables, or constants).
inline EncodedModel encode_model(SolverSession& s, const LockedModel& m,
                                 const std::unordered_map<int, int>* pins = nullptr)
{
    auto lits = tseitin_encode(
        m.circuit, [&] { return s.new_var(); },
        [&](std::vector<int> c) { s.add_clause(std::move(c)); }, pins);
    EncodedModel e;
    for (int net : m.scan_in_nets)
        e.a.push_back(lits.at(net));
    for (int net : m.pi_nets)
        e.pi.push_back(lits.at(net));
    for (int net : m.key_nets)
        e.key.push_back(lits.at(net));
    for (int net : m.scan_out_nets)
        e.b.push_back(lits.at(net));
    for (int net : m.po_nets)
        e.po.push_back(lits.at(net));
    return e;
}

struct AttackOptions {
    int max_dips = 10000;
    int max_windows = 512;             // dynamic iteration cap
    int64_t conflict_budget = -1;      // per solve call; <0 = unbounded
    double solve_time_limit_s = 60.0;  // per solve call
    double time_limit_s = 3600.0;      // whole attack
    int verify_trials = 50;
    uint64_t rng_seed = 1;
    std::string dump_cnf_path;         // when set, the final CNF lands here
};

struct DipRecord {
    BitVec a, pi, b, po;
    int key_index = 0;
};

struct AttackResult {
    bool success = false;
    bool unsat = false;      // key space exhausted (naive-attack terminal state)
    bool timed_out = false;
    bool partial = false;
    RecoveredSecret recovered;
    BitVec model_key;                  // raw model key vector (scan/seed ++ rll)
    std::vector<uint8_t> key_resolved; // per-bit flags; all 1 for converged static runs
    std::vector<int> model_key_vars;   // solver vars of the first key copy
    int dips = 0;
    int iterations = 0;
    int detected_p = 0;
    double seconds = 0.0;
    int64_t solver_conflicts = 0;
    int solver_vars = 0;
    std::vector<DipRecord> dip_log;
    // dynamic runs log both counters: DIPs spent and seed bits proven per window
    std::vector<int> dips_per_iteration;
    std::vector<int> resolved_after_iteration;
};

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

struct Miter {
    EncodedModel a_side, b_side;
    int act = 0;  // assuming act forces some output difference
};

inline Miter build_miter(SolverSession& s, const LockedModel& m,
                         const std::vector<int>* key_a, const std::vector<int>* key_b)
{
    Miter mt;
    std::unordered_map<int, int> pins_a, pins_b;
    if (key_a) {
        for (size_t i = 0; i < key_a->size(); ++i)
            pins_a[m.key_nets[i]] = (*key_a)[i];
    }
    mt.a_side = encode_model(s, m, key_a ? &pins_a : nullptr);
    for (size_t i = 0; i < m.scan_in_nets.size(); ++i)
        pins_b[m.scan_in_nets[i]] = mt.a_side.a[i];
    for (size_t i = 0; i < m.pi_nets.size(); ++i)
        pins_b[m.pi_nets[i]] = mt.a_side.pi[i];
    if (key_b)
        for (size_t i = 0; i < key_b->size(); ++i)
            pins_b[m.key_nets[i]] = (*key_b)[i];
    mt.b_side = encode_model(s, m, &pins_b);

    mt.act = s.new_var();
    std::vector<int> any_diff{-mt.act};
    auto add_diff = [&](int ya, int yb) {
        int d = s.new_var();
        s.add_clause({-d, ya, yb});
        s.add_clause({-d, -ya, -yb});
        s.add_clause({d, ya, -yb});
        s.add_clause({d, -ya, yb});
        any_diff.push_back(d);
    };
    for (size_t i = 0; i < mt.a_side.b.size(); ++i)
        add_diff(mt.a_side.b[i], mt.b_side.b[i]);
    for (size_t i = 0; i < mt.a_side.po.size(); ++i)
        add_diff(mt.a_side.po[i], mt.b_side.po[i]);
    s.add_clause(any_diff);
    return mt;
}

// Pins the model's inputs to the DIP and its outputs to the oracle's answer,
// with key nets bound to the given key variables.
inline void add_io_constraint(SolverSession& s, const LockedModel& m,
                              const std::vector<int>& key_vars, const DipRecord& dip)
{
    std::unordered_map<int, int> pins;
    for (size_t i = 0; i < m.scan_in_nets.size(); ++i)
        pins[m.scan_in_nets[i]] = s.const_lit(dip.a[i]);
    for (size_t i = 0; i < m.pi_nets.size(); ++i)
        pins[m.pi_nets[i]] = s.const_lit(dip.pi[i]);
    for (size_t i = 0; i < m.key_nets.size(); ++i)
        pins[m.key_nets[i]] = key_vars[i];
    EncodedModel e = encode_model(s, m, &pins);
    for (size_t i = 0; i < e.b.size(); ++i)
        s.add_clause({dip.b[i] ? e.b[i] : -e.b[i]});
    for (size_t i = 0; i < e.po.size(); ++i)
        s.add_clause({dip.po[i] ? e.po[i] : -e.po[i]});
}

inline BitVec read_bits(const Solver& solver, const std::vector<int>& lits)
{
    BitVec v;
    v.reserve(lits.size());
    for (int l : lits)
        v.push_back(l > 0 ? solver.value(l) : !solver.value(-l));
    return v;
}

}  // namespace detail

// Classic oracle-guided SAT attack on a 1-cycle locked model. The session is
// caller-owned: on a partial result it retains every constraint gathered so
// far, and on convergence it holds the final CNF.
inline AttackResult sat_attack(const LockedModel& model, Oracle& oracle,
                               const AttackOptions& opts, SolverSession& session)
{
    detail::Stopwatch clock;
    AttackResult res;
    if (static_cast<size_t>(oracle.channels()) * oracle.depth() != model.scan_in_nets.size() ||
        oracle.num_pis() != static_cast<int>(model.pi_nets.size()))
        throw Error("sat_attack: model and oracle interface dimensions differ");

    detail::Miter miter = detail::build_miter(session, model, nullptr, nullptr);
    std::vector<int> key_a = miter.a_side.key;
    std::vector<int> key_b = miter.b_side.key;
    res.model_key_vars = key_a;

    bool converged = false;
    for (;;) {
        if (clock.seconds() > opts.time_limit_s) {
            res.timed_out = true;
            break;
        }
        Solver::Status st = session.solver.solve({miter.act}, opts.conflict_budget,
                                                 opts.solve_time_limit_s);
        if (st == Solver::Status::Unknown) {
            res.timed_out = true;
            break;
        }
        if (st == Solver::Status::Unsat) {
            converged = true;
            break;
        }
        DipRecord dip;
        dip.a = detail::read_bits(session.solver, miter.a_side.a);
        dip.pi = detail::read_bits(session.solver, miter.a_side.pi);
        ScanIo io = oracle.scan_transaction(dip.a, dip.pi);
        dip.b = io.response;
        dip.po = io.po;
        dip.key_index = model.key_index;
        detail::add_io_constraint(session, model, key_a, dip);
        detail::add_io_constraint(session, model, key_b, dip);
        res.dip_log.push_back(std::move(dip));
        ++res.dips;
        if (res.dips >= opts.max_dips)
            break;
    }
    res.iterations = res.dips;

    if (converged) {
        Solver::Status st =
            session.solver.solve({-miter.act}, opts.conflict_budget, opts.solve_time_limit_s);
        if (st == Solver::Status::Sat) {
            res.model_key = detail::read_bits(session.solver, key_a);
            res.key_resolved.assign(res.model_key.size(), 1);
            res.success = true;  // provisional; drivers re-check with verify_key
        } else if (st == Solver::Status::Unsat) {
            res.unsat = true;
        } else {
            res.timed_out = true;
            res.partial = true;
        }
    } else {
        res.partial = true;
    }
    res.seconds = clock.seconds();
    res.solver_conflicts = session.solver.stats.conflicts;
    res.solver_vars = session.solver.num_vars();
    return res;
}

// Enumerates every key of the first copy consistent with the session's
// constraint store (all logged oracle I/O). Intended for small key widths.
inline std::vector<BitVec> enumerate_consistent_keys(SolverSession& session,
                                                     const std::vector<int>& key_vars,
                                                     size_t limit = 1 << 20)
{
    std::vector<BitVec> keys;
    while (keys.size() < limit) {
        if (session.solver.solve() != Solver::Status::Sat)
            break;
        BitVec k = detail::read_bits(session.solver, key_vars);
        std::vector<int> block;
        for (size_t i = 0; i < key_vars.size(); ++i)
            block.push_back(k[i] ? -key_vars[i] : key_vars[i]);
        keys.push_back(std::move(k));
        if (!session.add_clause(block))
            break;
    }
    return keys;
}

inline void maybe_dump_cnf(const SolverSession& session, const AttackOptions& opts)
{
    if (opts.dump_cnf_path.empty())
        return;
    std::ofstream out(opts.dump_cnf_path);
    if (!out)
        throw Error("cannot write '" + opts.dump_cnf_path + "'");
    write_dimacs(out, session.cnf, {"final attack CNF"});
}

// Splits a raw model key vector into the per-defense secrets.
inline RecoveredSecret split_model_key(const LockedDesign& design, const BitVec& model_key)
{
    RecoveredSecret sec;
    size_t pos = 0;
    auto take = [&](size_t n) {
        if (pos + n > model_key.size())
            throw Error("recovered key vector too short");
        BitVec part(model_key.begin() + pos, model_key.begin() + pos + n);
        pos += n;
        return part;
    };
    if (design.dos) {
        sec.seed = take(design.dos->key_width);
    } else {
        if (design.scramble)
            sec.scramble_key = take(design.scramble->muxes.size());
        if (design.static_obf)
            sec.static_key = take(design.static_obf->placements.size());
    }
    if (design.rll)
        sec.rll_key = take(design.rll->key_size());
    return sec;
}

// Functional key verification: a second oracle is instantiated with the
// recovered secret and compared against the target on random transactions.
// For scrambling this is deliberately permutation-equivalence, not bitwise
// key equality.
inline bool verify_key(const LockedDesign& public_design, Oracle& target,
                       const RecoveredSecret& secret, int n_trials, uint64_t rng_seed)
{
    LockedDesign cand = public_design;
    try {
        if (!install_candidate_secrets(cand, secret))
            return false;
        Oracle mine(cand);
        target.power_up();
        Rng rng(rng_seed);
        for (int t = 0; t < n_trials; ++t) {
            BitVec a = rng.random_bits(static_cast<size_t>(target.channels()) * target.depth());
            BitVec pi = rng.random_bits(target.num_pis());
            ScanIo want = target.scan_transaction(a, pi);
            ScanIo got = mine.scan_transaction(a, pi);
            if (want.response != got.response || want.po != got.po)
                return false;
        }
        return true;
    } catch (const Error&) {
        return false;
    }
}

// Attack driver for static scan obfuscation and scrambling (with or without
// compression and an extra RLL layer).
inline AttackResult attack_static(const LockedDesign& public_design, Oracle& oracle,
                                  const AttackOptions& opts)
{
    if (public_design.dos)
        throw Error("attack_static: DOS designs need dynamic_attack");
    LockedModel model =
        public_design.scramble ? model_scramble(public_design) : model_static(public_design);
    SolverSession session;
    oracle.power_up();
    AttackResult res = sat_attack(model, oracle, opts, session);
    maybe_dump_cnf(session, opts);
    if (res.success) {
        res.recovered = split_model_key(public_design, res.model_key);
        res.success =
            verify_key(public_design, oracle, res.recovered, opts.verify_trials, opts.rng_seed);
    }
    return res;
}

// Deliberate negative control: run the SAT attack with the scan obfuscation
// ignored. On a truly obfuscated oracle the accumulated constraints wipe out
// the key space and the run terminates UNSAT.
inline AttackResult naive_sat_attack(const LockedDesign& public_design, Oracle& oracle,
                                     const AttackOptions& opts)
{
    // the naive attacker's design view carries no scan defenses at all
    LockedDesign naive_view = strip_secrets(public_design);
    naive_view.static_obf.reset();
    naive_view.scramble.reset();
    naive_view.dos.reset();
    LockedModel model = model_ignoring_scan_obfuscation(public_design);
    SolverSession session;
    oracle.power_up();
    if (public_design.dos)  // burn the shadow-masked first pattern
        oracle.scan_transaction(BitVec(static_cast<size_t>(oracle.channels()) * oracle.depth(), 0),
                                BitVec(oracle.num_pis(), 0));
    AttackResult res = sat_attack(model, oracle, opts, session);
    maybe_dump_cnf(session, opts);
    if (res.success) {
        res.recovered = split_model_key(naive_view, res.model_key);
        res.success =
            verify_key(naive_view, oracle, res.recovered, opts.verify_trials, opts.rng_seed);
    }
    return res;
}

struct Probe {
    BitVec stimulus;
    BitVec pi;
};

struct DetectPResult {
    std::optional<int> p;  // empty: no key update observed (static defense?)
    int captures_used = 0;
};

inline std::vector<Probe> random_probes(const Oracle& oracle, int count, uint64_t seed)
{
    Rng rng(seed);
    std::vector<Probe> probes;
    for (int i = 0; i < count; ++i)
        probes.push_back(
            {rng.random_bits(static_cast<size_t>(oracle.channels()) * oracle.depth()),
             rng.random_bits(oracle.num_pis())});
    return probes;
}

// Applies each probe pattern repeatedly and watches for response changes.
// Key updates hit at capture multiples of p, so the update period is the gcd
// of the observed change offsets; the shadow-masked first unload is skipped.
// The smallest estimate across probes wins (a change can be masked by the
// logic, never invented).
inline DetectPResult detect_p(Oracle& oracle, const std::vector<Probe>& probes,
                              int max_captures)
{
    if (probes.empty())
        throw Error("detect_p: need at least one probe pattern");
    DetectPResult out;
    for (const Probe& probe : probes) {
        oracle.power_up();
        BitVec prev;
        std::vector<int> change_offsets;
        for (int m = 1; m <= max_captures; ++m) {
            ScanIo io = oracle.scan_transaction(probe.stimulus, probe.pi);
            ++out.captures_used;
            if (m == 1)
                continue;  // shadow-masked
            if (m >= 3 && io.response != prev)
                change_offsets.push_back(m - 1);
            prev = io.response;
        }
        if (change_offsets.empty())
            continue;
        int g = 0;
        for (int c : change_offsets)
            g = std::gcd(g, c);
        if (!out.p || g < *out.p)
            out.p = g;
    }
    return out;
}

// Iterative CNF-carrying seed recovery for dynamically obfuscated scans.
// Window j gets at most p DIPs (the pattern budget for which key j stays
// active); the session keeps every constraint, so each run starts from the
// previous runs' CNF. Seed bits are decided by assumption probing, and filler
// transactions keep the model's key index aligned with the oracle schedule.
inline AttackResult dynamic_attack(const LockedDesign& public_design, Oracle& oracle, int p,
                                   const AttackOptions& opts)
{
    if (!public_design.dos)
        throw Error("dynamic_attack: design has no DOS spec");
    if (p < 1)
        throw Error("dynamic_attack: update period must be >= 1");
    detail::Stopwatch clock;
    const int width = public_design.dos->key_width;
    const int rll_bits = public_design.rll ? public_design.rll->key_size() : 0;

    AttackResult res;
    SolverSession session;
    std::vector<int> key_a, key_b;
    for (int i = 0; i < width + rll_bits; ++i)
        key_a.push_back(session.new_var());
    for (int i = 0; i < width + rll_bits; ++i)
        key_b.push_back(session.new_var());
    res.model_key_vars = key_a;
    // a DOS seed is nonzero by construction; tell the solver
    std::vector<int> nz_a(key_a.begin(), key_a.begin() + width);
    std::vector<int> nz_b(key_b.begin(), key_b.begin() + width);
    session.add_clause(nz_a);
    session.add_clause(nz_b);

    std::vector<std::optional<bool>> resolved(width);
    auto all_resolved = [&] {
        for (auto& r : resolved)
            if (!r)
                return false;
        return true;
    };

    oracle.power_up();
    BitVec zeros_a(static_cast<size_t>(oracle.channels()) * oracle.depth(), 0);
    BitVec zeros_pi(oracle.num_pis(), 0);
    oracle.scan_transaction(zeros_a, zeros_pi);  // shadow-masked pattern 1
    int m = 1;                                   // patterns issued

    bool out_of_time = false;
    while (res.iterations < opts.max_windows && !all_resolved() && !out_of_time) {
        int j = (m + p) / p;      // window of the next pattern
        int budget = j * p - m;   // patterns left inside window j
        LockedModel model = model_dynamic(public_design, j);
        detail::Miter miter = detail::build_miter(session, model, &key_a, &key_b);

        int used = 0;
        while (used < budget) {
            if (clock.seconds() > opts.time_limit_s || res.dips >= opts.max_dips) {
                out_of_time = true;
                break;
            }
            Solver::Status st = session.solver.solve({miter.act}, opts.conflict_budget,
                                                 opts.solve_time_limit_s);
            if (st == Solver::Status::Unknown) {
                out_of_time = true;
                break;
            }
            if (st == Solver::Status::Unsat)
                break;  // no distinguishing input through this window's model
            DipRecord dip;
            dip.a = detail::read_bits(session.solver, miter.a_side.a);
            dip.pi = detail::read_bits(session.solver, miter.a_side.pi);
            ScanIo io = oracle.scan_transaction(dip.a, dip.pi);
            ++m;
            dip.b = io.response;
            dip.po = io.po;
            dip.key_index = j;
            detail::add_io_constraint(session, model, key_a, dip);
            detail::add_io_constraint(session, model, key_b, dip);
            res.dip_log.push_back(std::move(dip));
            ++res.dips;
            ++used;
        }
        ++res.iterations;
        res.dips_per_iteration.push_back(used);

        // assumption-probe unresolved seed bits: if one value is inconsistent
        // with the CNF, the other is proven
        for (int i = 0; i < width && !out_of_time; ++i) {
            if (resolved[i])
                continue;
            if (session.solver.solve({key_a[i]}, opts.conflict_budget,
                                     opts.solve_time_limit_s) == Solver::Status::Unsat) {
                resolved[i] = false;
                session.add_clause({-key_a[i]});
                session.add_clause({-key_b[i]});
            } else if (session.solver.solve({-key_a[i]}, opts.conflict_budget,
                                            opts.solve_time_limit_s) ==
                       Solver::Status::Unsat) {
                resolved[i] = true;
                session.add_clause({key_a[i]});
                session.add_clause({key_b[i]});
            }
        }
        int known = 0;
        for (auto& r : resolved)
            if (r)
                ++known;
        res.resolved_after_iteration.push_back(known);
        if (all_resolved())
            break;
        // burn the unused pattern budget so the oracle enters the next window
        for (int k = used; k < budget && !out_of_time; ++k) {
            oracle.scan_transaction(zeros_a, zeros_pi);
            ++m;
        }
    }

    res.key_resolved.assign(width + rll_bits, 0);
    res.model_key.assign(width + rll_bits, 0);
    for (int i = 0; i < width; ++i)
        if (resolved[i]) {
            res.key_resolved[i] = 1;
            res.model_key[i] = *resolved[i];
        }
    res.timed_out = out_of_time;
    if (all_resolved()) {
        if (rll_bits > 0) {
            if (session.solver.solve() == Solver::Status::Sat) {
                for (int i = 0; i < rll_bits; ++i) {
                    res.model_key[width + i] = session.solver.value(key_a[width + i]);
                    res.key_resolved[width + i] = 1;
                }
            }
        }
        res.recovered = split_model_key(public_design, res.model_key);
        res.recovered.update_period = p;
        res.detected_p = p;
        res.success =
            verify_key(public_design, oracle, res.recovered, opts.verify_trials, opts.rng_seed);
    } else {
        res.partial = true;  // report the resolved subset as-is
    }
    res.seconds = clock.seconds();
    res.solver_conflicts = session.solver.stats.conflicts;
    res.solver_vars = session.solver.num_vars();
    maybe_dump_cnf(session, opts);
    return res;
}

// Two-layer attack: scan obfuscation plus RLL, both key groups free. The
// model builders already expose the RLL key inputs, so this dispatches on
// the scan defense and recovers the concatenated key.
inline AttackResult combined_attack(const LockedDesign& public_design, Oracle& oracle,
                                    const AttackOptions& opts, std::optional<int> p = {})
{
    if (public_design.dos) {
        int period;
        AttackResult pre;
        if (p) {
            period = *p;
        } else {
            DetectPResult dp =
                detect_p(oracle, random_probes(oracle, 3, opts.rng_seed), 4 * 8 + 2);
            if (!dp.p)
                throw Error("combined_attack: could not detect the key update period");
            period = *dp.p;
        }
        AttackResult res = dynamic_attack(public_design, oracle, period, opts);
        res.detected_p = period;
        return res;
    }
    return attack_static(public_design, oracle, opts);
}

}  // namespace scansat
