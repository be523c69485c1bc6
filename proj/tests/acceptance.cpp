// Acceptance suite: full-pipeline checks at fixed seeds, one line per
// criterion. Exits nonzero if any criterion fails.
//
//  1. model/oracle equivalence across every defense x compression combination
//  2. static attack success rate (functional 100%, bitwise for small keys)
//  3. surviving key set == exhaustive brute-force filter on small instances
//  4. naive-attack UNSAT reproduction vs combined recovery on s27
//  5. exact key-update-period detection
//  6. dynamic seed recovery at p=1 for widths 5/8/16
//  7. DIP-count order checks (desk-scale; ISCAS circuits when provided)
//  8. scramble attack success with and without an extra static layer
//  9. seed-to-key block vs iterated LFSR, exhaustive for widths <= 10

#include <cstdio>
#include <cstdlib>
#include <set>

#include "scansat/attack.hpp"
#include "scansat/bench_io.hpp"

using namespace scansat;

namespace {

std::string bench_dir()
{
#ifdef SCANSAT_BENCH_DIR
    return SCANSAT_BENCH_DIR;
#else
    return "benchmarks";
#endif
}

Netlist load(const std::string& name)
{
    return parse_bench_file(bench_dir() + "/" + name + ".bench");
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double s() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail)
{
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

LockedDesign base_design(const std::string& bench, int chains,
                         std::optional<int> ratio = {})
{
    LockedDesign d;
    d.name = bench;
    d.netlist = load(bench);
    d.arch = build_scan(d.netlist, chains);
    if (ratio)
        d.compression = build_compression(d.arch, *ratio);
    return d;
}

BitVec nonzero_bits(Rng& rng, int n)
{
    BitVec v = rng.random_bits(n);
    bool nz = false;
    for (auto b : v)
        nz |= b;
    if (!nz)
        v[rng.below(n)] = 1;
    return v;
}

// -- criterion 1 -------------------------------------------------------------

bool keystone_combo(const std::string& label, LockedDesign d, const BitVec& model_key,
                    bool dynamic, int p, int trials, double& worst_s)
{
    Timer t;
    d.validate();
    Oracle oracle(d);
    Rng rng(0xACCE5501);
    size_t a_bits = static_cast<size_t>(oracle.channels()) * oracle.depth();
    if (!dynamic) {
        LockedModel model = d.scramble ? model_scramble(strip_secrets(d))
                                       : model_static(strip_secrets(d));
        for (int i = 0; i < trials; ++i) {
            BitVec a = rng.random_bits(a_bits);
            BitVec pi = rng.random_bits(oracle.num_pis());
            ScanIo want = oracle.scan_transaction(a, pi);
            ModelIo got = eval_model(model, a, pi, model_key);
            if (got.response != want.response || got.po != want.po) {
                std::fprintf(stderr, "  keystone mismatch: %s trial %d\n", label.c_str(), i);
                return false;
            }
        }
    } else {
        oracle.scan_transaction(BitVec(a_bits, 0), BitVec(oracle.num_pis(), 0));  // shadow
        int m = 1;
        int current_j = 0;
        LockedModel model;
        for (int i = 0; i < trials; ++i) {
            int j = (m + p) / p;
            if (j != current_j) {
                model = model_dynamic(strip_secrets(d), j);
                current_j = j;
            }
            BitVec a = rng.random_bits(a_bits);
            BitVec pi = rng.random_bits(oracle.num_pis());
            ScanIo want = oracle.scan_transaction(a, pi);
            ++m;
            ModelIo got = eval_model(model, a, pi, model_key);
            if (got.response != want.response || got.po != want.po) {
                std::fprintf(stderr, "  keystone mismatch: %s trial %d\n", label.c_str(), i);
                return false;
            }
        }
    }
    worst_s = std::max(worst_s, t.s());
    return true;
}

void criterion1()
{
    const int trials = 1000;
    double worst = 0.0;
    bool ok = true;
    int combos = 0;
    Rng rng(11);

    struct Setup {
        std::string bench;
        int chains;
        int ratio;
    };
    std::vector<Setup> setups = {{"s27", 1, 1},   {"mini6", 2, 1}, {"mini6", 2, 2},
                                 {"mid16", 4, 1}, {"mid16", 4, 2}, {"mid16", 4, 4}};

    for (auto& s : setups) {
        for (bool with_rll : {false, true}) {
            // static obfuscation (optionally with RLL)
            LockedDesign d = base_design(s.bench, s.chains, s.ratio);
            BitVec key;
            if (with_rll) {
                RllResult r = apply_rll(load(s.bench), 3, rng.next_u64());
                d.netlist = std::move(r.locked);
                d.rll = std::move(r.spec);
                d.arch = build_scan(d.netlist, s.chains);
                d.compression = build_compression(d.arch, s.ratio);
            }
            int nkeys = std::min(6, d.arch.total_cells() - 1);
            d.static_obf = insert_static(d.arch, nkeys, rng.next_u64());
            key = *d.static_obf->secret_key;
            if (with_rll)
                key.insert(key.end(), d.rll->secret_key->begin(), d.rll->secret_key->end());
            std::string label = s.bench + "/static/R" + std::to_string(s.ratio) +
                                (with_rll ? "+rll" : "");
            ok = keystone_combo(label, d, key, false, 0, trials, worst) && ok;
            ++combos;

            // dynamic obfuscation (optionally with RLL)
            LockedDesign dyn = d;
            dyn.static_obf.reset();
            int p = 1 + static_cast<int>(rng.below(3));
            dyn.dos = make_dos(dyn.arch, 1.0, p, 1 << 20,
                               nonzero_bits(rng, dyn.arch.depth), {}, rng.next_u64());
            BitVec dkey = *dyn.dos->secret_seed;
            if (with_rll)
                dkey.insert(dkey.end(), dyn.rll->secret_key->begin(),
                            dyn.rll->secret_key->end());
            label = s.bench + "/dos/R" + std::to_string(s.ratio) + (with_rll ? "+rll" : "");
            ok = keystone_combo(label, dyn, dkey, true, p, trials, worst) && ok;
            ++combos;
        }
        if (s.ratio == 1 && s.chains >= 2) {
            // scrambling, alone and with a static layer
            for (bool with_static : {false, true}) {
                LockedDesign d = base_design(s.bench, s.chains);
                int muxes = std::min(6, d.arch.total_cells() / 2);
                d.scramble = insert_scramble(d.arch, muxes, rng.next_u64());
                BitVec key = *d.scramble->secret_key;
                if (with_static) {
                    d.static_obf = insert_static(d.arch, 3, rng.next_u64());
                    key.insert(key.end(), d.static_obf->secret_key->begin(),
                               d.static_obf->secret_key->end());
                }
                std::string label =
                    s.bench + "/scramble" + (with_static ? "+static" : "") + "/R1";
                ok = keystone_combo(label, d, key, false, 0, trials, worst) && ok;
                ++combos;
            }
        }
    }
    char detail[128];
    std::snprintf(detail, sizeof detail,
                  "%d combinations x %d transactions, 0 mismatches required, worst %.2fs",
                  combos, trials, worst);
    report(1, "model/oracle keystone equivalence", ok && worst < 60.0, detail);
}

// -- criteria 2 and 7 (desk part) ---------------------------------------------

void criteria_2_and_7()
{
    struct Setup {
        std::string bench;
        int chains;
        int ratio;
        int max_key;
    };
    std::vector<Setup> setups = {
        {"s27", 1, 1, 3},     {"mini6", 2, 1, 6},   {"mini6", 2, 2, 6},
        {"chain8", 1, 1, 8},  {"mid16", 4, 1, 16},  {"mid16", 4, 2, 16},
        {"mid16", 4, 4, 16},  {"desk40", 4, 1, 32}, {"desk40", 4, 2, 32},
        {"desk40", 4, 4, 32},
    };
    Rng rng(22);
    int trials = 0, functional = 0, bitwise_applicable = 0, bitwise_exact = 0;
    int max_dips = 0;
    bool dips_ok = true;
    const int total_trials = 50;
    Timer t;
    while (trials < total_trials) {
        auto& s = setups[trials % setups.size()];
        LockedDesign d = base_design(s.bench, s.chains, s.ratio);
        int key_bits = 2 + static_cast<int>(rng.below(s.max_key - 1));
        d.static_obf = insert_static(d.arch, key_bits, rng.next_u64());
        Oracle oracle(d);
        AttackOptions opts;
        opts.rng_seed = rng.next_u64();
        AttackResult res = attack_static(strip_secrets(d), oracle, opts);
        ++trials;
        if (res.success)
            ++functional;
        if (key_bits <= 16) {
            ++bitwise_applicable;
            if (res.recovered.static_key &&
                *res.recovered.static_key == *d.static_obf->secret_key)
                ++bitwise_exact;
        }
        max_dips = std::max(max_dips, res.dips);
        if (res.dips > 20)
            dips_ok = false;
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "functional %d/%d, bitwise %d/%d on <=16-bit keys, %.1fs", functional,
                  trials, bitwise_exact, bitwise_applicable, t.s());
    report(2, "static attack success over randomized trials",
           functional == trials && bitwise_exact == bitwise_applicable, detail);

    const char* iscas = getenv("SCANSAT_ISCAS_DIR");
    if (!iscas) {
        char d7[128];
        std::snprintf(d7, sizeof d7,
                      "desk-scale substitute: all %d trials within 20 DIPs (max %d)", trials,
                      max_dips);
        report(7, "DIP-count order check", dips_ok, d7);
    } else {
        bool ok = dips_ok;
        std::string detail7 = "desk max " + std::to_string(max_dips);
        struct Big {
            const char* name;
            int limit;
        };
        for (auto& big : std::vector<Big>{{"s38584", 4}, {"s35932", 4}, {"s38417", 32}}) {
            LockedDesign d;
            d.name = big.name;
            d.netlist = parse_bench_file(std::string(iscas) + "/" + big.name + ".bench");
            d.arch = build_scan(d.netlist, 16);
            d.static_obf = insert_static(d.arch, 128, 4242);
            Oracle oracle(d);
            AttackOptions opts;
            opts.max_dips = 200;
            AttackResult res = attack_static(strip_secrets(d), oracle, opts);
            ok = ok && res.success && res.dips <= big.limit;
            detail7 += std::string("; ") + big.name + " " + std::to_string(res.dips) +
                       " DIPs (<=" + std::to_string(big.limit) + ")";
        }
        report(7, "DIP-count order check (with ISCAS circuits)", ok, detail7);
    }
}

// -- criterion 3 ---------------------------------------------------------------

void criterion3()
{
    Rng rng(33);
    bool ok = true;
    int trials = 0;
    Timer t;
    for (int i = 0; i < 12; ++i) {
        std::string bench = i % 2 ? "mini6" : "mid16";
        int chains = i % 2 ? 2 : 4;
        LockedDesign d = base_design(bench, chains);
        int top = std::min(12, d.arch.total_cells());
        int key_bits = 3 + static_cast<int>(rng.below(top - 2));  // 3..top (<= 16)
        d.static_obf = insert_static(d.arch, key_bits, rng.next_u64());
        Oracle oracle(d);
        LockedDesign pub = strip_secrets(d);
        LockedModel model = model_static(pub);
        SolverSession session;
        oracle.power_up();
        AttackResult res = sat_attack(model, oracle, {}, session);
        if (!res.success) {
            ok = false;
            break;
        }
        // exhaustive filter over the DIP log
        std::set<std::string> alive;
        for (uint32_t k = 0; k < (1u << key_bits); ++k) {
            BitVec key(key_bits);
            for (int b = 0; b < key_bits; ++b)
                key[b] = (k >> b) & 1;
            bool consistent = true;
            for (auto& dip : res.dip_log) {
                ModelIo io = eval_model(model, dip.a, dip.pi, key);
                if (io.response != dip.b || io.po != dip.po) {
                    consistent = false;
                    break;
                }
            }
            if (consistent)
                alive.insert(bits_to_string(key));
        }
        std::set<std::string> surviving;
        for (auto& k : enumerate_consistent_keys(session, res.model_key_vars))
            surviving.insert(bits_to_string(k));
        if (surviving != alive) {
            std::fprintf(stderr, "  key-set mismatch on trial %d (%zu vs %zu)\n", i,
                         surviving.size(), alive.size());
            ok = false;
        }
        ++trials;
    }
    char detail[96];
    std::snprintf(detail, sizeof detail, "%d trials, keys up to 12 bits, %.1fs", trials,
                  t.s());
    report(3, "surviving key set equals the brute-force filter", ok, detail);
}

// -- criterion 4 ---------------------------------------------------------------

void criterion4()
{
    Timer t;
    Netlist s27 = load("s27");
    RllResult rll = apply_rll_spec(
        s27, {{"G8", GateKind::Xnor}, {"G15", GateKind::Xor}, {"G12", GateKind::Xnor}});
    bool key_is_101 = *rll.spec.secret_key == BitVec{1, 0, 1};

    LockedDesign d;
    d.name = "s27_rll_scan";
    d.netlist = rll.locked;
    d.rll = rll.spec;
    d.arch = build_scan(d.netlist, 1);
    StaticObfSpec scan;
    scan.placements = {{0, 1}, {0, 2}};
    scan.secret_key = BitVec{1, 0};
    d.static_obf = scan;
    d.validate();

    Oracle o1(d);
    AttackResult naive = naive_sat_attack(strip_secrets(d), o1, {});
    Oracle o2(d);
    AttackResult combined = combined_attack(strip_secrets(d), o2, {});

    bool both_keys = combined.success && combined.recovered.static_key &&
                     *combined.recovered.static_key == BitVec{1, 0} &&
                     combined.recovered.rll_key;
    if (both_keys) {
        // the recovered RLL key must restore the original function
        Rng rng(44);
        for (int i = 0; i < 500 && both_keys; ++i) {
            BitVec pi = rng.random_bits(s27.num_pis());
            BitVec st = rng.random_bits(s27.num_ffs());
            EvalResult ref = s27.evaluate(pi, st);
            EvalResult got =
                eval_with_key(rll.locked, rll.spec, pi, *combined.recovered.rll_key, st);
            both_keys = ref.po == got.po && ref.next_state == got.next_state;
        }
    }
    bool ok = key_is_101 && naive.unsat && !naive.success && both_keys && t.s() < 10.0;
    char detail[128];
    std::snprintf(detail, sizeof detail, "naive UNSAT=%d, combined success=%d, %.2fs (<10s)",
                  naive.unsat ? 1 : 0, both_keys ? 1 : 0, t.s());
    report(4, "naive-attack UNSAT vs combined recovery on s27", ok, detail);
}

// -- criterion 5 ---------------------------------------------------------------

void criterion5()
{
    Rng rng(55);
    int trials = 0, exact = 0;
    Timer t;
    for (int p : {1, 2, 4, 8}) {
        for (int ratio : {1, 2, 4}) {
            for (int rep = 0; rep < 2; ++rep) {
                LockedDesign d = base_design("mid16", 4, ratio);
                d.dos = make_dos(d.arch, 1.0, p, 1 << 20, nonzero_bits(rng, d.arch.depth),
                                 {}, rng.next_u64());
                Oracle oracle(d);
                DetectPResult res =
                    detect_p(oracle, random_probes(oracle, 3, rng.next_u64()), 2 * p + 6);
                ++trials;
                if (res.p && *res.p == p)
                    ++exact;
            }
        }
    }
    char detail[96];
    std::snprintf(detail, sizeof detail, "exact %d/%d over p in {1,2,4,8}, R in {1,2,4}, %.1fs",
                  exact, trials, t.s());
    report(5, "key update period detection", exact == trials && trials >= 20, detail);
}

// -- criterion 6 ---------------------------------------------------------------

void criterion6()
{
    struct Setup {
        std::string bench;
        int width;
    };
    std::vector<Setup> setups = {{"chain5", 5}, {"chain8", 8}, {"chain16", 16}};
    Rng rng(66);
    bool ok = true;
    int runs = 0;
    bool saw_two_step_trace = false;
    Timer t;
    for (auto& s : setups) {
        for (int trial = 0; trial < 50; ++trial) {
            LockedDesign d = base_design(s.bench, 1);
            BitVec seed = nonzero_bits(rng, s.width);
            d.dos = make_dos(d.arch, 1.0, 1, 1 << 20, seed, {}, rng.next_u64());
            Oracle oracle(d);
            AttackOptions opts;
            opts.rng_seed = rng.next_u64();
            AttackResult res = dynamic_attack(strip_secrets(d), oracle, 1, opts);
            ++runs;
            if (!res.success || !res.recovered.seed || *res.recovered.seed != seed) {
                std::fprintf(stderr, "  seed recovery failed: %s trial %d\n",
                             s.bench.c_str(), trial);
                ok = false;
                continue;
            }
            if (res.iterations > s.width)
                ok = false;
            for (size_t i = 1; i < res.resolved_after_iteration.size(); ++i)
                if (res.resolved_after_iteration[i] < res.resolved_after_iteration[i - 1])
                    ok = false;
            if (s.width == 5 && res.iterations == 2 && res.resolved_after_iteration.size() >= 2 &&
                res.resolved_after_iteration[0] > 0 && res.resolved_after_iteration[0] < 5)
                saw_two_step_trace = true;
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "%d runs over widths {5,8,16}, iterations <= width, monotone resolution, "
                  "two-step trace seen=%d, %.1fs",
                  runs, saw_two_step_trace ? 1 : 0, t.s());
    report(6, "dynamic seed recovery at p=1", ok && saw_two_step_trace, detail);
}

// -- criterion 8 ---------------------------------------------------------------

void criterion8()
{
    Rng rng(88);
    int trials = 0, good = 0;
    Timer t;
    struct Setup {
        std::string bench;
        int chains;
    };
    std::vector<Setup> setups = {{"mini6", 2}, {"chain8", 2}, {"mid16", 4}, {"chain16", 3}};
    while (trials < 24) {
        auto& s = setups[trials % setups.size()];
        LockedDesign d = base_design(s.bench, s.chains);
        auto feasible = [&] {
            int count = 0;
            for (int j = 0; j < d.arch.chain_count(); ++j)
                count += std::max(0, d.arch.chain_length(j) - 1);
            return count;
        }();
        int muxes = std::min(12, std::max(2, feasible - 1));
        d.scramble = insert_scramble(d.arch, muxes, rng.next_u64());
        if (trials % 2) {
            int static_bits = std::min(12 - muxes + 4, d.arch.total_cells() - 1);
            if (static_bits > 0)
                d.static_obf = insert_static(d.arch, static_bits, rng.next_u64());
        }
        Oracle oracle(d);
        AttackOptions opts;
        opts.rng_seed = rng.next_u64();
        AttackResult res = attack_static(strip_secrets(d), oracle, opts);
        ++trials;
        if (res.success)
            ++good;
        else
            std::fprintf(stderr, "  scramble attack failed: %s trial %d\n", s.bench.c_str(),
                         trials);
    }
    char detail[96];
    std::snprintf(detail, sizeof detail, "functional equivalence %d/%d, %.1fs", good, trials,
                  t.s());
    report(8, "scramble attack success", good == trials && trials >= 20, detail);
}

// -- criterion 9 ---------------------------------------------------------------

void criterion9()
{
    bool ok = true;
    Timer t;
    int64_t checked = 0;
    for (int width = 2; width <= 10; ++width) {
        auto taps = default_taps(width);
        for (int j = 1; j <= 2 * width; ++j) {
            Netlist blk = seed_to_key_block(taps, width, j);
            for (uint32_t s = 1; s < (1u << width); ++s) {
                BitVec seed(width);
                for (int b = 0; b < width; ++b)
                    seed[b] = (s >> b) & 1;
                if (blk.evaluate(seed, {}).po != key_at(seed, taps, j)) {
                    std::fprintf(stderr, "  seed-to-key mismatch: width %d j %d seed %u\n",
                                 width, j, s);
                    ok = false;
                }
                ++checked;
            }
        }
    }
    char detail[96];
    std::snprintf(detail, sizeof detail, "%lld (width,j,seed) cases, exact, %.1fs",
                  static_cast<long long>(checked), t.s());
    report(9, "seed-to-key block consistency", ok, detail);
}

}  // namespace

int main()
{
    std::printf("acceptance suite (fixed seeds; deterministic)\n");
    Timer total;
    criterion1();
    criteria_2_and_7();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion8();
    criterion9();
    std::printf("%d criterion(s) failed; total %.1fs\n", failures, total.s());
    return failures == 0 ? 0 : 1;
}
