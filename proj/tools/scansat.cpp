// scansat: lock gate-level designs with scan obfuscation, simulate the locked
// chip as a scan-accessible oracle, and recover the secret key or LFSR seed
// with an oracle-guided SAT attack.

#include <CLI11.hpp>

#include "scansat/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"scan obfuscation toolkit: lock, simulate, attack, verify"};
    app.require_subcommand(1);

    scansat::GenOptions gen;
    auto* cmd_gen = app.add_subcommand("gen", "generate a locked design from a config");
    cmd_gen->add_option("--config", gen.config_path, "run-config JSON")
        ->required()
        ->envname("SCANSAT_CONFIG");
    cmd_gen->add_option("--out", gen.out_dir, "output directory")->envname("SCANSAT_OUT");
    cmd_gen->add_option("--seed", gen.seed_override, "override the config RNG seed")
        ->envname("SCANSAT_SEED");

    scansat::AttackCmdOptions atk;
    double timeout_s = 3600.0;
    auto* cmd_attack = app.add_subcommand("attack", "run an oracle-guided attack");
    cmd_attack->add_option("--public", atk.public_path, "public design JSON from gen")
        ->required();
    cmd_attack
        ->add_option("--secret", atk.secret_path,
                     "golden secret JSON (instantiates the oracle only)")
        ->required()
        ->envname("SCANSAT_SECRET");
    cmd_attack->add_option("--out", atk.out_dir, "output directory")->envname("SCANSAT_OUT");
    cmd_attack
        ->add_option("--mode", atk.mode, "static|scramble|dynamic|combined|naive")
        ->check(CLI::IsMember({"static", "scramble", "dynamic", "combined", "naive"}));
    cmd_attack->add_option("--p", atk.p, "key update period (detected when omitted)");
    cmd_attack->add_option("--max-dips", atk.attack.max_dips, "DIP budget");
    cmd_attack->add_option("--timeout", timeout_s, "wall-clock limit in seconds")
        ->envname("SCANSAT_TIMEOUT");
    cmd_attack->add_option("--solve-timeout", atk.attack.solve_time_limit_s,
                           "per-SAT-call wall-clock limit in seconds");
    cmd_attack->add_option("--seed", atk.attack.rng_seed, "attack RNG seed")
        ->envname("SCANSAT_SEED");
    cmd_attack->add_option("--dump-cnf", atk.dump_cnf, "write the final CNF as DIMACS");
    cmd_attack->add_option("--transcript", atk.transcript_path,
                           "log oracle transactions to a JSONL file");

    scansat::VerifyOptions ver;
    auto* cmd_verify = app.add_subcommand("verify", "check a recovered secret");
    cmd_verify->add_option("--public", ver.public_path, "public design JSON")->required();
    cmd_verify->add_option("--secret", ver.secret_path, "golden secret JSON")
        ->required()
        ->envname("SCANSAT_SECRET");
    cmd_verify->add_option("--recovered", ver.recovered_path, "recovered secret JSON")
        ->required();
    cmd_verify->add_option("--trials", ver.trials, "random transactions to compare");
    cmd_verify->add_option("--seed", ver.rng_seed, "RNG seed")->envname("SCANSAT_SEED");

    scansat::BenchOptions bench;
    auto* cmd_bench = app.add_subcommand("bench", "sweep a benchmark suite");
    cmd_bench->add_option("--suite", bench.suite_path, "suite JSON")->required();
    cmd_bench->add_option("--out", bench.out_dir, "output directory")->envname("SCANSAT_OUT");
    cmd_bench->add_option("--jobs", bench.jobs, "parallel workers")
        ->envname("SCANSAT_JOBS");
    cmd_bench->add_option("--seed", bench.seed_override, "override per-run RNG seeds")
        ->envname("SCANSAT_SEED");

    scansat::ExportOptions exp;
    auto* cmd_export = app.add_subcommand("export-cnf", "export a locked model");
    cmd_export->add_option("--public", exp.public_path, "public design JSON")->required();
    cmd_export->add_option("--mode", exp.mode, "static|scramble|dynamic|naive|netlist");
    cmd_export->add_option("--j", exp.key_index, "dynamic key index");
    cmd_export->add_option("--out", exp.out_cnf, "DIMACS output path");
    cmd_export->add_option("--bench", exp.out_bench, "BENCH output path");

    CLI11_PARSE(app, argc, argv);

    if (cmd_gen->parsed())
        return scansat::cmd_gen(gen);
    if (cmd_attack->parsed()) {
        atk.attack.time_limit_s = timeout_s;
        atk.attack.dump_cnf_path = atk.dump_cnf;
        return scansat::cmd_attack(atk);
    }
    if (cmd_verify->parsed())
        return scansat::cmd_verify(ver);
    if (cmd_bench->parsed())
        return scansat::cmd_bench(bench);
    if (cmd_export->parsed())
        return scansat::cmd_export_cnf(exp);
    return scansat::kExitConfigError;
}
