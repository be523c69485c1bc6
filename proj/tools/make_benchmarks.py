#!/usr/bin/env python3
"""Regenerates the synthetic circuits under benchmarks/.

Each circuit couples every state bit to its next-state function through an
XOR, so all scan cells are controllable and observable through the scan
interface; that keeps key-recovery experiments well-conditioned. Output is
deterministic for a given seed.
"""

import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "benchmarks"


def gen(name, ffs, pis, pos, extra_gates, seed):
    rng = random.Random(seed)
    lines = [f"# {name}: synthetic sequential benchmark ({ffs} FFs, {pis} PIs, {pos} POs)"]
    for i in range(pis):
        lines.append(f"INPUT(x{i})")
    for i in range(pos):
        lines.append(f"OUTPUT(p{i})")
    for i in range(ffs):
        lines.append(f"q{i} = DFF(d{i})")

    nets = [f"x{i}" for i in range(pis)] + [f"q{i}" for i in range(ffs)]
    kinds = ["AND", "OR", "NAND", "NOR"]
    for i in range(ffs):
        kind = rng.choice(kinds)
        a = f"q{(i + 1) % ffs}"
        b = rng.choice(nets)
        lines.append(f"t{i} = {kind}({a}, {b})")
        lines.append(f"d{i} = XOR(q{i}, t{i})")
        nets.append(f"t{i}")

    for g in range(extra_gates):
        kind = rng.choice(kinds + ["XOR", "XNOR"])
        a, b = rng.sample(nets, 2)
        lines.append(f"g{g} = {kind}({a}, {b})")
        nets.append(f"g{g}")

    for j in range(pos):
        a = f"q{j % ffs}"
        b = rng.choice(nets)
        lines.append(f"p{j} = XOR({a}, {b})")

    text = "\n".join(lines) + "\n"
    (OUT / f"{name}.bench").write_text(text)
    print(f"wrote {name}.bench ({ffs} FFs)")


def main():
    OUT.mkdir(exist_ok=True)
    gen("chain5", ffs=5, pis=3, pos=3, extra_gates=4, seed=501)
    gen("chain8", ffs=8, pis=4, pos=4, extra_gates=6, seed=801)
    gen("chain16", ffs=16, pis=5, pos=6, extra_gates=10, seed=1601)
    gen("mini6", ffs=6, pis=4, pos=4, extra_gates=8, seed=601)
    gen("mid16", ffs=16, pis=6, pos=8, extra_gates=14, seed=1602)
    gen("desk40", ffs=40, pis=8, pos=10, extra_gates=30, seed=4001)


if __name__ == "__main__":
    main()
