"""Timing jitter: more bins buy raw bits until disagreement eats them.

Shrinking the bins raises the raw bits per retained frame (log2 n) but
makes neighbouring-bin mixups more likely, so the stations' symbols start
disagreeing and reconciliation gets more expensive.  This script sweeps
the bin count for a few noise levels, prints where the shared information
saturates, and shows how well the closed-form bin-count rule
ceil(2 T_f / sigma_d) tracks the large-n limit.

Run:  python demos/01_jitter_tradeoff.py
Writes CSV next to this file; PNG plots too when matplotlib is available.
"""

import pathlib

import numpy as np

from teqkd import jitter

OUT = pathlib.Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

RATIOS = [1e-4, 1e-3, 1e-2]          # jitter sigma over frame width
NS = [2**k for k in range(1, 15)]

rows = jitter.sweep_rows(NS, RATIOS)
csv_path = OUT / "jitter_sweep.csv"
csv_path.write_text(jitter.sweep_csv(NS, RATIOS))
print(f"wrote {csv_path}")

print("\nshared bits per retained frame (and disagreement rate)")
header = "      n " + "".join(f"  sr={r:<9.0e}" for r in RATIOS)
print(header)
for n in NS:
    cells = []
    for r in RATIOS:
        ch = jitter.build_channel(n, r)
        cells.append(f"{ch.mutual_information_bits:6.3f} ({ch.rod:4.2f})")
    print(f"{n:7d} " + "  ".join(cells))

print("\nbin-count heuristic vs the large-n limit")
for r in RATIOS:
    limit = jitter.ultimate_rate(r, tolerance=0.01)
    n_h = jitter.heuristic_bin_count(1.0, r)
    at_h = jitter.mutual_information(n_h, r)
    print(f"  sigma/T_f = {r:8.0e}:  limit {limit.bits:6.3f} bits "
          f"(saturates near n = {limit.n_reached}),  heuristic n = {n_h} "
          f"reaches {at_h:6.3f} bits ({at_h / limit.bits:.1%})")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    for r in RATIOS:
        ax1.semilogx(NS, [jitter.rod(n, r) for n in NS], marker="o", label=f"sr={r:.0e}")
        ax2.semilogx(NS, [jitter.mutual_information(n, r) for n in NS], marker="o",
                     label=f"sr={r:.0e}")
    ax1.set_xlabel("bins per frame"); ax1.set_ylabel("disagreement rate"); ax1.legend()
    ax2.set_xlabel("bins per frame"); ax2.set_ylabel("shared bits per frame"); ax2.legend()
    fig.tight_layout()
    fig.savefig(OUT / "jitter_tradeoff.png", dpi=120)
    print(f"\nwrote {OUT / 'jitter_tradeoff.png'}")
except ImportError:
    print("\nmatplotlib not installed; skipped plots")
