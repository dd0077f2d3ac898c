"""Dead time: occupancy memory, chain sizes, and the compression ratio.

A detection blinds the detector for d bins, so bin occupancies remember
the recent past and the extracted key is no longer uniformly random.
This script walks through the machinery:

* the two frame-level chain constructions and how their state counts
  scale (one explodes with n, the other grows with d),
* the stationary rate of valid frames and the raw bits they carry,
* the compression ratio that measures how much entropy survives, and the
  corrected rate raw * compression, including the regime where pushing
  the source rate harder makes the key *worse*.

Run:  python demos/02_downtime_chains.py
"""

import math
import pathlib

import numpy as np

from teqkd import downtime as dt

OUT = pathlib.Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

print("chain sizes: configuration states vs leak-class states")
print("   n   d   configurations   leak classes   chosen")
for n, d in [(8, 0), (8, 1), (8, 4), (16, 2), (16, 8), (24, 4), (24, 16)]:
    print(f"{n:4d} {d:3d} {dt.bmcm_state_count(n, d):16d} "
          f"{dt.rmcm_state_count(n, d):14d}   {dt.select_method(n, d)}")

print("\ntoy chain at n=2, d=1 (dead time forbids the 11 frame):")
print(dt.dump_chain(dt.build_imc(2, 1, 0.3, "bmcm")))

print("raw rate vs occupancy at n=2, d=1: more photons, less randomness")
print("    p    raw bits/frame   compression   corrected")
for p in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
    chain = dt.build_imc(2, 1, p)
    raw = dt.raw_rate(chain)
    c = dt.compression_ratio(dt.build_omc(2, 1, p))
    print(f"{p:5.2f} {raw:15.4f} {c:13.4f} {raw * c:11.4f}")

print("\ncompression ratio vs dead time at n=16 (families of occupancy)")
ds = list(range(0, 9))
families = {}
for p in (0.5, 0.9, 0.99):
    families[p] = [1.0] + [dt.compression_ratio(dt.build_omc(16, d, p)) for d in ds[1:]]
    cells = "  ".join(f"{c:6.4f}" for c in families[p])
    print(f"  p={p:4.2f}:  {cells}")

print("\nfixed frame duration, fixed dead time in seconds, growing bin count")
print("(source tuned so a one-bin frame would be 90% occupied)")
print("   n    d     p      corrected bits/frame")
sweep_rows = []
for n in (2, 4, 8, 16, 32, 64, 128):
    p = 1 - math.exp(-2.3 / n)
    d = n // 2
    rate = dt.adjusted_rate(n, d, p)
    sweep_rows.append((n, d, p, rate))
    print(f"{n:4d} {d:4d} {p:7.4f} {rate:14.4f}")

csv = dt.sweep_csv([(n, d, p) for n, d, p, _ in sweep_rows])
(OUT / "downtime_sweep.csv").write_text(csv)
print(f"\nwrote {OUT / 'downtime_sweep.csv'}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    for p, values in families.items():
        ax1.plot(ds, values, marker="o", label=f"p={p}")
    ax1.set_xlabel("dead time (bins)"); ax1.set_ylabel("compression ratio"); ax1.legend()
    ax2.semilogx([r[0] for r in sweep_rows], [r[3] for r in sweep_rows], marker="o")
    ax2.set_xlabel("bins per frame"); ax2.set_ylabel("corrected bits per frame")
    fig.tight_layout()
    fig.savefig(OUT / "downtime_chains.png", dpi=120)
    print(f"wrote {OUT / 'downtime_chains.png'}")
except ImportError:
    print("matplotlib not installed; skipped plots")
