"""Mortality of H_k: how many terms survive before an index leaves 1..n-1.

    python demos/02_mortality.py [k_max] [cap]

Without arguments this reproduces the 30 values of L(k) for 3 <= k <= 32 and
then scans up to k = 60 with a 10^7 cap.  Rows with L = -1 only say the
sequence outlived the cap.  The full n <= 145 plot needs caps near 2*10^9
and several GB per run; pass them explicitly if the machine has the memory.
"""

import sys
from pathlib import Path

from metafib import SweepConfig, sweep
from metafib.mortality import write_csv
from metafib.svgplot import PlotSpec, Series, write_svg

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

k_max = int(sys.argv[1]) if len(sys.argv) > 1 else 60
cap = int(float(sys.argv[2])) if len(sys.argv) > 2 else 10**7

# %% the small-k table, five values per row
table = sweep(SweepConfig(3, 32, cap=10**7))
for row in range(6):
    chunk = table[5 * row : 5 * row + 5]
    print(f"L(m+{2 + 5 * row:>2}):", "  ".join(f"{r.L:>8}" for r in chunk))
write_csv(table, OUT / "mortality_k3_32.csv", timing=False)

# %% a wider scan
records = sweep(SweepConfig(3, k_max, cap=cap))
write_csv(records, OUT / f"mortality_k3_{k_max}.csv")
finite = [r for r in records if r.L is not None and r.L > 0]
best = max(finite, key=lambda r: r.L)
print(f"longest finite run for k <= {k_max}: L({best.k}) = {best.L}")
print("presumed infinite at cap", cap, ":", [r.k for r in records if r.L == -1])
write_svg(
    PlotSpec([Series("L(k)", [r.k for r in finite], [r.L for r in finite])], point_size=2.5,
             title=f"L(k), k <= {k_max}, cap {cap}"),
    OUT / "mortality.svg",
)
