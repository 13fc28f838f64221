"""Sequences from the nested-recurrence families, with scatter data and SVGs.

Run from the repository root:

    python demos/01_sequences_and_figures.py

Writes CSV and SVG files to demos/output/.
"""

import math
from pathlib import Path

import numpy as np

from metafib import compile_plan, make_spec, pretty, run
from metafib.cli import write_terms
from metafib.families import fibonacci
from metafib.surd import Surd
from metafib.svgplot import PlotSpec, Series, write_svg

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def terms(preset, cap):
    hist, outcome = run(compile_plan(make_spec(preset)), cap=cap)
    print(f"{preset:>10}: {outcome.status.value} after {outcome.final_length} terms")
    return np.asarray(hist.values(), dtype=np.int64)


# %% Hofstadter's Q-sequence: the classic fan-shaped scatter
q = terms("q", 10**4)
print("Q(1..10) =", q[:10].tolist())
print(pretty(make_spec("q")))
write_terms(q, OUT / "q_terms.csv")
write_svg(PlotSpec([Series("Q", np.arange(1, len(q) + 1), q)], title="Q(n)"), OUT / "q.svg")

# %% Q_{4,2} and Q_{5,2}: the same rule with longer ceil(n/2) prefixes
for preset in ("qdl:4,2", "qdl:5,2"):
    v = terms(preset, 10**4)
    tag = preset.replace(":", "_").replace(",", "_")
    write_svg(PlotSpec([Series(preset, np.arange(1, len(v) + 1), v)], title=preset), OUT / f"{tag}.svg")

# %% c_{2^t}(n) - n/2 over 2^11 <= n <= 2^13, t = 0..7
lo, hi = 2**11, 2**13
series = []
for t in range(8):
    c = terms(f"conway:{2**t}", hi)
    n = np.arange(lo, hi + 1)
    series.append(Series(f"c_{2**t}", n, c[lo - 1 : hi] - n / 2))
write_svg(PlotSpec(series, title="c_i(n) - n/2", point_size=0.6), OUT / "conway_deviations.svg")

# %% a_{i,j}(n) - floor((n+2)/(1+phi)) over F(20) <= n <= F(22)
lo, hi = fibonacci(20), fibonacci(22)
n = np.arange(lo, hi + 1)
one_plus_phi = Surd.phi() + 1
base = np.array([math.floor((int(m) + 2) / one_plus_phi) for m in n], dtype=np.int64)
series = []
for i in range(1, 9):
    for j in (1, 2):
        a = terms(f"aij:{i},{j}", hi)
        series.append(Series(f"a_{i},{j}", n, a[lo - 1 : hi] - base, stride=4))
write_svg(PlotSpec(series, title="a_ij(n) - floor((n+2)/(1+phi))", point_size=0.6), OUT / "aij_deviations.svg")
