"""Growth of the noise S(n) = H_k(n) - n/2 from one generation to the next.

    python demos/03_generation_stats.py

Generations are doubling windows (1000*2^(t-1), 1000*2^t].  The last default
window is cut off at 1.1*10^7 and only covers a third of a doubling, so the
table also shows the scheme that stops at 8,192,000.
"""

from pathlib import Path

from metafib import GenerationScheme, compile_plan, generation_stats, make_spec, run
from metafib.genstats import full_generations, write_csv

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

default = GenerationScheme.geometric(1000, 11_000_000)
columns = {}
for k in (114, 146):
    hist, outcome = run(compile_plan(make_spec(f"hk:{k}")), cap=11_000_000)
    stats = generation_stats(hist, default)
    write_csv(stats, OUT / f"stats_h{k}.csv")
    for note in stats.notes:
        print(f"H_{k}: {note}")
    columns[k] = dict(stats.alpha)
    full = generation_stats(hist, full_generations(default))
    write_csv(full, OUT / f"stats_h{k}_full.csv")

print(f"{'t':>3} {'alpha H_114':>12} {'alpha H_146':>12}")
for t in sorted(columns[114]):
    print(f"{t:>3} {columns[114][t]:>12.4f} {columns[146].get(t, float('nan')):>12.4f}")
