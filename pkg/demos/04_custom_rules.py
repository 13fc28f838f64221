"""Writing your own recurrences in the text syntax.

    python demos/04_custom_rules.py
"""

from metafib import ReferenceEvaluator, SpecError, compile_plan, load, pretty, run

# %% Hofstadter-Huber Q_{r,s} with r=1, s=4 and four initial ones
spec = load("Q(n)=Q(n-Q(n-1))+Q(n-Q(n-4)); init list 1,1,1,1; start 4")
print(pretty(spec))
hist, outcome = run(compile_plan(spec), cap=10**6)
print(outcome)

# %% H with a golden-ratio prefix; floor/ceil of phi expressions are exact
spec = load("H(n)=H(n-H(n-2))+H(n-H(n-3)); init floor((n+2)/(1+phi)); start 40")
hist, outcome = run(compile_plan(spec), cap=10**7)
print(f"L = {outcome.final_length}, died at n={outcome.died_at} reading index {outcome.offending_argument}")

# %% the compiled program next to the slow reference interpreter
plan = compile_plan(spec)
print(plan.listing()[0])
ref = ReferenceEvaluator(spec)
assert ref.prefix(2000) == list(hist.values()[:2000])

# %% diagnostics
for bad in ["A(n)=A(n-3); init list 1,1; start 2", "A(n)=A(n-A(n-1); init list 1; start 1"]:
    try:
        load(bad)
    except SpecError as exc:
        print(f"{bad!r}: {exc}")
