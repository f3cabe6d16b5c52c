"""Sweep the union preset and watch the point split between components.

For each N the solver enumerates candidate splits M1 + M2 = N, optimizes
the parts independently (cached), assembles, and refines jointly with
cross-component moves.  The fraction N1/N is the trace the weak-star
diagnostics run on.  Results land in demos/out/.
"""

import pathlib
import time

from rieszlab import EnergyCache, SearchParams, set_from_dict, sweep
from rieszlab.presets import preset_dict

out_dir = pathlib.Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

union = set_from_dict(preset_dict("example-union"))
cache = EnergyCache(out_dir / "demo_cache.json")
params = SearchParams(restarts=8, seed=7)

t0 = time.time()
trace = sweep(union, 3.0, range(2, 17), params, cache=cache)
cache.save()
print(f"swept N=2..16 at s=3 in {time.time() - t0:.1f}s\n")

print("  N      E_best          G     N1  N2  frac1")
for r in trace.records:
    print(f"{r.N:3d} {r.E_best:12.5g} {r.G:10.6f} {r.N1:4d} {r.N2:3d} {r.frac1:6.3f}")

csv_path = out_dir / "union_trace.csv"
csv_path.write_text(trace.to_csv())
print(f"\ntrace written to {csv_path}")
print("rerunning this script reuses the cache and solves nothing new")
