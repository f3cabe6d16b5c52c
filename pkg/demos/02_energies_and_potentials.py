"""Energy evaluation basics: totals, per-point potentials, covering radius,
and the segment-parameter gradient against finite differences.

The energy is the double sum over ordered pairs of |x_i - x_j|**(-s), so
every unordered pair contributes twice.
"""

import numpy as np

from rieszlab import (
    ConfigPoint,
    Configuration,
    Segment,
    covering_radius,
    energy_gradient,
    normalized_energy,
    point_energy,
    riesz_energy,
)

seg = Segment(a=np.array([0.0]), b=np.array([1.0]))
cfg = Configuration(
    [ConfigPoint(seg.point(t), "whole", t) for t in (0.0, 0.5, 1.0)],
    s=1.0, set_spec=seg,
)

rep = riesz_energy(cfg)
print("three points {0, 1/2, 1} at s=1:")
print("  total energy:", rep.total)
print("  per-point potentials:", rep.per_point)
print("  middle point alone:", point_energy(cfg, 1))
print("  min pairwise distance:", rep.min_dist)
print("  normalized G = E / N^(1+s/d):", normalized_energy(rep.total, 3, 1, 1))

# Covering radius: how far the worst reference point is from the candidates.
reference = seg.point(np.linspace(0, 1, 101))
for candidate_ts in [(0.5,), (0.0, 1.0), (0.0, 0.5, 1.0)]:
    cand = seg.point(np.array(candidate_ts))
    print(f"covering radius of {candidate_ts}: {covering_radius(cand, reference):.3f}")

# The gradient with respect to a segment parameter matches central
# finite differences.
cfg2 = Configuration(
    [ConfigPoint(seg.point(t), "whole", t) for t in (0.0, 0.4, 1.0)],
    s=2.0, set_spec=seg,
)
grads = energy_gradient(cfg2)


def energy_of(ts):
    pts = seg.point(np.asarray(ts))
    d = np.abs(pts[:, None, 0] - pts[None, :, 0])
    w = np.where(np.eye(3, dtype=bool), 1.0, d) ** -2.0
    return float(np.where(np.eye(3, dtype=bool), 0.0, w).sum())


h = 1e-6
fd = (energy_of([0, 0.4 + h, 1]) - energy_of([0, 0.4 - h, 1])) / (2 * h)
print("\ngradient at the off-center middle point (s=2):")
print(f"  analytic {grads[1]:+.8f}   finite differences {fd:+.8f}")
