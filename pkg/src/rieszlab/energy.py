"""Riesz s-energy evaluation for point configurations.

The energy of a configuration is the double sum over ordered pairs of
|x_i - x_j|**(-s), so each unordered pair is counted twice.  All constants
downstream inherit this convention.  Summation order is fixed (index rows,
numpy reductions), so single-threaded results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    FractalAddress,
    Segment,
    SelfSimilarSet,
    SetSpec,
    UnionSet,
    realize_address,
)

# Pairwise distance below 1e-15 * diameter counts as a true coincidence
# (infinite energy) rather than a tight minimum.
COINCIDENCE_RTOL = 1e-15
INTRINSIC_RTOL = 1e-12


class EnergyError(ValueError):
    """Invalid configuration passed to an energy evaluation."""


class CoincidentPointsError(EnergyError):
    """Two configuration points coincide, making the energy infinite."""


@dataclass(frozen=True)
class ConfigPoint:
    """One configuration point: ambient coordinates plus the intrinsic
    coordinate on its host component (fractal address or segment parameter)."""

    coordinates: np.ndarray
    host: str  # "A1" | "A2" | "whole"
    intrinsic: FractalAddress | float

    def __post_init__(self):
        c = np.asarray(self.coordinates, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coordinates", c)
        if self.host not in ("A1", "A2", "whole"):
            raise EnergyError(f"host must be 'A1', 'A2' or 'whole', got {self.host!r}")
        if not isinstance(self.intrinsic, FractalAddress):
            object.__setattr__(self, "intrinsic", float(self.intrinsic))


class Configuration:
    """Immutable N-point configuration on a set, with cached coordinates."""

    def __init__(self, points, s: float, set_spec: SetSpec | None = None):
        self.points = tuple(points)
        self.s = float(s)
        self.set_spec = set_spec
        if self.points:
            self.coords = np.array([p.coordinates for p in self.points], dtype=float)
        else:
            self.coords = np.zeros((0, 0))
        self.coords.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def N(self) -> int:
        return len(self.points)

    def host_component(self, host: str) -> SetSpec:
        """Component a point with the given host tag lives on."""
        if self.set_spec is None:
            raise EnergyError("configuration has no set attached")
        if host == "whole":
            return self.set_spec
        if isinstance(self.set_spec, UnionSet):
            return self.set_spec.component(host)
        raise EnergyError(f"host {host!r} needs a union set, got {type(self.set_spec).__name__}")

    def verify_intrinsic(self, rtol: float = INTRINSIC_RTOL) -> None:
        """Check every intrinsic coordinate re-realizes the stored point."""
        scale = max(1.0, _diameter(self.coords))
        for i, pt in enumerate(self.points):
            comp = self.host_component(pt.host)
            if isinstance(pt.intrinsic, FractalAddress):
                if not isinstance(comp, SelfSimilarSet):
                    raise EnergyError(f"point {i}: address on a non-fractal component")
                x = realize_address(comp, pt.intrinsic)
            else:
                if not isinstance(comp, Segment):
                    raise EnergyError(f"point {i}: segment parameter on a non-segment component")
                if not (0.0 <= pt.intrinsic <= 1.0):
                    raise EnergyError(f"point {i}: segment parameter {pt.intrinsic} outside [0, 1]")
                x = comp.point(pt.intrinsic)
            err = float(np.linalg.norm(x - pt.coordinates))
            if err > rtol * scale:
                raise EnergyError(
                    f"point {i}: intrinsic coordinate realizes {err:.3g} away from "
                    f"the stored coordinates (tolerance {rtol * scale:.3g})"
                )

    # -- JSON (points only; the set travels separately) --

    def to_dict(self) -> dict:
        pts = []
        for p in self.points:
            if isinstance(p.intrinsic, FractalAddress):
                intr = {"word": list(p.intrinsic.word)}
            else:
                intr = {"t": p.intrinsic}
            pts.append({"coordinates": p.coordinates.tolist(), "host": p.host, "intrinsic": intr})
        return {"s": self.s, "points": pts}

    @classmethod
    def from_dict(cls, data: dict, set_spec: SetSpec | None = None) -> "Configuration":
        pts = []
        for pd in data["points"]:
            intr = pd["intrinsic"]
            if "word" in intr:
                intrinsic = FractalAddress(tuple(intr["word"]))
            else:
                intrinsic = float(intr["t"])
            pts.append(ConfigPoint(coordinates=pd["coordinates"], host=pd["host"], intrinsic=intrinsic))
        config = cls(pts, s=float(data["s"]), set_spec=set_spec)
        if set_spec is not None:
            config.verify_intrinsic()
        return config


@dataclass(frozen=True)
class EnergyReport:
    """Total ordered-pair energy, per-point energies U_j, and the minimum
    pairwise distance.  total == per_point.sum() by construction."""

    total: float
    per_point: np.ndarray
    min_dist: float


def _diameter(coords: np.ndarray) -> float:
    if len(coords) < 2:
        return 0.0
    diff = coords[:, None, :] - coords[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())


def _pairwise_distances(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def riesz_energy(config: Configuration, s: float | None = None) -> EnergyReport:
    """Evaluate E = sum over ordered pairs of |x_i - x_j|**(-s).

    Raises CoincidentPointsError when two points are closer than
    1e-15 times the configuration diameter.  N <= 1 has zero energy.
    """
    s = config.s if s is None else float(s)
    n = config.N
    if n < 2:
        return EnergyReport(total=0.0, per_point=np.zeros(n), min_dist=np.inf)
    dist = _pairwise_distances(config.coords)
    offdiag = ~np.eye(n, dtype=bool)
    min_dist = float(dist[offdiag].min())
    diam = float(dist.max())
    if min_dist <= COINCIDENCE_RTOL * diam:
        raise CoincidentPointsError(
            f"two points coincide (min distance {min_dist:.3g} vs diameter {diam:.3g}); "
            "the energy is infinite"
        )
    inv = np.where(offdiag, dist, 1.0) ** (-s)
    per_point = np.where(offdiag, inv, 0.0).sum(axis=1)
    return EnergyReport(total=float(per_point.sum()), per_point=per_point, min_dist=min_dist)


def point_energy(config: Configuration, j: int, s: float | None = None) -> float:
    """U_j = sum over i != j of |x_j - x_i|**(-s)."""
    s = config.s if s is None else float(s)
    n = config.N
    if not (0 <= j < n):
        raise EnergyError(f"point index {j} outside 0..{n - 1}")
    if n < 2:
        return 0.0
    diff = config.coords - config.coords[j]
    dist = np.sqrt((diff**2).sum(axis=1))
    dist[j] = np.inf
    if dist.min() <= COINCIDENCE_RTOL * _diameter(config.coords):
        raise CoincidentPointsError(f"a point coincides with point {j}; the energy is infinite")
    return float((dist ** (-s)).sum())


def normalized_energy(E: float, N: int, s: float, d: float) -> float:
    """E / N**(1 + s/d), the quantity whose liminf/limsup are tracked."""
    if N < 1:
        raise EnergyError(f"N must be >= 1, got {N}")
    if d <= 0:
        raise EnergyError(f"dimension must be positive, got {d}")
    return float(E) / float(N) ** (1.0 + s / d)


def covering_radius(candidate: np.ndarray, reference: np.ndarray) -> float:
    """Max over reference points of the distance to the nearest candidate.

    The reference set is a dense finite sample of the target at a stated
    resolution; adding candidate points never increases the result.
    """
    cand = np.atleast_2d(np.asarray(candidate, dtype=float))
    ref = np.atleast_2d(np.asarray(reference, dtype=float))
    if cand.ndim != 2 or cand.shape[0] == 0:
        raise EnergyError("candidate set must be nonempty")
    if ref.ndim != 2 or ref.shape[0] == 0:
        raise EnergyError("reference set must be nonempty")
    diff = ref[:, None, :] - cand[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    return float(dist.min(axis=1).max())


def energy_gradient(config: Configuration, s: float | None = None) -> dict[int, float]:
    """Derivative of the total energy with respect to each segment parameter.

    Only segment-hosted points have a well-defined intrinsic direction;
    the result maps their indices to dE/dt, where t is the parameter on
    the host segment.  Matches central finite differences to 1e-5 relative.
    """
    s = config.s if s is None else float(s)
    n = config.N
    if n < 2:
        return {}
    dist = _pairwise_distances(config.coords)
    offdiag = ~np.eye(n, dtype=bool)
    if dist[offdiag].min() <= COINCIDENCE_RTOL * float(dist.max()):
        raise CoincidentPointsError("coincident points; the gradient is undefined")
    grads: dict[int, float] = {}
    w = np.where(offdiag, dist, 1.0) ** (-s - 2.0)
    for j, pt in enumerate(config.points):
        if isinstance(pt.intrinsic, FractalAddress):
            continue
        comp = config.host_component(pt.host)
        if not isinstance(comp, Segment):
            raise EnergyError(f"point {j}: segment parameter on a non-segment component")
        diff = config.coords[j] - config.coords  # x_j - x_i
        g_vec = -2.0 * s * (w[j][:, None] * diff)[offdiag[j]].sum(axis=0)
        grads[j] = float(np.dot(g_vec, comp.b - comp.a))
    return grads
