"""Asymptotic diagnostics over solve traces.

A trace records, for each N, the best energy found, its normalization
G(N) = E / N**(1+s/d), and how the points split across the two components
of a union.  From the tail of a trace we estimate the liminf/limsup of
G(N) (reported as finite-N estimates, never limits), predict the limiting
split fractions implied by those constants, check a rate-of-change lower
bound between consecutive N, and quantify the oscillation of the split
fraction, which is the numerical signature of non-convergence of the
empirical measures.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

SCHEMA_VERSION = 1

G_CONSISTENCY_TOL = 1e-12


class TraceError(ValueError):
    """Malformed trace or invalid diagnostic inputs."""


@dataclass(frozen=True)
class TraceRecord:
    N: int
    E_best: float
    G: float
    N1: int
    N2: int
    frac1: float
    min_dist: float
    status: str


@dataclass(frozen=True)
class AsymptoticTrace:
    """Per-N solve results for one set at one exponent s."""

    records: tuple[TraceRecord, ...]
    set_id: str
    set_kind: str  # "ifs" | "segment" | "union"
    s: float
    d: float
    component_ids: tuple[str, str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        prev = None
        for r in self.records:
            if prev is not None and r.N <= prev:
                raise TraceError(f"record N values must be strictly increasing at N={r.N}")
            prev = r.N
            expected_G = r.E_best / r.N ** (1.0 + self.s / self.d)
            if abs(r.G - expected_G) > G_CONSISTENCY_TOL * max(1.0, abs(expected_G)):
                raise TraceError(f"G inconsistent with E_best/N**(1+s/d) at N={r.N}")
            if r.N1 + r.N2 != r.N:
                raise TraceError(f"N1 + N2 != N at N={r.N}")
            if not (0.0 <= r.frac1 <= 1.0):
                raise TraceError(f"frac1 outside [0, 1] at N={r.N}")

    def __len__(self) -> int:
        return len(self.records)

    def tail(self, tail_fraction: float) -> tuple[TraceRecord, ...]:
        """Records with N >= (1 - tail_fraction) * N_max."""
        if not (0.0 < tail_fraction <= 1.0):
            raise TraceError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
        if not self.records:
            raise TraceError("empty trace has no tail")
        cutoff = (1.0 - tail_fraction) * self.records[-1].N
        return tuple(r for r in self.records if r.N >= cutoff)

    # -- CSV with a schema-versioned metadata comment line --

    def to_csv(self) -> str:
        meta = {
            "schema_version": SCHEMA_VERSION,
            "kind": "trace",
            "set_hash": self.set_id,
            "set_kind": self.set_kind,
            "s": self.s,
            "d": self.d,
        }
        if self.component_ids is not None:
            meta["component_hashes"] = list(self.component_ids)
        buf = io.StringIO()
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N", "E_best", "G", "N1", "N2", "frac1", "min_dist", "status"])
        for r in self.records:
            writer.writerow([r.N, repr(r.E_best), repr(r.G), r.N1, r.N2,
                             repr(r.frac1), repr(r.min_dist), r.status])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "AsymptoticTrace":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# "):
            raise TraceError("trace file is missing the metadata comment line")
        try:
            meta = json.loads(lines[0][2:])
        except json.JSONDecodeError as exc:
            raise TraceError(f"unreadable trace metadata: {exc}") from exc
        if meta.get("schema_version") != SCHEMA_VERSION:
            raise TraceError(
                f"trace schema version {meta.get('schema_version')!r} does not match "
                f"the supported version {SCHEMA_VERSION}"
            )
        reader = csv.DictReader(lines[1:])
        records = []
        for row in reader:
            records.append(TraceRecord(
                N=int(row["N"]), E_best=float(row["E_best"]), G=float(row["G"]),
                N1=int(row["N1"]), N2=int(row["N2"]), frac1=float(row["frac1"]),
                min_dist=float(row["min_dist"]), status=row["status"],
            ))
        comp = meta.get("component_hashes")
        return cls(
            records=tuple(records), set_id=meta["set_hash"], set_kind=meta["set_kind"],
            s=float(meta["s"]), d=float(meta["d"]),
            component_ids=tuple(comp) if comp else None,
        )


@dataclass(frozen=True)
class GammaEstimates:
    """Finite-N min/max of G over a tail window: proxies for the liminf and
    limsup of the normalized energy, labeled estimates rather than limits."""

    g_low_hat: float
    g_up_hat: float
    window: tuple[int, int]  # (smallest tail N, N_max)
    spread: float
    label: str = "finite-N estimate"


def estimate_gamma(trace: AsymptoticTrace, tail_fraction: float = 0.5) -> GammaEstimates:
    """Min/max of G over the trace tail (largest N values)."""
    if len(trace) < 4:
        raise TraceError(f"need at least 4 records to estimate, got {len(trace)}")
    tail = trace.tail(tail_fraction)
    if not tail:
        raise TraceError("tail window is empty")
    gs = [r.G for r in tail]
    lo, hi = min(gs), max(gs)
    return GammaEstimates(
        g_low_hat=lo, g_up_hat=hi, window=(tail[0].N, tail[-1].N), spread=hi - lo
    )


def _check_positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if not (value > 0 and math.isfinite(value)):
            raise TraceError(f"{name} must be positive and finite, got {value}")


def predict_alpha_star(g1: float, g2: float, s: float, d: float) -> float:
    """Split fraction minimizing b**(1+s/d)*g1 + (1-b)**(1+s/d)*g2.

    g1 is the first component's low normalized-energy constant, g2 the
    second component's constant; the result is g2**(d/s) / (g1**(d/s) +
    g2**(d/s)), strictly inside (0, 1).
    """
    _check_positive(g1=g1, g2=g2, s=s, d=d)
    if s <= d:
        raise TraceError(f"the hypersingular regime needs s > d, got s={s}, d={d}")
    r = d / s
    return g2**r / (g1**r + g2**r)


def predict_beta_star(g_up_1: float, g2: float, s: float, d: float) -> float:
    """Same formula with the first component's high constant in place of
    the low one; strictly smaller than alpha_star whenever g_up > g_low."""
    return predict_alpha_star(g_up_1, g2, s, d)


def split_objective(beta: float, g1: float, g2: float, s: float, d: float) -> float:
    """beta**(1+s/d) * g1 + (1-beta)**(1+s/d) * g2 for beta in [0, 1]."""
    if not (0.0 <= beta <= 1.0):
        raise TraceError(f"beta must be in [0, 1], got {beta}")
    e = 1.0 + s / d
    return beta**e * g1 + (1.0 - beta) ** e * g2


@dataclass(frozen=True)
class SplitPrediction:
    """alpha_star/beta_star computed from estimated constants, with the
    inputs and their provenance recorded."""

    alpha_star: float
    beta_star: float
    g1_low: float
    g1_up: float
    g2: float
    s: float
    d: float
    provenance: str = "user-supplied"

    @classmethod
    def from_estimates(cls, gamma1: GammaEstimates, g2: float, s: float, d: float,
                       provenance: str = "trace estimates") -> "SplitPrediction":
        return cls(
            alpha_star=predict_alpha_star(gamma1.g_low_hat, g2, s, d),
            beta_star=predict_beta_star(gamma1.g_up_hat, g2, s, d),
            g1_low=gamma1.g_low_hat, g1_up=gamma1.g_up_hat, g2=g2, s=s, d=d,
            provenance=provenance,
        )

    def to_dict(self) -> dict:
        return {
            "alpha_star": self.alpha_star, "beta_star": self.beta_star,
            "inputs": {"g1_low": self.g1_low, "g1_up": self.g1_up, "g2": self.g2,
                       "s": self.s, "d": self.d},
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class RateFlag:
    """Consecutive pair where G dropped faster than the rate bound allows.

    Computed G values are upper bounds on the true minimum, so a flag means
    the solve at the smaller N is suboptimal (its G too high); it is
    optimizer QA, not evidence against the bound.
    """

    N: int
    N_next: int
    G: float
    G_next: float
    bound: float


def lemma3_check(trace: AsymptoticTrace, s: float | None = None, d: float | None = None,
                 tol: float = 1e-12) -> list[RateFlag]:
    """Flag consecutive records with G(N') < (1 - (1+s/d)*kappa) * G(N) - tol,
    where kappa = (N'-N)/N."""
    s = trace.s if s is None else s
    d = trace.d if d is None else d
    flags = []
    for a, b in zip(trace.records[:-1], trace.records[1:]):
        kappa = (b.N - a.N) / a.N
        bound = (1.0 - (1.0 + s / d) * kappa) * a.G
        if b.G < bound - tol:
            flags.append(RateFlag(N=a.N, N_next=b.N, G=a.G, G_next=b.G, bound=bound))
    return flags


@dataclass(frozen=True)
class WeakStarStats:
    """Oscillation statistics of the component-1 mass frac1(N) = N1/N.

    frac1 equals the integral of the component indicator against the
    empirical measure of the solve (well defined because the components
    are separated).  A tail gap persistently above the noise-implied
    threshold is the numerical signature of non-convergence; it is
    reported as a statistic, never as a proof claim.
    """

    points: tuple[tuple[int, float], ...]
    window: tuple[int, int]
    frac_min: float
    frac_max: float
    gap: float
    rel_G_noise: float
    implied_fraction_noise: float
    threshold: float
    oscillation_signature: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "window": list(self.window), "frac_min": self.frac_min,
            "frac_max": self.frac_max, "gap": self.gap,
            "rel_G_noise": self.rel_G_noise,
            "implied_fraction_noise": self.implied_fraction_noise,
            "threshold": self.threshold,
            "oscillation_signature": self.oscillation_signature,
            "note": self.note,
        }


def weak_star_trace(trace: AsymptoticTrace, tail_fraction: float = 0.5) -> WeakStarStats:
    """frac1(N) sequence plus tail min/max/gap and an oscillation verdict.

    The noise threshold converts the median relative jitter of G between
    consecutive tail records into an equivalent split-fraction jitter via
    the curvature of the split objective at its minimum:

        delta = sqrt(2 * eps * b*(1-b) / ((1 + s/d) * (s/d))),

    with b the mean tail fraction; the signature fires when gap exceeds
    3 * delta.
    """
    if trace.set_kind != "union":
        raise TraceError(f"weak-star diagnostics need a union trace, got {trace.set_kind!r}")
    points = tuple((r.N, r.frac1) for r in trace.records)
    if len(trace) < 2:
        r = trace.records[0] if trace.records else None
        window = (r.N, r.N) if r else (0, 0)
        fr = r.frac1 if r else 0.0
        return WeakStarStats(points=points, window=window, frac_min=fr, frac_max=fr,
                             gap=0.0, rel_G_noise=0.0, implied_fraction_noise=0.0,
                             threshold=0.0, oscillation_signature=False,
                             note="insufficient data")
    tail = trace.tail(tail_fraction)
    if len(tail) < 2:
        tail = trace.records[-2:]
    fracs = [r.frac1 for r in tail]
    lo, hi = min(fracs), max(fracs)
    gap = hi - lo
    rel_dG = [abs(b.G - a.G) / max(a.G, b.G) for a, b in zip(tail[:-1], tail[1:]) if max(a.G, b.G) > 0]
    eps = float(np.median(rel_dG)) if rel_dG else 0.0
    b_hat = float(np.mean(fracs))
    sd = trace.s / trace.d
    delta = math.sqrt(max(0.0, 2.0 * eps * b_hat * (1.0 - b_hat) / ((1.0 + sd) * sd)))
    threshold = 3.0 * delta
    return WeakStarStats(
        points=points, window=(tail[0].N, tail[-1].N), frac_min=lo, frac_max=hi, gap=gap,
        rel_G_noise=eps, implied_fraction_noise=delta, threshold=threshold,
        oscillation_signature=gap > threshold,
    )


def trace_summary(trace: AsymptoticTrace, tail_fraction: float = 0.5) -> dict:
    """JSON-ready diagnostics for one trace: gamma estimates (when the trace
    is long enough), rate-check flags, and weak-star stats for unions."""
    out: dict = {}
    if len(trace) >= 4:
        gam = estimate_gamma(trace, tail_fraction)
        out["gamma"] = {
            "g_low_hat": gam.g_low_hat, "g_up_hat": gam.g_up_hat,
            "window": list(gam.window), "spread": gam.spread, "label": gam.label,
        }
    out["lemma3_flags"] = [
        {"N": f.N, "N_next": f.N_next, "G": f.G, "G_next": f.G_next, "bound": f.bound}
        for f in lemma3_check(trace)
    ]
    if trace.set_kind == "union":
        out["weak_star"] = weak_star_trace(trace, tail_fraction).to_dict()
    return out


def split_upper_bound(E1: float, E2: float, M1: int, M2: int,
                      sep_lower: float, s: float) -> float:
    """E1 + E2 + 2*M1*M2*sep**(-s): upper bound on the assembled energy of
    an (M1, M2) split whose cross distances are at least sep_lower."""
    if E1 < 0 or E2 < 0 or M1 < 0 or M2 < 0:
        raise TraceError("energies and counts must be nonnegative")
    if not (sep_lower > 0):
        raise TraceError(f"separation must be positive, got {sep_lower}")
    return E1 + E2 + 2.0 * M1 * M2 * sep_lower ** (-s)


def split_upper_bound_coarse(E1: float, E2: float, N: int,
                             sep_lower: float, s: float) -> float:
    """Coarser variant bounding the cross term by N**2 * sep**(-s); always
    at least split_upper_bound for N = M1 + M2 since N**2 >= 2*M1*M2."""
    if E1 < 0 or E2 < 0 or N < 0:
        raise TraceError("energies and counts must be nonnegative")
    if not (sep_lower > 0):
        raise TraceError(f"separation must be positive, got {sep_lower}")
    return E1 + E2 + float(N) ** 2 * sep_lower ** (-s)
