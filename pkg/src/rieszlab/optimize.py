"""Minimal-energy configuration search.

Three entry points:

  minimize_exhaustive  exact minimum over all N-subsets of a finite candidate
                       pool (fractal addresses at a fixed depth, or segment
                       grid nodes); refuses when the subset count exceeds
                       10**7.
  minimize_local_search
                       best-of-restarts annealed single-point-move search
                       (see _anneal) with continuous gradient refinement on
                       segments; seed-deterministic.
  minimize_union       split-enumeration driver: optimize the two parts
                       independently for each candidate split M1 + M2 = N
                       (warm-started from the cache), assemble, then refine
                       jointly with cross-component moves.

Every computed energy is an upper bound on the true minimum; N1 follows the
min-over-near-ties convention: among retained configurations within tie_tol
relative energy of the best found, the smallest count on the first component
is reported.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._anneal import anneal
from .asymptotics import AsymptoticTrace, TraceRecord
from .cache import EnergyCache, cache_key
from .energy import ConfigPoint, Configuration, EnergyReport, riesz_energy
from .geometry import (
    FractalAddress,
    Segment,
    SelfSimilarSet,
    SetSpec,
    UnionSet,
    all_addresses,
    realize_address,
    set_hash,
    set_to_dict,
)

MAX_EXHAUSTIVE_SUBSETS = 10**7
ALL_SPLITS_MAX_N = 24

# Joint refinement schedule used on assembled union candidates: the start is
# already near-optimal, so the budget is shorter and the temperature lower
# than the full-search defaults.
REFINE_LEVELS = 10
REFINE_STEPS_PER_N = 60
REFINE_STREAMS = 2
REFINE_T0_FACTOR = 0.02

_SEED_MASK = 0x7FFFFFFF


class SolverError(RuntimeError):
    """Search could not run on the given instance."""


class InfeasibleError(SolverError):
    """N exceeds what the candidate pool or depth can host."""


class PoolTooLargeError(SolverError):
    """Exhaustive enumeration refused; the subset count is reported."""


@dataclass(frozen=True)
class SearchParams:
    """Knobs for the annealed search.

    depth "auto" resolves per fractal component to
    max(2, ceil(log_{1/L}(4 * N**(1/d)))), which keeps the address-grid
    resolution below a quarter of the expected nearest-neighbor spacing.
    segment_grid restricts segment moves to an n-node grid (used to compare
    like-for-like against the exhaustive oracle); continuous gradient moves
    are the default.
    """

    depth: int | str = "auto"
    restarts: int = 8
    t0: float = 0.0  # <= 0 selects 0.1 * (mean per-point energy of the start)
    cooling: float = 0.95
    steps_per_level: int | None = None  # None selects 200 * N
    levels: int = 20
    seed: int = 0
    tie_tol: float = 1e-9
    segment_grid: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise SolverError(f"restarts must be >= 1, got {self.restarts}")
        if not (0.0 < self.cooling < 1.0):
            raise SolverError(f"cooling factor must be in (0, 1), got {self.cooling}")
        if self.depth != "auto":
            if not isinstance(self.depth, int) or self.depth < 1:
                raise SolverError(f"depth must be 'auto' or an integer >= 1, got {self.depth!r}")
        if self.segment_grid is not None and self.segment_grid < 2:
            raise SolverError("segment_grid needs at least 2 nodes")
        if self.seed < 0:
            raise SolverError(f"seed must be nonnegative, got {self.seed}")


@dataclass(frozen=True)
class SolveResult:
    """Best configuration found, with the component split bookkeeping.

    For a solo set the whole set counts as the first component, so N1 = N.
    status is "oracle-exact" only when the result is a true minimum over
    the stated pool.
    """

    config: Configuration
    energy: EnergyReport
    N1: int
    N2: int
    status: str
    evaluations: int


def auto_depth(fractal: SelfSimilarSet, N: int) -> int:
    """Address depth for an N-point search on this fractal."""
    d = fractal.dimension
    target = 4.0 * max(1, N) ** (1.0 / d)
    return max(2, math.ceil(math.log(target) / math.log(1.0 / fractal.scale)))


# ---------------------------------------------------------------------------
# Kernel plumbing: component tables and state arrays.
# ---------------------------------------------------------------------------


@dataclass
class _Component:
    spec: SetSpec
    kind: int  # 0 fractal, 1 segment, 2 grid segment
    depth: int = 0
    grid: int = 0


def _set_scale(spec: SetSpec) -> float:
    if isinstance(spec, UnionSet):
        return spec.sep_lower + spec.diam_upper_1 + spec.diam_upper_2
    if isinstance(spec, Segment):
        return spec.length
    return spec.diameter_upper


def _components(set_spec: SetSpec, N: int, params: SearchParams,
                warm_configs=()) -> list[_Component]:
    specs = [set_spec.A1, set_spec.A2] if isinstance(set_spec, UnionSet) else [set_spec]
    comps = []
    for ci, comp in enumerate(specs):
        if isinstance(comp, SelfSimilarSet):
            depth = params.depth if isinstance(params.depth, int) else auto_depth(comp, N)
            for cfg in warm_configs:
                for pt in cfg.points:
                    if isinstance(pt.intrinsic, FractalAddress) and _host_index(pt.host) == ci:
                        depth = max(depth, len(pt.intrinsic))
            if comp.K**depth < N:
                raise InfeasibleError(
                    f"depth {depth} offers only {comp.K**depth} distinct addresses for "
                    f"N={N}; increase the depth"
                )
            comps.append(_Component(spec=comp, kind=0, depth=depth))
        elif params.segment_grid is not None:
            if params.segment_grid < N:
                raise InfeasibleError(
                    f"segment grid of {params.segment_grid} nodes cannot host N={N}"
                )
            comps.append(_Component(spec=comp, kind=2, grid=params.segment_grid))
        else:
            comps.append(_Component(spec=comp, kind=1))
    return comps


def _host_index(host: str) -> int:
    return 1 if host == "A2" else 0


def _tables(comps: list[_Component], p: int) -> dict:
    kmax = max([c.spec.K for c in comps if c.kind == 0], default=1)
    m_max = max([c.depth for c in comps if c.kind == 0], default=1)
    t = {
        "comp_kind": np.full(2, -1, dtype=np.int64),
        "KK": np.ones(2, dtype=np.int64),
        "mm": np.ones(2, dtype=np.int64),
        "lin": np.zeros((2, kmax, p, p)),
        "off": np.zeros((2, kmax, p)),
        "anchors": np.zeros((2, p)),
        "seg_a": np.zeros((2, p)),
        "seg_d": np.zeros((2, p)),
        "grid_n": np.full(2, 2, dtype=np.int64),
    }
    for ci, comp in enumerate(comps):
        t["comp_kind"][ci] = comp.kind
        if comp.kind == 0:
            f = comp.spec
            t["KK"][ci] = f.K
            t["mm"][ci] = comp.depth
            for k, m in enumerate(f.maps):
                t["lin"][ci, k] = m.scale * m.rotation
                t["off"][ci, k] = m.translation
            t["anchors"][ci] = f.anchor()
        else:
            seg = comp.spec
            t["seg_a"][ci] = seg.a
            t["seg_d"][ci] = seg.b - seg.a
            if comp.kind == 2:
                t["grid_n"][ci] = comp.grid
    return t, m_max


def _draw_intrinsic(rng, comp: _Component):
    if comp.kind == 0:
        word = tuple(int(w) for w in rng.integers(1, comp.spec.K + 1, size=comp.depth))
        fa = FractalAddress(word)
        return fa, realize_address(comp.spec, fa)
    if comp.kind == 2:
        node = int(rng.integers(comp.grid))
        tv = node / (comp.grid - 1)
    else:
        tv = float(rng.random())
    return tv, comp.spec.point(tv)


def _random_entries(rng, comps, N, coll_tol, hosts=None):
    entries, coords = [], []
    for j in range(N):
        if hosts is not None:
            h = hosts[j]
        elif len(comps) > 1:
            h = int(rng.integers(len(comps)))
        else:
            h = 0
        for _ in range(500):
            intr, x = _draw_intrinsic(rng, comps[h])
            if all(np.linalg.norm(x - y) > coll_tol for y in coords):
                break
        else:
            raise InfeasibleError(f"could not place {N} distinct points (component {h})")
        entries.append((h, intr))
        coords.append(x)
    return entries


def _entries_from_config(config: Configuration, comps) -> list:
    entries = []
    for pt in config.points:
        h = _host_index(pt.host) if len(comps) > 1 else 0
        intr = pt.intrinsic
        if isinstance(intr, FractalAddress):
            comp = comps[h]
            if len(intr) < comp.depth:
                # Appending the first map's symbol keeps the point fixed
                # (the anchor is that map's fixed point).
                intr = FractalAddress(intr.word + (1,) * (comp.depth - len(intr)))
        entries.append((h, intr))
    return entries


def _state_arrays(entries, comps, m_max, p):
    n = len(entries)
    coords = np.zeros((n, p))
    host = np.zeros(n, dtype=np.int64)
    addr = np.zeros((n, m_max), dtype=np.int64)
    tpar = np.zeros(n)
    for j, (h, intr) in enumerate(entries):
        comp = comps[h]
        host[j] = h
        if comp.kind == 0:
            word = intr.word
            addr[j, : len(word)] = np.asarray(word, dtype=np.int64) - 1
            coords[j] = realize_address(comp.spec, intr)
        else:
            tv = float(intr)
            if comp.kind == 2:
                node = round(tv * (comp.grid - 1))
                tv = node / (comp.grid - 1)
            tpar[j] = tv
            coords[j] = comp.spec.point(tv)
    return coords, host, addr, tpar


def _config_from_state(set_spec, comps, coords, host, addr, tpar, s) -> Configuration:
    is_union = isinstance(set_spec, UnionSet)
    pts = []
    for j in range(len(host)):
        h = int(host[j])
        comp = comps[h]
        tag = ("A1", "A2")[h] if is_union else "whole"
        if comp.kind == 0:
            fa = FractalAddress(tuple(int(x) + 1 for x in addr[j, : comp.depth]))
            pts.append(ConfigPoint(realize_address(comp.spec, fa), tag, fa))
        else:
            tv = float(tpar[j])
            pts.append(ConfigPoint(comp.spec.point(tv), tag, tv))
    return Configuration(pts, s=s, set_spec=set_spec)


def _run_anneal(entries, set_spec, comps, tables, m_max, s, t0, cooling,
                steps_per_level, levels, coll_tol, seed):
    p = set_spec.ambient_dim
    coords, host, addr, tpar = _state_arrays(entries, comps, m_max, p)
    cross = len(comps) > 1
    out = anneal(
        coords, host, addr, tpar,
        tables["comp_kind"], tables["KK"], tables["mm"], tables["lin"],
        tables["off"], tables["anchors"], tables["seg_a"], tables["seg_d"],
        tables["grid_n"],
        float(s), float(t0), float(cooling), int(steps_per_level), int(levels),
        cross, float(coll_tol), int(seed) & _SEED_MASK,
    )
    b_coords, b_host, b_addr, b_tpar, _best_e, evals = out
    cfg = _config_from_state(set_spec, comps, b_coords, b_host, b_addr, b_tpar, s)
    return cfg, int(evals)


def _trivial_result(set_spec, N, s, on_second=False) -> SolveResult:
    """N <= 1 configurations have zero energy by convention."""
    pts = []
    if N == 1:
        if isinstance(set_spec, UnionSet):
            # Zero-energy ties are resolved toward the smallest count on the
            # first component, so the single point sits on A2.
            comp, tag = set_spec.A2, "A2"
        else:
            comp, tag = set_spec, "whole"
        if isinstance(comp, SelfSimilarSet):
            intr = FractalAddress(())
            pts.append(ConfigPoint(comp.anchor(), tag, intr))
        else:
            pts.append(ConfigPoint(comp.point(0.5), tag, 0.5))
    cfg = Configuration(pts, s=s, set_spec=set_spec)
    n1 = len([p for p in pts if p.host != "A2"])
    return SolveResult(config=cfg, energy=riesz_energy(cfg, s), N1=n1, N2=N - n1,
                       status="oracle-exact", evaluations=0)


def _count_a1(config: Configuration) -> int:
    return sum(1 for p in config.points if p.host != "A2")


def _state_is_collision_free(coords: np.ndarray, coll_tol: float) -> bool:
    n = len(coords)
    if n < 2:
        return True
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    return float(dist[~np.eye(n, dtype=bool)].min()) > coll_tol


def _pick_best(candidates, tie_tol):
    """Best (energy, config, evals) plus the min A1-count over near-ties."""
    best_e = min(c[0] for c in candidates)
    best = min(candidates, key=lambda c: c[0])
    n1 = min(_count_a1(c[1]) for c in candidates if c[0] <= best_e * (1.0 + tie_tol))
    return best, n1


# ---------------------------------------------------------------------------
# Exhaustive oracle.
# ---------------------------------------------------------------------------


def _pool_size(set_spec, depth, grid) -> int:
    if isinstance(set_spec, SelfSimilarSet):
        if depth is None:
            raise SolverError("exhaustive search on a fractal needs an explicit depth")
        if depth < 1:
            raise SolverError(f"depth must be >= 1, got {depth}")
        return set_spec.K**depth
    if isinstance(set_spec, Segment):
        if grid is None:
            raise SolverError("exhaustive search on a segment needs an explicit grid")
        if grid < 2:
            raise SolverError("segment grid needs at least 2 nodes")
        return grid
    raise SolverError("exhaustive search applies to a fractal or a segment, not a union")


def _candidate_pool(set_spec, depth, grid):
    if isinstance(set_spec, SelfSimilarSet):
        return set_spec.all_points(depth), list(all_addresses(set_spec, depth))
    ts = np.linspace(0.0, 1.0, grid)
    return set_spec.point(ts), [float(t) for t in ts]


def minimize_exhaustive(set_spec: SetSpec, N: int, s: float,
                        depth: int | None = None, grid: int | None = None) -> SolveResult:
    """Exact minimum over all N-subsets of the candidate pool.

    The pool is every depth-m address of a fractal or every node of a
    segment grid.  Deterministic; refuses when C(pool, N) > 10**7.
    """
    if N <= 1:
        return _trivial_result(set_spec, N, s)
    pool = _pool_size(set_spec, depth, grid)
    if pool < N:
        raise InfeasibleError(f"pool of {pool} candidate points cannot host N={N}")
    n_subsets = math.comb(pool, N)
    if n_subsets > MAX_EXHAUSTIVE_SUBSETS:
        raise PoolTooLargeError(
            f"C({pool}, {N}) = {n_subsets} subsets exceeds the exhaustive limit "
            f"of {MAX_EXHAUSTIVE_SUBSETS}"
        )
    pts, intrinsics = _candidate_pool(set_spec, depth, grid)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    weights = np.where(np.eye(pool, dtype=bool), 1.0, dist) ** (-s)
    np.fill_diagonal(weights, 0.0)

    best_e = np.inf
    best_idx = None
    chunk = 4096
    subset_iter = itertools.combinations(range(pool), N)
    while True:
        block = list(itertools.islice(subset_iter, chunk))
        if not block:
            break
        idx = np.asarray(block, dtype=np.intp)
        energies = weights[idx[:, :, None], idx[:, None, :]].sum(axis=(1, 2))
        k = int(np.argmin(energies))
        if energies[k] < best_e:
            best_e = float(energies[k])
            best_idx = block[k]

    host = "whole"
    cfg = Configuration(
        [ConfigPoint(pts[i], host, intrinsics[i]) for i in best_idx],
        s=s, set_spec=set_spec,
    )
    return SolveResult(config=cfg, energy=riesz_energy(cfg, s), N1=N, N2=0,
                       status="oracle-exact", evaluations=n_subsets)


# ---------------------------------------------------------------------------
# Annealed local search.
# ---------------------------------------------------------------------------


def minimize_local_search(set_spec: SetSpec, N: int, s: float,
                          params: SearchParams | None = None,
                          initial_configs=()) -> SolveResult:
    """Best-of-restarts annealed search; extra starts are annealed too.

    The result never exceeds the energy of the best initial configuration:
    every start (random or supplied) is itself retained as a candidate.
    """
    params = params or SearchParams()
    if N <= 1:
        return _trivial_result(set_spec, N, s)
    warm = tuple(initial_configs)
    comps = _components(set_spec, N, params, warm_configs=warm)
    tables, m_max = _tables(comps, set_spec.ambient_dim)
    coll_tol = 1e-12 * _set_scale(set_spec)
    steps = params.steps_per_level if params.steps_per_level is not None else 200 * N

    starts = []
    for r in range(params.restarts):
        rng = np.random.default_rng(params.seed + r)
        starts.append((_random_entries(rng, comps, N, coll_tol), params.seed + r))
    for k, cfg in enumerate(warm):
        starts.append((_entries_from_config(cfg, comps), params.seed + params.restarts + k))

    candidates = []
    evals = 0
    for entries, stream_seed in starts:
        state = _state_arrays(entries, comps, m_max, set_spec.ambient_dim)
        if not _state_is_collision_free(state[0], coll_tol):
            continue  # degenerate warm start (e.g. grid snapping collision)
        start_cfg = _config_from_state(set_spec, comps, *state, s)
        candidates.append((riesz_energy(start_cfg, s).total, start_cfg, 1))
        cfg, ev = _run_anneal(entries, set_spec, comps, tables, m_max, s,
                              params.t0, params.cooling, steps, params.levels,
                              coll_tol, stream_seed)
        candidates.append((riesz_energy(cfg, s).total, cfg, ev))
        evals += ev + 2

    if not candidates:
        raise InfeasibleError("no feasible start configuration was found")
    (best_e, best_cfg, _), n1 = _pick_best(candidates, params.tie_tol)
    return SolveResult(config=best_cfg, energy=riesz_energy(best_cfg, s),
                       N1=n1, N2=N - n1, status="heuristic", evaluations=evals)


# ---------------------------------------------------------------------------
# Union driver.
# ---------------------------------------------------------------------------


def _solve_part(comp, comp_dict, M, s, params, cache, refresh):
    """Single-component solve with cache reuse and optional re-annealing."""
    if M <= 1:
        res = _trivial_result(comp, M, s)
        return res.config, 0.0
    key = cache_key(comp_dict, s, M)
    entry = cache.get(comp_dict, s, M)
    if entry is not None and (not refresh or key in cache.session_refreshed):
        return Configuration.from_dict(entry["configuration"], comp), float(entry["energy"])
    warm = []
    if entry is not None:
        warm.append(Configuration.from_dict(entry["configuration"], comp))
    res = minimize_local_search(comp, M, s, params, initial_configs=warm)
    cache.update(comp_dict, s, M, res.energy.total, res.config.to_dict(), res.status, res.N1)
    cache.session_refreshed.add(key)
    return res.config, res.energy.total


def _assemble(union, cfg1, cfg2, s) -> Configuration:
    pts = [ConfigPoint(p.coordinates, "A1", p.intrinsic) for p in cfg1.points]
    pts += [ConfigPoint(p.coordinates, "A2", p.intrinsic) for p in cfg2.points]
    return Configuration(pts, s=s, set_spec=union)


def _split_candidates(N, alpha_hint, warm_n1):
    if alpha_hint is not None:
        center = round(alpha_hint * N)
    elif N <= ALL_SPLITS_MAX_N:
        return list(range(N + 1))
    elif warm_n1 is not None:
        center = warm_n1
    else:
        center = round(N / 2)
    w = max(3, math.ceil(0.15 * N))
    return list(range(max(0, center - w), min(N, center + w) + 1))


def minimize_union(union: UnionSet, N: int, s: float,
                   params: SearchParams | None = None,
                   alpha_hint: float | None = None,
                   cache: EnergyCache | None = None,
                   warm=(), refresh_parts: bool = False) -> SolveResult:
    """Split-enumeration search on a validated union.

    Tries every candidate split M1 (all of them for N <= 24 without a hint,
    otherwise a window around the hinted or warm-start split), assembles the
    independently optimized parts, refines jointly with cross-component
    moves, and additionally evaluates every split assembled purely from
    cached parts so the cached union energy never exceeds a cached split
    bound.
    """
    params = params or SearchParams()
    if N <= 1:
        return _trivial_result(union, N, s)
    cache = cache if cache is not None else EnergyCache(None)
    a1_dict, a2_dict = set_to_dict(union.A1), set_to_dict(union.A2)

    warm = tuple(warm)
    warm_n1 = _count_a1(warm[0]) if warm else None
    splits = _split_candidates(N, alpha_hint, warm_n1)

    comps = _components(union, N, params, warm_configs=warm)
    tables, m_max = _tables(comps, union.ambient_dim)
    coll_tol = 1e-12 * _set_scale(union)

    candidates = []
    evals = 0

    def refine(cfg: Configuration, base_seed: int):
        nonlocal evals
        e_start = riesz_energy(cfg, s).total
        candidates.append((e_start, cfg, 1))
        entries = _entries_from_config(cfg, comps)
        t0 = REFINE_T0_FACTOR * e_start / N
        for k in range(REFINE_STREAMS):
            out_cfg, ev = _run_anneal(entries, union, comps, tables, m_max, s,
                                      t0, params.cooling, REFINE_STEPS_PER_N * N,
                                      REFINE_LEVELS, coll_tol, base_seed + k)
            candidates.append((riesz_energy(out_cfg, s).total, out_cfg, ev))
            evals += ev + 1

    for m1 in splits:
        m2 = N - m1
        try:
            cfg1, _ = _solve_part(union.A1, a1_dict, m1, s, params, cache, refresh_parts)
            cfg2, _ = _solve_part(union.A2, a2_dict, m2, s, params, cache, refresh_parts)
        except InfeasibleError:
            continue  # this split exceeds a component's pool; others may fit
        refine(_assemble(union, cfg1, cfg2, s), params.seed + 7919 * N + 101 * m1)

    # Warm starts (previous sweep step, cached best) get the full schedule.
    steps = params.steps_per_level if params.steps_per_level is not None else 200 * N
    for k, cfg in enumerate(warm):
        e_start = riesz_energy(cfg, s).total
        candidates.append((e_start, cfg, 1))
        entries = _entries_from_config(cfg, comps)
        out_cfg, ev = _run_anneal(entries, union, comps, tables, m_max, s,
                                  params.t0, params.cooling, steps, params.levels,
                                  coll_tol, params.seed + 104729 + k)
        candidates.append((riesz_energy(out_cfg, s).total, out_cfg, ev))
        evals += ev + 2

    # Every split assembled purely from cached parts, evaluated exactly.
    for m1 in range(N + 1):
        if m1 in splits:
            continue
        m2 = N - m1
        e1 = cache.get(a1_dict, s, m1)
        e2 = cache.get(a2_dict, s, m2)
        if (m1 > 1 and e1 is None) or (m2 > 1 and e2 is None):
            continue
        cfg1 = (Configuration.from_dict(e1["configuration"], union.A1) if m1 > 1
                else _trivial_result(union.A1, m1, s).config)
        cfg2 = (Configuration.from_dict(e2["configuration"], union.A2) if m2 > 1
                else _trivial_result(union.A2, m2, s).config)
        asm = _assemble(union, cfg1, cfg2, s)
        candidates.append((riesz_energy(asm, s).total, asm, 1))
        evals += 1

    if not candidates:
        raise InfeasibleError(f"no feasible split of N={N} across the union components")
    (best_e, best_cfg, _), n1 = _pick_best(candidates, params.tie_tol)
    return SolveResult(config=best_cfg, energy=riesz_energy(best_cfg, s),
                       N1=n1, N2=N - n1, status="heuristic", evaluations=evals)


# ---------------------------------------------------------------------------
# Sweeps over N with warm starts and caching.
# ---------------------------------------------------------------------------


class SweepError(SolverError):
    """A per-N solve failed; carries the rows completed so far."""

    def __init__(self, message, records, failed_N, cause):
        super().__init__(message)
        self.records = records
        self.failed_N = failed_N
        self.cause = cause


def _greedy_extend(config: Configuration, n_target: int, set_spec, s,
                   params: SearchParams) -> Configuration:
    """Insert points one at a time, each at the best of 64 random draws
    (smallest point energy against the existing configuration)."""
    comps = _components(set_spec, n_target, params, warm_configs=(config,))
    coll_tol = 1e-12 * _set_scale(set_spec)
    is_union = isinstance(set_spec, UnionSet)
    pts = list(config.points)
    while len(pts) < n_target:
        rng = np.random.default_rng([params.seed & _SEED_MASK, n_target, len(pts)])
        coords = np.array([p.coordinates for p in pts])
        best = None
        for _ in range(64):
            h = int(rng.integers(len(comps))) if len(comps) > 1 else 0
            intr, x = _draw_intrinsic(rng, comps[h])
            dist = np.sqrt(((coords - x) ** 2).sum(axis=1))
            if dist.min() <= coll_tol:
                continue
            u = float((dist ** (-s)).sum())
            if best is None or u < best[0]:
                tag = ("A1", "A2")[h] if is_union else "whole"
                best = (u, ConfigPoint(x, tag, intr))
        if best is None:
            raise InfeasibleError("greedy insertion found no collision-free candidate")
        pts.append(best[1])
    return Configuration(pts, s=s, set_spec=set_spec)


def sweep(set_spec: SetSpec, s: float, N_range, params: SearchParams | None = None,
          cache: EnergyCache | None = None, alpha_hint: float | None = None,
          force: bool = False, on_record=None) -> AsymptoticTrace:
    """Solve each N in ascending order, warm-starting from the previous best
    plus one greedily inserted point; consult and update the cache.

    Cached N values are reused without solving unless force is set.  A per-N
    failure raises SweepError carrying the partial trace rows.
    """
    params = params or SearchParams()
    n_values = [int(n) for n in N_range]
    if not n_values or any(b <= a for a, b in zip(n_values[:-1], n_values[1:])):
        raise SolverError("N range must be nonempty and strictly ascending")
    if n_values[0] < 2:
        raise SolverError("sweeps start at N >= 2")
    cache = cache if cache is not None else EnergyCache(None)
    set_d = set_to_dict(set_spec)
    kind = set_d["type"]
    d = set_spec.dimension
    comp_ids = None
    if isinstance(set_spec, UnionSet):
        comp_ids = (set_hash(set_d["A1"]), set_hash(set_d["A2"]))

    records = []
    prev_cfg = None
    for n in n_values:
        try:
            entry = cache.get(set_d, s, n)
            if entry is not None and not force:
                cfg = Configuration.from_dict(entry["configuration"], set_spec)
                rep = riesz_energy(cfg, s)
                n1, status = int(entry["n1"]), entry["status"]
                e_best, min_dist = rep.total, rep.min_dist
            else:
                warm = []
                if entry is not None:
                    warm.append(Configuration.from_dict(entry["configuration"], set_spec))
                if prev_cfg is not None and prev_cfg.N < n:
                    warm.append(_greedy_extend(prev_cfg, n, set_spec, s, params))
                if isinstance(set_spec, UnionSet):
                    res = minimize_union(set_spec, n, s, params, alpha_hint=alpha_hint,
                                         cache=cache, warm=warm, refresh_parts=force)
                else:
                    res = minimize_local_search(set_spec, n, s, params, initial_configs=warm)
                cache.update(set_d, s, n, res.energy.total, res.config.to_dict(),
                             res.status, res.N1)
                cfg, n1, status = res.config, res.N1, res.status
                e_best, min_dist = res.energy.total, res.energy.min_dist
            rec = TraceRecord(
                N=n, E_best=e_best, G=e_best / n ** (1.0 + s / d), N1=n1, N2=n - n1,
                frac1=n1 / n, min_dist=min_dist, status=status,
            )
            records.append(rec)
            if on_record is not None:
                on_record(rec)
            prev_cfg = cfg
        except (SolverError, ValueError) as exc:
            raise SweepError(f"solve failed at N={n}: {exc}", tuple(records), n, exc) from exc
    return AsymptoticTrace(records=tuple(records), set_id=set_hash(set_d), set_kind=kind,
                           s=s, d=d, component_ids=comp_ids)


# ---------------------------------------------------------------------------
# Cache-level consistency checks.
# ---------------------------------------------------------------------------


def check_cached_split_bounds(cache: EnergyCache, union: UnionSet, s: float,
                              tie_tol: float = 1e-9) -> dict:
    """Verify cached union energies against every cached split pair.

    For each cached (union, s, N) and each split with both part energies
    available (counts <= 1 contribute zero), the cached union energy must
    not exceed E1 + E2 + 2*M1*M2*sep**(-s), up to tie_tol slack: the
    assembled split is a feasible configuration the solver considered.
    """
    from .asymptotics import split_upper_bound

    u_hash = set_hash(set_to_dict(union))
    a1_dict, a2_dict = set_to_dict(union.A1), set_to_dict(union.A2)

    def part_energy(comp_dict, m):
        if m <= 1:
            return 0.0
        e = cache.get(comp_dict, s, m)
        return None if e is None else float(e["energy"])

    checked, violations = 0, []
    for entry in cache.entries.values():
        if entry.get("set_hash") != u_hash or entry.get("s") != s:
            continue
        n, e_union = int(entry["N"]), float(entry["energy"])
        for m1 in range(n + 1):
            e1 = part_energy(a1_dict, m1)
            e2 = part_energy(a2_dict, n - m1)
            if e1 is None or e2 is None:
                continue
            bound = split_upper_bound(e1, e2, m1, n - m1, union.sep_lower, s)
            checked += 1
            if e_union > bound + tie_tol * max(1.0, bound):
                violations.append({"N": n, "M1": m1, "union_energy": e_union, "bound": bound})
    return {"pairs_checked": checked, "violations": violations}


def check_part_decomposition(cache: EnergyCache, union: UnionSet, s: float,
                             rtol: float = 1e-9) -> dict:
    """Total energy of every cached union configuration must be at least the
    sum of its two part energies (cross terms are nonnegative)."""
    u_hash = set_hash(set_to_dict(union))
    checked, violations = 0, []
    for entry in cache.entries.values():
        if entry.get("set_hash") != u_hash or entry.get("s") != s:
            continue
        cfg = Configuration.from_dict(entry["configuration"], union)
        total = riesz_energy(cfg, s).total if cfg.N >= 2 else 0.0
        part_total = 0.0
        for tag in ("A1", "A2"):
            pts = [p for p in cfg.points if p.host == tag]
            if len(pts) >= 2:
                part_total += riesz_energy(Configuration(pts, s=s, set_spec=union), s).total
        checked += 1
        if total < part_total - rtol * max(1.0, abs(total)):
            violations.append({"N": cfg.N, "total": total, "part_total": part_total})
    return {"configs_checked": checked, "violations": violations}
