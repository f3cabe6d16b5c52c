"""Compact sets the solver works on: self-similar fractals, segments, and
separated unions of two such sets.

A fractal is described by K contracting similitudes with a common ratio L;
its similarity dimension d solves K * L**d = 1.  Points of the fractal are
addressed by finite words over {1..K}: the word (w1, ..., wm) names the
point phi_w1(phi_w2(... phi_wm(anchor))), where the anchor is the fixed
point of the first map (so every realized point lies exactly on the
attractor).

Union validation certifies the separation condition required downstream:
both component diameters must be strictly smaller than the distance between
the components.  Diameter and separation are rigorous interval-style bounds
computed from enclosing balls and boxes, never sampled estimates.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

ORTHOGONALITY_TOL = 1e-12
SCALE_MATCH_RTOL = 1e-14
MORAN_TOL = 1e-12
DIMENSION_MATCH_TOL = 1e-12

# Fixpoint iteration caps for the anchor and the enclosing box. Both
# contract geometrically, so the caps are generous.
_ANCHOR_TOL = 1e-14
_MAX_FIX_ITERS = 5000


class GeometryError(ValueError):
    """Invalid set construction or a failed validation bound."""


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise GeometryError(f"{name} must be a nonempty 1-d vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class Similitude:
    """Affine contraction x -> scale * Q x + translation with Q orthogonal."""

    scale: float
    translation: np.ndarray
    rotation: np.ndarray | None = None

    def __post_init__(self):
        if not (0.0 < self.scale < 1.0):
            raise GeometryError(f"similitude scale must lie in (0, 1), got {self.scale}")
        t = _as_vector(self.translation, "translation")
        t.setflags(write=False)
        object.__setattr__(self, "translation", t)
        p = t.size
        if self.rotation is None:
            q = np.eye(p)
        else:
            q = np.asarray(self.rotation, dtype=float)
            if q.shape != (p, p):
                raise GeometryError(f"rotation must be {p}x{p}, got {q.shape}")
            if np.max(np.abs(q.T @ q - np.eye(p))) >= ORTHOGONALITY_TOL:
                raise GeometryError("rotation matrix is not orthogonal to 1e-12")
        q.setflags(write=False)
        object.__setattr__(self, "rotation", q)

    @property
    def ambient_dim(self) -> int:
        return self.translation.size

    def __call__(self, x) -> np.ndarray:
        """Apply the map to a point (p,) or a batch (n, p)."""
        x = np.asarray(x, dtype=float)
        return self.scale * (x @ self.rotation.T) + self.translation

    def fixed_point(self) -> np.ndarray:
        """Unique fixed point, from (I - scale*Q) x = t."""
        p = self.ambient_dim
        return np.linalg.solve(np.eye(p) - self.scale * self.rotation, self.translation)


@dataclass(frozen=True)
class Ball:
    """Closed ball used as a rigorous outer bound."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = _as_vector(self.center, "center")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if not (self.radius > 0):
            raise GeometryError(f"ball radius must be positive, got {self.radius}")


def _auto_outer_ball(maps: tuple[Similitude, ...]) -> Ball:
    # Centered at the mean of the map fixed points; the radius
    # r = max_i |phi_i(c) - c| / (1 - L) makes B invariant: phi_i(B) <= B.
    c = np.mean([m.fixed_point() for m in maps], axis=0)
    L = maps[0].scale
    r = max(float(np.linalg.norm(m(c) - c)) for m in maps) / (1.0 - L)
    return Ball(center=c, radius=r)


def _enclosing_box(maps: tuple[Similitude, ...], ball: Ball) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned box containing the attractor.

    Starts from the outer ball's box and iterates X -> AABB(union of map
    images of X) to an exact floating-point fixpoint.  Every iterate
    contains the attractor, so the result is a rigorous bound.
    """
    lo = ball.center - ball.radius
    hi = ball.center + ball.radius
    for _ in range(_MAX_FIX_ITERS):
        ctr = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        new_lo = np.full_like(lo, np.inf)
        new_hi = np.full_like(hi, -np.inf)
        for m in maps:
            a = m.scale * m.rotation
            img_ctr = a @ ctr + m.translation
            img_half = np.abs(a) @ half
            new_lo = np.minimum(new_lo, img_ctr - img_half)
            new_hi = np.maximum(new_hi, img_ctr + img_half)
        # Both boxes contain the attractor, so their intersection does too.
        new_lo = np.maximum(new_lo, lo)
        new_hi = np.minimum(new_hi, hi)
        if np.array_equal(new_lo, lo) and np.array_equal(new_hi, hi):
            break
        lo, hi = new_lo, new_hi
    return lo, hi


@dataclass(frozen=True)
class SelfSimilarSet:
    """Attractor of K similitudes with a common ratio and disjoint images.

    The level-1 images of the outer ball must be pairwise disjoint; that
    separation propagates to all depths, so distinct same-depth addresses
    always realize distinct points.
    """

    maps: tuple[Similitude, ...]
    outer_ball: Ball = None  # auto-computed when omitted

    def __post_init__(self):
        maps = tuple(self.maps)
        object.__setattr__(self, "maps", maps)
        if len(maps) < 2:
            raise GeometryError(f"a self-similar set needs K >= 2 maps, got {len(maps)}")
        p = maps[0].ambient_dim
        if any(m.ambient_dim != p for m in maps):
            raise GeometryError("all maps must share the same ambient dimension")
        L = maps[0].scale
        for m in maps:
            if abs(m.scale - L) > SCALE_MATCH_RTOL * L:
                raise GeometryError(
                    f"map scales must agree to {SCALE_MATCH_RTOL} relative: {m.scale} vs {L}"
                )
        ball = self.outer_ball if self.outer_ball is not None else _auto_outer_ball(maps)
        object.__setattr__(self, "outer_ball", ball)
        if ball.center.size != p:
            raise GeometryError("outer ball dimension does not match the maps")
        # Invariance: |phi_i(c) - c| + L r <= r, with a small slack for the
        # tangent case produced by the auto ball.
        slack = 1e-9 * ball.radius
        for i, m in enumerate(maps):
            reach = float(np.linalg.norm(m(ball.center) - ball.center)) + L * ball.radius
            if reach > ball.radius + slack:
                raise GeometryError(
                    f"outer ball is not invariant under map {i + 1}: "
                    f"image reaches {reach:.6g} > radius {ball.radius:.6g}"
                )
        if self.level1_gap <= 0.0:
            raise GeometryError(
                "level-1 images of the outer ball overlap; the maps must have "
                "pairwise disjoint images"
            )
        # Moran equation sanity: K * L**d = 1 must hold for the derived d.
        d = self.dimension
        if abs(len(maps) * L**d - 1.0) > MORAN_TOL:
            raise GeometryError("dimension does not satisfy K * L**d = 1 to 1e-12")
        # Materialize the lazy caches now so instances never mutate after
        # construction (safe concurrent reads).
        self.anchor()
        self.bounding_box

    @property
    def K(self) -> int:
        return len(self.maps)

    @property
    def scale(self) -> float:
        return self.maps[0].scale

    @property
    def ambient_dim(self) -> int:
        return self.maps[0].ambient_dim

    @property
    def dimension(self) -> float:
        """Similarity dimension, the solution of K * L**d = 1."""
        return math.log(self.K) / math.log(1.0 / self.scale)

    @property
    def level1_gap(self) -> float:
        """Guaranteed distance between distinct level-1 image balls.

        Distinct depth-m addresses realize points at least
        level1_gap * L**(m-1) apart.
        """
        c, r, L = self.outer_ball.center, self.outer_ball.radius, self.scale
        centers = [m(c) for m in self.maps]
        return min(
            float(np.linalg.norm(centers[i] - centers[j])) - 2.0 * L * r
            for i in range(self.K)
            for j in range(i + 1, self.K)
        )

    @property
    def diameter_upper(self) -> float:
        lo, hi = self.bounding_box
        return min(2.0 * self.outer_ball.radius, float(np.linalg.norm(hi - lo)))

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        box = getattr(self, "_box_cache", None)
        if box is None:
            box = _enclosing_box(self.maps, self.outer_ball)
            object.__setattr__(self, "_box_cache", box)
        return box

    def anchor(self) -> np.ndarray:
        """Fixed point of the first map, iterated from the outer-ball center."""
        a = getattr(self, "_anchor_cache", None)
        if a is None:
            a = self.outer_ball.center
            for _ in range(_MAX_FIX_ITERS):
                nxt = self.maps[0](a)
                if float(np.linalg.norm(nxt - a)) < _ANCHOR_TOL:
                    a = nxt
                    break
                a = nxt
            a.setflags(write=False)
            object.__setattr__(self, "_anchor_cache", a)
        return a

    def all_points(self, depth: int) -> np.ndarray:
        """Realize all K**depth depth-m addresses, in lexicographic order.

        Row index encodes the word base-K with the first symbol most
        significant, matching itertools.product over {1..K}.
        """
        if depth < 0:
            raise GeometryError("depth must be >= 0")
        pts = self.anchor()[None, :]
        for _ in range(depth):
            # Each pass wraps a new outermost map around every existing word,
            # so the concat index grows at the most-significant position.
            pts = np.concatenate([m(pts) for m in self.maps], axis=0)
        return pts


@dataclass(frozen=True)
class Segment:
    """Line segment from a to b, parameterized by t in [0, 1]."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _as_vector(self.a, "a")
        b = _as_vector(self.b, "b")
        if a.size != b.size:
            raise GeometryError("segment endpoints must share a dimension")
        if not (np.linalg.norm(b - a) > 0):
            raise GeometryError("segment must have positive length")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def ambient_dim(self) -> int:
        return self.a.size

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))

    @property
    def dimension(self) -> float:
        return 1.0

    @property
    def diameter_upper(self) -> float:
        return self.length

    def point(self, t) -> np.ndarray:
        """Point at parameter t (scalar or batch)."""
        t = np.asarray(t, dtype=float)
        return self.a + np.multiply.outer(t, self.b - self.a)


@dataclass(frozen=True)
class FractalAddress:
    """Finite word over {1..K} naming a point of the attractor."""

    word: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(w) for w in self.word))

    def __len__(self) -> int:
        return len(self.word)

    def validate(self, fractal: SelfSimilarSet) -> None:
        for w in self.word:
            if not (1 <= w <= fractal.K):
                raise GeometryError(f"address symbol {w} outside 1..{fractal.K}")


def realize_address(
    fractal: SelfSimilarSet, addr: FractalAddress, anchor: np.ndarray | None = None
) -> np.ndarray:
    """Evaluate the composed maps of the address word at the anchor.

    The first symbol is the outermost map; the empty word returns the
    anchor itself (the depth-0 representative).
    """
    addr.validate(fractal)
    if anchor is None:
        x = fractal.anchor()
    else:
        x = np.asarray(anchor, dtype=float)
        ball = fractal.outer_ball
        if np.linalg.norm(x - ball.center) > ball.radius * (1.0 + 1e-9):
            raise GeometryError("anchor must lie inside the outer ball")
    for w in reversed(addr.word):
        x = fractal.maps[w - 1](x)
    return x


def all_addresses(fractal: SelfSimilarSet, depth: int):
    """All depth-m words in the order matching SelfSimilarSet.all_points."""
    return (FractalAddress(w) for w in itertools.product(range(1, fractal.K + 1), repeat=depth))


@dataclass(frozen=True)
class UnionSet:
    """Validated separated union of two components of equal dimension."""

    A1: "SetSpec"
    A2: "SetSpec"
    d: float
    sep_lower: float
    diam_upper_1: float
    diam_upper_2: float

    @property
    def ambient_dim(self) -> int:
        return self.A1.ambient_dim

    @property
    def dimension(self) -> float:
        return self.d

    def component(self, host: str):
        if host == "A1":
            return self.A1
        if host == "A2":
            return self.A2
        raise GeometryError(f"unknown component {host!r}; expected 'A1' or 'A2'")


SetSpec = SelfSimilarSet | Segment | UnionSet


def dimension(spec: SetSpec) -> float:
    """Dimension of the set: ln K / ln(1/L) for fractals, 1 for segments."""
    return spec.dimension


# ---------------------------------------------------------------------------
# Exact distances between the bounding shapes (all closed form).
# ---------------------------------------------------------------------------


def _point_segment_distance(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    d = b - a
    t = float(np.dot(x - a, d) / np.dot(d, d))
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(a + t * d - x))


def _segment_segment_distance(p1, q1, p2, q2) -> float:
    # Closest points of two segments (standard clamped closed form).
    d1, d2 = q1 - p1, q2 - p2
    r = p1 - p2
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    c = float(np.dot(d1, r))
    b = float(np.dot(d1, d2))
    denom = a * e - b * b
    if denom > 0.0:
        su = min(1.0, max(0.0, (b * f - c * e) / denom))
    else:
        su = 0.0  # parallel: pick one end and clamp the other
    tv = (b * su + f) / e
    if tv < 0.0:
        tv = 0.0
        su = min(1.0, max(0.0, -c / a))
    elif tv > 1.0:
        tv = 1.0
        su = min(1.0, max(0.0, (b - c) / a))
    return float(np.linalg.norm((p1 + su * d1) - (p2 + tv * d2)))


def _point_box_distance(x, lo, hi) -> float:
    g = np.maximum(0.0, np.maximum(lo - x, x - hi))
    return float(np.linalg.norm(g))


def _box_box_distance(lo1, hi1, lo2, hi2) -> float:
    g = np.maximum(0.0, np.maximum(lo2 - hi1, lo1 - hi2))
    return float(np.linalg.norm(g))


def _segment_box_distance(a, b, lo, hi) -> float:
    """Exact min over t in [0,1] of dist(a + t(b-a), box).

    The squared distance is piecewise quadratic in t; break at every
    parameter where some coordinate crosses a box face, then minimize the
    quadratic on each piece in closed form.
    """
    d = b - a
    breaks = {0.0, 1.0}
    for k in range(a.size):
        if d[k] != 0.0:
            for bound in (lo[k], hi[k]):
                t = (bound - a[k]) / d[k]
                if 0.0 < t < 1.0:
                    breaks.add(float(t))
    ts = sorted(breaks)
    best = min(_point_box_distance(a, lo, hi), _point_box_distance(b, lo, hi))
    for t0, t1 in zip(ts[:-1], ts[1:]):
        tm = 0.5 * (t0 + t1)
        x = a + tm * d
        # Active excess per coordinate is linear on this piece:
        # g_k(t) = alpha_k + beta_k t (or identically 0 inside the slab).
        alpha = np.zeros_like(a)
        beta = np.zeros_like(a)
        below = x < lo
        above = x > hi
        alpha[below] = lo[below] - a[below]
        beta[below] = -d[below]
        alpha[above] = a[above] - hi[above]
        beta[above] = d[above]
        qa = float(np.dot(beta, beta))
        qb = 2.0 * float(np.dot(alpha, beta))
        qc = float(np.dot(alpha, alpha))
        cands = [t0, t1]
        if qa > 0.0:
            tstar = -qb / (2.0 * qa)
            if t0 < tstar < t1:
                cands.append(tstar)
        for t in cands:
            val = math.sqrt(max(0.0, qa * t * t + qb * t + qc))
            if val < best:
                best = val
    return best


def _component_separation(s1, s2) -> float:
    """Rigorous lower bound on d(S1, S2) from enclosing shapes.

    Segments are their own hulls, so segment-segment is the exact distance.
    For fractals the bound is the best of the ball-based and box-based
    bounds.
    """
    bounds = []
    if isinstance(s1, Segment) and isinstance(s2, Segment):
        return _segment_segment_distance(s1.a, s1.b, s2.a, s2.b)
    if isinstance(s1, Segment):
        s1, s2 = s2, s1
    # s1 is a fractal now
    ball = s1.outer_ball
    lo, hi = s1.bounding_box
    if isinstance(s2, Segment):
        bounds.append(_point_segment_distance(ball.center, s2.a, s2.b) - ball.radius)
        bounds.append(_segment_box_distance(s2.a, s2.b, lo, hi))
    else:
        ball2 = s2.outer_ball
        lo2, hi2 = s2.bounding_box
        bounds.append(float(np.linalg.norm(ball.center - ball2.center)) - ball.radius - ball2.radius)
        bounds.append(_box_box_distance(lo, hi, lo2, hi2))
    return max(bounds)


def validate_union(A1: SetSpec, A2: SetSpec) -> UnionSet:
    """Certify the separation condition and build the union.

    Requires equal dimensions and max(diam(A1), diam(A2)) < d(A1, A2),
    where the diameters are rigorous upper bounds and the distance a
    rigorous lower bound.
    """
    if isinstance(A1, UnionSet) or isinstance(A2, UnionSet):
        raise GeometryError("nested unions are not supported")
    if A1.ambient_dim != A2.ambient_dim:
        raise GeometryError(
            f"components live in different ambient spaces: "
            f"{A1.ambient_dim} vs {A2.ambient_dim}"
        )
    d1, d2 = A1.dimension, A2.dimension
    if abs(d1 - d2) > DIMENSION_MATCH_TOL:
        raise GeometryError(f"component dimensions differ: {d1!r} vs {d2!r}")
    diam1 = A1.diameter_upper
    diam2 = A2.diameter_upper
    sep = _component_separation(A1, A2)
    failures = []
    if diam1 >= sep:
        failures.append(f"diam(A1) upper bound {diam1:.9g} >= separation lower bound {sep:.9g}")
    if diam2 >= sep:
        failures.append(f"diam(A2) upper bound {diam2:.9g} >= separation lower bound {sep:.9g}")
    if failures:
        raise GeometryError(
            "separation condition violated (each component diameter must be "
            "smaller than the distance between the components): " + "; ".join(failures)
        )
    return UnionSet(A1=A1, A2=A2, d=d1, sep_lower=sep, diam_upper_1=diam1, diam_upper_2=diam2)


# ---------------------------------------------------------------------------
# JSON schema. Unknown keys are rejected at every level.
# ---------------------------------------------------------------------------


def _check_keys(d: dict, allowed: set[str], required: set[str], what: str) -> None:
    if not isinstance(d, dict):
        raise GeometryError(f"{what} must be an object, got {type(d).__name__}")
    keys = set(d)
    unknown = keys - allowed
    if unknown:
        raise GeometryError(f"unknown keys in {what}: {sorted(unknown)}")
    missing = required - keys
    if missing:
        raise GeometryError(f"missing keys in {what}: {sorted(missing)}")


def set_from_dict(data: dict) -> SetSpec:
    """Build a set from its JSON description.

    Schemas:
      {"type": "ifs", "maps": [{"scale": .., "translation": [..],
                                "rotation": [[..], ..]?}, ...],
       "outer_ball": {"center": [..], "radius": ..}?}
      {"type": "segment", "a": [..], "b": [..]}
      {"type": "union", "A1": {...}, "A2": {...}}
    """
    if not isinstance(data, dict):
        raise GeometryError(f"set description must be an object, got {type(data).__name__}")
    kind = data.get("type")
    if kind == "ifs":
        _check_keys(data, {"type", "maps", "outer_ball"}, {"type", "maps"}, "ifs set")
        if not isinstance(data["maps"], list):
            raise GeometryError("'maps' must be a list of map objects")
        maps = []
        for i, m in enumerate(data["maps"]):
            _check_keys(m, {"scale", "translation", "rotation"}, {"scale", "translation"}, f"map {i + 1}")
            maps.append(
                Similitude(scale=float(m["scale"]), translation=m["translation"], rotation=m.get("rotation"))
            )
        ball = None
        if "outer_ball" in data:
            ob = data["outer_ball"]
            _check_keys(ob, {"center", "radius"}, {"center", "radius"}, "outer_ball")
            ball = Ball(center=ob["center"], radius=float(ob["radius"]))
        return SelfSimilarSet(maps=tuple(maps), outer_ball=ball)
    if kind == "segment":
        _check_keys(data, {"type", "a", "b"}, {"type", "a", "b"}, "segment set")
        return Segment(a=data["a"], b=data["b"])
    if kind == "union":
        _check_keys(data, {"type", "A1", "A2"}, {"type", "A1", "A2"}, "union set")
        return validate_union(set_from_dict(data["A1"]), set_from_dict(data["A2"]))
    raise GeometryError(f"unknown set type {kind!r}; expected 'ifs', 'segment' or 'union'")


def set_to_dict(spec: SetSpec) -> dict:
    """Inverse of set_from_dict (auto-computed outer balls are omitted)."""
    if isinstance(spec, SelfSimilarSet):
        maps = []
        for m in spec.maps:
            md = {"scale": m.scale, "translation": m.translation.tolist()}
            if not np.array_equal(m.rotation, np.eye(m.ambient_dim)):
                md["rotation"] = m.rotation.tolist()
            maps.append(md)
        return {"type": "ifs", "maps": maps}
    if isinstance(spec, Segment):
        return {"type": "segment", "a": spec.a.tolist(), "b": spec.b.tolist()}
    if isinstance(spec, UnionSet):
        return {"type": "union", "A1": set_to_dict(spec.A1), "A2": set_to_dict(spec.A2)}
    raise GeometryError(f"cannot serialize {type(spec).__name__}")


def set_hash(spec_or_dict) -> str:
    """Content hash of a set description (stable across runs)."""
    d = spec_or_dict if isinstance(spec_or_dict, dict) else set_to_dict(spec_or_dict)
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
