"""Successive minima of the box ``K(q)`` against the lattice of a vector ``xi``.

The box is parametrized by ``T = e^q`` (an exact rational): a point
``(x, y_1, y_2)`` has gauge ``max(|x| / T^2, T |xi_1 x - y_1|, T |xi_2 x - y_2|)``.
Everything that decides a minimum is exact; floats appear only in a
conservative prefilter and in reported logarithms.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .core import NSystem, as_scalar

DIGIT_BUDGET = 100_000
_INT64_LIMIT = 2 ** 62
# chunk sizes grow geometrically up to this many x values
_MAX_CHUNK = 1 << 20
_FIRST_CHUNK = 1 << 10


class BudgetError(ValueError):
    """A truncated series would need more decimal digits than allowed."""


@dataclass(frozen=True)
class XiVector:
    n: int
    xi: tuple[Fraction, ...]
    description: str = ""

    def __post_init__(self):
        if len(self.xi) != self.n - 1:
            raise ValueError(f"need {self.n - 1} coordinates, got {len(self.xi)}")
        for v in self.xi:
            if not 0 < v < 1:
                raise ValueError(f"xi coordinates must lie in (0, 1), got {v}")

    @property
    def denominator(self) -> int:
        return math.lcm(*(v.denominator for v in self.xi))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "xi": [f"{v.numerator}/{v.denominator}" for v in self.xi],
                           "description": self.description}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "XiVector":
        d = json.loads(text)
        return cls(int(d["n"]), tuple(as_scalar(v) for v in d["xi"]), d.get("description", ""))


def liouville_xi(n: int, terms: int, digit_budget: int = DIGIT_BUDGET) -> XiVector:
    """``xi_j = sum_{k < terms} 10^-((k(n-1)+j)!)`` as exact rationals."""
    if n < 3 or terms < 1:
        raise ValueError("need n >= 3 and terms >= 1")
    need = math.factorial(terms * (n - 1))
    if need > digit_budget:
        raise BudgetError(f"terms = {terms} needs {need} digits, budget is {digit_budget}")
    xi = tuple(sum(Fraction(1, 10 ** math.factorial(k * (n - 1) + j)) for k in range(terms))
               for j in range(1, n))
    dropped = math.factorial(terms * (n - 1) + 1)
    desc = (f"sum_{{k<{terms}}} 10^-((k*{n - 1}+j)!); first dropped exponent {dropped}, "
            f"valid for log10 T below about {dropped / 3:g}")
    return XiVector(n, xi, desc)


@dataclass(frozen=True)
class BoxParam:
    T: Fraction

    def __post_init__(self):
        object.__setattr__(self, "T", as_scalar(self.T))
        if not self.T > 1:
            raise ValueError(f"need T > 1, got {self.T}")

    @property
    def q_float(self) -> float:
        return math.log(self.T.numerator) - math.log(self.T.denominator)


@dataclass(frozen=True)
class LatticePoint:
    x: int
    y: tuple[int, ...]
    embedded: tuple[Fraction, ...]

    @classmethod
    def from_xy(cls, xi: XiVector, x: int, y: Sequence[int]) -> "LatticePoint":
        y = tuple(int(v) for v in y)
        return cls(int(x), y, (Fraction(x),) + tuple(c * x - v for c, v in zip(xi.xi, y)))

    def consistent(self, xi: XiVector) -> bool:
        return self == LatticePoint.from_xy(xi, self.x, self.y)

    @property
    def coords(self) -> tuple[int, ...]:
        return (self.x,) + self.y


def point_norm(p: LatticePoint, b: BoxParam) -> Fraction:
    """Gauge of the box ``K(q)``: the least ``lambda`` with ``p`` in ``lambda K(q)``."""
    if len(p.embedded) != 3:
        raise NotImplementedError("the box is defined for n = 3 only")
    T = b.T
    z0, z1, z2 = p.embedded
    return max(abs(z0) / (T * T), abs(z1) * T, abs(z2) * T)


@dataclass
class MinimaResult:
    """``certified_count`` is the number of leading minima proven exact.

    ``certified`` means all of them are; ``search_bound`` is the largest
    ``|x|`` actually examined.
    """

    lambdas: list[Fraction]
    witnesses: list[LatticePoint]
    certified: bool
    search_bound: int
    certified_count: int = 0
    T: Fraction = Fraction(0)


def _rank_increases(basis: list[tuple[int, int, int]], v: tuple[int, int, int]) -> bool:
    if not basis:
        return v != (0, 0, 0)
    if len(basis) == 1:
        a = basis[0]
        return (a[1] * v[2] - a[2] * v[1], a[2] * v[0] - a[0] * v[2], a[0] * v[1] - a[1] * v[0]) != (0, 0, 0)
    a, b = basis
    det = (a[0] * (b[1] * v[2] - b[2] * v[1]) - a[1] * (b[0] * v[2] - b[2] * v[0])
           + a[2] * (b[0] * v[1] - b[1] * v[0]))
    return det != 0


def _greedy(pool: list[tuple[int, int, int, int]], rank: int = 3):
    basis, chosen = [], []
    for entry in pool:
        v = entry[1:]
        if _rank_increases(basis, v):
            basis.append(v)
            chosen.append(entry)
            if len(basis) == rank:
                break
    return chosen


class _Scaled:
    """Integer-scaled gauge: ``nu = max(x b^3 M, a^3 |N_j x - y_j M|)`` for ``T = a/b``.

    The true gauge is ``nu / (a^2 b M)``.
    """

    def __init__(self, xi: XiVector, b: BoxParam):
        self.M = xi.denominator
        self.N = [int(v * self.M) for v in xi.xi]
        self.a, self.b = b.T.numerator, b.T.denominator
        self.a3 = self.a ** 3
        self.zscale = self.b ** 3 * self.M
        self.scale = self.a * self.a * self.b * self.M
        self.T = b.T
        self.xi_f = [float(v) for v in xi.xi]

    def nu(self, x: int, y1: int, y2: int) -> int:
        return max(abs(x) * self.zscale, self.a3 * abs(self.N[0] * x - y1 * self.M),
                   self.a3 * abs(self.N[1] * x - y2 * self.M))

    def int64_ok(self, x_hi: int) -> bool:
        return (max(self.N) * x_hi < _INT64_LIMIT and x_hi * self.zscale < _INT64_LIMIT
                and self.a3 * self.M < _INT64_LIMIT and x_hi * self.M < _INT64_LIMIT)


def _near_residue(rf: list[np.ndarray], M: int) -> np.ndarray:
    return np.maximum(np.minimum(rf[0], M - rf[0]), np.minimum(rf[1], M - rf[1]))


def _chunk_exact_int64(sc: _Scaled, lo: int, hi: int, bound: Optional[int]):
    M = sc.M
    if bound is not None and M <= hi - lo:
        # residues are periodic in x with period M: pick the residue
        # classes that can beat the bound and list their members directly
        per = np.arange(M, dtype=np.int64)
        good = np.nonzero(sc.a3 * _near_residue([(n * per) % M for n in sc.N], M) < bound)[0]
        start = lo - lo % M
        k = np.arange((hi - start + M - 1) // M, dtype=np.int64)
        x = (start + k[:, None] * M + good[None, :]).ravel()
        x = x[(x >= lo) & (x < hi)]
    else:
        x = np.arange(lo, hi, dtype=np.int64)
    rf = [(n * x) % M for n in sc.N]
    if bound is not None:
        keep = np.maximum(x * sc.zscale, sc.a3 * _near_residue(rf, M)) < bound
        if not keep.any():
            return []
        x = x[keep]
        rf = [r[keep] for r in rf]
    fl = [(n * x - r) // M for n, r in zip(sc.N, rf)]
    out = []
    z = x * sc.zscale
    for d1 in (0, 1):
        y1 = fl[0] + d1
        r1 = np.abs(rf[0] - d1 * sc.M)
        for d2 in (0, 1):
            y2 = fl[1] + d2
            r2 = np.abs(rf[1] - d2 * sc.M)
            nu = np.maximum(z, sc.a3 * np.maximum(r1, r2))
            m = nu < bound if bound is not None else np.ones_like(x, dtype=bool)
            # ceil equals floor when the residual is zero
            if d1:
                m &= rf[0] != 0
            if d2:
                m &= rf[1] != 0
            g = np.gcd(np.gcd(x, y1), y2)
            m &= g == 1
            idx = np.nonzero(m)[0]
            out.extend(zip(nu[idx].tolist(), x[idx].tolist(), y1[idx].tolist(), y2[idx].tolist()))
    return out


def _chunk_float_prefilter(sc: _Scaled, lo: int, hi: int, bound: Optional[int]):
    x = np.arange(lo, hi, dtype=np.int64)
    if bound is None:
        cand = x.tolist()
    else:
        # distance to the nearest integer must be below bound/(a^2 b M) / T = bound/(a^3 M)
        thr = bound / (sc.a3 * sc.M)
        xf = x.astype(np.float64)
        ok = xf <= bound / sc.zscale * (1 + 1e-9) + 1
        for c in sc.xi_f:
            f = xf * c
            d = np.abs(f - np.rint(f))
            # rounding error of x*c is below x*c*2^-51; stay generous
            ok &= d <= thr * (1 + 1e-9) + f * 2.0 ** -46 + 1e-300
        cand = x[ok].tolist()
    out = []
    M, N = sc.M, sc.N
    for xv in cand:
        fl = [(n * xv) // M for n in N]
        for y1 in {fl[0], -((-N[0] * xv) // M)}:
            for y2 in {fl[1], -((-N[1] * xv) // M)}:
                nu = sc.nu(xv, y1, y2)
                if (bound is None or nu < bound) and math.gcd(xv, y1, y2) == 1:
                    out.append((nu, xv, y1, y2))
    return out


def successive_minima(xi: XiVector, b: BoxParam, x_max: int) -> MinimaResult:
    """Exact successive minima, searching ``1 <= x <= x_max`` plus ``x = 0``.

    Only ``x > 0`` is scanned since ``p`` and ``-p`` have equal gauge and
    span the same line, and only primitive points since a multiple is never
    independent of the point it multiplies.  For each ``x`` the candidates
    are ``y_j`` in ``{floor(xi_j x), ceil(xi_j x)}``.  The scan stops early
    once ``x`` exceeds ``lambda_3 T^2``; ``x_max`` is a budget.
    """
    if xi.n != 3:
        raise NotImplementedError("successive minima are implemented for n = 3 only")
    if x_max < 1:
        raise ValueError("x_max must be >= 1")
    sc = _Scaled(xi, b)
    T2 = b.T * b.T
    pool = [(sc.nu(0, 1, 0), 0, 1, 0), (sc.nu(0, 0, 1), 0, 0, 1)]
    bound: Optional[int] = None
    chosen: list = []
    lo, size = 1, _FIRST_CHUNK
    scanned = 0
    while lo <= x_max:
        if bound is not None:
            # every point of gauge < bound has x < bound * T^2 / scale
            reach = (bound * T2) / sc.scale
            if lo >= reach:
                break
        hi = min(x_max + 1, lo + size)
        if bound is not None:
            hi = min(hi, math.floor((bound * T2) / sc.scale) + 1)
            hi = max(hi, lo + 1)
        if sc.int64_ok(hi):
            new = _chunk_exact_int64(sc, lo, hi, bound)
        else:
            new = _chunk_float_prefilter(sc, lo, hi, bound)
        scanned = hi - 1
        pool.extend(new)
        pool.sort()
        chosen = _greedy(pool)
        if len(chosen) == 3:
            bound = chosen[2][0]
            keep = set(chosen)
            pool = [e for e in pool if e[0] < bound or e in keep]
        lo, size = hi, min(size * 2, _MAX_CHUNK)
    if bound is None:
        chosen = _greedy(sorted(pool))
    lambdas = [Fraction(e[0], sc.scale) for e in chosen]
    witnesses = [LatticePoint.from_xy(xi, e[1], e[2:]) for e in chosen]
    count = 0
    for lam in lambdas:
        # integer |x| <= lam T^2 iff |x| <= floor(lam T^2)
        if scanned >= math.floor(lam * T2):
            count += 1
        else:
            break
    return MinimaResult(lambdas, witnesses, count == 3, scanned, count, b.T)


def _rank_fraction(vectors: list[tuple[Fraction, ...]]) -> int:
    rows = [list(v) for v in vectors]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(rank + 1, len(rows)):
            f = rows[i][col] / rows[rank][col]
            rows[i] = [u - f * w for u, w in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def full_enumeration_minima(xi: XiVector, b: BoxParam, x_max: int) -> list[Fraction]:
    """Reference minima over every lattice point with ``|x| <= x_max``.

    ``y_j`` ranges over ``[-ceil(|x| xi_j) - 1, ceil(|x| xi_j) + 1]``, all
    gauges are Fractions and independence uses rational elimination on the
    embedded coordinates.  Meant for tiny instances only.
    """
    pts = []
    for x in range(-x_max, x_max + 1):
        ranges = [range(-math.ceil(abs(x) * c) - 1, math.ceil(abs(x) * c) + 2) for c in xi.xi]
        for y1 in ranges[0]:
            for y2 in ranges[1]:
                if (x, y1, y2) == (0, 0, 0):
                    continue
                p = LatticePoint.from_xy(xi, x, (y1, y2))
                pts.append((point_norm(p, b), p.embedded))
    pts.sort(key=lambda t: t[0])
    chosen, lams = [], []
    for nrm, e in pts:
        if _rank_fraction(chosen + [e]) > len(chosen):
            chosen.append(e)
            lams.append(nrm)
            if len(chosen) == 3:
                break
    return lams


@dataclass(frozen=True)
class Sample:
    T: Fraction
    q: float
    L: tuple[float, ...]
    lambdas: tuple[Fraction, ...]
    certified: bool
    certified_count: int
    search_bound: int


XMaxRule = Union[int, Callable[[Fraction], int]]


def default_x_max_rule(cap: int = 2_000_000) -> Callable[[Fraction], int]:
    """``x_max = min(cap, ceil(10 T^2))``; enough to certify up to ``lambda_3 = 10``."""
    return lambda T: int(min(cap, math.ceil(10 * T * T)))


def L_samples(xi: XiVector, T_list: Iterable, x_max_rule: XMaxRule = None) -> list[Sample]:
    """One oracle run per ``T``; logs are taken only here, in floating point."""
    rule = default_x_max_rule() if x_max_rule is None else x_max_rule
    out, prev = [], None
    for T in T_list:
        box = BoxParam(as_scalar(T))
        if prev is not None and not box.T > prev:
            raise ValueError("T_list must be strictly increasing")
        prev = box.T
        x_max = rule if isinstance(rule, int) else int(rule(box.T))
        res = successive_minima(xi, box, x_max)
        logs = tuple(math.log(l.numerator) - math.log(l.denominator) for l in res.lambdas)
        out.append(Sample(box.T, box.q_float, logs, tuple(res.lambdas), res.certified,
                          res.certified_count, res.search_bound))
    return out


def compare_to_system(samples: Sequence[Sample], s: NSystem):
    """Deviation ``max_j |P_j(q) - L_j(q)|`` per sample; a diagnostic only.

    Samples whose ``q`` lies outside ``[0, horizon]`` are skipped with a
    warning.  Returns ``(max_dev, [(q, deviation), ...])``.
    """
    per = []
    for smp in samples:
        q = Fraction(smp.q)
        if q > s.horizon or q < 0:
            warnings.warn(f"sample q = {smp.q:.6g} outside [0, {float(s.horizon):.6g}], skipped")
            continue
        vals = s.values(q)
        per.append((smp.q, max(abs(float(v) - L) for v, L in zip(vals, smp.L))))
    return (max((d for _, d in per), default=0.0), per)


SAMPLE_FIELDS = ["q", "L1", "L2", "L3", "lambda1", "lambda2", "lambda3", "certified", "certified_count", "T"]


def samples_to_csv(samples: Sequence[Sample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SAMPLE_FIELDS)
    for smp in samples:
        lam = [f"{l.numerator}/{l.denominator}" for l in smp.lambdas] + [""] * (3 - len(smp.lambdas))
        Ls = [repr(L) for L in smp.L] + [""] * (3 - len(smp.L))
        w.writerow([repr(smp.q), *Ls, *lam, int(smp.certified), smp.certified_count,
                    f"{smp.T.numerator}/{smp.T.denominator}"])
    return buf.getvalue()


def samples_from_csv(text: str) -> list[Sample]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        lams = tuple(as_scalar(row[k]) for k in ("lambda1", "lambda2", "lambda3") if row[k])
        Ls = tuple(float(row[k]) for k in ("L1", "L2", "L3") if row[k])
        out.append(Sample(as_scalar(row["T"]), float(row["q"]), Ls, lams, row["certified"] == "1",
                          int(row["certified_count"]), 0))
    return out
