"""Parameter sweeps over height-bounded rationals and identity checks."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from preimdyn.arith import INF, as_rational, s_of
from preimdyn.curves import POLY_QUAD, RAT_QUAD, QuadFamily, preimage_curve_poly
from preimdyn.errors import DegreeDrop, HypothesisViolated
from preimdyn.dynamics import evaluate, new_ratmap
from preimdyn.poly import BiPoly, Poly
from preimdyn.preimage import preimage_set


def enumerate_rationals(H: int) -> list[Fraction]:
    """Reduced p/q with max(|p|, q) <= H, ordered by height, then value."""
    if H < 1:
        return []
    out = [Fraction(0)]
    for h in range(1, H + 1):
        # height exactly h: numerator +-h over q < h, or denominator h
        level = {Fraction(s * h, q) for q in range(1, h) if math.gcd(h, q) == 1 for s in (1, -1)}
        level.update(Fraction(p, h) for p in range(-h, h + 1) if p and math.gcd(p, h) == 1)
        out.extend(sorted(level))
    return out


@dataclass(frozen=True)
class SweepSpec:
    family: QuadFamily
    height_cap: int
    target: Optional[Poly] = None  # defaults to the family's a(t)
    s_cap: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        if self.height_cap < 1:
            raise ValueError("height cap must be >= 1")


@dataclass(frozen=True)
class SweepRecord:
    t: Fraction
    s_t: int
    preim_count: Optional[int] = None
    max_depth: Optional[int] = None
    skipped_reason: Optional[str] = None

    def row(self) -> list:
        return [
            self.t.numerator,
            self.t.denominator,
            self.s_t,
            "" if self.preim_count is None else self.preim_count,
            "" if self.max_depth is None else self.max_depth,
            self.skipped_reason or "",
        ]


CSV_COLUMNS = ["t_num", "t_den", "s_t", "preim_count", "max_depth", "skipped_reason"]


def _one(args) -> SweepRecord:
    fam_dict, target, t = args
    fam = QuadFamily.from_dict(fam_dict, check=False)
    s_t = s_of(t)
    try:
        if fam.kind == RAT_QUAD and fam.b(t) * fam.c(t) == 1:
            raise HypothesisViolated("b(t) c(t) = 1")
        phi = fam.map_at(t)
    except DegreeDrop:
        return SweepRecord(t, s_t, skipped_reason="DegreeDrop")
    except HypothesisViolated:
        return SweepRecord(t, s_t, skipped_reason="HypothesisViolated")
    a = Poly([Fraction(c) for c in target])(t) if target is not None else fam.a(t)
    tree = preimage_set(phi, a)
    return SweepRecord(t, s_t, len(tree), tree.max_depth if len(tree) else 0)


def sweep(spec: SweepSpec) -> list[SweepRecord]:
    """One record per enumerated t, in enumeration order for any worker count."""
    ts = [t for t in enumerate_rationals(spec.height_cap) if spec.s_cap is None or s_of(t) <= spec.s_cap]
    fam_dict = spec.family.to_dict()
    target = None if spec.target is None else [str(c) for c in spec.target.coeffs]
    jobs = [(fam_dict, target, t) for t in ts]
    if spec.workers <= 1 or len(jobs) < 2:
        return [_one(j) for j in jobs]
    chunk = max(1, len(jobs) // (spec.workers * 8))
    with ProcessPoolExecutor(max_workers=spec.workers) as ex:
        return list(ex.map(_one, jobs, chunksize=chunk))


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


@dataclass
class SweepSummary:
    histogram: dict
    by_s: dict
    maximum: Optional[int]
    argmax: list
    skipped: int

    def describe(self) -> str:
        lines = [f"records: {sum(self.histogram.values()) + self.skipped} (skipped {self.skipped})"]
        lines.append("histogram: " + ", ".join(f"{k}:{v}" for k, v in sorted(self.histogram.items())))
        for s in sorted(self.by_s):
            row = self.by_s[s]
            lines.append(f"  s={s}: " + ", ".join(f"{k}:{v}" for k, v in sorted(row.items())))
        if self.maximum is not None:
            lines.append(f"max {self.maximum} at t in {{{', '.join(str(t) for t in self.argmax)}}}")
        return "\n".join(lines)


def summarize(records: Sequence[SweepRecord]) -> SweepSummary:
    hist: Counter = Counter()
    by_s: dict = defaultdict(Counter)
    skipped = 0
    for r in records:
        if r.preim_count is None:
            skipped += 1
            continue
        hist[r.preim_count] += 1
        by_s[r.s_t][r.preim_count] += 1
    mx = max(hist) if hist else None
    arg = [r.t for r in records if r.preim_count is not None and r.preim_count == mx]
    return SweepSummary(dict(hist), {s: dict(c) for s, c in by_s.items()}, mx, arg, skipped)


# --------------------------------------------------------------------------
# identity checks


def swap_identity_check(b: Poly, c: Poly, t_values) -> dict:
    """t -> (count at oo for (b, c), count at 0 for (c, b)), or None if skipped.

    The two counts agree because x -> 1/x conjugates one map into the other.
    """
    out = {}
    for t in t_values:
        t = as_rational(t)
        bt, ct = b(t), c(t)
        if bt * ct == 1:
            out[t] = None
            continue
        try:
            phi = new_ratmap(Poly([0, bt, 1]), Poly([1, ct]))
            psi = new_ratmap(Poly([0, ct, 1]), Poly([1, bt]))
        except DegreeDrop:
            out[t] = None
            continue
        out[t] = (len(preimage_set(phi, INF)), len(preimage_set(psi, 0)))
    return out


def unbounded_family() -> QuadFamily:
    """x^2 + 2tx + t^2 - t, i.e. (x + t)^2 - t: the conjugate of x^2 by x -> x + t."""
    t = Poly.x()
    return QuadFamily.poly(t.scale(2), t * t - t, 0, check=False)


def example21_check(N_max: int) -> bool:
    """Iterate identity, the explicit zero of the N-th iterate, and >= N preimages."""
    fam = unbounded_family()
    X, T = BiPoly.x(), BiPoly.t()
    for N in range(1, N_max + 1):
        lhs = preimage_curve_poly(fam, N)
        rhs = (X + T) ** (2**N) - T
        if lhs != rhs:
            return False
        t0 = 2 ** (2**N)
        phi = fam.map_at(t0)
        x = Fraction(2 - t0)
        for _ in range(N):
            x = evaluate(phi, x)
        if x != 0:
            return False
        if len(preimage_set(phi, 0)) < N:
            return False
    return True


__all__ = [
    "enumerate_rationals",
    "SweepSpec",
    "SweepRecord",
    "CSV_COLUMNS",
    "sweep",
    "records_to_csv",
    "SweepSummary",
    "summarize",
    "swap_identity_check",
    "unbounded_family",
    "example21_check",
]
