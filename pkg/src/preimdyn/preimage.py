"""Rational iterated preimages, S-unit chains and the unit-equation bounds.

``preimage_set`` runs a breadth-first search backwards from the target; the
resulting node set (root included only when rediscovered) is the set of
rational iterated preimages.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from preimdyn.arith import INF, PrimeSet, as_point, is_s_unit
from preimdyn.dynamics import RatMap, evaluate, is_monic_normal_form
from preimdyn.errors import ChainBroken
from preimdyn.poly import Poly, determinant, rational_roots


def preimages_one_step(phi: RatMap, v) -> set:
    """All rational x in P^1 with phi(x) = v."""
    v = as_point(v)
    d = phi.degree
    out = set()
    if v is INF:
        out.update(rational_roots(phi.den) if not phi.den.is_zero() else [])
        if phi.num.degree > phi.den.degree:
            out.add(INF)
        return out
    target = phi.num - phi.den.scale(v)
    out.update(rational_roots(target))
    if evaluate(phi, INF) == v:
        out.add(INF)
    return out


@dataclass
class PreimageTree:
    root: object
    nodes: dict = field(default_factory=dict)  # point -> (parent, depth)
    cycle_marks: set = field(default_factory=set)
    root_rediscovered: bool = False

    @property
    def preimages(self) -> set:
        """The iterated preimage set (root only if some iterate returns to it)."""
        s = set(self.nodes)
        if not self.root_rediscovered:
            s.discard(self.root)
        return s

    def __len__(self) -> int:
        return len(self.preimages)

    @property
    def max_depth(self) -> int:
        return max((dep for _, dep in self.nodes.values()), default=0)

    def depth(self, x) -> int:
        return self.nodes[x][1]

    def parent(self, x):
        return self.nodes[x][0]

    def chain(self, x) -> list:
        """Path ``[root, ..., x]`` in the tree."""
        path = [x]
        while path[-1] != self.root:
            path.append(self.nodes[path[-1]][0])
        return path[::-1]

    def level_sizes(self) -> list[int]:
        sizes = [0] * (self.max_depth + 1)
        for _, dep in self.nodes.values():
            sizes[dep] += 1
        return sizes


def preimage_set(phi: RatMap, a, max_nodes: Optional[int] = None) -> PreimageTree:
    """BFS tree of rational solutions to phi^N(x) = a, N >= 1."""
    if phi.degree < 2:
        raise ValueError("preimage search needs degree >= 2")
    a = as_point(a)
    tree = PreimageTree(a, {a: (None, 0)})
    frontier = deque([a])
    cache: dict = {}
    while frontier:
        v = frontier.popleft()
        dep = tree.nodes[v][1]
        pre = cache.get(v)
        if pre is None:
            pre = preimages_one_step(phi, v)
        for x in sorted(pre, key=_sort_key):
            if x in tree.nodes:
                tree.cycle_marks.add(x)
                if x == a:
                    tree.root_rediscovered = True
                continue
            tree.nodes[x] = (v, dep + 1)
            frontier.append(x)
            if max_nodes is not None and len(tree.nodes) > max_nodes:
                raise RuntimeError(f"preimage tree exceeded {max_nodes} nodes")
    return tree


def _sort_key(P):
    return (1, 0) if P is INF else (0, P)


def preim_count(phi: RatMap, a) -> int:
    return len(preimage_set(phi, a))


# --------------------------------------------------------------------------
# S-unit chains


def verify_s_unit_chain(phi: RatMap, S: PrimeSet, a, chain) -> bool:
    """True iff every element of the chain ``a = x_0, x_1, ...`` is an S-unit.

    The chain must satisfy ``phi(x_i) = x_{i-1}``; otherwise
    :class:`ChainBroken` is raised.  ``phi`` must be in monic normal form.
    """
    if not is_monic_normal_form(phi):
        raise ValueError("S-unit chains are defined for maps in monic normal form")
    chain = [as_point(x) for x in chain] or [as_point(a)]
    if chain[0] != as_point(a):
        raise ChainBroken(f"chain starts at {chain[0]}, not at the target {a}")
    for i in range(1, len(chain)):
        if chain[i] is INF or evaluate(phi, chain[i]) != chain[i - 1]:
            raise ChainBroken(f"phi(x_{i}) != x_{i - 1}")
    return all(x is not INF and is_s_unit(x, S) for x in chain)


def chain_matrix(d: int, chain) -> list[list[Fraction]]:
    """The (2d-1) x (2d-1) matrix whose kernel contains (1, a_{d-1}.., -b_{d-1}..)."""
    xs = [Fraction(x) for x in chain]
    if len(xs) != 2 * d:
        raise ValueError(f"chain of length {2 * d} required, got {len(xs)}")
    rows = []
    for i in range(1, 2 * d):
        xi, prev = xs[i], xs[i - 1]
        row = [xi**d - prev]
        row += [xi**j for j in range(d - 1, 0, -1)]
        row += [xi**j * prev for j in range(d - 1, 0, -1)]
        rows.append(row)
    return rows


def chain_matrix_det(d: int, chain) -> Fraction:
    return determinant(chain_matrix(d, chain))


def forward_chain(phi: RatMap, x_last, length: int) -> list:
    """``[x_0, ..., x_{length-1}]`` with ``x_{length-1} = x_last`` and
    ``x_{i-1} = phi(x_i)``."""
    out = [as_point(x_last)]
    for _ in range(length - 1):
        out.append(evaluate(phi, out[-1]))
    return out[::-1]


# --------------------------------------------------------------------------
# bounds from the unit-equation argument


def evertse_bound(n: int, s: int) -> int:
    """(2^35 n^2)^(n^3 s)."""
    if n < 2 or s < 1:
        raise ValueError("need n >= 2 and s >= 1")
    return (2**35 * n * n) ** (n**3 * s)


def mu_bound(d: int) -> tuple[int, int]:
    """((2d-1) d^((2d-1)(d+1)), d^(3d^2)); the first never exceeds the second."""
    if d < 2:
        raise ValueError("need d >= 2")
    refined = (2 * d - 1) * d ** ((2 * d - 1) * (d + 1))
    coarse = d ** (3 * d * d)
    assert refined <= coarse
    return refined, coarse


#: Above this many bits the depth bound is reported only through its log2.
EXACT_BITS_LIMIT = 4_000_000


@dataclass(frozen=True)
class KappaBound:
    d: int
    s: int
    log_loglog_kappa: float
    """log(d^(20d) s) = 20 d log d + log s, i.e. the log of log log kappa'."""
    monomials: int
    depth_bound: Optional[int]
    depth_bound_log2: float

    @property
    def depth_is_exact(self) -> bool:
        return self.depth_bound is not None


def kappa_prime_loglog(d: int, s: int) -> KappaBound:
    """Size data for kappa'(d, s) = exp(exp(d^(20d) s)) and the chain-length bound.

    ``log_loglog_kappa`` is ``20 d log d + log s``.  The depth bound is
    ``N <= 2d - 1 + mu 2^m E(m, s)`` with ``m = (2d)!`` and ``E`` the Evertse
    bound, exact when it fits in :data:`EXACT_BITS_LIMIT` bits.
    """
    if d < 2 or s < 1:
        raise ValueError("need d >= 2 and s >= 1")
    val = 20 * d * math.log(d) + math.log(s)
    m = math.factorial(2 * d)
    mu, _ = mu_bound(d)
    log2_E = m**3 * s * (35 + 2 * math.log2(m))
    log2_N = math.log2(mu) + m + log2_E
    exact = None
    if log2_N <= EXACT_BITS_LIMIT:
        exact = 2 * d - 1 + mu * 2**m * evertse_bound(m, s)
    return KappaBound(d, s, val, m, exact, log2_N)


__all__ = [
    "preimages_one_step",
    "preimage_set",
    "preim_count",
    "PreimageTree",
    "verify_s_unit_chain",
    "chain_matrix",
    "chain_matrix_det",
    "forward_chain",
    "evertse_bound",
    "mu_bound",
    "kappa_prime_loglog",
    "KappaBound",
]
