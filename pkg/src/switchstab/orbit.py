"""Integer orbit of the x1 axis under the built-in two-mode planar pair.

A line through the origin with rational tangent ``p/q`` is stored as the
coprime nonnegative pair ``(p, q)``; lines are unsigned, so the direction
and its mirror image in the x1 axis share one representative.

* ``step_a2`` (``A2 = diag(1/2, 2)``) multiplies the tangent by 4.
* ``step_a1`` is the parity rule ``(p, q) -> (p + q, |p - q|)``, halved when
  ``p`` and ``q`` are both odd.  On unsigned lines this is the action of the
  inverse rotation ``A1^-1`` (equivalently ``A1^3``, since ``A1^4 = -Id``),
  so the forward orbit under ``A1`` is generated as well.

All arithmetic uses Python integers, which never overflow.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonTooLarge
from .instances import stanford_urbano

DEFAULT_NODE_CAP = 10**6

GENERATORS = ("A1", "A2", "A2inv")


@dataclass(frozen=True, order=True)
class RationalDirection:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("direction pairs are stored nonnegative")
        if self.p == 0 and self.q == 0:
            raise ValueError("(0, 0) is not a direction")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"({self.p}, {self.q}) is not coprime; use RationalDirection.of")

    @classmethod
    def of(cls, p: int, q: int) -> "RationalDirection":
        p, q = abs(int(p)), abs(int(q))
        g = math.gcd(p, q)
        if g == 0:
            raise ValueError("(0, 0) is not a direction")
        return cls(p // g, q // g)

    @classmethod
    def parse(cls, text: str) -> "RationalDirection":
        p, _, q = text.partition("/")
        return cls.of(int(p), int(q or 1))

    @property
    def angle(self) -> float:
        """Angle of the line in ``[0, pi/2]``."""
        return math.atan2(self.p, self.q)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


def step_a2(d: RationalDirection, k: int = 1) -> RationalDirection:
    if k >= 0:
        return RationalDirection.of(d.p * 4**k, d.q)
    return RationalDirection.of(d.p, d.q * 4 ** (-k))


def step_a1(d: RationalDirection) -> RationalDirection:
    p, q = d.p, d.q
    if p % 2 and q % 2:
        return RationalDirection.of((p + q) // 2, abs(p - q) // 2)
    return RationalDirection.of(p + q, abs(p - q))


def mod4_invariant(d: RationalDirection) -> bool:
    return d.p % 4 != 2 and d.q % 4 != 2


def apply_generator(d: RationalDirection, gen: str) -> RationalDirection:
    if gen == "A1":
        return step_a1(d)
    if gen == "A2":
        return step_a2(d, 1)
    if gen == "A2inv":
        return step_a2(d, -1)
    raise ValueError(f"unknown generator {gen!r}")


ROOT = RationalDirection(0, 1)


@dataclass
class OrbitGraph:
    nodes: list[RationalDirection]
    edges: list[tuple[RationalDirection, str, RationalDirection]]
    depth: int
    layers: list[list[RationalDirection]] = field(repr=False, default_factory=list)

    def __contains__(self, d: RationalDirection) -> bool:
        return d in self._members

    def __len__(self) -> int:
        return len(self.nodes)

    def __post_init__(self):
        self._members = set(self.nodes)

    def to_edge_list(self) -> str:
        return "".join(f"{a} --{g}--> {b}\n" for a, g, b in self.edges)


def explore_orbit(depth: int, node_cap: int = DEFAULT_NODE_CAP) -> OrbitGraph:
    """Breadth-first closure of the x1 axis up to ``depth`` generator steps.

    Nodes are ordered by BFS layer and lexicographically within a layer.
    Edges are recorded for every node expanded (layers ``0 .. depth - 1``).
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    seen = {ROOT}
    layers = [[ROOT]]
    edges = []
    for _ in range(depth):
        nxt = set()
        for d in layers[-1]:
            for gen in GENERATORS:
                e = apply_generator(d, gen)
                edges.append((d, gen, e))
                if e not in seen:
                    nxt.add(e)
        seen |= nxt
        if len(seen) > node_cap:
            raise HorizonTooLarge(f"orbit exploration exceeded the node cap {node_cap}")
        layers.append(sorted(nxt))
    nodes = [d for layer in layers for d in layer]
    return OrbitGraph(nodes, edges, depth, layers)


@dataclass
class RotationReport:
    cos_2theta: float
    theta: float
    eigen_moduli: tuple[float, float]
    trace: float
    nonreal: bool


def rotation_check() -> RotationReport:
    """Eigen-analysis of ``A2 A1`` for the built-in two-mode planar matrices."""
    a1, a2 = stanford_urbano().matrix_set.matrices
    prod = a2 @ a1
    ev = np.linalg.eigvals(prod)
    ev = ev[np.argsort(-ev.imag)]
    theta = float(np.angle(ev[0]))
    return RotationReport(
        cos_2theta=math.cos(2 * theta),
        theta=theta,
        eigen_moduli=(float(abs(ev[0])), float(abs(ev[1]))),
        trace=float(np.trace(prod)),
        nonreal=bool(abs(ev[0].imag) > 0 and np.isclose(ev[0], np.conj(ev[1]))),
    )


def density_gap(n: int, theta: float | None = None) -> float:
    """Largest circular gap between the points ``k * theta mod 2 pi``, ``k < n``."""
    if n < 2:
        raise ValueError("need at least two points")
    if theta is None:
        theta = rotation_check().theta
    pts = np.sort(np.mod(theta * np.arange(n), 2 * math.pi))
    gaps = np.diff(np.r_[pts, pts[0] + 2 * math.pi])
    return float(gaps.max())
