"""Shape constants for the certificate verifier and the tree embedder.

A single frozen :class:`Params` value is threaded through certificate
verification, synthesis and embedding so that every floor and threshold
is computed from one place.  Integer-valued floors use a tiny epsilon
before truncating: products such as ``gamma * n`` are often exact
integers whose binary representation lands a hair below the true value.
"""

import json
import math
from dataclasses import dataclass, fields
from typing import Dict, Optional

from .errors import InvalidParameter

_EPS = 1e-9

# Edge probability that makes the desk profile's floors actually hold in
# a random host: at the spec'd default of 0.7 the co-degree and star
# degree conditions fail at n = 600.
DESK_EDGE_PROB = 0.98


def floor_eps(x: float) -> int:
    """Floor with a tolerance for binary representation error."""
    return int(math.floor(x + _EPS))


@dataclass(frozen=True)
class Params:
    """Constants controlling the embedding argument at host size ``n``.

    ``delta`` defaults to ``alpha / 2``, ``C1`` to
    ``max(100 * C0 / alpha, 501)`` and ``C`` to ``C1``.  Derived
    quantities (``m``, ``d``, ``q``, ``ell``, ...) are recomputed on
    every access so they can never go stale.
    """

    n: int
    alpha: float
    C0: float
    gamma: float
    c: float
    K: int = 100
    beta: float = 0.5
    delta: Optional[float] = None
    C1: Optional[float] = None
    C: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n < 3:
            raise InvalidParameter(f"host size must be at least 3, got {self.n}")
        for name in ("alpha", "gamma", "c"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InvalidParameter(f"{name} must lie in (0, 1), got {v}")
        if self.C0 <= 0.0:
            raise InvalidParameter(f"C0 must be positive, got {self.C0}")
        if self.K < 13 or self.K % 3 != 1:
            raise InvalidParameter(
                f"clique count per unit must be at least 13 and 1 mod 3, got {self.K}")
        if not 0.0 < self.beta <= 1.0:
            raise InvalidParameter(f"beta must lie in (0, 1], got {self.beta}")
        if self.delta is None:
            object.__setattr__(self, "delta", 0.5 * self.alpha)
        if not 0.0 < self.delta < 1.0:
            raise InvalidParameter(f"delta must lie in (0, 1), got {self.delta}")
        if self.C1 is None:
            object.__setattr__(self, "C1", max(100.0 * self.C0 / self.alpha, 501.0))
        if self.C1 <= 0.0:
            raise InvalidParameter(f"C1 must be positive, got {self.C1}")
        if self.C is None:
            object.__setattr__(self, "C", self.C1)
        if self.C <= 0.0:
            raise InvalidParameter(f"C must be positive, got {self.C}")

    # -- derived quantities ------------------------------------------------

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    @property
    def m(self) -> int:
        """Expansion set size, floor(C0 log n)."""
        return floor_eps(self.C0 * self.log_n)

    @property
    def d(self) -> int:
        """Maximum tree degree handled, floor(c n / log n)."""
        return floor_eps(self.c * self.n / self.log_n)

    @property
    def q(self) -> int:
        """Clique-path length used by the router, (K - 7) / 3."""
        return (self.K - 7) // 3

    @property
    def ell(self) -> int:
        """Edge length of a routable bare path: 3 (q + 2) 5 + 7."""
        return 3 * (self.q + 2) * 5 + 7

    @property
    def gamma_n(self) -> int:
        """The unit floor(gamma n) that sizes paths, cliques and reserves."""
        return floor_eps(self.gamma * self.n)

    @property
    def v2_size(self) -> int:
        """Vertices consumed by the clique factor, 5 K floor(gamma n)."""
        return 5 * self.K * self.gamma_n

    @property
    def s_size(self) -> int:
        """Star neighborhood size, floor(25 C0 log n)."""
        return floor_eps(25.0 * self.C0 * self.log_n)

    @property
    def n1_size(self) -> int:
        """Leaf-parent seed set size, floor(C1 log n)."""
        return floor_eps(self.C1 * self.log_n)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> Dict[str, object]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "Params":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidParameter(f"unknown parameter fields: {', '.join(unknown)}")
        return cls(**data)  # type: ignore[arg-type]

    @classmethod
    def from_json(cls, text: str) -> "Params":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise InvalidParameter(f"parameter file is not valid JSON: {err}") from None
        if not isinstance(data, dict):
            raise InvalidParameter("parameter file must hold a JSON object")
        return cls.from_dict(data)


def desk_params() -> Params:
    """Profile small enough to run on a desk.

    Every floor in the argument stays positive at n = 600: the factor
    takes 390 of 600 vertices, bare paths have 67 edges, the degree cap
    is 15 and the expansion size is 6.  C1 is overridden downward so a
    leaf-parent seed set of 15 fits inside a small subtree, and C is
    pinned so the leaf count threshold equals the factor size.
    """
    return Params(n=600, alpha=0.05, C0=1.0, gamma=0.01, c=0.16, K=13,
                  C1=2.35, C=65.0)


def paper_params(n: int) -> Params:
    """Profile with the constants the argument is actually stated for.

    These demand astronomically large n before any floor is positive;
    :func:`feasibility_report` documents exactly which ones fail.
    """
    return Params(n=n, alpha=1e-8, C0=2000.0, gamma=1e-5, c=5e-13, K=100)


def feasibility_report(params: Params) -> Dict[str, object]:
    """Check that every structural floor fits inside a host of size n.

    Returns a dict with one entry per named check plus ``ok``.  The
    embedder refuses to start when this reports failures, because a
    certificate of the required shape cannot exist at this size.
    """
    p = params
    v1_size = p.n - p.v2_size
    checks = [
        ("factor-fits", p.v2_size < p.n,
         f"clique factor needs {p.v2_size} of {p.n} vertices"),
        ("unit-positive", p.gamma_n >= 1,
         f"floor(gamma n) = {p.gamma_n}"),
        ("degree-positive", p.d >= 1,
         f"degree cap floor(c n / log n) = {p.d}"),
        ("expansion-positive", p.m >= 1,
         f"expansion size floor(C0 log n) = {p.m}"),
        ("star-fits", p.s_size + 26 <= max(v1_size, 0),
         f"star needs {p.s_size} + 26 vertices of {max(v1_size, 0)} outside the factor"),
        ("seeds-fit", p.n1_size <= p.delta * p.n,
         f"leaf-parent seeds {p.n1_size} vs small-subtree cap {p.delta * p.n:.1f}"),
        ("seeds-positive", p.n1_size >= 1,
         f"floor(C1 log n) = {p.n1_size}"),
        ("leaves-fit", p.C * p.gamma * p.n <= p.n,
         f"leaf threshold {p.C * p.gamma * p.n:.1f} vs host size {p.n}"),
        ("path-fits", p.ell + 1 <= p.n,
         f"bare path needs {p.ell + 1} vertices"),
    ]
    report: Dict[str, object] = {
        name: {"ok": ok, "detail": detail} for name, ok, detail in checks}
    report["ok"] = all(ok for _, ok, _ in checks)
    return report
