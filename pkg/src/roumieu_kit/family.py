"""Non-decreasing unbounded sequences ``r`` and the product weights
``M_p * r_0 * r_1 * ... * r_p`` they generate.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DepthExceeded, InvalidArgument, InvalidSequence
from .matrices import WeightMatrix, vset_membership
from .sequences import TAU_PREC, WeightSequence, relation

GROWTH_FLOOR = 10.0
R_KINDS = ("tabulated", "power", "geometric")


class RSequence:
    """A non-decreasing positive sequence ``r_0 <= r_1 <= ...`` with ``r_j -> infinity``.

    ``power`` is ``r_j = (j + 1)^gamma`` (``gamma > 0``), ``geometric`` is
    ``r_j = base^j`` (``base > 1``). Tabulated data must be non-decreasing and
    grow by at least ``growth_floor`` between the first and last entry, which is
    the only evidence of unboundedness a finite list can give.
    """

    def __init__(self, kind: str = "tabulated", values=None, gamma: float | None = None,
                 base: float | None = None, growth_floor: float = GROWTH_FLOOR):
        self.kind = kind
        if kind == "tabulated":
            v = np.asarray(values, dtype=float)
            if v.ndim != 1 or v.size < 2:
                raise InvalidSequence("r needs at least two entries")
            if np.any(~(v > 0)) or not np.all(np.isfinite(v)):
                bad = int(np.flatnonzero(~(v > 0) | ~np.isfinite(v))[0])
                raise InvalidSequence(f"r_{bad} = {v[bad]!r} is not a positive real")
            drop = np.flatnonzero(np.diff(v) < 0)
            if drop.size:
                j = int(drop[0])
                raise InvalidSequence(f"r is not non-decreasing: r_{j + 1} < r_{j}")
            if v[-1] < growth_floor * v[0]:
                raise InvalidSequence(
                    f"no evidence that r is unbounded: r_P/r_0 = {v[-1] / v[0]:.4g} "
                    f"< growth floor {growth_floor:g}")
            self._logs = np.log(v)
            self._logs.setflags(write=False)
            self.depth = v.size - 1
            self.params = {}
        elif kind == "power":
            if gamma is None or not gamma > 0:
                raise InvalidSequence("power r needs gamma > 0")
            self.params = {"gamma": float(gamma)}
            self.depth = None
        elif kind == "geometric":
            if base is None or not base > 1:
                raise InvalidSequence("geometric r needs base > 1")
            self.params = {"base": float(base)}
            self.depth = None
        else:
            raise InvalidSequence(f"unknown r kind {kind!r}")

    @classmethod
    def tabulated(cls, values, growth_floor: float = GROWTH_FLOOR) -> "RSequence":
        return cls("tabulated", values, growth_floor=growth_floor)

    @classmethod
    def power(cls, gamma: float = 1.0) -> "RSequence":
        return cls("power", gamma=gamma)

    @classmethod
    def geometric(cls, base: float = 2.0) -> "RSequence":
        return cls("geometric", base=base)

    def logs(self, P: int) -> np.ndarray:
        """``log r_j`` for ``j = 0..P``."""
        if P < 0:
            raise InvalidArgument("depth must be non-negative")
        if self.depth is not None:
            if P > self.depth:
                raise DepthExceeded(f"r is only defined up to j={self.depth}, j={P} requested")
            return self._logs[:P + 1]
        j = np.arange(P + 1, dtype=float)
        if self.kind == "power":
            return self.params["gamma"] * np.log1p(j)
        return j * math.log(self.params["base"])

    def values(self, P: int) -> np.ndarray:
        return np.exp(self.logs(P))

    def to_dict(self, P: int | None = None) -> dict:
        if self.kind == "tabulated":
            return {"r": [float(v) for v in np.exp(self._logs)]}
        return {"kind": self.kind, **self.params}

    def rows(self, P: int | None = None):
        """``(j, r_j)`` pairs for CSV export."""
        P = self.depth if P is None else P
        if P is None:
            raise InvalidArgument("a depth is needed to export a parametric r")
        return [(j, float(v)) for j, v in enumerate(self.values(P))]

    def __repr__(self):
        if self.kind == "tabulated":
            return f"RSequence.tabulated(depth={self.depth})"
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"RSequence.{self.kind}({args})"


def _r_logs(r, P: int) -> np.ndarray:
    if isinstance(r, RSequence):
        return r.logs(P)
    v = np.asarray(r, dtype=float)
    if v.size <= P:
        raise DepthExceeded(f"r has {v.size} entries, index {P} requested")
    if np.any(~(v[:P + 1] > 0)):
        raise InvalidSequence("r entries must be positive")
    return np.log(v[:P + 1])


def log_product_weights(M: WeightSequence, r, P: int) -> np.ndarray:
    """``log(M_p * prod_(j<=p) r_j)`` for ``p = 0..P``."""
    return M.logs(P) + np.cumsum(_r_logs(r, P))


def product_weight(M: WeightSequence, r, p: int) -> float:
    """``M_p * r_0 * ... * r_p``; ``r`` may be an :class:`RSequence` or a plain list."""
    p = int(p)
    if p < 0:
        raise InvalidArgument("index must be non-negative")
    return math.exp(log_product_weights(M, r, p)[p])


def N_from_r(M: WeightSequence, r: RSequence, P: int) -> WeightSequence:
    """The sequence of product weights as a tabulated sequence of depth ``P``."""
    return WeightSequence.from_logs(log_product_weights(M, r, P))


def r_from_N(M: WeightSequence, N: WeightSequence, P: int, tau: float = TAU_PREC,
             growth_floor: float = GROWTH_FLOOR):
    """Build ``r`` with ``prod_(j<=p) r_j <= kappa N_p/M_p`` on the prefix.

    ``r_j`` is the smallest root ``(N_p/M_p)^(1/p)`` over ``p >= max(j, 1)``,
    which is non-decreasing by construction. Returns ``(r, kappa)`` with
    ``kappa`` the smallest constant making the product bound hold.
    """
    pre = relation(M, N, "prec", P, tau)
    if not pre.holds:
        raise InvalidArgument(f"M prec N does not hold on the prefix ({pre.status})")
    lq = N.logs(P) - M.logs(P)
    p = np.arange(1, P + 1)
    roots = lq[1:] / p
    # suffix minima: r_j = min_(p >= j) root_p
    suffix = np.minimum.accumulate(roots[::-1])[::-1]
    lr = np.concatenate([[suffix[0]], suffix])
    r = RSequence.tabulated(np.exp(lr), growth_floor=growth_floor)
    log_kappa = float(np.max(np.cumsum(r.logs(P)) - lq))
    return r, math.exp(max(log_kappa, 0.0))


def check_r_membership(M: WeightSequence, r: RSequence, P: int, tau: float = TAU_PREC):
    """Verdict for the product-weight sequence lying in ``V`` of the constant matrix ``(M)``."""
    return vset_membership(N_from_r(M, r, P), WeightMatrix.constant(M), P, tau)
