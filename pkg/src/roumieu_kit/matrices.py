"""Weight matrices, condition {M.2}', the set V(M) of dominating sequences and
the two witness constructions used to pass between inductive and projective
seminorms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BlockNotFound, BoundaryAttained, InvalidArgument
from .sequences import (TAU_PREC, WeightSequence, _m2_constants, _require_depth,
                        check_condition, relation)
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

DEFAULT_NMAX = 8


class WeightMatrix:
    """A non-decreasing family of weight sequences ``M^0 <= M^1 <= ...``.

    ``provenance`` is one of ``explicit`` (a finite list of rows), ``constant``
    (every row equal to ``base``), ``scaled`` (``M^n_p = (n+1)^p base_p``) or
    ``from-omega`` (rows generated from a weight function). Generated matrices
    can produce rows beyond ``nmax``; ``nmax`` is the last *materialised* row
    index used by searches.
    """

    def __init__(self, provenance: str, rows: Sequence[WeightSequence] | None = None,
                 base: WeightSequence | None = None,
                 generator: Callable[[int], WeightSequence] | None = None,
                 nmax: int | None = None, meta: dict | None = None,
                 log_entries: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None):
        self.provenance = provenance
        self.meta = dict(meta or {})
        self.base = base
        self._rows: dict[int, WeightSequence] = {}
        self._log_entries = log_entries
        if provenance == "explicit":
            if not rows:
                raise InvalidArgument("a weight matrix needs at least one row")
            self._rows = dict(enumerate(rows))
            self.nmax = len(rows) - 1
            self._generator = None
        else:
            if provenance == "constant":
                if base is None:
                    raise InvalidArgument("constant matrix needs a base sequence")
                generator = lambda n: base  # noqa: E731
            elif provenance == "scaled":
                if base is None:
                    raise InvalidArgument("scaled matrix needs a base sequence")
                generator = self._scaled_row
            elif generator is None:
                raise InvalidArgument(f"matrix provenance {provenance!r} needs a generator")
            self._generator = generator
            self.nmax = DEFAULT_NMAX if nmax is None else int(nmax)
        if self.nmax < 0:
            raise InvalidArgument("nmax must be non-negative")

    @classmethod
    def constant(cls, base: WeightSequence, nmax: int = DEFAULT_NMAX) -> "WeightMatrix":
        return cls("constant", base=base, nmax=nmax)

    @classmethod
    def scaled(cls, base: WeightSequence, nmax: int = DEFAULT_NMAX) -> "WeightMatrix":
        return cls("scaled", base=base, nmax=nmax)

    @classmethod
    def explicit(cls, rows: Sequence[WeightSequence]) -> "WeightMatrix":
        return cls("explicit", rows=list(rows))

    def _scaled_row(self, n):
        base = self.base
        if base.kind == "gevrey":
            q = base.params
            return WeightSequence.gevrey(q["s"], q["h"] * (n + 1), q["c"])
        ln1 = math.log(n + 1)
        return WeightSequence.from_log_function(
            "scaled_row", lambda p: base.logs(int(p[-1]))[p.astype(int)] + ln1 * p,
            params={"n": n}, depth=base.depth)

    @property
    def unbounded(self) -> bool:
        return self._generator is not None

    def row(self, n: int) -> WeightSequence:
        n = int(n)
        if n < 0:
            raise InvalidArgument("row index must be non-negative")
        if n not in self._rows:
            if self._generator is None:
                raise InvalidArgument(f"row {n} is not materialised (nmax={self.nmax})")
            self._rows[n] = self._generator(n)
        return self._rows[n]

    @property
    def rows(self) -> list[WeightSequence]:
        return [self.row(n) for n in range(self.nmax + 1)]

    def distinct_rows(self) -> list[tuple[int, WeightSequence]]:
        """Materialised rows with structurally identical repeats removed."""
        if self.provenance == "constant":
            return [(0, self.row(0))]
        out: list[tuple[int, WeightSequence]] = []
        for n in range(self.nmax + 1):
            r = self.row(n)
            if not out or not out[-1][1].same_as(r):
                out.append((n, r))
        return out

    def log_entries(self, ns: np.ndarray, ps: np.ndarray) -> np.ndarray:
        """``log M^(n_i)_(p_i)`` for paired index arrays."""
        ns = np.asarray(ns, dtype=int)
        ps = np.asarray(ps, dtype=int)
        if self._log_entries is not None:
            return np.asarray(self._log_entries(ns, ps), dtype=float)
        out = np.empty(ns.size)
        top = int(ps.max()) if ps.size else 0
        for n in np.unique(ns):
            sel = ns == n
            out[sel] = self.row(int(n)).logs(top)[ps[sel]]
        return out

    def check_rows_monotone(self, P: int) -> Verdict:
        """``M^n_p <= M^(n+1)_p`` for materialised rows and ``p <= P``."""
        rows = self.rows
        for n in range(len(rows) - 1):
            a, b = rows[n].logs(P), rows[n + 1].logs(P)
            tol = 1e-12 * np.maximum(1.0, np.abs(b))
            bad = np.flatnonzero(a > b + tol)
            if bad.size:
                p = int(bad[0])
                return Verdict(FAILS, P, counterexample={"n": n, "p": p},
                               trace=f"M^{n}_{p} > M^{n + 1}_{p}")
        return Verdict(HOLDS, P, {"rows": len(rows)})

    def to_dict(self, P: int | None = None) -> dict:
        out: dict = {"provenance": self.provenance, "nmax": self.nmax}
        if self.base is not None:
            out["base"] = self.base.to_dict(P)
        if "omega" in self.meta:
            out["omega"] = self.meta["omega"]
        if self.provenance == "explicit" or (P is not None and "omega" in self.meta):
            out["rows"] = [r.to_dict(P) for r in self.rows]
        return out

    def __repr__(self):
        return f"WeightMatrix({self.provenance}, nmax={self.nmax})"


# ---------------------------------------------------------------------------

def check_matrix_M2prime(mat: WeightMatrix, P: int) -> Verdict:
    """Search, for every materialised row ``n``, a row ``m >= n`` and constants
    with ``M^n_(p+1) <= C H^p M^m_p`` on the prefix."""
    P = _require_depth(P)
    if mat.nmax < 0:
        raise InvalidArgument("empty matrix")
    distinct = mat.distinct_rows()
    found: dict[int, dict] = {}
    for n, row in distinct:
        nxt = row.logs(P + 1)[1:]
        choice = None
        for m, other in distinct:
            if m < n:
                continue
            log_c, log_h, _, bounded = _m2_constants(nxt, other.logs(P), P)
            if bounded:
                choice = {"m": m, "C": math.exp(log_c), "H": math.exp(log_h)}
                break
        if choice is None:
            return Verdict(INCONCLUSIVE, P, counterexample={"n": n},
                           trace=f"no materialised row m >= {n} gives a bounded H")
        found[n] = choice
    return Verdict(HOLDS, P, {"constants": found},
                   trace="M^n_(p+1) <= C H^p M^m_p on the prefix for every materialised n")


def vset_membership(N: WeightSequence, mat: WeightMatrix, P: int,
                    tau: float = TAU_PREC) -> Verdict:
    """``M^n ≺ N`` for every materialised row ``n``."""
    P = _require_depth(P)
    ratios = []
    for n, row in mat.distinct_rows():
        v = relation(row, N, "prec", P, tau)
        if not v.holds:
            return Verdict(v.status, P, counterexample={"n": n, **v.counterexample},
                           trace=f"row {n}: {v.trace}", parts={f"row{n}": v})
        ratios.append(v.witness.get("tail_ratio", 0.0))
    return Verdict(HOLDS, P, {"rows_checked": len(ratios),
                              "max_tail_ratio": float(max(ratios))},
                   trace="every materialised row is dominated in the ≺ sense")


def vset_star_membership(N: WeightSequence, mat: WeightMatrix, P: int,
                         tau: float = TAU_PREC) -> Verdict:
    """Membership in V(M) together with (M.1) for ``N``."""
    v = vset_membership(N, mat, P, tau)
    lc = check_condition(N, "M1", P)
    parts = {"vset": v, "M1": lc}
    if v.fails or lc.fails:
        bad = v if v.fails else lc
        name = "vset" if v.fails else "M1"
        return Verdict(FAILS, P, counterexample={"condition": name, **bad.counterexample},
                       trace=bad.trace, parts=parts)
    if v.holds and lc.holds:
        return Verdict(HOLDS, P, dict(v.witness), parts=parts)
    return Verdict(INCONCLUSIVE, P, trace=v.trace if not v.holds else lc.trace,
                   parts=parts)


# ---------------------------------------------------------------------------
# witnesses

@dataclass
class VWitness:
    """Sequence produced by one of the two witness constructions."""

    sequence: WeightSequence
    construction: str
    depth: int
    blocks: list[tuple[int, int]] = field(default_factory=list)
    log_constants: dict[int, float] = field(default_factory=dict)
    # log of a_p/N_p at each block start
    log_start_ratios: list[float] = field(default_factory=list)
    # log(a_p/N_p) and its running max over p = 0..P
    log_ratios: np.ndarray | None = None
    log_partial_sups: np.ndarray | None = None
    crossings: dict[float, int | None] = field(default_factory=dict)

    @property
    def final_block_log_sup(self) -> float:
        """``log sup a_p/N_p`` over the last (open) block."""
        if self.log_ratios is None or not self.blocks:
            return -math.inf
        return float(self.log_ratios[self.blocks[-1][0]:].max())

    def to_dict(self) -> dict:
        out = {"construction": self.construction, "depth": self.depth,
               "sequence": self.sequence.to_dict(self.depth)}
        if self.blocks:
            out["blocks"] = [[int(p), int(n)] for p, n in self.blocks]
            out["start_ratios_log"] = [float(x) for x in self.log_start_ratios]
        if self.log_constants:
            out["constants_log"] = {str(k): float(v) for k, v in self.log_constants.items()}
        if self.log_partial_sups is not None:
            out["partial_sups_log"] = [float(x) for x in self.log_partial_sups]
        if self.crossings:
            out["crossings"] = {repr(float(k)): v for k, v in self.crossings.items()}
        return out


def _as_log_array(a, P: int) -> np.ndarray:
    if isinstance(a, WeightSequence):
        return a.logs(P)
    if hasattr(a, "sequence"):
        return a.sequence.logs(P)
    arr = np.asarray(a, dtype=float)
    if arr.size < P + 1:
        raise InvalidArgument(f"sequence has {arr.size} entries, depth {P} needs {P + 1}")
    arr = arr[:P + 1]
    if np.any(~(arr > 0)):
        raise InvalidArgument("the sequence a must be positive")
    return np.log(arr)


def witness_diagonal(a, mat: WeightMatrix, P: int, thresholds: Sequence[float] = (),
                     rows: int | None = None) -> VWitness:
    """Block construction ``N_p = n^p M^n_p`` on ``[p_n, p_(n+1))``.

    ``p_n`` is the least index after ``p_(n-1)`` with
    ``a_p / (n^p M^n_p) >= n``; rows ``1..rows`` (default ``mat.nmax``) must all
    find a block start within ``P``. Block 0 runs on ``[0, p_1)`` with ``N = M^0``.
    """
    P = _require_depth(P)
    la = _as_log_array(a, P)
    K = mat.nmax if rows is None else int(rows)
    if K < 1:
        raise InvalidArgument("the diagonal construction needs at least one row beyond M^0")
    p = np.arange(P + 1)
    starts = [0]
    for n in range(1, K + 1):
        ln = math.log(n)
        excess = la - p * ln - mat.row(n).logs(P)
        cand = np.flatnonzero(excess[starts[-1] + 1:] >= ln)
        if cand.size == 0:
            raise BlockNotFound(n, P)
        starts.append(starts[-1] + 1 + int(cand[0]))
    lN = np.empty(P + 1)
    bounds = starts[1:] + [P + 1]
    for n, (lo, hi) in enumerate(zip(starts, bounds)):
        lN[lo:hi] = p[lo:hi] * math.log(max(n, 1)) + mat.row(n).logs(P)[lo:hi]
    ratios = la - lN
    running = np.maximum.accumulate(ratios)
    crossings = {}
    for t in thresholds:
        hit = np.flatnonzero(running >= math.log(t))
        crossings[float(t)] = int(hit[0]) if hit.size else None
    w = VWitness(WeightSequence.from_logs(lN), "diagonal", P,
                 blocks=[(s, n) for n, s in enumerate(starts)],
                 log_start_ratios=[float(ratios[s]) for s in starts[1:]],
                 log_ratios=ratios, log_partial_sups=running, crossings=crossings)
    return w


def witness_sup(a, mat: WeightMatrix, nmax: int | None, P: int) -> VWitness:
    """``N_p = max_(1<=n<=nmax) n^p M^n_p / C_n`` with ``C_n = max_p n^p M^n_p a_p``,
    so that ``a_p N_p <= 1`` on the prefix."""
    P = _require_depth(P)
    la = _as_log_array(a, P)
    K = mat.nmax if nmax is None else int(nmax)
    if K < 1:
        raise InvalidArgument("nmax must be at least 1")
    p = np.arange(P + 1)
    v = np.stack([p * math.log(n) + mat.row(n).logs(P) + la for n in range(1, K + 1)])
    arg = np.argmax(v, axis=1)
    for i, k in enumerate(arg):
        if k == P:
            raise BoundaryAttained(i + 1, P)
    lc = v[np.arange(K), arg]
    s = (v - lc[:, None]).max(axis=0)
    lN = s - la
    # clamp rounding so that a_p N_p <= 1 holds in floating point as well
    over = la + lN > 0
    while np.any(over):
        lN = np.where(over, np.nextafter(lN, -np.inf), lN)
        over = la + lN > 0
    return VWitness(WeightSequence.from_logs(lN), "sup", P,
                    log_constants={n: float(lc[n - 1]) for n in range(1, K + 1)})


def vset_sample(mat: WeightMatrix, schedule, P: int, check: bool = True,
                tau: float = TAU_PREC) -> WeightSequence:
    """``N_p = n_p^p M^(n_p)_p`` for a non-decreasing unbounded schedule ``n_p``.

    With ``check`` the output is run through :func:`vset_membership` and a
    schedule too slow to be evidenced at depth ``P`` is rejected.
    """
    P = _require_depth(P)
    p = np.arange(P + 1)
    if callable(schedule):
        ns = np.array([schedule(int(k)) for k in p])
    else:
        ns = np.asarray(schedule)[:P + 1]
        if ns.size < P + 1:
            raise InvalidArgument(f"schedule has {ns.size} entries, depth {P} needs {P + 1}")
    if not np.all(ns == np.round(ns)) or np.any(ns < 1):
        raise InvalidArgument("schedule entries must be integers >= 1")
    ns = ns.astype(int)
    if np.any(np.diff(ns) < 0):
        raise InvalidArgument("schedule must be non-decreasing")
    if ns[-1] == ns[0]:
        raise InvalidArgument("schedule is constant on the prefix; it must be unbounded")
    if not mat.unbounded and ns[-1] > mat.nmax:
        raise InvalidArgument(f"schedule reaches row {ns[-1]} but only rows <= {mat.nmax} exist")
    lN = p * np.log(ns) + mat.log_entries(ns, p)
    N = WeightSequence.from_logs(lN)
    if check:
        v = vset_membership(N, mat, P, tau)
        if not v.holds:
            raise InvalidArgument(f"sampled sequence is not evidenced in V(M) at depth {P}: {v}")
    return N


SCHEDULES = {
    "linear": lambda p: p + 1,
    "half": lambda p: p // 2 + 2,
    "sqrt": lambda p: math.isqrt(p) + 1,
}
