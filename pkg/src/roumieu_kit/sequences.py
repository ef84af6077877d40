"""Weight sequences and the conditions (M.0), (M.1), (M.2)', the relations
``M ⊂ N`` and ``M ≺ N``, log-convex minorants and associated functions.

Everything is computed from ``log M_p``; factorial-type sequences overflow a
double long before the depths we care about.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import DepthExceeded, InvalidArgument, InvalidSequence
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

TAU_PREC = 0.1
M0_SHRINK = 0.05
GROWTH_SLACK = 0.05
# relative slack for the (M.1) inequality in log space
M1_RTOL = 1e-12

PARAMETRIC_KINDS = ("gevrey", "selfpower", "superexp")


def _tail_length(P: int) -> int:
    return max(1, math.ceil(P / 4))


class WeightSequence:
    """A positive sequence ``(M_p)``, stored through ``log M_p``.

    Tabulated sequences are finite prefixes ``p = 0..depth``; parametric ones
    are defined for every ``p``:

    * ``gevrey``: ``c h^p (p!)^s``
    * ``selfpower``: ``c h^p p^(a p) (p!)^s`` (with ``0^0 = 1``)
    * ``superexp``: ``p^(b p^2)``

    Other code builds sequences from a log-callable with :meth:`from_log_function`.
    """

    def __init__(self, kind: str, params: dict | None = None, log_values=None,
                 log_fn: Callable[[np.ndarray], np.ndarray] | None = None,
                 depth: int | None = None, extra: dict | None = None):
        self.kind = kind
        self.params = dict(params or {})
        self.extra = dict(extra or {})
        self._log_fn = log_fn
        self._cache = np.empty(0)
        if kind == "tabulated":
            lv = np.asarray(log_values, dtype=float)
            if lv.ndim != 1 or lv.size == 0:
                raise InvalidSequence("tabulated sequence must be a non-empty list")
            if not np.all(np.isfinite(lv)):
                bad = int(np.flatnonzero(~np.isfinite(lv))[0])
                raise InvalidSequence(f"non-positive or non-finite value at p={bad}")
            self._cache = lv.copy()
            self._cache.setflags(write=False)
            self.depth = lv.size - 1
        elif kind in PARAMETRIC_KINDS:
            self._check_params()
            self.depth = None
        elif log_fn is not None:
            self.depth = depth
        else:
            raise InvalidSequence(f"unknown sequence kind {kind!r}")

    # construction helpers -------------------------------------------------
    @classmethod
    def tabulated(cls, values) -> "WeightSequence":
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise InvalidSequence("tabulated sequence must be a non-empty list")
        if np.any(~(v > 0)):
            bad = int(np.flatnonzero(~(v > 0))[0])
            raise InvalidSequence(f"non-positive value {v[bad]!r} at p={bad}")
        return cls("tabulated", log_values=np.log(v))

    @classmethod
    def from_logs(cls, log_values) -> "WeightSequence":
        return cls("tabulated", log_values=log_values)

    @classmethod
    def gevrey(cls, s: float = 1.0, h: float = 1.0, c: float = 1.0) -> "WeightSequence":
        return cls("gevrey", {"s": s, "h": h, "c": c})

    @classmethod
    def selfpower(cls, a: float = 1.0, s: float = 0.0, h: float = 1.0,
                  c: float = 1.0) -> "WeightSequence":
        return cls("selfpower", {"a": a, "s": s, "h": h, "c": c})

    @classmethod
    def superexp(cls, b: float = 1.0) -> "WeightSequence":
        return cls("superexp", {"b": b})

    @classmethod
    def from_log_function(cls, kind: str, log_fn, params=None, depth=None,
                          extra=None) -> "WeightSequence":
        return cls(kind, params, log_fn=log_fn, depth=depth, extra=extra)

    def _check_params(self):
        p = self.params
        defaults = {"gevrey": {"s": 1.0, "h": 1.0, "c": 1.0},
                    "selfpower": {"a": 1.0, "s": 0.0, "h": 1.0, "c": 1.0},
                    "superexp": {"b": 1.0}}[self.kind]
        unknown = set(p) - set(defaults)
        if unknown:
            raise InvalidSequence(f"unknown parameter(s) {sorted(unknown)} for {self.kind}")
        for k, v in defaults.items():
            p[k] = float(p.get(k, v))
        for k in ("h", "c"):
            if k in p and not p[k] > 0:
                raise InvalidSequence(f"parameter {k} must be positive")

    # evaluation -------------------------------------------------------------
    def _eval_parametric(self, p: np.ndarray) -> np.ndarray:
        q = self.params
        if self.kind == "gevrey":
            return math.log(q["c"]) + p * math.log(q["h"]) + q["s"] * gammaln(p + 1)
        plogp = np.where(p > 0, p * np.log(np.maximum(p, 1)), 0.0)
        if self.kind == "selfpower":
            return (math.log(q["c"]) + p * math.log(q["h"]) + q["s"] * gammaln(p + 1)
                    + q["a"] * plogp)
        return q["b"] * p * plogp

    def logs(self, P: int) -> np.ndarray:
        """``log M_p`` for ``p = 0..P`` (read-only array)."""
        P = int(P)
        if P < 0:
            raise InvalidArgument("depth must be non-negative")
        if self.depth is not None and P > self.depth:
            raise DepthExceeded(f"sequence is only defined up to p={self.depth}, "
                                f"p={P} requested")
        if self._cache.size <= P:
            # grow geometrically so repeated deeper requests stay cheap
            n = max(P + 1, 2 * self._cache.size)
            if self.depth is not None:
                n = min(n, self.depth + 1)
            p = np.arange(n, dtype=float)
            vals = (self._eval_parametric(p) if self.kind in PARAMETRIC_KINDS
                    else np.asarray(self._log_fn(p), dtype=float))
            if not np.all(np.isfinite(vals)):
                bad = int(np.flatnonzero(~np.isfinite(vals))[0])
                raise InvalidSequence(f"non-positive or non-finite value at p={bad}")
            vals.setflags(write=False)
            self._cache = vals
        return self._cache[:P + 1]

    def log(self, p: int) -> float:
        return float(self.logs(p)[p])

    def values(self, P: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.logs(P))

    def available(self, P: int) -> bool:
        return self.depth is None or self.depth >= P

    def same_as(self, other: "WeightSequence", P: int | None = None) -> bool:
        """Structural identity (same closed form, or same tabulated data)."""
        if self is other:
            return True
        if self.kind in PARAMETRIC_KINDS or other.kind in PARAMETRIC_KINDS:
            return self.kind == other.kind and self.params == other.params
        if self.kind == other.kind and self.params == other.params and self.extra \
                and self.extra == other.extra:
            return True
        if self.depth is not None and other.depth is not None:
            return self.depth == other.depth and np.array_equal(
                self.logs(self.depth), other.logs(other.depth))
        return False

    def to_dict(self, P: int | None = None) -> dict:
        if self.kind in PARAMETRIC_KINDS:
            return {"kind": self.kind, "params": dict(self.params)}
        depth = self.depth if self.depth is not None else P
        if depth is None:
            raise InvalidArgument(f"a depth is needed to serialise a {self.kind} sequence")
        out = {"kind": "tabulated", "log_values": [float(x) for x in self.logs(depth)]}
        if self.kind != "tabulated":
            out["source"] = {"kind": self.kind, "params": dict(self.params), **self.extra}
        return out

    def __repr__(self):
        if self.kind in PARAMETRIC_KINDS:
            args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
            return f"WeightSequence.{self.kind}({args})"
        return f"WeightSequence({self.kind}, depth={self.depth})"


# ---------------------------------------------------------------------------
# conditions

def _require_depth(P):
    if int(P) != P or P < 2:
        raise InvalidArgument(f"depth must be an integer >= 2, got {P!r}")
    return int(P)


def m1_violations(logs: np.ndarray) -> np.ndarray:
    """Indices ``p`` (1 <= p <= len-2) where ``M_p^2 > M_(p-1) M_(p+1)``."""
    lhs = 2 * logs[1:-1]
    rhs = logs[:-2] + logs[2:]
    tol = M1_RTOL * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return np.flatnonzero(lhs > rhs + tol) + 1


def check_condition(seq: WeightSequence, cond: str, P: int) -> Verdict:
    """Check ``M0``, ``M1`` or ``M2prime`` on the prefix ``p <= P``."""
    P = _require_depth(P)
    cond = cond.replace("'", "prime").replace(".", "").upper().replace("PRIME", "prime")
    if cond == "M1":
        return _check_m1(seq, P)
    if cond == "M0":
        return _check_m0(seq, P)
    if cond == "M2prime":
        return _check_m2prime(seq, P)
    raise InvalidArgument(f"unknown condition {cond!r}; expected M0, M1 or M2prime")


def _check_m1(seq, P):
    logs = seq.logs(P)
    bad = m1_violations(logs)
    if bad.size:
        p = int(bad[0])
        return Verdict(FAILS, P, counterexample={
            "p": p, "M_p^2": math.exp(min(2 * logs[p], 700.0)),
            "M_(p-1)M_(p+1)": math.exp(min(logs[p - 1] + logs[p + 1], 700.0)),
            "log_M_p^2": float(2 * logs[p]),
            "log_M_(p-1)M_(p+1)": float(logs[p - 1] + logs[p + 1])},
            trace=f"M_{p}^2 > M_{p-1} M_{p+1}")
    return Verdict(HOLDS, P, {"checked_indices": [1, P - 1]},
                   trace="M_p^2 <= M_(p-1) M_(p+1) at every 1 <= p <= P-1")


def _check_m0(seq, P):
    logs = seq.logs(P)
    c = min(1.0, math.exp(logs[0]))
    if seq.kind in ("gevrey", "selfpower") and seq.params["s"] >= 0 \
            and seq.params.get("a", 0.0) >= 0:
        q = seq.params
        # (p!)^s >= 1 and p^(ap) >= 1, so M_p >= c h^p for all p
        return Verdict(HOLDS, P, {"c": q["c"], "h": q["h"]},
                       trace="closed form certificate")
    p = np.arange(1, P + 1)
    roots = logs[1:] / p
    log_h = float(roots.min())
    head = P - _tail_length(P)
    if head >= 1:
        log_h_head = float(roots[:head].min())
        if log_h < log_h_head + math.log(1 - M0_SHRINK):
            return Verdict(INCONCLUSIVE, P,
                           trace=f"min M_p^(1/p) keeps shrinking over the last quarter "
                                 f"({math.exp(log_h_head):.4g} -> {math.exp(log_h):.4g})")
    return Verdict(HOLDS, P, {"c": c, "h": math.exp(log_h)},
                   trace="M_p >= c h^p at every checked p")


def _m2_constants(log_next: np.ndarray, log_base: np.ndarray, P: int):
    """C = max(1, M_1/M_0) and the smallest H with M'_(p+1) <= C H^p M_p, p <= P.

    ``log_next`` holds log M'_1..M'_(P+1), ``log_base`` log M_0..M_P.
    Returns (log C, log H, per-p H estimates, bounded?).
    """
    log_c = max(0.0, float(log_next[0] - log_base[0]))
    p = np.arange(1, P + 1)
    est = (log_next[1:] - log_c - log_base[1:]) / p
    k = int(np.argmax(est))
    log_h = float(est[k])
    head = P - _tail_length(P)
    bounded = True
    if k >= head and head >= 1:
        # the maximum sits in the last quarter; accept only if it barely grew
        bounded = log_h <= float(est[:head].max()) + math.log(1 + GROWTH_SLACK)
    return log_c, log_h, est, bounded


def _check_m2prime(seq, P):
    if seq.kind == "gevrey":
        q = seq.params
        # M_(p+1)/M_p = h (p+1)^s <= max(1,h) (2^s)^p since p+1 <= 2^p
        if q["s"] >= 0:
            return Verdict(HOLDS, P, {"C": max(1.0, q["h"]), "H": 2.0 ** q["s"]},
                           trace="closed form certificate (p+1 <= 2^p)")
    logs = seq.logs(P + 1)
    log_c, log_h, est, bounded = _m2_constants(logs[1:], logs[:-1], P)
    if not bounded:
        return Verdict(INCONCLUSIVE, P,
                       trace=f"(M_(p+1)/(C M_p))^(1/p) still growing at p={P} "
                             f"(estimate {math.exp(log_h):.4g})")
    return Verdict(HOLDS, P, {"C": math.exp(log_c), "H": math.exp(log_h)},
                   trace="M_(p+1) <= C H^p M_p at every p <= P")


# ---------------------------------------------------------------------------
# convex envelope

def lower_convex_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull vertices of points sorted by ``x``.

    Monotone chain; both endpoints are always vertices and collinear interior
    points are dropped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hull: list[int] = []
    for i in range(x.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=int)


def lower_convex_envelope(x, y) -> np.ndarray:
    """Greatest convex minorant of the points ``(x_i, y_i)``, sampled at ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    idx = lower_convex_hull(x, y)
    env = np.interp(x, x[idx], y[idx])
    env[idx] = y[idx]
    return np.minimum(env, y)


def log_convex_minorant(seq: WeightSequence, P: int | None = None) -> WeightSequence:
    """Largest log-convex sequence below ``seq`` on ``p = 0..P``."""
    if P is None:
        if seq.depth is None:
            raise InvalidArgument("a depth is required for a parametric sequence")
        P = seq.depth
    logs = seq.logs(P)
    env = lower_convex_envelope(np.arange(P + 1), logs)
    return WeightSequence.from_logs(env)


# ---------------------------------------------------------------------------
# relations

def _gevrey_pair(M, N):
    return M.kind == "gevrey" and N.kind == "gevrey"


def _relation_closed_form(M, N, rel, P):
    a, b = M.params, N.params
    ds = a["s"] - b["s"]
    ratio_h = a["h"] / b["h"]
    ratio_c = a["c"] / b["c"]
    if rel == "subset":
        if ds <= 0:
            # (p!)^ds <= 1
            return Verdict(HOLDS, P, {"C": ratio_c, "h": ratio_h},
                           trace="closed form: M_p/N_p = (c1/c2)(h1/h2)^p (p!)^(s1-s2)")
        return Verdict(FAILS, P, {}, {"p": P, "reason": f"(p!)^({ds:g}/p) is unbounded"},
                       trace="closed form: s1 > s2")
    if ds < 0:
        return Verdict(HOLDS, P, {"decay": f"(p!)^({ds:g}/p) -> 0"},
                       trace="closed form: s1 < s2")
    # with h below the limit of (M_p/N_p)^(1/p) the quotient grows like 2^p
    h_test = ratio_h / 2
    log_ratio = math.log(ratio_c) + P * math.log(2) + ds * float(gammaln(P + 1))
    return Verdict(FAILS, P, {}, {"h": h_test, "p": P, "log_ratio": log_ratio},
                   trace=f"closed form: sup_p M_p/({h_test:g}^p N_p) = infinity")


def root_quotients(M: WeightSequence, N: WeightSequence, P: int) -> np.ndarray:
    """``log (M_p/N_p)^(1/p)`` for ``p = 1..P``."""
    p = np.arange(1, P + 1)
    return (M.logs(P)[1:] - N.logs(P)[1:]) / p


def relation(M: WeightSequence, N: WeightSequence, rel: str, P: int,
             tau: float = TAU_PREC) -> Verdict:
    """Check ``M ⊂ N`` (``rel="subset"``) or ``M ≺ N`` (``rel="prec"``)."""
    P = _require_depth(P)
    if rel not in ("subset", "prec"):
        raise InvalidArgument(f"unknown relation {rel!r}")
    if not tau > 0:
        raise InvalidArgument("tau must be positive")
    if _gevrey_pair(M, N):
        return _relation_closed_form(M, N, rel, P)
    lq = root_quotients(M, N, P)
    tail = _tail_length(P)
    k = int(np.argmax(lq))
    if rel == "subset":
        head = P - tail
        if k >= head and head >= 1 and lq[k] > lq[:head].max() + math.log(1 + GROWTH_SLACK):
            return Verdict(INCONCLUSIVE, P, trace=f"(M_p/N_p)^(1/p) still growing at p={P}")
        log_h = float(lq[-tail:].max())
        lm, ln = M.logs(P), N.logs(P)
        log_c = float(np.max(lm - ln - np.arange(P + 1) * log_h))
        return Verdict(HOLDS, P, {"C": math.exp(log_c), "h": math.exp(log_h)},
                       trace="M_p <= C h^p N_p at every checked p")
    tail_max = float(lq[-tail:].max())
    overall = float(lq.max())
    if tail_max < overall + math.log(tau):
        return Verdict(HOLDS, P, {"tail_ratio": math.exp(tail_max - overall),
                                  "q_P": math.exp(float(lq[-1]))},
                       trace="(M_p/N_p)^(1/p) decays over the last quarter")
    if M.same_as(N):
        return Verdict(FAILS, P, {}, {"h": 0.5, "p": P, "log_ratio": P * math.log(2)},
                       trace="identical sequences: the quotient is constant 1")
    return Verdict(INCONCLUSIVE, P,
                   trace=f"tail max of (M_p/N_p)^(1/p) is {math.exp(tail_max - overall):.3g} "
                         f"of the overall max (needs < {tau:g})")


# ---------------------------------------------------------------------------
# associated function

class AssociatedValue(NamedTuple):
    value: float
    argmax: int
    boundary: bool


def associated_function(N: WeightSequence, t: float, P: int) -> AssociatedValue:
    """``max_(p <= P) log(t^p N_0 / N_p)`` with the maximising index."""
    if not t >= 0:
        raise InvalidArgument(f"t must be non-negative, got {t!r}")
    vals, arg = associated_function_grid(N, np.array([t], dtype=float), P)
    return AssociatedValue(float(vals[0]), int(arg[0]), int(arg[0]) == P)


def associated_function_grid(N: WeightSequence, t: np.ndarray, P: int):
    """Vectorised associated function; returns (values, argmax indices)."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t >= 0)):
        raise InvalidArgument("t must be non-negative")
    logs = N.logs(P)
    p = np.arange(P + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.log(t)
        # p*log t with the convention 0*log 0 = 0
        terms = np.where(p[None, :] == 0, 0.0, p[None, :] * logt[:, None])
    terms = terms + (logs[0] - logs)[None, :]
    # ties go to the smallest p
    arg = np.argmax(terms, axis=1)
    return terms[np.arange(t.size), arg], arg


# ---------------------------------------------------------------------------

def scale_geometric(N: WeightSequence, rho: float) -> WeightSequence:
    """The sequence ``(N_p rho^p)``."""
    if not rho > 0:
        raise InvalidArgument(f"rho must be positive, got {rho!r}")
    if N.kind == "gevrey":
        q = N.params
        return WeightSequence.gevrey(q["s"], q["h"] * rho, q["c"])
    if N.kind == "selfpower":
        q = dict(N.params)
        q["h"] *= rho
        return WeightSequence("selfpower", q)
    lr = math.log(rho)
    if N.depth is not None:
        return WeightSequence.from_logs(N.logs(N.depth) + lr * np.arange(N.depth + 1))
    return WeightSequence.from_log_function(
        "scaled", lambda p: N.logs(int(p[-1]))[p.astype(int)] + lr * p,
        params={"rho": rho})
