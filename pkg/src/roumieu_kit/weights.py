"""Weight functions in the Braun-Meise-Taylor sense, their Young conjugates,
the associated weight matrix and the comparison machinery for ``V(omega)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConstructionFailed, ExtendDepth, ExtendGrid, InvalidArgument,
                     NoGap)
from .matrices import DEFAULT_NMAX, WeightMatrix
from .sequences import (TAU_PREC, GROWTH_SLACK, WeightSequence,
                        associated_function_grid, lower_convex_envelope)
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict, combine

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
N_COARSE = 2049
DELTA_TOL = 1e-9


def geometric_grid(lo: float = 1.0, hi: float = 1e24, n: int = 4801) -> np.ndarray:
    """Geometric ``t``-grid; uniform in ``log t``."""
    if not (0 < lo < hi) or n < 3:
        raise InvalidArgument("grid needs 0 < lo < hi and at least 3 points")
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))


DEFAULT_T_GRID = (1.0, 1e24, 4801)


def default_grid() -> np.ndarray:
    return geometric_grid(*DEFAULT_T_GRID)


class WeightFunctionOmega:
    """A weight function ``omega`` with ``omega = 0`` on ``[0, 1]``.

    Kinds: ``power`` (``max(0, t^beta - 1)``, ``0 < beta <= 1``), ``logpower``
    (``max(0, log t)^q``, ``q >= 1``) and ``tabulated`` (values on a geometric
    grid starting at ``t = 1``, linear in ``log t`` between nodes and extended
    with the last slope).
    """

    def __init__(self, kind: str, params: dict | None = None, t=None, values=None):
        self.kind = kind
        self.params = {k: float(v) for k, v in (params or {}).items()}
        if kind == "power":
            b = self.params.setdefault("beta", 0.5)
            if not 0 < b <= 1:
                raise InvalidArgument("power weight needs 0 < beta <= 1")
        elif kind == "logpower":
            q = self.params.setdefault("q", 2.0)
            if not q >= 1:
                raise InvalidArgument("logpower weight needs q >= 1")
        elif kind == "tabulated":
            t = np.asarray(t, dtype=float)
            v = np.asarray(values, dtype=float)
            if t.shape != v.shape or t.size < 2:
                raise InvalidArgument("tabulated weight needs matching t and values")
            if abs(t[0] - 1.0) > 1e-12 or np.any(np.diff(t) <= 0):
                raise InvalidArgument("tabulated weight grid must be increasing and start at t=1")
            if np.any(v < 0) or abs(v[0]) > 0 or np.any(np.diff(v) < -1e-12):
                raise InvalidArgument("tabulated weight must be non-negative, non-decreasing "
                                      "and vanish at t=1")
            self._x = np.log(t)
            self._x[0] = 0.0
            self._v = np.maximum.accumulate(np.maximum(v, 0.0))
            self._slope = (self._v[-1] - self._v[-2]) / (self._x[-1] - self._x[-2])
        else:
            raise InvalidArgument(f"unknown weight function kind {kind!r}")

    @classmethod
    def power(cls, beta: float) -> "WeightFunctionOmega":
        return cls("power", {"beta": beta})

    @classmethod
    def logpower(cls, q: float) -> "WeightFunctionOmega":
        return cls("logpower", {"q": q})

    @classmethod
    def tabulated(cls, t, values) -> "WeightFunctionOmega":
        return cls("tabulated", t=t, values=values)

    @property
    def parametric(self) -> bool:
        return self.kind != "tabulated"

    def phi(self, x):
        """``phi(x) = omega(e^x)``, with ``phi = 0`` for ``x <= 0``."""
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        if self.kind == "power":
            with np.errstate(over="ignore"):
                return np.expm1(self.params["beta"] * x)
        if self.kind == "logpower":
            return x ** self.params["q"]
        inside = np.interp(x, self._x, self._v)
        beyond = self._v[-1] + self._slope * (x - self._x[-1])
        return np.where(x > self._x[-1], beyond, inside)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            x = np.where(t > 1, np.log(np.maximum(t, 1.0)), 0.0)
        return self.phi(x)

    def same_as(self, other: "WeightFunctionOmega") -> bool:
        if self.kind != other.kind:
            return False
        if self.parametric:
            return self.params == other.params
        return np.array_equal(self._x, other._x) and np.array_equal(self._v, other._v)

    def to_dict(self) -> dict:
        if self.parametric:
            return {"kind": self.kind, "params": dict(self.params)}
        return {"kind": "tabulated", "t": [float(v) for v in np.exp(self._x)],
                "values": [float(v) for v in self._v]}

    def __repr__(self):
        if self.parametric:
            args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
            return f"WeightFunctionOmega.{self.kind}({args})"
        return f"WeightFunctionOmega.tabulated({self._x.size} nodes)"


# ---------------------------------------------------------------------------
# Young conjugate

def _golden_max(f, a, b, iters=200):
    """Vectorised golden-section search for the max of unimodal ``f`` on ``[a, b]``."""
    a = a.astype(float).copy()
    b = b.astype(float).copy()
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c, None), f(d, None)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - _INVPHI * (b - a)
        new_d = a + _INVPHI * (b - a)
        # reuse the surviving interior point
        c, d = np.where(left, new_c, d), np.where(left, c, new_d)
        x_new = np.where(left, c, d)
        f_new = f(x_new, None)
        fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
        if np.all(b - a <= 1e-15 * np.maximum(1.0, np.abs(b))):
            break
    x = 0.5 * (a + b)
    return x, f(x, None)


def _auto_x_max(phi, y_max: float) -> float:
    # phi convex: phi(X) - phi(X-1) > y_max forces the maximiser below X
    X = 1.0
    while True:
        jump = float(phi(np.array([X]))[0] - phi(np.array([X - 1.0]))[0])
        if jump > y_max:
            return X
        if X > 1e9 or not math.isfinite(jump):
            raise ExtendGrid(f"sup of xy - phi(x) is not attained for y = {y_max:g}", y=y_max)
        X *= 2.0


def conjugate_values(phi, y, x_max: float | None = None, n_coarse: int = N_COARSE,
                     with_argmax: bool = False):
    """``sup_(x >= 0) (x y - phi(x))`` for every entry of ``y``.

    A coarse uniform search on ``[0, x_max]`` brackets the maximiser and a
    golden-section search refines it. ``x_max`` is sized automatically unless
    given, in which case a maximiser at the grid end raises :class:`ExtendGrid`.
    """
    y = np.asarray(y, dtype=float)
    flat = y.ravel()
    if np.any(flat < 0):
        raise InvalidArgument("the conjugate is only evaluated for y >= 0")
    out = np.zeros_like(flat)
    argx = np.zeros_like(flat)
    if flat.size == 0:
        return (out.reshape(y.shape), argx.reshape(y.shape)) if with_argmax else out.reshape(y.shape)
    user_grid = x_max is not None
    X = float(x_max) if user_grid else _auto_x_max(phi, float(flat.max()))
    xs = np.linspace(0.0, X, n_coarse)
    ph = phi(xs)
    step = xs[1] - xs[0]
    for lo in range(0, flat.size, 256):
        yy = flat[lo:lo + 256]
        vals = yy[:, None] * xs[None, :] - ph[None, :]
        k = np.argmax(vals, axis=1)
        if user_grid:
            bad = np.flatnonzero((k == n_coarse - 1) & (yy > 0))
            if bad.size:
                yb = float(yy[bad[0]])
                raise ExtendGrid(f"sup of xy - phi(x) not attained inside [0, {X:g}] "
                                 f"for y = {yb:g}", y=yb)
        coarse = vals[np.arange(yy.size), k]
        a = np.maximum(xs[k] - step, 0.0)
        b = np.minimum(xs[k] + step, X)
        xr, fr = _golden_max(lambda x, _: x * yy - phi(x), a, b)
        better = fr >= coarse
        res = np.where(better, fr, coarse)
        argx[lo:lo + 256] = np.where(better, xr, xs[k])
        # phi(0) = 0 gives phi*(y) >= 0, with equality at y = 0
        out[lo:lo + 256] = np.where(yy == 0, 0.0, np.maximum(res, 0.0))
    if with_argmax:
        return out.reshape(y.shape), argx.reshape(y.shape)
    return out.reshape(y.shape)


@dataclass
class YoungConjugate:
    """Samples of ``phi*`` on a uniform grid ``0 = y_0 < ... < y_max``.

    Off-grid values are computed by the same refined maximisation, so
    :meth:`evaluate` is exact to rounding for every ``0 <= y``.
    """

    source: WeightFunctionOmega
    y: np.ndarray
    values: np.ndarray
    x_max: float | None = None
    resolution_error: float = 0.0

    @property
    def y_max(self) -> float:
        return float(self.y[-1])

    def evaluate(self, y):
        return conjugate_values(self.source.phi, y, self.x_max)

    __call__ = evaluate

    def invariants(self, tol: float = 1e-9) -> Verdict:
        """Monotone, convex, vanishing at 0 and ``phi*(y)/y`` non-decreasing."""
        v, y = self.values, self.y
        scale = np.maximum(1.0, np.abs(v))
        parts = {}
        dv = np.diff(v)
        bad = np.flatnonzero(dv < -tol * scale[1:])
        parts["increasing"] = (Verdict(HOLDS, None) if not bad.size else
                               Verdict(FAILS, None, counterexample={"y": float(y[bad[0] + 1])}))
        d2 = v[2:] - 2 * v[1:-1] + v[:-2]
        bad = np.flatnonzero(d2 < -tol * scale[1:-1])
        parts["convex"] = (Verdict(HOLDS, None, {"min_second_difference": float(d2.min())})
                           if not bad.size else
                           Verdict(FAILS, None, counterexample={"y": float(y[bad[0] + 1])}))
        parts["zero_at_origin"] = (Verdict(HOLDS, None) if v[0] == 0 and y[0] == 0 else
                                   Verdict(FAILS, None, counterexample={"phi*(0)": float(v[0])}))
        quot = v[1:] / y[1:]
        bad = np.flatnonzero(np.diff(quot) < -tol * np.maximum(1.0, np.abs(quot[1:])))
        parts["quotient_monotone"] = (Verdict(HOLDS, None) if not bad.size else
                                      Verdict(FAILS, None,
                                              counterexample={"y": float(y[bad[0] + 2])}))
        # phi*(y)/y -> infinity can only be evidenced, not certified
        tail = max(1, quot.size // 4)
        growing = quot[-1] > quot[-tail - 1] + 1e-12 * abs(quot[-1])
        parts["quotient_growth"] = (Verdict(HOLDS, None, {"phi*(y)/y at y_max": float(quot[-1])})
                                    if growing else
                                    Verdict(INCONCLUSIVE, None,
                                            trace="phi*(y)/y is flat over the grid tail"))
        return combine(parts)

    def rows(self):
        return [(float(a), float(b)) for a, b in zip(self.y, self.values)]


def young_conjugate(omega: WeightFunctionOmega, y_max: float = 100.0, n: int = 2001,
                    x_max: float | None = None, tol: float = 1e-6) -> YoungConjugate:
    """Sample ``phi*`` on ``[0, y_max]`` and check the sampling is resolved to ``tol``."""
    if not y_max > 0 or n < 3:
        raise InvalidArgument("y_max must be positive and the grid needs >= 3 points")
    y = np.linspace(0.0, float(y_max), int(n))
    vals = conjugate_values(omega.phi, y, x_max)
    fine = conjugate_values(omega.phi, y, x_max, n_coarse=2 * N_COARSE - 1)
    err = float(np.max(np.abs(fine - vals) / np.maximum(1.0, np.abs(fine))))
    if err >= tol:
        raise ExtendGrid(f"doubling the x-resolution changes phi* by {err:.2e} (tol {tol:g})")
    return YoungConjugate(omega, y, vals, x_max, err)


def biconjugate(conj: YoungConjugate, x) -> tuple[np.ndarray, np.ndarray]:
    """``(phi*)*(x) = sup_(0 <= y <= y_max) (x y - phi*(y))``.

    Returns the values and a mask of points whose maximiser lies strictly
    inside the y-grid (only those approximate ``phi``).
    """
    x = np.asarray(x, dtype=float)
    y, v = conj.y, conj.values
    vals = x[:, None] * y[None, :] - v[None, :]
    k = np.argmax(vals, axis=1)
    interior = (k > 0) & (k < y.size - 1)
    step = y[1] - y[0]
    a = np.maximum(y[k] - step, 0.0)
    b = np.minimum(y[k] + step, y[-1])
    _, fr = _golden_max(lambda yy, _: x * yy - conj.evaluate(yy), a, b, iters=120)
    coarse = vals[np.arange(x.size), k]
    return np.maximum(fr, coarse), interior


# ---------------------------------------------------------------------------
# property checks

def _tail_decay(ratio: np.ndarray, tau: float):
    """(holds?, tail ratio) for the relative tail-decay criterion."""
    if ratio.size < 4:
        raise InvalidArgument("grid too short for a tail test")
    overall = float(ratio.max())
    if overall <= 0:
        return True, 0.0
    tail = max(1, math.ceil(ratio.size / 4))
    tail_max = float(ratio[-tail:].max())
    return tail_max < tau * overall, tail_max / overall


def _validate_grid(grid, need_hi=1e6):
    t = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 8 or t[0] > 1.0 + 1e-12 or t[-1] < need_hi:
        raise InvalidArgument(f"t-grid must span at least [1, {need_hi:g}]")
    return t


def check_weight_function(omega: WeightFunctionOmega, grid=None,
                          tau: float = TAU_PREC) -> Verdict:
    """Check (alpha), (gamma_0) and (delta) on a geometric ``t``-grid."""
    t = _validate_grid(grid)
    t = t[t >= 1.0]
    w = omega(t)
    parts = {}

    # (alpha): omega(2t)/omega(t) bounded where omega(t) >= 1
    sel = w >= 1.0
    if sel.sum() < 4:
        raise InvalidArgument("grid too short: omega stays below 1")
    r = omega(2 * t[sel]) / w[sel]
    bound = float(r.max())
    tail = max(1, r.size // 4)
    tail_bound = float(r[-tail:].max())
    growing = int(np.argmax(r)) >= r.size - tail and bound > r[:-tail].max() * (1 + GROWTH_SLACK)
    if omega.parametric or not growing:
        parts["alpha"] = Verdict(HOLDS, None, {"C": bound, "tail_C": tail_bound},
                                 trace="closed form" if omega.parametric else "")
    else:
        parts["alpha"] = Verdict(INCONCLUSIVE, None, trace="omega(2t)/omega(t) still growing")

    # (gamma_0): log t / omega(t) -> 0
    pos = w > 0
    g = np.log(t[pos]) / w[pos]
    ok, tail_ratio = _tail_decay(g, tau)
    if omega.kind == "logpower" and omega.params["q"] <= 1:
        parts["gamma0"] = Verdict(FAILS, None, counterexample={
            "t": float(t[-1]), "log t/omega(t)": float(g[-1])},
            trace="closed form: log t / (log t)^q does not tend to 0 for q <= 1")
    elif omega.parametric or ok:
        parts["gamma0"] = Verdict(HOLDS, None, {"tail_ratio": tail_ratio,
                                                "log t/omega(t) at t_max": float(g[-1])})
    else:
        parts["gamma0"] = Verdict(INCONCLUSIVE, None,
                                  trace=f"log t/omega(t) tail ratio {tail_ratio:.3g}")

    # (delta): phi convex, slopes non-decreasing
    x = np.log(t)
    ph = omega.phi(x)
    s = np.diff(ph) / np.diff(x)
    ds = np.diff(s)
    bad = np.flatnonzero(ds < -DELTA_TOL * np.maximum(1.0, np.abs(s[1:])))
    if bad.size:
        parts["delta"] = Verdict(FAILS, None, counterexample={"t": float(t[bad[0] + 1])},
                                 trace="phi(x) = omega(e^x) is not convex")
    else:
        parts["delta"] = Verdict(HOLDS, None, {"min_slope_increment": float(ds.min())})
    return combine(parts, checked_up_to=None,
                   trace=f"t-grid [{t[0]:g}, {t[-1]:g}] with {t.size} points")


def _omega_closed_order(sigma, omega):
    """Exact answer to ``sigma = o(omega)`` for parametric pairs, else None."""
    if not (sigma.parametric and omega.parametric):
        return None
    ks, ko = sigma.kind, omega.kind
    if ks == "power" and ko == "power":
        return sigma.params["beta"] < omega.params["beta"]
    if ks == "logpower" and ko == "logpower":
        return sigma.params["q"] < omega.params["q"]
    return ks == "logpower" and ko == "power"


def vomega_membership(sigma: WeightFunctionOmega, omega: WeightFunctionOmega,
                      grid=None, tau: float = TAU_PREC) -> Verdict:
    """``sigma = o(omega)`` (membership of ``sigma`` in ``V(omega)``)."""
    t = _validate_grid(grid)
    for name, f in (("sigma", sigma), ("omega", omega)):
        if check_weight_function(f, t, tau).fails:
            raise InvalidArgument(f"{name} is not a weight function")
    w = omega(t)
    pos = w > 0
    ratio = sigma(t[pos]) / w[pos]
    ok, tail_ratio = _tail_decay(ratio, tau)
    exact = _omega_closed_order(sigma, omega)
    if exact is True or (exact is None and ok):
        return Verdict(HOLDS, None, {"tail_ratio": tail_ratio},
                       trace="closed form" if exact else "sigma/omega decays over the grid tail")
    if exact is False or sigma.same_as(omega):
        return Verdict(FAILS, None, counterexample={
            "t": float(t[-1]), "sigma/omega": float(ratio[-1])},
            trace="closed form: sigma/omega does not tend to 0")
    return Verdict(INCONCLUSIVE, None, trace=f"sigma/omega tail ratio {tail_ratio:.3g}")


# ---------------------------------------------------------------------------
# weight matrix of omega

def omega_row(omega: WeightFunctionOmega, n: int, x_max: float | None = None) -> WeightSequence:
    """Row ``log M^n_p = phi*(n p)/n`` of the matrix associated with ``omega``."""
    if n < 1:
        raise InvalidArgument("omega rows are indexed from n = 1")
    return WeightSequence.from_log_function(
        "omega_row", lambda p: conjugate_values(omega.phi, n * p, x_max) / n,
        params={"n": int(n)}, extra={"omega": omega.to_dict()})


def matrix_from_omega(omega: WeightFunctionOmega, nmax: int = DEFAULT_NMAX,
                      pmax: int = 200, conj: YoungConjugate | None = None) -> WeightMatrix:
    """The matrix ``M^n_p = exp(phi*(n p)/n)``; row 0 repeats row 1."""
    if nmax < 1:
        raise InvalidArgument("nmax must be at least 1")
    x_max = None
    if conj is not None:
        if conj.y_max < nmax * pmax:
            raise ExtendGrid(f"conjugate grid reaches y={conj.y_max:g}, rows need "
                             f"y={nmax * pmax}", y=float(nmax * pmax))
        x_max = conj.x_max

    def entries(ns, ps):
        ns = np.maximum(ns, 1)
        return conjugate_values(omega.phi, ns * ps.astype(float), x_max) / ns

    return WeightMatrix("from-omega", generator=lambda n: omega_row(omega, max(n, 1), x_max),
                        nmax=nmax, meta={"omega": omega.to_dict(), "pmax": pmax},
                        log_entries=entries)


# ---------------------------------------------------------------------------
# V(omega) constructions

def interpolate_sigma(omega_N, omega: WeightFunctionOmega, grid=None,
                      tau: float = TAU_PREC) -> WeightFunctionOmega:
    """A tabulated weight ``sigma`` with ``omega_N = o(sigma)`` and ``sigma = o(omega)``.

    ``sigma`` is the lower convex envelope (in ``x = log t``) of
    ``max(sqrt(omega_N omega), sqrt(log t * omega))``; the second term keeps
    ``log t = o(sigma)`` when ``omega_N`` is tiny. Every required property is
    re-checked on the grid and a failure raises :class:`ConstructionFailed`.
    """
    t = _validate_grid(grid)
    t = t[t >= 1.0]
    if t[0] != 1.0:
        t = np.concatenate([[1.0], t])
    wN = np.maximum(np.asarray(omega_N(t), dtype=float), 0.0)
    w = omega(t)
    pos = w > 0
    ok, _ = _tail_decay(wN[pos] / w[pos], tau)
    if not ok:
        raise NoGap("omega_N = o(omega) is not evidenced on the grid")
    x = np.log(t)
    x[0] = 0.0
    base = np.maximum(np.sqrt(wN * w), np.sqrt(x * w))
    reg = np.maximum(lower_convex_envelope(x, base), 0.0)
    reg[0] = 0.0
    reg = np.maximum.accumulate(reg)
    sigma = WeightFunctionOmega.tabulated(t, reg)

    check = check_weight_function(sigma, t, tau)
    if not check.holds:
        raise ConstructionFailed(f"regularised sigma is not a weight function: {check}")
    spos = reg > 0
    up, r_up = _tail_decay(wN[spos] / reg[spos], tau)
    down, r_down = _tail_decay(reg[pos] / w[pos], tau)
    if not (up and down):
        raise ConstructionFailed(
            f"o-tests failed on the grid: omega_N/sigma tail ratio {r_up:.3g}, "
            f"sigma/omega tail ratio {r_down:.3g}")
    return sigma


def shipped_omegas() -> dict[str, WeightFunctionOmega]:
    """The weight functions the package ships as worked examples."""
    return {"power_half": WeightFunctionOmega.power(0.5),
            "power_third": WeightFunctionOmega.power(1 / 3),
            "logpower_two": WeightFunctionOmega.logpower(2.0)}


def associated_of(N: WeightSequence, P: int):
    """``t -> omega_N(t)`` truncated at depth ``P``."""
    return lambda t: associated_function_grid(N, np.asarray(t, dtype=float), P)[0]


def check_equiv_associated(sigma: WeightFunctionOmega, pmax: int = 200, grid=None) -> Verdict:
    """Two-sided bounds ``c <= omega_(M^1_sigma)(t) / sigma(t) <= C`` on the grid."""
    t = geometric_grid(10.0, 1e4, 301) if grid is None else np.asarray(grid, dtype=float)
    row = omega_row(sigma, 1)
    vals, arg = associated_function_grid(row, t, pmax)
    hit = np.flatnonzero(arg == pmax)
    if hit.size:
        tb = float(t[hit[0]])
        raise ExtendDepth(f"omega_M(t) is maximised at p = {pmax} for t = {tb:g}; "
                          "increase the depth", t=tb)
    s = sigma(t)
    sel = s >= 1.0
    if not np.any(sel):
        raise InvalidArgument("sigma < 1 on the whole grid")
    ratio = vals[sel] / s[sel]
    c, C = float(ratio.min()), float(ratio.max())
    if not c > 0:
        return Verdict(FAILS, pmax, counterexample={"t": float(t[sel][np.argmin(ratio)]),
                                                    "ratio": c})
    return Verdict(HOLDS, pmax, {"c": c, "C": C},
                   trace=f"t in [{t[sel][0]:g}, {t[sel][-1]:g}]")
