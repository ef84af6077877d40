"""Derivative-bound profiles and the seminorm systems evaluated on them.

A profile is the sequence ``a_p = sup_K |f^(p)|`` of a test function on one
compact set; every seminorm only sees the function through it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlockNotFound, ExtendGrid, InvalidArgument
from .family import RSequence, log_product_weights
from .matrices import (SCHEDULES, VWitness, WeightMatrix, vset_membership, vset_sample,
                       witness_diagonal)
from .sequences import TAU_PREC, WeightSequence, _tail_length
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict
from .weights import WeightFunctionOmega, YoungConjugate, matrix_from_omega

DEFAULT_H_GRID = (1.0, 0.5)
DEFAULT_THRESHOLD = 1e6


@dataclass
class DerivativeBoundProfile:
    """``a_p`` for ``p = 0..`` together with where it came from."""

    name: str
    sequence: WeightSequence
    provenance: dict = field(default_factory=lambda: {"kind": "synthetic"})

    def logs(self, P: int) -> np.ndarray:
        return self.sequence.logs(P)

    def scaled(self, lam: float) -> "DerivativeBoundProfile":
        if not lam > 0:
            raise InvalidArgument("scaling factor must be positive")
        q = self.sequence
        if q.kind in ("gevrey", "selfpower"):
            params = dict(q.params, c=q.params["c"] * lam)
            seq = WeightSequence(q.kind, params)
        else:
            seq = WeightSequence.from_log_function(
                "scaled", lambda p: q.logs(int(p[-1]))[p.astype(int)] + math.log(lam),
                params={"lambda": lam}, depth=q.depth)
        return DerivativeBoundProfile(f"{lam:g}*{self.name}", seq, dict(self.provenance))

    def to_dict(self, P: int | None = None) -> dict:
        out = {"name": self.name, "provenance": dict(self.provenance)}
        seq = self.sequence
        if seq.kind in ("gevrey", "selfpower", "superexp"):
            out["family"] = seq.to_dict()
        else:
            out["a_log"] = seq.to_dict(P)["log_values"]
        return out


def _log_array(a, P: int) -> np.ndarray:
    if isinstance(a, DerivativeBoundProfile):
        return a.logs(P)
    if isinstance(a, WeightSequence):
        return a.logs(P)
    arr = np.asarray(a, dtype=float)
    if arr.size < P + 1 or np.any(~(arr[:P + 1] > 0)):
        raise InvalidArgument(f"profile needs {P + 1} positive entries")
    return np.log(arr[:P + 1])


@dataclass
class SeminormValue:
    """``max_(p<=P)`` of a log-ratio sequence with its truncation diagnostics."""

    log_value: float
    argmax: int
    depth: int
    log_ratios: np.ndarray
    partial_log_max: np.ndarray

    @classmethod
    def from_log_ratios(cls, lr: np.ndarray) -> "SeminormValue":
        lr = np.asarray(lr, dtype=float)
        running = np.maximum.accumulate(lr)
        k = int(np.argmax(lr))
        return cls(float(lr[k]), k, lr.size - 1, lr, running)

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709 else math.inf

    @property
    def boundary(self) -> bool:
        return self.argmax == self.depth

    @property
    def stabilized(self) -> bool:
        """Partial maxima constant over the last quarter of the prefix."""
        tail = _tail_length(self.depth)
        return bool(self.partial_log_max[-1] <= self.partial_log_max[-tail - 1])

    @property
    def finite(self) -> bool:
        return not self.boundary and self.stabilized

    def to_dict(self) -> dict:
        return {"value": self.value, "log_value": self.log_value, "argmax": self.argmax,
                "boundary_attained": self.boundary, "stabilized": self.stabilized,
                "depth": self.depth}

    def trace_rows(self):
        """``(p, a_p/N_p)`` and running maxima, in log form."""
        return [(p, float(r), float(m))
                for p, (r, m) in enumerate(zip(self.log_ratios, self.partial_log_max))]


def seminorm_Mh(profile, M: WeightSequence, h: float, P: int) -> SeminormValue:
    """``max_(p<=P) h^p a_p / M_p``."""
    if not h > 0:
        raise InvalidArgument("h must be positive")
    la = _log_array(profile, P)
    return SeminormValue.from_log_ratios(la + np.arange(P + 1) * math.log(h) - M.logs(P))


def seminorm_N1(profile, N: WeightSequence, P: int) -> SeminormValue:
    """``max_(p<=P) a_p / N_p``."""
    return SeminormValue.from_log_ratios(_log_array(profile, P) - N.logs(P))


def seminorm_omega_rho(profile, conj: YoungConjugate, rho: float, P: int) -> SeminormValue:
    """``max_(p<=P) a_p exp(-phi*(rho p)/rho)``."""
    if not rho > 0:
        raise InvalidArgument("rho must be positive")
    if rho * P > conj.y_max:
        raise ExtendGrid(f"conjugate grid ends at y={conj.y_max:g}, rho*P = {rho * P:g}",
                         y=rho * P)
    la = _log_array(profile, P)
    return SeminormValue.from_log_ratios(la - conj.evaluate(rho * np.arange(P + 1)) / rho)


def seminorm_r(profile, M: WeightSequence, r: RSequence, P: int) -> SeminormValue:
    """``max_(p<=P) a_p / (M_p r_0 ... r_p)``."""
    return SeminormValue.from_log_ratios(_log_array(profile, P) - log_product_weights(M, r, P))


# ---------------------------------------------------------------------------
# membership on both sides

def roumieu_membership(profile, mat: WeightMatrix, h_grid=DEFAULT_H_GRID,
                       P: int = 200) -> Verdict:
    """Inductive side: some row ``n`` and ``h`` in the grid give a finite ``M^n,h`` seminorm.

    Never returns *fails*: a prefix cannot refute membership in an inductive limit.
    """
    hs = sorted({float(h) for h in h_grid}, reverse=True)
    if not hs:
        raise InvalidArgument("search grid is empty")
    tried = 0
    for n, row in mat.distinct_rows():
        for h in hs:
            s = seminorm_Mh(profile, row, h, P)
            tried += 1
            if s.finite:
                return Verdict(HOLDS, P, {"n": n, "h": h, "bound": s.value,
                                          "argmax": s.argmax})
    return Verdict(INCONCLUSIVE, P,
                   trace=f"all {tried} (n, h) grid points diverge or are unstable on the prefix")


def diagonal_refutation(profile, mat: WeightMatrix, P: int,
                        threshold: float = DEFAULT_THRESHOLD) -> VWitness | None:
    """Diagonal witness over all materialised rows whose last block pushes the
    partial sup of ``a_p/N_p`` beyond ``threshold``, or None."""
    if mat.nmax < 1:
        return None
    try:
        w = witness_diagonal(profile, mat, P, thresholds=(threshold,))
    except BlockNotFound:
        return None
    if w.final_block_log_sup >= math.log(threshold):
        return w
    return None


def default_samples(mat: WeightMatrix, P: int, tau: float = TAU_PREC,
                    schedules=("linear", "half")) -> list[WeightSequence]:
    return [vset_sample(mat, SCHEDULES[name], P, check=True, tau=tau) for name in schedules]


def projective_membership(profile, mat: WeightMatrix, samples, P: int = 200,
                          threshold: float = DEFAULT_THRESHOLD,
                          tau: float = TAU_PREC) -> Verdict:
    """Projective side: finite ``N,1`` seminorms for every sampled ``N`` in ``V(M)``.

    A diagonal witness whose divergence crosses ``threshold`` on the last block
    turns the verdict into *fails* with the witness attached.
    """
    for i, N in enumerate(samples):
        v = vset_membership(N, mat, P, tau)
        if not v.holds:
            raise InvalidArgument(f"sample {i} is not evidenced in V(M): {v}")
    w = diagonal_refutation(profile, mat, P, threshold)
    if w is not None:
        return Verdict(FAILS, P, counterexample={
            "blocks": [list(b) for b in w.blocks],
            "final_block_sup_log": w.final_block_log_sup,
            "threshold": threshold},
            trace="diagonal witness in V(M) with divergent partial sups")
    values = [seminorm_N1(profile, N, P) for N in samples]
    unstable = [i for i, s in enumerate(values) if not s.finite]
    if not unstable and values:
        return Verdict(HOLDS, P, {"samples": len(values),
                                  "max_bound": max(s.value for s in values)})
    why = (f"samples {unstable} do not stabilise" if values else "no samples given")
    return Verdict(INCONCLUSIVE, P, trace=why)


FORBIDDEN = {(HOLDS, FAILS), (FAILS, HOLDS)}


@dataclass
class EquivalenceReport:
    profile: str
    matrix: str
    inductive: Verdict
    projective: Verdict
    seminorms: list[SeminormValue]
    witness: VWitness | None = None
    config: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return (self.inductive.status, self.projective.status) not in FORBIDDEN

    @property
    def pair(self) -> tuple[str, str]:
        return self.inductive.status, self.projective.status

    def to_dict(self) -> dict:
        out = {"config": self.config, "profile": self.profile, "matrix": self.matrix,
               "inductive": self.inductive.to_dict(),
               "projective": self.projective.to_dict(),
               "consistent": self.consistent,
               "samples": [s.to_dict() for s in self.seminorms]}
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        return out


def equivalence_report(profile: DerivativeBoundProfile, mat: WeightMatrix, P: int = 200,
                       h_grid=DEFAULT_H_GRID, threshold: float = DEFAULT_THRESHOLD,
                       tau: float = TAU_PREC, samples=None, matrix_name: str = "",
                       config: dict | None = None) -> EquivalenceReport:
    """Evaluate both seminorm systems on one profile and flag contradictions."""
    if samples is None:
        samples = default_samples(mat, P, tau)
    ind = roumieu_membership(profile, mat, h_grid, P)
    proj = projective_membership(profile, mat, samples, P, threshold, tau)
    w = diagonal_refutation(profile, mat, P, threshold) if proj.fails else None
    return EquivalenceReport(profile.name, matrix_name or repr(mat), ind, proj,
                             [seminorm_N1(profile, N, P) for N in samples], w,
                             dict(config or {}))


# ---------------------------------------------------------------------------
# shipped corpus

def _profile(name, seq, **prov):
    return DerivativeBoundProfile(name, seq, prov or {"kind": "synthetic"})


def corpus() -> list[DerivativeBoundProfile]:
    """The shipped profiles: two backed by explicit functions, the rest synthetic."""
    return [
        _profile("inverse_linear", WeightSequence.gevrey(1.0, h=2.0, c=2.0),
                 kind="function-backed", function="1/(1-x)", K=[-0.5, 0.5],
                 method="exact: sup of p-th derivative is p! 2^(p+1) at x = 1/2"),
        _profile("sine", WeightSequence.gevrey(0.0),
                 kind="function-backed", function="sin(x)", K=[0.0, 2 * math.pi],
                 method="exact: every derivative is +-sin or +-cos with sup 1"),
        _profile("gevrey2", WeightSequence.gevrey(2.0)),
        _profile("gevrey2.2", WeightSequence.gevrey(2.2)),
        _profile("selfpower_factorial", WeightSequence.selfpower(a=1.0, s=1.0)),
        _profile("scaled_gevrey1.5", WeightSequence.gevrey(1.5, h=3.0)),
        _profile("gevrey0.5", WeightSequence.gevrey(0.5)),
    ]


def corpus_profile(name: str) -> DerivativeBoundProfile:
    for prof in corpus():
        if prof.name == name:
            return prof
    raise InvalidArgument(f"no corpus profile named {name!r}")


def sweep_matrices(nmax: int = 8, pmax: int = 200) -> dict[str, WeightMatrix]:
    """Matrices used by the consistency sweep."""
    return {"constant_factorial": WeightMatrix.constant(WeightSequence.gevrey(1.0), nmax),
            "constant_gevrey2": WeightMatrix.constant(WeightSequence.gevrey(2.0), nmax),
            "omega_power_half": matrix_from_omega(WeightFunctionOmega.power(0.5), nmax, pmax)}
