"""Optimality criteria on Fisher information matrices.

A criterion maps a symmetric PSD information matrix to a nonnegative
scalar to be minimized over designs: smaller is better, and a singular
matrix scores +inf except for the direction criterion, which falls back
to a generalized inverse when the direction is estimable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import Infeasible, SingularInformation, WrongDimension
from .linalg import symmetric_part

RANK_TOL = 1e-10

_KINDS = ("A", "D", "LogD", "E", "C", "Gamma", "Compound")


@dataclass(frozen=True, eq=False)
class Criterion:
    """Tagged description of an optimality function.

    Use the classmethod constructors; they validate the payload. ``A``
    carries an optional symmetric positive-definite weight matrix (the
    identity when absent), ``C`` a nonzero direction vector, ``Gamma`` a
    positive exponent, and ``Compound`` a convex combination of two
    criteria.
    """

    kind: str
    weight: np.ndarray | None = None
    direction: np.ndarray | None = None
    exponent: float | None = None
    nu: float | None = None
    first: "Criterion | None" = field(default=None)
    second: "Criterion | None" = field(default=None)

    @classmethod
    def a(cls, weight=None) -> "Criterion":
        if weight is not None:
            weight = symmetric_part(np.asarray(weight, dtype=float))
            if np.max(np.abs(weight - weight.T)) > 1e-10:
                raise WrongDimension("A-criterion weight must be symmetric")
            if np.linalg.eigvalsh(weight).min() <= 0:
                raise WrongDimension("A-criterion weight must be positive definite")
            weight.flags.writeable = False
        return cls(kind="A", weight=weight)

    @classmethod
    def d(cls) -> "Criterion":
        return cls(kind="D")

    @classmethod
    def log_d(cls) -> "Criterion":
        return cls(kind="LogD")

    @classmethod
    def e(cls) -> "Criterion":
        return cls(kind="E")

    @classmethod
    def c(cls, direction) -> "Criterion":
        vec = np.atleast_1d(np.asarray(direction, dtype=float))
        if vec.ndim != 1 or np.linalg.norm(vec) == 0.0:
            raise WrongDimension("direction criterion needs a nonzero vector")
        vec.flags.writeable = False
        return cls(kind="C", direction=vec)

    @classmethod
    def gamma(cls, exponent: float) -> "Criterion":
        exponent = float(exponent)
        if not exponent > 0:
            raise WrongDimension("gamma exponent must be positive")
        return cls(kind="Gamma", exponent=exponent)

    @classmethod
    def compound(cls, nu: float, first: "Criterion", second: "Criterion") -> "Criterion":
        nu = float(nu)
        if not 0.0 <= nu <= 1.0:
            raise WrongDimension("compound mixing weight must lie in [0, 1]")
        return cls(kind="Compound", nu=nu, first=first, second=second)

    def __repr__(self) -> str:
        if self.kind == "Gamma":
            return f"Criterion.gamma({self.exponent})"
        if self.kind == "C":
            return f"Criterion.c({list(self.direction)})"
        if self.kind == "Compound":
            return f"Criterion.compound({self.nu}, {self.first!r}, {self.second!r})"
        if self.kind == "A" and self.weight is not None:
            return "Criterion.a(weight=...)"
        return f"Criterion.{self.kind.lower()}()"


def _eig(info: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(symmetric_part(np.asarray(info, dtype=float)))


def criterion_value(crit: Criterion, info: np.ndarray, rank_tol: float = RANK_TOL) -> float:
    """Evaluate a criterion on a symmetric PSD matrix.

    Singular matrices score +inf for A, D, LogD, E and Gamma. For the
    direction criterion the quadratic form is taken through the
    generalized inverse when the direction lies in the range of the
    matrix, and raises Infeasible otherwise.
    """
    info = symmetric_part(np.asarray(info, dtype=float))
    n = info.shape[0]
    w, u = _eig(info)
    singular = w.min() < rank_tol

    if crit.kind == "A":
        if singular:
            return math.inf
        if crit.weight is None:
            return float(np.sum(1.0 / w))
        return float(np.trace(np.linalg.solve(info, crit.weight)))
    if crit.kind == "D":
        if singular:
            return math.inf
        return float(np.exp(-np.sum(np.log(w))))
    if crit.kind == "LogD":
        if singular:
            return math.inf
        return float(-np.sum(np.log(w)))
    if crit.kind == "E":
        if singular:
            return math.inf
        return float(1.0 / w.min())
    if crit.kind == "Gamma":
        if singular:
            return math.inf
        g = crit.exponent
        # ((1/n) sum w_i^-g)^(1/g), evaluated in log space so large
        # exponents neither overflow nor underflow.
        return float(np.exp((logsumexp(-g * np.log(w)) - np.log(n)) / g))
    if crit.kind == "C":
        c = crit.direction
        if c.shape != (n,):
            raise WrongDimension("direction length differs from matrix size")
        comp = u.T @ c
        if singular:
            null = w < rank_tol
            if np.linalg.norm(comp[null]) >= rank_tol * np.linalg.norm(c):
                raise Infeasible("direction outside the range of the information matrix")
            keep = ~null
            return float(np.sum(comp[keep] ** 2 / w[keep]))
        return float(np.sum(comp**2 / w))
    if crit.kind == "Compound":
        total = 0.0
        for part, weight in ((crit.first, crit.nu), (crit.second, 1.0 - crit.nu)):
            if weight == 0.0:
                continue
            total += weight * criterion_value(part, info, rank_tol)
        return float(total)
    raise WrongDimension(f"unknown criterion kind {crit.kind!r}")


def efficiency(crit: Criterion, value: float, optimal_value: float) -> float:
    """Ratio of the optimal criterion value to a design's value, in [0, 1].

    An infinite value (singular design) scores 0. A value below the
    optimum beyond round-off indicates an inconsistent optimum and only
    warns.
    """
    if optimal_value < 0:
        raise WrongDimension("optimal criterion value cannot be negative")
    if math.isinf(value):
        return 0.0
    if value < optimal_value - 1e-9:
        warnings.warn(
            f"criterion value {value!r} beats the supposed optimum {optimal_value!r}",
            stacklevel=2,
        )
    if value == 0.0:
        return 1.0 if optimal_value == 0.0 else math.inf
    return optimal_value / value


def _solve_invertible(info: np.ndarray) -> np.ndarray:
    info = symmetric_part(np.asarray(info, dtype=float))
    w = np.linalg.eigvalsh(info)
    if w.min() < RANK_TOL:
        raise SingularInformation("information matrix is singular")
    return np.linalg.inv(info)


def sensitivity(crit: Criterion, info_point: np.ndarray, info_design: np.ndarray) -> float:
    """Directional-derivative kernel of a criterion at a design.

    For the weighted-A criterion this is tr(W J^-1 J_e J^-1); for D (and
    its LogD surrogate) it is tr(J^-1 J_e). Compare against
    :func:`sensitivity_threshold`: a design is optimal exactly when the
    maximum sensitivity over candidate designs equals the threshold.
    """
    inv = _solve_invertible(info_design)
    point = symmetric_part(np.asarray(info_point, dtype=float))
    if crit.kind == "A":
        weight = np.eye(inv.shape[0]) if crit.weight is None else crit.weight
        return float(np.trace(weight @ inv @ point @ inv))
    if crit.kind in ("D", "LogD"):
        return float(np.trace(inv @ point))
    raise WrongDimension("sensitivity is defined for the A and D criteria")


def sensitivity_threshold(crit: Criterion, info_design: np.ndarray) -> float:
    """Optimality threshold paired with :func:`sensitivity`."""
    inv = _solve_invertible(info_design)
    if crit.kind == "A":
        weight = np.eye(inv.shape[0]) if crit.weight is None else crit.weight
        return float(np.trace(weight @ inv))
    if crit.kind in ("D", "LogD"):
        return float(inv.shape[0])
    raise WrongDimension("sensitivity is defined for the A and D criteria")


def gill_massar_value(info: np.ndarray, info_sld: np.ndarray) -> float:
    """Qubit information budget tr(J_SLD^-1 J); at most 1 for any design."""
    inv = _solve_invertible(info_sld)
    return float(np.trace(inv @ symmetric_part(np.asarray(info, dtype=float))))


def feasibility_contains(info: np.ndarray, direction, tol: float = RANK_TOL) -> bool:
    """Whether ``direction`` lies in the range of a PSD matrix.

    True exactly when the projection of the direction onto the null
    space (eigenvalues below ``tol``) has norm below tol * |direction|.
    Membership makes the linear combination c^t theta estimable under
    the design.
    """
    c = np.atleast_1d(np.asarray(direction, dtype=float))
    if np.linalg.norm(c) == 0.0:
        raise WrongDimension("direction must be nonzero")
    w, u = _eig(np.asarray(info, dtype=float))
    null = w < tol
    if not np.any(null):
        return True
    proj = u[:, null].T @ c
    return bool(np.linalg.norm(proj) < tol * np.linalg.norm(c))


def generalized_inverse_quadratic(info: np.ndarray, direction, rank_tol: float = RANK_TOL) -> float:
    """Quadratic form c^t J^+ c through the Moore-Penrose inverse.

    Requires the direction to be estimable (see
    :func:`feasibility_contains`); feasibility makes the value
    independent of which generalized inverse is used.
    """
    c = np.atleast_1d(np.asarray(direction, dtype=float))
    if not feasibility_contains(info, c, rank_tol):
        raise Infeasible("direction outside the range of the information matrix")
    w, u = _eig(np.asarray(info, dtype=float))
    comp = u.T @ c
    keep = w >= rank_tol
    return float(np.sum(comp[keep] ** 2 / w[keep]))


def lowner_dominates(info_a: np.ndarray, info_b: np.ndarray, tol: float) -> bool:
    """Matrix ordering test: every eigenvalue of A - B at least -tol."""
    a = symmetric_part(np.asarray(info_a, dtype=float))
    b = symmetric_part(np.asarray(info_b, dtype=float))
    if a.shape != b.shape:
        raise WrongDimension("matrices must share a shape")
    return bool(np.linalg.eigvalsh(a - b).min() >= -tol)
