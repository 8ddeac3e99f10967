"""Classical Fisher information of designs and SLD quantum Fisher information.

The central objects are the Fisher information matrix of a POVM under a
parametric state model, its convex extension to finitely supported
design measures, and the symmetric-logarithmic-derivative (SLD)
counterpart that bounds it. For qubits, rank-one projective measurements
built from the SLD operators trace out the entire achievable region of
Fisher matrices.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    NotUnitVector,
    DegenerateObservable,
    RankDeficientState,
    SingularProbability,
    WrongDimension,
)
from .linalg import psd_inv_sqrt, psd_sqrt, symmetric_part
from .quantum import ParametricModel, Povm, validate_povm

#: Probabilities below this floor count as vanished outcomes.
PROB_FLOOR = 1e-12
#: Derivative magnitude above which a vanished outcome is an error.
DERIV_FLOOR = 1e-9
#: Design-measure weights at or below this are dropped at construction.
WEIGHT_FLOOR = 1e-12

RANK_TOL = 1e-10


class DesignMeasure:
    """A finitely supported probability measure over POVMs.

    Construction drops weights at or below ``WEIGHT_FLOOR``, renormalizes
    the rest, and validates every POVM. Weights stay in support-list
    order; summation over the support is always done in index order.
    """

    __slots__ = ("weights", "povms")

    def __init__(self, weights, povms):
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        povms = list(povms)
        if w.ndim != 1 or len(w) != len(povms):
            raise WrongDimension("need one weight per POVM")
        if len(w) == 0:
            raise WrongDimension("design measure needs at least one support point")
        if np.any(w < 0):
            raise WrongDimension("design weights must be nonnegative")
        keep = w > WEIGHT_FLOOR
        if not np.any(keep):
            raise WrongDimension("all design weights vanish")
        w = w[keep]
        povms = [p for p, k in zip(povms, keep) if k]
        dim = povms[0].dim
        for p in povms:
            if p.dim != dim:
                raise WrongDimension("design POVMs have mixed dimensions")
            validate_povm(p)
        w = w / w.sum()
        w.flags.writeable = False
        self.weights = w
        self.povms = tuple(povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    def __len__(self) -> int:
        return len(self.povms)

    def __repr__(self) -> str:
        return f"DesignMeasure(support={len(self)}, dim={self.dim})"


def born_probabilities(model: ParametricModel, theta, povm: Povm) -> np.ndarray:
    """Outcome distribution tr(rho_theta Pi_x), tiny negatives clipped to 0."""
    if povm.dim != model.dim:
        raise WrongDimension("POVM dimension differs from model dimension")
    rho = model.state_at(theta)
    p = np.array([float(np.real(np.trace(rho @ e))) for e in povm.elements])
    return np.clip(p, 0.0, None)


def probability_jacobian(model: ParametricModel, theta, povm: Povm) -> np.ndarray:
    """Derivatives d p_x / d theta_i as an (n_params, n_outcomes) array."""
    if povm.dim != model.dim:
        raise WrongDimension("POVM dimension differs from model dimension")
    rows = []
    for i in range(model.n_params):
        drho = model.state_derivative(theta, i)
        rows.append([float(np.real(np.trace(drho @ e))) for e in povm.elements])
    return np.array(rows)


def fisher_matrix_povm(model: ParametricModel, theta, povm: Povm) -> np.ndarray:
    """Fisher information matrix of the outcome distribution of one POVM.

    Outcomes with probability below ``PROB_FLOOR`` and all derivative
    components below ``DERIV_FLOOR`` contribute nothing; a vanishing
    probability with a non-vanishing derivative signals an irregular
    model and raises SingularProbability.
    """
    p = born_probabilities(model, theta, povm)
    dp = probability_jacobian(model, theta, povm)
    n = model.n_params
    info = np.zeros((n, n))
    for x in range(len(p)):
        if p[x] < PROB_FLOOR:
            if np.max(np.abs(dp[:, x])) < DERIV_FLOOR:
                continue
            raise SingularProbability(
                f"outcome {x} has probability {p[x]:.3e} but a finite derivative"
            )
        info += np.outer(dp[:, x], dp[:, x]) / p[x]
    return symmetric_part(info)


def fisher_matrix_design(model: ParametricModel, theta, design: DesignMeasure) -> np.ndarray:
    """Convex mixture of per-POVM Fisher matrices, in support order."""
    n = model.n_params
    info = np.zeros((n, n))
    for w, povm in zip(design.weights, design.povms):
        info += w * fisher_matrix_povm(model, theta, povm)
    return symmetric_part(info)


def flatten_design(design: DesignMeasure) -> Povm:
    """Single POVM with the same Fisher matrix as the design measure.

    The elements are the weight-scaled elements of every support POVM
    concatenated in support order.
    """
    elems = []
    labels = []
    labeled = all(p.labels is not None for p in design.povms)
    for k, (w, povm) in enumerate(zip(design.weights, design.povms)):
        for j, e in enumerate(povm.elements):
            elems.append(w * e)
            if labeled:
                labels.append(f"{k}:{povm.labels[j]}")
    return Povm(elems, labels=labels if labeled else None)


def sld_operators(model: ParametricModel, theta) -> list[np.ndarray]:
    """Symmetric logarithmic derivative operators, one per parameter.

    Solved in the eigenbasis of rho: L_ab = 2 (drho)_ab / (lam_a + lam_b).
    Requires a full-rank state; rank-deficient states raise rather than
    falling back to a pseudo-solution.
    """
    rho = model.state_at(theta)
    lam, vec = np.linalg.eigh(rho)
    if lam.min() <= RANK_TOL:
        raise RankDeficientState(
            f"state eigenvalue {lam.min():.3e} too small for an SLD solve"
        )
    denom = lam[:, None] + lam[None, :]
    out = []
    for i in range(model.n_params):
        d = vec.conj().T @ model.state_derivative(theta, i) @ vec
        l_tilde = 2.0 * d / denom
        l_full = vec @ l_tilde @ vec.conj().T
        out.append(0.5 * (l_full + l_full.conj().T))
    return out


def sld_fisher(model: ParametricModel, theta) -> np.ndarray:
    """SLD quantum Fisher information matrix at a full-rank state."""
    rho = model.state_at(theta)
    slds = sld_operators(model, theta)
    n = model.n_params
    info = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            value = float(np.real(np.trace(rho @ slds[i] @ slds[j])))
            info[i, j] = value
            info[j, i] = value
    return symmetric_part(info)


def sld_frame_pvm(model: ParametricModel, theta, direction) -> Povm:
    """Projective measurement of the SLD-frame observable along ``direction``.

    For a unit n-vector u the observable is
    sum_ij u_i (J_SLD^{-1/2})_ij L_j; its two eigenprojectors form a
    rank-one PVM whose Fisher matrix is the rank-one
    sqrt(J_SLD) u u^t sqrt(J_SLD).
    """
    if model.dim != 2:
        raise WrongDimension("SLD-frame measurements are defined for qubit models")
    u = np.atleast_1d(np.asarray(direction, dtype=float))
    if u.shape != (model.n_params,):
        raise WrongDimension("direction length differs from parameter count")
    if abs(np.linalg.norm(u) - 1.0) > 1e-10:
        raise NotUnitVector(f"|u| = {np.linalg.norm(u):.12f}")
    slds = sld_operators(model, theta)
    coeff = psd_inv_sqrt(sld_fisher(model, theta)) @ u
    observable = sum(c * l for c, l in zip(coeff, slds))
    w, vec = np.linalg.eigh(observable)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[1] - w[0] <= 1e-12 * scale:
        raise DegenerateObservable("frame observable is proportional to the identity")
    plus = np.outer(vec[:, 1], vec[:, 1].conj())
    minus = np.outer(vec[:, 0], vec[:, 0].conj())
    return Povm([plus, minus], labels=("+", "-"))


def fisher_region_point(model: ParametricModel, theta, weights, frame) -> np.ndarray:
    """Fisher matrix of a weighted mixture of SLD-frame measurements.

    Returns sum_i p_i sqrt(J_SLD) u_i u_i^t sqrt(J_SLD) without building
    the individual PVMs.
    """
    if model.dim != 2:
        raise WrongDimension("Fisher-region points are defined for qubit models")
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    vectors = [np.asarray(u, dtype=float) for u in frame]
    if len(w) != len(vectors):
        raise WrongDimension("need one weight per frame vector")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
        raise WrongDimension("weights must form a probability vector")
    for u in vectors:
        if u.shape != (model.n_params,):
            raise WrongDimension("frame vector length differs from parameter count")
        if abs(np.linalg.norm(u) - 1.0) > 1e-10:
            raise NotUnitVector("frame vectors must have unit norm")
    root = psd_sqrt(sld_fisher(model, theta))
    mix = np.zeros((model.n_params, model.n_params))
    for wi, u in zip(w, vectors):
        mix += wi * np.outer(u, u)
    return symmetric_part(root @ mix @ root)
