"""Closed-form optimal designs for qubit models.

For any full-rank qubit model the achievable Fisher matrices are exactly
sqrt(J_SLD) B sqrt(J_SLD) with B PSD of trace at most one, so the A-, D-,
E- and power-mean-family optima all come out in closed form: the optimal
design mixes projective measurements along the eigenvectors of the SLD
Fisher matrix with weights that are a power of its eigenvalues. The same
structure gives an exact, grid-free optimality certificate: the maximum
of tr(J_e T) over all measurements is the top eigenvalue of J_SLD T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import (
    Criterion,
    criterion_value,
    efficiency,
    sensitivity_threshold,
)
from .errors import (
    DegenerateObservable,
    OutOfDomain,
    SingularInformation,
    UnsupportedParamCount,
    WrongDimension,
)
from .fisher import (
    DesignMeasure,
    fisher_matrix_design,
    sld_fisher,
    sld_frame_pvm,
    sld_operators,
)
from .linalg import eigh_descending, psd_sqrt, symmetric_part
from .quantum import ParametricModel, Povm, pauli_pvm

GAP_TOL = 1e-9
RANK_TOL = 1e-10

CURVE_COLUMNS = ("r2", "eta_A", "eta_D", "eta_E", "eta_ST")


@dataclass
class OptimalDesignResult:
    """An optimal design with its Fisher matrix and criterion value."""

    design: DesignMeasure
    fisher: np.ndarray
    value: float
    criterion: Criterion


def _sld_frame(model: ParametricModel, theta):
    """Canonically ordered eigen-decomposition of the SLD Fisher matrix.

    Eigenvalues come in descending order; each eigenvector's sign puts
    its largest component positive, so degenerate frames stay
    reproducible.
    """
    if model.dim != 2:
        raise WrongDimension("closed-form optimal designs hold for qubit models")
    info = sld_fisher(model, theta)
    lam, vec = eigh_descending(info)
    return lam, vec, info


def _frame_design(model, theta, weights, vectors) -> DesignMeasure:
    povms = [sld_frame_pvm(model, theta, vectors[:, i]) for i in range(vectors.shape[1])]
    return DesignMeasure(weights, povms)


def gamma_optimal(model: ParametricModel, theta, exponent: float) -> OptimalDesignResult:
    """Optimal design for the power-mean criterion with a given exponent.

    The design mixes SLD-frame projective measurements along the
    eigenvectors of the SLD Fisher matrix with weights proportional to
    lambda_i^(-g/(g+1)); its Fisher matrix is
    J_SLD^(1/(g+1)) / tr(J_SLD^(-g/(g+1))).
    """
    if model.n_params == 1:
        raise UnsupportedParamCount("single-parameter models use scalar_optimal")
    if model.n_params not in (2, 3):
        raise UnsupportedParamCount("closed forms cover 2- or 3-parameter qubit models")
    exponent = float(exponent)
    if not exponent > 0:
        raise OutOfDomain("power-mean exponent must be positive")
    lam, vec, info = _sld_frame(model, theta)
    power = -exponent / (exponent + 1.0)
    raw = lam**power
    weights = raw / raw.sum()
    design = _frame_design(model, theta, weights, vec)
    fisher = symmetric_part((vec * lam ** (1.0 / (exponent + 1.0))) @ vec.T) / raw.sum()
    crit = Criterion.gamma(exponent)
    return OptimalDesignResult(design, fisher, criterion_value(crit, fisher), crit)


def a_optimal(model: ParametricModel, theta) -> OptimalDesignResult:
    """Minimize the trace of the inverse Fisher matrix.

    Equivalent to the power-mean design at exponent one; the reported
    value uses the plain trace-of-inverse normalization
    (tr(J_SLD^-1/2))^2.
    """
    result = gamma_optimal(model, theta, 1.0)
    crit = Criterion.a()
    return OptimalDesignResult(
        result.design, result.fisher, criterion_value(crit, result.fisher), crit
    )


def d_optimal(model: ParametricModel, theta) -> OptimalDesignResult:
    """Minimize the determinant of the inverse Fisher matrix.

    Uniform weights over any SLD-frame orthonormal basis are optimal;
    the canonical choice is the eigenvector frame of the SLD Fisher
    matrix, giving the Fisher matrix J_SLD / n.
    """
    if model.n_params == 1:
        raise UnsupportedParamCount("single-parameter models use scalar_optimal")
    if model.n_params not in (2, 3):
        raise UnsupportedParamCount("closed forms cover 2- or 3-parameter qubit models")
    n = model.n_params
    lam, vec, info = _sld_frame(model, theta)
    design = _frame_design(model, theta, np.full(n, 1.0 / n), vec)
    fisher = info / n
    crit = Criterion.d()
    return OptimalDesignResult(design, fisher, criterion_value(crit, fisher), crit)


def e_optimal(model: ParametricModel, theta) -> OptimalDesignResult:
    """Minimize the largest eigenvalue of the inverse Fisher matrix.

    Weights proportional to the inverse SLD eigenvalues equalize the
    spectrum: the optimal Fisher matrix is the identity over
    tr(J_SLD^-1), and the optimal value is tr(J_SLD^-1).
    """
    if model.n_params == 1:
        raise UnsupportedParamCount("single-parameter models use scalar_optimal")
    if model.n_params not in (2, 3):
        raise UnsupportedParamCount("closed forms cover 2- or 3-parameter qubit models")
    n = model.n_params
    lam, vec, _ = _sld_frame(model, theta)
    raw = 1.0 / lam
    design = _frame_design(model, theta, raw / raw.sum(), vec)
    fisher = np.eye(n) / raw.sum()
    crit = Criterion.e()
    return OptimalDesignResult(design, fisher, criterion_value(crit, fisher), crit)


def c_optimal(model: ParametricModel, theta, direction) -> tuple[Povm, float]:
    """Best measurement for estimating one linear combination of parameters.

    Returns the eigenprojector PVM of the observable
    sum_ij c_i (J_SLD^-1)_ij L_j together with the optimal value
    c^t J_SLD^-1 c. The resulting design is singular for n > 1 but keeps
    the direction estimable.
    """
    c = np.atleast_1d(np.asarray(direction, dtype=float))
    if c.shape != (model.n_params,) or np.linalg.norm(c) == 0.0:
        raise WrongDimension("direction must be a nonzero vector of parameter length")
    info = sld_fisher(model, theta)
    coeff = np.linalg.solve(info, c)
    slds = sld_operators(model, theta)
    observable = sum(k * l for k, l in zip(coeff, slds))
    povm = _eigenprojector_pvm(observable)
    value = float(c @ coeff)
    return povm, value


def scalar_optimal(model: ParametricModel, theta) -> tuple[Povm, float]:
    """Information-maximizing measurement of a one-parameter model.

    The eigenprojector PVM of the single SLD operator attains the SLD
    Fisher information, which dominates every other design.
    """
    if model.n_params != 1:
        raise UnsupportedParamCount("scalar optimum is defined for one-parameter models")
    (sld,) = sld_operators(model, theta)
    povm = _eigenprojector_pvm(sld)
    value = float(sld_fisher(model, theta)[0, 0])
    return povm, value


def _eigenprojector_pvm(observable: np.ndarray) -> Povm:
    """PVM of eigenspace projectors, grouped by eigenvalue, descending."""
    w, vec = np.linalg.eigh(observable)
    scale = max(1.0, float(np.max(np.abs(w))))
    groups: list[list[int]] = []
    for k in range(len(w) - 1, -1, -1):
        if groups and abs(w[groups[-1][-1]] - w[k]) <= 1e-10 * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    if len(groups) < 2:
        raise DegenerateObservable("observable is proportional to the identity")
    projectors = []
    for g in groups:
        cols = vec[:, g]
        projectors.append(cols @ cols.conj().T)
    return Povm(projectors)


def max_information_trace(model: ParametricModel, theta, weight) -> float:
    """Exact maximum of tr(J_e T) over all measurements of a qubit model.

    Equals the largest eigenvalue of J_SLD T for PSD T, which removes
    any grid discretization from optimality certificates.
    """
    if model.dim != 2:
        raise WrongDimension("the exact trace maximum holds for qubit models")
    t = symmetric_part(np.asarray(weight, dtype=float))
    if np.linalg.eigvalsh(t).min() < -1e-10:
        raise WrongDimension("weight matrix must be positive semidefinite")
    root = psd_sqrt(t)
    info = sld_fisher(model, theta)
    return float(np.linalg.eigvalsh(root @ info @ root).max())


def equivalence_certificate(
    model: ParametricModel, theta, design: DesignMeasure, crit: Criterion
) -> float:
    """Equivalence-theorem optimality gap of a design, computed exactly.

    The gap is the exact maximum sensitivity over all POVMs minus the
    optimality threshold; it is nonnegative up to round-off, and a gap
    within tolerance certifies global optimality over all designs,
    randomized ones included. Supports the D and weighted-A criteria.
    """
    info = fisher_matrix_design(model, theta, design)
    if np.linalg.eigvalsh(symmetric_part(info)).min() < RANK_TOL:
        raise SingularInformation("design information matrix is singular")
    inv = np.linalg.inv(symmetric_part(info))
    if crit.kind in ("D", "LogD"):
        kernel = inv
    elif crit.kind == "A":
        w = np.eye(info.shape[0]) if crit.weight is None else crit.weight
        kernel = inv @ w @ inv
    else:
        raise WrongDimension("certificates cover the D and weighted-A criteria")
    best = max_information_trace(model, theta, kernel)
    return best - sensitivity_threshold(crit if crit.kind == "A" else Criterion.d(), info)


def closed_form_inverse_fisher(tag: str, theta) -> np.ndarray:
    """Inverse Fisher matrices of the named designs for the full Bloch model.

    ``tag`` selects the A-, D-, E-optimal design or standard tomography
    ("ST"). The A form has a removable singularity at the origin, handled
    by its series limit.
    """
    t = np.atleast_1d(np.asarray(theta, dtype=float))
    if t.shape != (3,):
        raise WrongDimension("expects a Bloch 3-vector")
    r2 = float(np.dot(t, t))
    if r2 >= 1.0:
        raise OutOfDomain("Bloch vector must have norm < 1")
    eye = np.eye(3)
    outer = np.outer(t, t)
    tag = tag.upper()
    if tag == "A":
        s = math.sqrt(1.0 - r2)
        coeff = -0.5 if r2 < 1e-8 else (s - 1.0) / r2
        return (2.0 + s) * (eye + coeff * outer)
    if tag == "D":
        return 3.0 * (eye - outer)
    if tag == "E":
        return (3.0 - r2) * eye
    if tag == "ST":
        return 3.0 * np.diag(1.0 - t**2)
    raise WrongDimension(f"unknown design tag {tag!r}")


def standard_tomography() -> DesignMeasure:
    """Uniform mixture of the three Pauli projective measurements."""
    return DesignMeasure(np.full(3, 1.0 / 3.0), [pauli_pvm(k) for k in (1, 2, 3)])


def _value_from_inverse(crit: Criterion, inv: np.ndarray) -> float:
    """Criterion value computed from the inverse Fisher matrix.

    Keeps boundary rows of efficiency curves finite: the closed-form
    inverses stay bounded where the Fisher matrices themselves blow up.
    """
    inv = symmetric_part(inv)
    if crit.kind == "A":
        w = np.eye(inv.shape[0]) if crit.weight is None else crit.weight
        return float(np.trace(w @ inv))
    if crit.kind == "D":
        return float(np.linalg.det(inv))
    if crit.kind == "LogD":
        sign, logdet = np.linalg.slogdet(inv)
        return float(logdet)
    if crit.kind == "E":
        return float(np.linalg.eigvalsh(inv).max())
    if crit.kind == "C":
        return float(crit.direction @ inv @ crit.direction)
    if crit.kind == "Gamma":
        mu = np.linalg.eigvalsh(inv)
        n = inv.shape[0]
        return float((np.sum(mu**crit.exponent) / n) ** (1.0 / crit.exponent))
    if crit.kind == "Compound":
        return float(
            crit.nu * _value_from_inverse(crit.first, inv)
            + (1.0 - crit.nu) * _value_from_inverse(crit.second, inv)
        )
    raise WrongDimension(f"unknown criterion kind {crit.kind!r}")


def _optimal_value_from_sld_inverse(crit: Criterion, sld_inv: np.ndarray) -> float:
    """Unrestricted optimal criterion value from the inverse SLD matrix."""
    mu = np.linalg.eigvalsh(symmetric_part(sld_inv))
    n = sld_inv.shape[0]
    if crit.kind == "A" and crit.weight is None:
        return float(np.sum(np.sqrt(mu)) ** 2)
    if crit.kind == "D":
        return float(n**n * np.prod(mu))
    if crit.kind == "LogD":
        return float(n * math.log(n) + np.sum(np.log(mu)))
    if crit.kind == "E":
        return float(np.sum(mu))
    if crit.kind == "C":
        return float(crit.direction @ symmetric_part(sld_inv) @ crit.direction)
    if crit.kind == "Gamma":
        g = crit.exponent
        trace = float(np.sum(mu ** (g / (g + 1.0))))
        # value of the power-mean criterion at its closed-form optimum
        return float(n ** (-1.0 / g) * trace ** ((g + 1.0) / g))
    raise WrongDimension(
        "efficiency curves need a criterion with a closed-form optimum "
        "(A with identity weight, D, LogD, E, Gamma, or C)"
    )


def efficiency_curves(direction: tuple[float, float], crit: Criterion, grid: int) -> np.ndarray:
    """Efficiency of the four reference designs along one Bloch direction.

    The direction is (polar, azimuth) in radians; rows sweep the squared
    Bloch length uniformly over the open interval, endpoints pinned at
    1e-6 and 1 - 1e-6. Columns follow ``CURVE_COLUMNS``: squared length,
    then the efficiencies of the A-, D-, E-optimal designs and standard
    tomography under ``crit``.
    """
    if grid < 2:
        raise WrongDimension("curve grid needs at least 2 points")
    polar, azimuth = float(direction[0]), float(direction[1])
    unit = np.array(
        [
            math.sin(polar) * math.cos(azimuth),
            math.sin(polar) * math.sin(azimuth),
            math.cos(polar),
        ]
    )
    r2_values = np.linspace(1e-6, 1.0 - 1e-6, grid)
    rows = np.empty((grid, 5))
    for k, r2 in enumerate(r2_values):
        t = math.sqrt(r2) * unit
        sld_inv = np.eye(3) - np.outer(t, t)
        values = [
            _value_from_inverse(crit, closed_form_inverse_fisher(tag, t))
            for tag in ("A", "D", "E", "ST")
        ]
        # when one of the columns is the criterion's own optimal design,
        # reuse its value so that column's efficiency is exactly one
        if crit.kind == "A" and crit.weight is None:
            optimal = values[0]
        elif crit.kind in ("D", "LogD"):
            optimal = values[1]
        elif crit.kind == "E":
            optimal = values[2]
        else:
            optimal = _optimal_value_from_sld_inverse(crit, sld_inv)
        rows[k] = (r2, *(efficiency(crit, v, optimal) for v in values))
    return rows
