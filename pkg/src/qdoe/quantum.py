"""Density matrices, POVMs, and smooth parametric state models.

Matrices are dense complex numpy arrays. Dimensions stay small (the
built-in models are qubits), so validation goes through full
eigendecompositions. All objects are immutable after construction and
every operation is a pure function of its arguments.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    NonPsdElement,
    NotResolutionOfIdentity,
    OutOfDomain,
    WrongDimension,
)
from .linalg import hermitian_part, min_eigenvalue

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10

#: Pauli matrices sigma_1, sigma_2, sigma_3.
SIGMA = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.flags.writeable = False
    return out


def require_hermitian(matrix, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    """Validate entry-wise conjugate symmetry and return a complex copy."""
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise WrongDimension(f"{name} must be square, got shape {a.shape}")
    if np.max(np.abs(a - a.conj().T)) > tol:
        raise WrongDimension(f"{name} is not Hermitian within {tol}")
    return a


def check_density_matrix(rho: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD, unit trace."""
    rho = require_hermitian(rho, name="density matrix")
    if min_eigenvalue(rho) < -tol:
        raise NonPsdElement("density matrix has a negative eigenvalue")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise WrongDimension("density matrix trace differs from 1")
    return rho


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Pauli expectation values (tr(rho sigma_j))_{j=1..3} of a qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise WrongDimension("bloch_vector requires a 2x2 density matrix")
    return np.array([float(np.real(np.trace(rho @ s))) for s in SIGMA])


class Povm:
    """A positive operator-valued measure: PSD matrices summing to identity.

    Construction checks shapes and Hermitian symmetry only; use
    :func:`validate_povm` for the PSD and resolution-of-identity
    invariants. Zero elements are legal.
    """

    __slots__ = ("elements", "labels")

    def __init__(self, elements, labels=None):
        elems = tuple(_frozen(require_hermitian(e, name="POVM element")) for e in elements)
        if not elems:
            raise WrongDimension("POVM needs at least one element")
        dim = elems[0].shape[0]
        if any(e.shape[0] != dim for e in elems):
            raise WrongDimension("POVM elements have mixed dimensions")
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != len(elems):
                raise WrongDimension("label count differs from element count")
        self.elements = elems
        self.labels = labels

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self) -> str:
        return f"Povm(dim={self.dim}, outcomes={len(self)})"


def validate_povm(povm: Povm, tol: float = PSD_TOL) -> None:
    """Check PSD elements and element sum equal to the identity.

    Raises NonPsdElement or NotResolutionOfIdentity; returns None when
    both invariants hold.
    """
    for k, e in enumerate(povm.elements):
        lo = min_eigenvalue(e)
        if lo < -tol:
            raise NonPsdElement(f"element {k} has eigenvalue {lo:.3e}")
    total = sum(povm.elements)
    dev = np.max(np.abs(total - np.eye(povm.dim)))
    if dev > tol:
        raise NotResolutionOfIdentity(f"element sum deviates from identity by {dev:.3e}")


def pauli_pvm(axis: int) -> Povm:
    """Projective measurement onto the +/-1 eigenvectors of a Pauli matrix.

    ``axis`` is 1, 2 or 3; the +1 projector comes first.
    """
    if axis not in (1, 2, 3):
        raise WrongDimension("Pauli axis must be 1, 2 or 3")
    plus = 0.5 * (np.eye(2, dtype=complex) + SIGMA[axis - 1])
    minus = 0.5 * (np.eye(2, dtype=complex) - SIGMA[axis - 1])
    return Povm([plus, minus], labels=(f"s{axis}+", f"s{axis}-"))


def mix_povms(first: Povm, second: Povm, lam: float) -> Povm:
    """Convex mixture: concatenate lam-scaled and (1-lam)-scaled elements.

    Zero-scaled elements are retained; use :func:`merge_proportional` to
    drop them.
    """
    if first.dim != second.dim:
        raise WrongDimension("cannot mix POVMs of different dimensions")
    if not 0.0 <= lam <= 1.0:
        raise OutOfDomain("mixing weight must lie in [0, 1]")
    elems = [lam * e for e in first.elements] + [(1.0 - lam) * e for e in second.elements]
    labels = None
    if first.labels is not None and second.labels is not None:
        labels = first.labels + second.labels
    return Povm(elems, labels=labels)


def merge_proportional(povm: Povm, tol: float = 1e-10) -> Povm:
    """Combine mutually proportional elements and drop zero elements.

    Two elements count as proportional when their unit-trace
    normalizations agree entry-wise within ``tol``. Merging leaves the
    outcome statistics unchanged up to relabeling.
    """
    groups: list[list[int]] = []
    shapes: list[np.ndarray] = []
    for k, e in enumerate(povm.elements):
        tr = float(np.trace(e).real)
        if tr < tol:
            continue
        shape = e / tr
        for g, ref in enumerate(shapes):
            if np.max(np.abs(shape - ref)) <= tol:
                groups[g].append(k)
                break
        else:
            groups.append([k])
            shapes.append(shape)
    if not groups:
        raise NotResolutionOfIdentity("merging removed every element")
    elems = [sum(povm.elements[k] for k in g) for g in groups]
    labels = None
    if povm.labels is not None:
        labels = ["+".join(povm.labels[k] for k in g) for g in groups]
    return Povm(elems, labels=labels)


class ParametricModel:
    """Smooth one-to-one map from an open parameter domain to states.

    Subclasses fix ``n_params``, ``dim`` and a ``variant`` tag and
    implement ``state_at`` and the analytic ``state_derivative``.
    """

    variant: str = "abstract"
    n_params: int = 0
    dim: int = 0

    def state_at(self, theta) -> np.ndarray:
        raise NotImplementedError

    def state_derivative(self, theta, index: int) -> np.ndarray:
        raise NotImplementedError

    def _check_theta(self, theta) -> np.ndarray:
        t = np.atleast_1d(np.asarray(theta, dtype=float))
        if t.shape != (self.n_params,):
            raise WrongDimension(
                f"model {self.variant} expects {self.n_params} parameters, got {t.shape}"
            )
        return t

    def _check_index(self, index: int) -> int:
        index = int(index)
        if not 0 <= index < self.n_params:
            raise WrongDimension(f"parameter index {index} out of range")
        return index

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n_params={self.n_params}, dim={self.dim})"


class Bloch3Model(ParametricModel):
    """Full qubit model parametrized by the three Stokes parameters."""

    variant = "bloch3"
    n_params = 3
    dim = 2

    def state_at(self, theta) -> np.ndarray:
        t = self._check_theta(theta)
        if np.dot(t, t) >= 1.0:
            raise OutOfDomain("Bloch vector must have norm < 1")
        rho = 0.5 * np.eye(2, dtype=complex)
        for ti, sigma in zip(t, SIGMA):
            rho = rho + 0.5 * ti * sigma
        return rho

    def state_derivative(self, theta, index: int) -> np.ndarray:
        self._check_theta(theta)
        index = self._check_index(index)
        return 0.5 * SIGMA[index]


class BlochSubModel(ParametricModel):
    """Qubit submodel varying a subset of Bloch axes, the rest fixed at 0."""

    variant = "bloch_sub"
    dim = 2

    def __init__(self, axes):
        axes = tuple(sorted(int(a) for a in axes))
        if not axes or any(a not in (1, 2, 3) for a in axes) or len(set(axes)) != len(axes):
            raise WrongDimension("axes must be a nonempty subset of {1, 2, 3}")
        self.axes = axes
        self.n_params = len(axes)

    def _embed(self, t: np.ndarray) -> np.ndarray:
        full = np.zeros(3)
        for value, axis in zip(t, self.axes):
            full[axis - 1] = value
        return full

    def state_at(self, theta) -> np.ndarray:
        t = self._check_theta(theta)
        full = self._embed(t)
        if np.dot(full, full) >= 1.0:
            raise OutOfDomain("Bloch vector must have norm < 1")
        rho = 0.5 * np.eye(2, dtype=complex)
        for ti, sigma in zip(full, SIGMA):
            rho = rho + 0.5 * ti * sigma
        return rho

    def state_derivative(self, theta, index: int) -> np.ndarray:
        self._check_theta(theta)
        index = self._check_index(index)
        return 0.5 * SIGMA[self.axes[index] - 1]


class PhaseAmplitudeModel(ParametricModel):
    """Two-parameter qubit model with phase theta_1 and amplitude theta_2.

    The state is [[1, t2 e^{-i t1}], [t2 e^{i t1}, 1]] / 2 with
    t2 in the open interval (0, 1); t1 is an angle.
    """

    variant = "phase_amplitude"
    n_params = 2
    dim = 2

    def state_at(self, theta) -> np.ndarray:
        t1, t2 = self._check_theta(theta)
        if not 0.0 < t2 < 1.0:
            raise OutOfDomain("amplitude parameter must lie in (0, 1)")
        off = t2 * np.exp(-1.0j * t1)
        return 0.5 * np.array([[1.0, off], [np.conj(off), 1.0]], dtype=complex)

    def state_derivative(self, theta, index: int) -> np.ndarray:
        t1, t2 = self._check_theta(theta)
        if not 0.0 < t2 < 1.0:
            raise OutOfDomain("amplitude parameter must lie in (0, 1)")
        index = self._check_index(index)
        if index == 0:
            off = -1.0j * t2 * np.exp(-1.0j * t1)
        else:
            off = np.exp(-1.0j * t1)
        return 0.5 * np.array([[0.0, off], [np.conj(off), 0.0]], dtype=complex)


class AffineModel(ParametricModel):
    """State family a0 + sum_i theta_i G_i with traceless Hermitian G_i.

    Positivity is checked at each evaluation point only; the global
    shape of the valid domain is the model author's responsibility.
    """

    variant = "affine"

    def __init__(self, a0, generators):
        a0 = require_hermitian(a0, name="affine base point")
        if abs(np.trace(a0).real - 1.0) > TRACE_TOL:
            raise WrongDimension("affine base point must have unit trace")
        gens = []
        for k, g in enumerate(generators):
            g = require_hermitian(g, name=f"generator {k}")
            if g.shape != a0.shape:
                raise WrongDimension("generator dimension differs from base point")
            if abs(np.trace(g)) > TRACE_TOL:
                raise WrongDimension(f"generator {k} is not traceless")
            gens.append(_frozen(g))
        if not gens:
            raise WrongDimension("affine model needs at least one generator")
        self.a0 = _frozen(a0)
        self.generators = tuple(gens)
        self.n_params = len(gens)
        self.dim = a0.shape[0]

    def state_at(self, theta) -> np.ndarray:
        t = self._check_theta(theta)
        rho = np.array(self.a0)
        for ti, g in zip(t, self.generators):
            rho = rho + ti * g
        rho = hermitian_part(rho)
        if min_eigenvalue(rho) < -PSD_TOL:
            raise OutOfDomain("affine evaluation point is not positive semidefinite")
        return rho

    def state_derivative(self, theta, index: int) -> np.ndarray:
        self._check_theta(theta)
        index = self._check_index(index)
        return np.array(self.generators[index])
