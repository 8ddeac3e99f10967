"""Numerical design optimization over restricted candidate sets.

The workhorse is a vertex-direction (exchange) method: at each step the
candidate measurement with the largest sensitivity joins the design with
a step size from an exact line search, and the relative excess of that
sensitivity over the optimality threshold doubles as the stopping
certificate. Everything else here is supporting machinery: candidate
grids, design pruning down to a Caratheodory-sized support, integer
apportionment of continuous weights, and multi-criteria comparison
tables.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar, nnls

from .criteria import (
    Criterion,
    criterion_value,
    efficiency,
    sensitivity_threshold,
)
from .errors import (
    Infeasible,
    InfeasibleApportionment,
    SingularSeed,
    UnsupportedParamCount,
    WrongDimension,
)
from .fisher import (
    DesignMeasure,
    fisher_matrix_design,
    fisher_matrix_povm,
    sld_frame_pvm,
)
from .linalg import symmetric_part
from .quantum import ParametricModel, Povm, pauli_pvm, validate_povm
from .qubit import (
    OptimalDesignResult,
    a_optimal,
    c_optimal,
    d_optimal,
    e_optimal,
    equivalence_certificate,
    gamma_optimal,
    scalar_optimal,
)

SEED_RANK_TOL = 1e-9


def _worker_count() -> int:
    """Worker cap for candidate evaluation, from QDOE_THREADS (default 1)."""
    raw = os.environ.get("QDOE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


class CandidateSet:
    """A restricted family of candidate measurements for the solver."""

    def __init__(self, kind: str, **payload):
        self.kind = kind
        self.payload = payload

    @classmethod
    def sld_sphere_grid(cls, points: int) -> "CandidateSet":
        """Deterministic low-discrepancy grid of SLD-frame directions.

        Requires a qubit model at solve time; each direction yields one
        rank-one projective measurement.
        """
        points = int(points)
        if points < 1:
            raise WrongDimension("grid needs at least one point")
        return cls("sld-grid", points=points)

    @classmethod
    def pauli_pvms(cls) -> "CandidateSet":
        """The three Pauli projective measurements."""
        return cls("pauli")

    @classmethod
    def explicit(cls, povms) -> "CandidateSet":
        """An explicit list of POVMs."""
        povms = list(povms)
        if not povms:
            raise WrongDimension("explicit candidate list is empty")
        return cls("explicit", povms=povms)

    @classmethod
    def random_projective(cls, count: int, seed: int = 0) -> "CandidateSet":
        """Haar-random rank-one projective measurements, seeded."""
        count = int(count)
        if count < 1:
            raise WrongDimension("need at least one random candidate")
        return cls("random", count=count, seed=int(seed))

    def __repr__(self) -> str:
        return f"CandidateSet({self.kind}, {self.payload})"


def sphere_directions(count: int) -> np.ndarray:
    """Fibonacci-lattice points on the unit 2-sphere."""
    k = np.arange(count)
    z = 1.0 - (2.0 * k + 1.0) / count
    golden = math.pi * (3.0 - math.sqrt(5.0))
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = golden * k
    return np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])


def circle_directions(count: int) -> np.ndarray:
    """Equally spaced unit vectors on a half circle (antipodes coincide)."""
    ang = math.pi * np.arange(count) / count
    return np.column_stack([np.cos(ang), np.sin(ang)])


def materialize_candidates(
    candidates: CandidateSet, model: ParametricModel, theta
) -> list[Povm]:
    """Turn a candidate-set description into concrete POVMs."""
    if candidates.kind == "sld-grid":
        if model.dim != 2:
            raise WrongDimension("SLD sphere grids require a qubit model")
        n = model.n_params
        points = candidates.payload["points"]
        if n == 3:
            grid = sphere_directions(points)
        elif n == 2:
            grid = circle_directions(points)
        elif n == 1:
            grid = np.array([[1.0]])
        else:
            raise UnsupportedParamCount("SLD grids cover 1-3 parameters")
        return [sld_frame_pvm(model, theta, u) for u in grid]
    if candidates.kind == "pauli":
        if model.dim != 2:
            raise WrongDimension("Pauli candidates require a qubit model")
        return [pauli_pvm(k) for k in (1, 2, 3)]
    if candidates.kind == "explicit":
        povms = candidates.payload["povms"]
        for p in povms:
            if p.dim != model.dim:
                raise WrongDimension("candidate dimension differs from the model")
            validate_povm(p)
        return list(povms)
    if candidates.kind == "random":
        rng = np.random.default_rng(candidates.payload["seed"])
        count = candidates.payload["count"]
        out = []
        for _ in range(count):
            ginibre = rng.normal(size=(model.dim, model.dim)) + 1j * rng.normal(
                size=(model.dim, model.dim)
            )
            q, r = np.linalg.qr(ginibre)
            q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
            out.append(Povm([np.outer(q[:, j], q[:, j].conj()) for j in range(model.dim)]))
        return out
    raise WrongDimension(f"unknown candidate kind {candidates.kind!r}")


@dataclass
class SolveOptions:
    """Knobs for the vertex-direction solver.

    ``tol`` is the relative certificate-gap threshold; ``support_cap``
    defaults to n(n+1)/2 + 1, the Caratheodory bound on the support size
    an optimal design measure needs.
    """

    max_iters: int = 10_000
    tol: float = 1e-6
    step_rule: str = "line-search"
    prune_tol: float = 1e-8
    support_cap: int | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise WrongDimension("certificate tolerance must be positive")
        if self.step_rule not in ("line-search", "harmonic"):
            raise WrongDimension("step rule must be 'line-search' or 'harmonic'")


@dataclass
class SolveReport:
    """Solver outcome: pruned design, certificate gap, iteration count."""

    result: OptimalDesignResult
    gap: float
    iterations: int
    converged: bool
    exact_gap: float | None = None
    value_history: list[float] = field(default_factory=list, repr=False)


def _fisher_stack(model, theta, povms) -> np.ndarray:
    """Per-candidate Fisher matrices, stacked in candidate order.

    Evaluation may run on QDOE_THREADS workers; the output order is
    fixed by candidate index either way.
    """
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            mats = list(pool.map(lambda p: fisher_matrix_povm(model, theta, p), povms))
    else:
        mats = [fisher_matrix_povm(model, theta, p) for p in povms]
    return np.stack(mats)


def _rank_one_factor(mat: np.ndarray) -> tuple[float, np.ndarray] | None:
    """Decompose as beta * u u^t when the matrix is rank one."""
    w, u = np.linalg.eigh(symmetric_part(mat))
    if w[-1] <= 0 or w[-2] > 1e-12 * w[-1]:
        return None
    return float(w[-1]), u[:, -1]


def _greedy_seed(stack: np.ndarray, n: int) -> list[int]:
    """Pick candidates maximizing the smallest eigenvalue of the running sum.

    Eigenvalue tuples are compared lexicographically from the smallest
    up, so early picks favor large, mutually transversal information.
    Raises SingularSeed when n + 1 picks cannot reach full rank.
    """
    chosen: list[int] = []
    running = np.zeros((n, n))
    for _ in range(n + 1):
        keys = np.linalg.eigvalsh(running[None, :, :] + stack)
        order = np.lexsort(tuple(-keys[:, j] for j in range(n - 1, -1, -1)))
        pick = int(order[0])
        if pick not in chosen:
            chosen.append(pick)
        running = running + stack[pick]
        w = np.linalg.eigvalsh(running)
        if w[0] > SEED_RANK_TOL * max(1.0, w[-1]):
            return chosen
    raise SingularSeed("candidate set cannot span a full-rank information matrix")


def _surrogate(crit: Criterion) -> Criterion:
    """Optimization surrogate: plain D is minimized through its log form."""
    if crit.kind == "D":
        return Criterion.log_d()
    if crit.kind in ("A", "LogD"):
        return crit
    raise WrongDimension("the solver covers the weighted-A and (Log)D criteria")


def _objective(crit: Criterion, info: np.ndarray) -> float:
    return criterion_value(crit, info)


def _line_search(
    crit: Criterion,
    info: np.ndarray,
    candidate: np.ndarray,
    rank_one: tuple[float, np.ndarray] | None,
    sens_value: float,
    threshold: float,
    iteration: int,
) -> float:
    """Step size for mixing one candidate into the design.

    Uses the closed-form optimum of the one-dimensional mixing for
    rank-one candidates, a bounded scalar minimization otherwise, and
    falls back to the harmonic schedule when the closed form degenerates.
    """
    harmonic = 2.0 / (iteration + 2.0)
    n = info.shape[0]
    alphas = [harmonic]
    if rank_one is not None:
        if crit.kind == "LogD":
            g = sens_value
            if g > 1.0 + 1e-14:
                alphas.append((g - n) / (n * (g - 1.0)))
        else:  # weighted A
            beta, u = rank_one
            inv_u = np.linalg.solve(info, u)
            p = beta * float(u @ inv_u)
            a = threshold
            r = sens_value
            k = p - 1.0
            qa = k * (a * k - r)
            qb = 2.0 * a * k
            qc = a - r
            if abs(qa) > 1e-300:
                disc = qb * qb - 4.0 * qa * qc
                if disc >= 0.0:
                    root = math.sqrt(disc)
                    alphas.extend([(-qb + root) / (2.0 * qa), (-qb - root) / (2.0 * qa)])
            elif abs(qb) > 1e-300:
                alphas.append(-qc / qb)
    else:
        res = minimize_scalar(
            lambda alpha: _objective(crit, (1.0 - alpha) * info + alpha * candidate),
            bounds=(0.0, 1.0 - 1e-9),
            method="bounded",
            options={"xatol": 1e-13},
        )
        alphas.append(float(res.x))
    best_alpha, best_val = 0.0, _objective(crit, info)
    for alpha in alphas:
        if not 0.0 < alpha < 1.0:
            continue
        val = _objective(crit, (1.0 - alpha) * info + alpha * candidate)
        if val < best_val:
            best_alpha, best_val = alpha, val
    return best_alpha


def fedorov_wynn(
    model: ParametricModel,
    theta,
    crit: Criterion,
    candidates: CandidateSet,
    options: SolveOptions | None = None,
) -> SolveReport:
    """Vertex-direction minimization of a criterion over candidate mixtures.

    Iterates xi_{k+1} = (1 - a_k) xi_k + a_k delta_{e_k} where e_k has the
    largest sensitivity among candidates, stopping when the relative
    excess of that sensitivity over the optimality threshold drops to
    ``options.tol``. The returned design is pruned and the gap is
    re-evaluated on it; for qubit models an exact certificate computed
    without the grid is reported alongside.
    """
    opts = options or SolveOptions()
    surrogate = _surrogate(crit)
    povms = materialize_candidates(candidates, model, theta)
    stack = _fisher_stack(model, theta, povms)
    count, n = stack.shape[0], stack.shape[1]
    if opts.support_cap is not None and opts.support_cap < n:
        raise WrongDimension("support cap below the parameter count")

    seeds = _greedy_seed(stack, n)
    weights = np.zeros(count)
    weights[seeds] = 1.0 / len(seeds)
    info = np.einsum("n,nab->ab", weights, stack)

    rank_one = [_rank_one_factor(stack[i]) for i in range(count)]
    if surrogate.kind == "A":
        w_mat = np.eye(n) if surrogate.weight is None else surrogate.weight

    history: list[float] = []
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        inv = np.linalg.inv(symmetric_part(info))
        if surrogate.kind == "A":
            kernel = inv @ w_mat @ inv
            threshold = float(np.trace(w_mat @ inv))
        else:
            kernel = inv
            threshold = float(n)
        sens = np.einsum("ab,nba->n", kernel, stack)
        pick = int(np.argmax(sens))
        gap = (float(sens[pick]) - threshold) / threshold
        history.append(_objective(surrogate, info))
        if gap <= 0.5 * opts.tol:
            break
        if opts.step_rule == "harmonic":
            alpha = 2.0 / (iterations + 2.0)
        else:
            alpha = _line_search(
                surrogate, info, stack[pick], rank_one[pick],
                float(sens[pick]), threshold, iterations,
            )
            if alpha == 0.0:
                # no step improves the objective in double precision
                break
        weights *= 1.0 - alpha
        weights[pick] += alpha
        if iterations % 256 == 0:
            info = np.einsum("n,nab->ab", weights, stack)
        else:
            info = (1.0 - alpha) * info + alpha * stack[pick]

    support = np.flatnonzero(weights > 0.0)
    design = DesignMeasure(weights[support], [povms[i] for i in support])
    design = prune_design(
        model, theta, design,
        prune_tol=opts.prune_tol, cap=opts.support_cap, criterion=surrogate,
    )

    fisher = fisher_matrix_design(model, theta, design)
    inv = np.linalg.inv(symmetric_part(fisher))
    if surrogate.kind == "A":
        kernel = inv @ w_mat @ inv
        threshold = float(np.trace(w_mat @ inv))
    else:
        kernel = inv
        threshold = float(n)
    sens = np.einsum("ab,nba->n", kernel, stack)
    gap = (float(np.max(sens)) - threshold) / threshold

    exact_gap = None
    if model.dim == 2:
        exact_gap = equivalence_certificate(model, theta, design, surrogate) / threshold

    value = criterion_value(crit, fisher)
    result = OptimalDesignResult(design, fisher, value, crit)
    return SolveReport(
        result=result,
        gap=gap,
        iterations=iterations,
        converged=bool(gap <= opts.tol),
        exact_gap=exact_gap,
        value_history=history,
    )


def _povms_equal(first: Povm, second: Povm, tol: float = 1e-10) -> bool:
    if len(first) != len(second) or first.dim != second.dim:
        return False
    return all(
        np.max(np.abs(a - b)) <= tol for a, b in zip(first.elements, second.elements)
    )


def _reweight_to_target(stack: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Nonnegative weights summing to one that best reproduce a Fisher matrix."""
    count = stack.shape[0]
    penalty = 1e4
    a = np.vstack([stack.reshape(count, -1).T, penalty * np.ones((1, count))])
    b = np.concatenate([target.ravel(), [penalty]])
    weights, _ = nnls(a, b)
    total = weights.sum()
    if total <= 0:
        raise WrongDimension("reweighting collapsed to zero support")
    return weights / total


def prune_design(
    model: ParametricModel,
    theta,
    design: DesignMeasure,
    prune_tol: float = 1e-8,
    cap: int | None = None,
    criterion: Criterion | None = None,
) -> DesignMeasure:
    """Deflate a design: drop dust, merge duplicates, cap the support.

    Weights below ``prune_tol`` are dropped and the rest renormalized;
    support points with element-wise equal POVMs merge. While the
    support exceeds ``cap`` (default n(n+1)/2 + 1), the point whose
    removal changes the design's Fisher matrix the least — after
    reweighting the survivors by nonnegative least squares against that
    matrix — is removed, refusing removals that move the criterion value
    by more than 10 * prune_tol relative.
    """
    n = model.n_params
    if cap is None:
        cap = n * (n + 1) // 2 + 1
    keep = design.weights >= prune_tol
    if not np.any(keep):
        keep = design.weights == design.weights.max()
    weights = list(design.weights[keep])
    povms = [p for p, k in zip(design.povms, keep) if k]

    merged_w: list[float] = []
    merged_p: list[Povm] = []
    for w, p in zip(weights, povms):
        for j, q in enumerate(merged_p):
            if _povms_equal(p, q):
                merged_w[j] += w
                break
        else:
            merged_w.append(w)
            merged_p.append(p)
    design = DesignMeasure(merged_w, merged_p)

    if len(design) <= cap:
        return design

    target = fisher_matrix_design(model, theta, design)
    ref_value = None if criterion is None else criterion_value(criterion, target)
    weights = np.array(design.weights)
    povms = list(design.povms)
    stack = _fisher_stack(model, theta, povms)
    while len(povms) > cap:
        best = None
        for drop in range(len(povms)):
            mask = np.arange(len(povms)) != drop
            try:
                trial = _reweight_to_target(stack[mask], target)
            except WrongDimension:
                continue
            trial_info = np.einsum("n,nab->ab", trial, stack[mask])
            residual = float(np.max(np.abs(trial_info - target)))
            if ref_value is not None:
                value = criterion_value(criterion, trial_info)
                if not math.isfinite(value):
                    continue
                if abs(value - ref_value) > 10.0 * prune_tol * max(abs(ref_value), 1.0):
                    continue
            if best is None or residual < best[0]:
                best = (residual, drop, trial)
        if best is None:
            break
        _, drop, trial = best
        povms = [p for j, p in enumerate(povms) if j != drop]
        stack = np.delete(stack, drop, axis=0)
        weights = trial
        live = weights > 1e-15
        povms = [p for p, k in zip(povms, live) if k]
        stack = stack[live]
        weights = weights[live]
    return DesignMeasure(weights, povms)


def apportion(weights, total: int) -> np.ndarray:
    """Largest-remainder rounding of design weights into integer counts.

    Ties go to the lowest index. Every weight of at least 1/(2 total)
    is guaranteed a nonzero count; when that guarantee cannot be met the
    apportionment is infeasible.
    """
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    total = int(total)
    if total < 1 or w.ndim != 1 or len(w) == 0:
        raise WrongDimension("need a weight vector and a positive sample count")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise WrongDimension("weights must form a probability vector")
    mandatory = w >= 1.0 / (2.0 * total)
    if int(mandatory.sum()) > total:
        raise InfeasibleApportionment(
            f"{int(mandatory.sum())} weights require a count but only {total} available"
        )
    scaled = total * w
    counts = np.floor(scaled).astype(int)
    remainder = scaled - counts
    deficit = total - int(counts.sum())
    order = np.argsort(-remainder, kind="stable")
    counts[order[:deficit]] += 1
    # enforce the mandatory minimum of one
    while True:
        starved = np.flatnonzero(mandatory & (counts == 0))
        if len(starved) == 0:
            break
        donors = np.flatnonzero((counts > 1) | ((counts == 1) & ~mandatory))
        donor = donors[np.argmax(counts[donors])]
        counts[donor] -= 1
        counts[starved[0]] += 1
    return counts


@dataclass
class EfficiencyRow:
    design: str
    criterion: str
    value: float
    efficiency: float


@dataclass
class EfficiencyReport:
    """Design-by-criterion table of values and efficiencies."""

    rows: list[EfficiencyRow]


def optimal_criterion_value(
    model: ParametricModel,
    theta,
    crit: Criterion,
    candidates: CandidateSet | None = None,
    options: SolveOptions | None = None,
) -> float:
    """Best achievable criterion value over all designs.

    Qubit models use the closed forms where one exists; weighted-A falls
    back to the solver over ``candidates`` (default: a 2000-point SLD
    grid).
    """
    if model.dim == 2:
        if model.n_params == 1:
            sld_value = scalar_optimal(model, theta)[1]
            if crit.kind in ("A", "Gamma") and crit.weight is None:
                return 1.0 / sld_value
            if crit.kind == "D":
                return 1.0 / sld_value
            if crit.kind == "LogD":
                return -math.log(sld_value)
            if crit.kind == "E":
                return 1.0 / sld_value
            if crit.kind == "C":
                return float(crit.direction[0] ** 2 / sld_value)
        else:
            if crit.kind == "A" and crit.weight is None:
                return a_optimal(model, theta).value
            if crit.kind in ("D", "LogD"):
                fisher = d_optimal(model, theta).fisher
                return criterion_value(crit, fisher)
            if crit.kind == "E":
                return e_optimal(model, theta).value
            if crit.kind == "Gamma":
                return gamma_optimal(model, theta, crit.exponent).value
            if crit.kind == "C":
                return c_optimal(model, theta, crit.direction)[1]
    if crit.kind in ("A", "D", "LogD"):
        if candidates is None:
            candidates = CandidateSet.sld_sphere_grid(2000)
        report = fedorov_wynn(model, theta, crit, candidates, options)
        return report.result.value
    raise WrongDimension(
        f"no optimal-value method for criterion {crit.kind!r} on this model"
    )


def compare_designs(
    model: ParametricModel,
    theta,
    designs,
    criteria,
    candidates: CandidateSet | None = None,
    options: SolveOptions | None = None,
) -> EfficiencyReport:
    """Evaluate named designs under several criteria, with efficiencies.

    ``designs`` maps names to design measures (a dict or a sequence of
    pairs). Singular designs score value +inf and efficiency 0 instead
    of raising.
    """
    if isinstance(designs, dict):
        named = list(designs.items())
    else:
        named = [(str(k), v) for k, v in designs]
    from .serialize import criterion_to_string

    rows: list[EfficiencyRow] = []
    infos = {name: fisher_matrix_design(model, theta, dm) for name, dm in named}
    for crit in criteria:
        optimal = optimal_criterion_value(model, theta, crit, candidates, options)
        for name, _ in named:
            try:
                value = criterion_value(crit, infos[name])
            except Infeasible:
                value = math.inf
            rows.append(
                EfficiencyRow(
                    design=name,
                    criterion=criterion_to_string(crit),
                    value=value,
                    efficiency=efficiency(crit, value, optimal),
                )
            )
    return EfficiencyReport(rows=rows)


def simplex_grid_minimum(
    model: ParametricModel,
    theta,
    crit: Criterion,
    povms,
    resolution: float = 1e-2,
) -> tuple[np.ndarray, float]:
    """Brute-force minimum of a criterion over mixtures of a few POVMs.

    Enumerates the weight simplex at the given resolution; intended for
    small explicit candidate lists (restricted-measurement optima and
    test oracles), not as a general solver.
    """
    povms = list(povms)
    m = len(povms)
    steps = max(1, round(1.0 / resolution))
    if m < 1 or m > 4:
        raise WrongDimension("simplex enumeration covers 1-4 POVMs")
    stack = _fisher_stack(model, theta, povms)
    combos = np.array(
        list(itertools.combinations(range(steps + m - 1), m - 1)), dtype=int
    )
    if combos.size == 0:
        combos = np.zeros((1, 0), dtype=int)
    bounds = np.hstack(
        [
            combos,
            np.full((combos.shape[0], 1), steps + m - 1, dtype=int),
        ]
    )
    prev = np.hstack([np.full((combos.shape[0], 1), -1, dtype=int), combos])
    counts = bounds - prev - 1
    weights = counts / steps
    infos = np.einsum("km,mab->kab", weights, stack)
    eigs = np.linalg.eigvalsh(infos)
    lo = eigs[:, 0]
    valid = lo > 1e-12
    values = np.full(len(weights), np.inf)
    if crit.kind == "A" and crit.weight is None:
        values[valid] = np.sum(1.0 / eigs[valid], axis=1)
    elif crit.kind == "D":
        values[valid] = 1.0 / np.prod(eigs[valid], axis=1)
    elif crit.kind == "LogD":
        values[valid] = -np.sum(np.log(eigs[valid]), axis=1)
    elif crit.kind == "E":
        values[valid] = 1.0 / lo[valid]
    else:
        for k in np.flatnonzero(valid):
            values[k] = criterion_value(crit, infos[k])
    best = int(np.argmin(values))
    return weights[best], float(values[best])
