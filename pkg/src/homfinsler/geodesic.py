"""Geodesic vectors of homogeneous Finsler spaces ``G/H``.

A non-zero ``y`` in the Lie algebra is a geodesic vector exactly when
``g_{y_m}(y_m, [y, z]_m) = 0`` for every ``z``.  The bracket slot is linear,
so sweeping ``z`` over the basis of the whole algebra is a complete test;
the resulting vector of values is a :class:`CriterionResidual`.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError, SingularityError
from .lie import LieAlgebra, ReductiveSplit, bracket, project_m
from .metric import (
    Metric,
    MetricKind,
    check_admissible,
    finsler_norm,
    g_closed,
    is_admissible,
    phi_eval,
    riemannian,
    singular_tol,
)
from .oracle import DUAL, OracleScheme, g_oracle, unit_sphere_sample

ANALYTIC_TOL = 1e-8
ORACLE_TOL = 1e-6
DEDUP_ANGLE = 1e-4
JACOBIAN_STEP = 1e-6
MAX_HALVINGS = 30
MAX_NEWTON_ITER = 100


class Source(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    ORACLE = "Oracle"
    RIEMANNIAN = "Riemannian"


def default_tolerance(source: Source) -> float:
    """Decision tolerance; ``FG_TOL_CRITERION`` overrides both defaults."""
    raw = os.environ.get("FG_TOL_CRITERION")
    if raw is not None:
        try:
            value = float(raw)
        except ValueError:
            raise InputError(f"FG_TOL_CRITERION={raw!r} is not a number") from None
        if not value > 0:
            raise InputError(f"FG_TOL_CRITERION must be positive, got {value}")
        return value
    return ORACLE_TOL if Source(source) is Source.ORACLE else ANALYTIC_TOL


@dataclass(frozen=True, eq=False)
class HomogeneousSpace:
    """Lie algebra, reductive split and an invariant metric on ``m``."""

    algebra: LieAlgebra
    split: ReductiveSplit
    metric: Metric

    def __post_init__(self):
        if self.split.dim != self.algebra.dim:
            raise InputError(f"split dimension {self.split.dim} != algebra dimension {self.algebra.dim}")
        if self.metric.dim != len(self.split.m_indices):
            raise InputError(f"metric acts on a {self.metric.dim}-dimensional space but dim m = {len(self.split.m_indices)}")

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def x_full(self) -> np.ndarray:
        return self.split.embed(self.metric.x)

    def with_metric(self, metric: Metric) -> "HomogeneousSpace":
        return HomogeneousSpace(self.algebra, self.split, metric)

    def riemannian(self) -> "HomogeneousSpace":
        return self.with_metric(riemannian(self.metric.inner_product))

    def m_part(self, y) -> np.ndarray:
        return self.split.m_coords(self.algebra.vector(y))

    def bracket_m(self, y, z) -> np.ndarray:
        """m-coordinates of ``[y, z]_m``."""
        return self.split.m_coords(project_m(bracket(self.algebra, y, z), self.split))

    def bracket_table(self, y) -> np.ndarray:
        """Row ``i`` holds the m-coordinates of ``[y, e_i]_m``."""
        return np.array([self.bracket_m(y, self.algebra.basis(i)) for i in range(self.dim)])


@dataclass(frozen=True)
class CriterionResidual:
    values: np.ndarray
    source: Source
    scale: float = 1.0

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def scaled_norm(self) -> float:
        return self.norm / self.scale

    def to_dict(self) -> dict:
        return {
            "values": [float(v) for v in self.values],
            "norm": self.norm,
            "scale": self.scale,
            "source": self.source.value,
        }


def default_source(metric: Metric) -> Source:
    # The printed infinite series tensor fails the audit, so every built-in
    # decision goes through the oracle.
    return Source.ORACLE


def decision_scale(space: HomogeneousSpace, y, source: Source) -> float:
    """``1 + F(y_m)^2`` (``1 + <y_m, y_m>`` for the Riemannian source)."""
    ym = space.m_part(y)
    if source is Source.RIEMANNIAN:
        return 1.0 + space.metric.ip(ym, ym)
    return 1.0 + finsler_norm(space.metric, ym) ** 2


def _require_m_part(space: HomogeneousSpace, y) -> np.ndarray:
    ym = space.m_part(y)
    if space.metric.alpha(ym) == 0.0:
        raise DomainError("the m-component of y vanishes; the criterion needs y_m != 0")
    return ym


def riemannian_criterion(space: HomogeneousSpace, y) -> CriterionResidual:
    """Entries ``<y_m, [y, e_i]_m>`` for the underlying inner product."""
    y = space.algebra.vector(y)
    ym = _require_m_part(space, y)
    table = space.bracket_table(y)
    values = table @ space.metric.inner_product @ ym
    return CriterionResidual(values, Source.RIEMANNIAN, decision_scale(space, y, Source.RIEMANNIAN))


def criterion_residual(
    space: HomogeneousSpace,
    y,
    source: Source | str | None = None,
    scheme: OracleScheme = DUAL,
) -> CriterionResidual:
    """``g_{y_m}(y_m, [y, e_i]_m)`` for every basis vector ``e_i``."""
    source = default_source(space.metric) if source is None else Source(source)
    if source is Source.RIEMANNIAN:
        return riemannian_criterion(space, y)
    y = space.algebra.vector(y)
    ym = _require_m_part(space, y)
    check_admissible(space.metric, ym)
    table = space.bracket_table(y)
    if source is Source.ORACLE:
        values = np.array([g_oracle(space.metric, ym, ym, w, scheme) for w in table])
    else:
        values = np.array([g_closed(space.metric, ym, ym, w) for w in table])
    return CriterionResidual(values, source, decision_scale(space, y, source))


def closed_criterion_exponential(space: HomogeneousSpace, y, z) -> float:
    """``<X + ((|y_m| - <X, y_m>) / <y_m, y_m>) y_m, [y, z]_m>``.

    Equals the residual entry divided by ``|y_m| exp(2 beta / alpha)``.
    """
    if space.metric.kind is not MetricKind.EXPONENTIAL:
        raise InputError("exponential criterion requested for a non-exponential metric")
    y = space.algebra.vector(y)
    z = space.algebra.vector(z)
    ym = _require_m_part(space, y)
    met = space.metric
    yy = met.ip(ym, ym)
    coeff = (math.sqrt(yy) - met.beta(ym)) / yy
    w = space.bracket_m(y, z)
    return met.ip(met.x + coeff * ym, w)


def exponential_factor(space: HomogeneousSpace, y) -> float:
    """Positive factor ``|y_m| exp(2 <X, y_m> / |y_m|)``."""
    ym = _require_m_part(space, y)
    a = space.metric.alpha(ym)
    return a * math.exp(2.0 * space.metric.beta(ym) / a)


def closed_criterion_infinite(space: HomogeneousSpace, y, z) -> float:
    """Left-hand side of the printed infinite series geodesic condition.

    ``<X,y_m>^3 / (<X,y_m> - |y_m|)^4 * [ <X,w>{b^2 - 4a^3 + ab + 2a^2} + <y_m,w>{b^2/a - b} ]``
    with ``a = |y_m|``, ``b = <X, y_m>`` and ``w = [y, z]_m``, as typeset.
    """
    if space.metric.kind is not MetricKind.INFINITE_SERIES:
        raise InputError("infinite series criterion requested for a different metric")
    y = space.algebra.vector(y)
    z = space.algebra.vector(z)
    ym = _require_m_part(space, y)
    met = space.metric
    a = met.alpha(ym)
    b = met.beta(ym)
    if abs(b - a) < singular_tol(met, ym):
        raise SingularityError(f"<X,y_m> - sqrt(<y_m,y_m>) = {b - a!r} is within the singular tolerance")
    check_admissible(met, ym)
    w = space.bracket_m(y, z)
    xw = met.beta(w)
    yw = met.ip(ym, w)
    inner = math.fsum([
        xw * b * b,
        -4.0 * xw * a ** 3,
        xw * a * b,
        2.0 * xw * a * a,
        yw * b * b / a,
        -yw * b,
    ])
    return b ** 3 / (b - a) ** 4 * inner


def is_geodesic_vector(
    space: HomogeneousSpace,
    y,
    tol: float | None = None,
    source: Source | str | None = None,
    scheme: OracleScheme = DUAL,
) -> bool:
    """Decision ``|residual| <= tol * (1 + F(y_m)^2)``."""
    res = criterion_residual(space, y, source, scheme)
    tol = default_tolerance(res.source) if tol is None else tol
    return res.norm <= tol * res.scale


@dataclass(frozen=True)
class EquivalenceReport:
    """Riemannian vs Finsler geodesic status of one vector."""

    y: tuple[float, ...]
    hypothesis_residual: float
    hypothesis_holds: bool
    riemannian_geodesic: bool
    finsler_geodesic: bool
    riemannian_residual: CriterionResidual
    finsler_residual: CriterionResidual
    tol: float
    proportionality: float | None = None
    predicted_proportionality: float | None = None

    @property
    def applicable(self) -> bool:
        return self.hypothesis_holds

    @property
    def equivalence_respected(self) -> bool | None:
        if not self.hypothesis_holds:
            return None
        return self.riemannian_geodesic == self.finsler_geodesic

    def to_dict(self) -> dict:
        return {
            "y": list(self.y),
            "hypothesis_residual": self.hypothesis_residual,
            "hypothesis_holds": self.hypothesis_holds,
            "status": "applicable" if self.applicable else "not applicable",
            "riemannian_geodesic": self.riemannian_geodesic,
            "finsler_geodesic": self.finsler_geodesic,
            "equivalence_respected": self.equivalence_respected,
            "riemannian_residual": self.riemannian_residual.to_dict(),
            "finsler_residual": self.finsler_residual.to_dict(),
            "proportionality": self.proportionality,
            "predicted_proportionality": self.predicted_proportionality,
            "tol": self.tol,
        }


def x_bracket_residual(space: HomogeneousSpace, y) -> np.ndarray:
    """Entries ``<X, [y, e_i]_m>``."""
    table = space.bracket_table(space.algebra.vector(y))
    return table @ space.metric.inner_product @ space.metric.x


def _both_decisions(space, y, tol, source, scheme):
    rres = riemannian_criterion(space, y)
    fres = criterion_residual(space, y, source, scheme)
    rtol = default_tolerance(Source.RIEMANNIAN) if tol is None else tol
    ftol = default_tolerance(fres.source) if tol is None else tol
    return rres, fres, rres.norm <= rtol * rres.scale, fres.norm <= ftol * fres.scale


def corollary_equivalence_check(
    space: HomogeneousSpace,
    y,
    tol: float | None = None,
    hypothesis_tol: float | None = None,
    source: Source | str | None = None,
    scheme: OracleScheme = DUAL,
) -> EquivalenceReport:
    """Check that ``<X, [y, .]_m> = 0`` makes the two geodesic notions agree.

    ``hypothesis_tol`` defaults to ``tol`` (or the analytic default).
    When the hypothesis fails the report is marked not applicable.
    """
    y = space.algebra.vector(y)
    htol = hypothesis_tol if hypothesis_tol is not None else (tol if tol is not None else ANALYTIC_TOL)
    hyp = float(np.max(np.abs(x_bracket_residual(space, y))))
    rres, fres, rgeo, fgeo = _both_decisions(space, y, tol, source, scheme)
    return EquivalenceReport(
        tuple(map(float, y)), hyp, hyp <= htol, rgeo, fgeo, rres, fres,
        default_tolerance(fres.source) if tol is None else tol,
    )


def predicted_x_factor(metric: Metric) -> float:
    """Ratio ``g_X(X, w) / <X, w>``, which is ``phi(|X|)^2`` for any profile."""
    return phi_eval(metric, metric.b)[0] ** 2


def theorem_x_check(
    space: HomogeneousSpace,
    tol: float | None = None,
    source: Source | str | None = None,
    scheme: OracleScheme = DUAL,
) -> EquivalenceReport:
    """Geodesic status of ``y = X`` for the inner product and for ``F``.

    Also reports the least-squares ratio between the Finsler and Riemannian
    residual vectors next to the predicted ratio (``exp(2|X|)`` for the
    exponential metric, ``|X|^4 / (|X| - 1)^2`` for the infinite series).
    """
    met = space.metric
    if met.alpha(met.x) == 0.0:
        raise DomainError("X = 0 cannot be a geodesic vector")
    if not is_admissible(met, met.x):
        raise DomainError("X is outside the admissible cone")
    x = space.x_full
    rres, fres, rgeo, fgeo = _both_decisions(space, x, tol, source, scheme)
    denom = float(rres.values @ rres.values)
    ratio = float(fres.values @ rres.values) / denom if denom > 0.0 else None
    return EquivalenceReport(
        tuple(map(float, x)), 0.0, True, rgeo, fgeo, rres, fres,
        default_tolerance(fres.source) if tol is None else tol,
        ratio, predicted_x_factor(met),
    )


# --- search ---------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    y: tuple[float, ...]
    residual: float
    converged: bool
    seed_index: int
    iterations: int

    def to_dict(self) -> dict:
        return {
            "y": list(self.y),
            "residual": self.residual,
            "converged": self.converged,
            "seed_index": self.seed_index,
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class GeodesicSearchResult:
    candidates: tuple[Candidate, ...]
    tol: float
    distinct: tuple[int, ...]
    source: Source

    @property
    def n_distinct(self) -> int:
        return len(self.distinct)

    @property
    def solutions(self) -> list[np.ndarray]:
        return [np.array(self.candidates[i].y) for i in self.distinct]

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "source": self.source.value,
            "n_seeds": len(self.candidates),
            "n_converged": sum(c.converged for c in self.candidates),
            "n_distinct": self.n_distinct,
            "distinct_seed_indices": list(self.distinct),
            "candidates": [c.to_dict() for c in self.candidates],
        }


def _scaled_residual(space, y, source, scheme) -> np.ndarray | None:
    """Residual divided by the decision scale, or None when inadmissible."""
    ym = space.m_part(y)
    a = space.metric.alpha(ym)
    if not np.all(np.isfinite(y)) or a <= 1e-6 * np.linalg.norm(y):
        return None
    if source is not Source.RIEMANNIAN and not is_admissible(space.metric, ym):
        return None
    try:
        res = criterion_residual(space, y, source, scheme)
    except DomainError:
        return None
    return res.values / res.scale


def _numeric_jacobian(f, x: np.ndarray, f0: np.ndarray) -> np.ndarray | None:
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        dx = np.zeros_like(x)
        dx[j] = JACOBIAN_STEP
        fp, fm = f(x + dx), f(x - dx)
        if fp is None or fm is None:
            return None
        jac[:, j] = (fp - fm) / (2.0 * JACOBIAN_STEP)
    return jac


def _damped_newton(f, x0, tol, retract=lambda x: x, project=None):
    """Gauss-Newton with step halving on the residual map ``f``.

    ``project`` restricts Newton steps to a subspace (the sphere's tangent
    plane); ``retract`` maps trial points back onto the search manifold.
    Returns ``(x, max-abs residual, converged, iterations)``.
    """
    x = retract(np.array(x0, dtype=float))
    r = f(x)
    if r is None:
        return x, math.inf, False, 0
    for it in range(MAX_NEWTON_ITER):
        err = float(np.max(np.abs(r))) if r.size else 0.0
        if err <= tol:
            return x, err, True, it
        jac = _numeric_jacobian(f, x, r)
        if jac is None:
            return x, err, False, it
        if project is not None:
            jac = jac @ project(x)
        step = -np.linalg.lstsq(jac, r, rcond=None)[0]
        if project is not None:
            step = project(x) @ step
        merit = float(r @ r)
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = retract(x + lam * step)
            rt = f(trial)
            if rt is not None and float(rt @ rt) < merit:
                x, r = trial, rt
                break
            lam *= 0.5
        else:
            return x, err, False, it + 1
    err = float(np.max(np.abs(r))) if r.size else 0.0
    return x, err, err <= tol, MAX_NEWTON_ITER


def _sphere_projector(x: np.ndarray) -> np.ndarray:
    return np.eye(x.size) - np.outer(x, x)


def _sphere_retract(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x)
    return x / n if n > 0 else x


def _admissible_seed(space, rng, source, max_draws=1000):
    for _ in range(max_draws):
        y = rng.standard_normal(space.dim)
        y /= np.linalg.norm(y)
        if _scaled_residual_ok(space, y, source):
            return y
    return None


def _scaled_residual_ok(space, y, source) -> bool:
    ym = space.m_part(y)
    if space.metric.alpha(ym) <= 1e-6:
        return False
    return source is Source.RIEMANNIAN or is_admissible(space.metric, ym)


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    c = float(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.acos(min(1.0, max(-1.0, c)))


def find_geodesic_vectors(
    space: HomogeneousSpace,
    n_seeds: int = 16,
    seed: int = 0,
    tol: float | None = None,
    source: Source | str | None = None,
    scheme: OracleScheme = DUAL,
) -> GeodesicSearchResult:
    """Damped Newton from random unit-sphere seeds on the scaled residual.

    Seeds are drawn in order from ``numpy.random.default_rng(seed)``; seeds
    whose m-part is inadmissible are redrawn.  Converged points closer than
    ``1e-4`` rad to an earlier one are duplicates.
    """
    if n_seeds < 1:
        raise InputError(f"n_seeds must be at least 1, got {n_seeds}")
    source = default_source(space.metric) if source is None else Source(source)
    tol = default_tolerance(source) if tol is None else float(tol)
    rng = np.random.default_rng(seed)

    def f(y):
        return _scaled_residual(space, y, source, scheme)

    cands = []
    for k in range(n_seeds):
        y0 = _admissible_seed(space, rng, source)
        if y0 is None:
            cands.append(Candidate((), math.inf, False, k, 0))
            continue
        y, err, ok, its = _damped_newton(f, y0, tol, _sphere_retract, _sphere_projector)
        cands.append(Candidate(tuple(map(float, y)), err, ok, k, its))

    distinct: list[int] = []
    for i, c in enumerate(cands):
        if not c.converged:
            continue
        y = np.array(c.y)
        if all(_angle(y, np.array(cands[j].y)) >= DEDUP_ANGLE for j in distinct):
            distinct.append(i)
    return GeodesicSearchResult(tuple(cands), tol, tuple(distinct), source)


@dataclass(frozen=True)
class GoCoverageReport:
    directions_sampled: int
    directions_covered: int
    uncovered_examples: tuple[tuple[float, ...], ...]
    witnesses: tuple[tuple[float, ...] | None, ...] = field(repr=False)
    tol: float = ANALYTIC_TOL
    source: Source = Source.ORACLE

    @property
    def coverage_ratio(self) -> float:
        return self.directions_covered / self.directions_sampled

    def to_dict(self) -> dict:
        return {
            "directions_sampled": self.directions_sampled,
            "directions_covered": self.directions_covered,
            "coverage_ratio": self.coverage_ratio,
            "uncovered_examples": [list(u) for u in self.uncovered_examples],
            "tol": self.tol,
            "source": self.source.value,
        }


MAX_UNCOVERED_EXAMPLES = 10


def go_coverage(
    space: HomogeneousSpace,
    n_directions: int = 64,
    seed: int = 0,
    tol: float | None = None,
    source: Source | str | None = None,
    scheme: OracleScheme = DUAL,
) -> GoCoverageReport:
    """Fraction of sampled m-directions that are projections of geodesic vectors.

    For each unit direction ``u`` (alpha-norm, inside the admissible cone)
    the m-part is pinned to ``u`` and Gauss-Newton runs over the
    h-coordinates only.  Rescaling ``u`` cannot help because the residual
    is homogeneous, so the scale needs no search.
    """
    if n_directions < 1:
        raise InputError(f"n_directions must be at least 1, got {n_directions}")
    source = default_source(space.metric) if source is None else Source(source)
    tol = default_tolerance(source) if tol is None else float(tol)
    rng = np.random.default_rng(seed)
    met = space.metric
    covered = 0
    uncovered: list[tuple[float, ...]] = []
    witnesses: list[tuple[float, ...] | None] = []
    for _ in range(n_directions):
        u = None
        for _ in range(1000):
            cand = unit_sphere_sample(met, rng)
            if source is Source.RIEMANNIAN or is_admissible(met, cand):
                u = cand
                break
        if u is None:
            raise DomainError("no admissible directions found after 1000 draws")

        def f(h, u=u):
            return _scaled_residual(space, space.split.embed(u, h), source, scheme)

        h0 = np.zeros(len(space.split.h_indices))
        h, err, ok, _ = _damped_newton(f, h0, tol)
        y = space.split.embed(u, h)
        if ok:
            covered += 1
            witnesses.append(tuple(map(float, y)))
        else:
            witnesses.append(None)
            if len(uncovered) < MAX_UNCOVERED_EXAMPLES:
                uncovered.append(tuple(map(float, space.split.embed(u))))
    return GoCoverageReport(n_directions, covered, tuple(uncovered), tuple(witnesses), tol, source)


def invariance_residuals(space: HomogeneousSpace) -> tuple[float, float]:
    """How far ``<,>`` and ``X`` are from ``ad(h)``-invariance.

    Returns ``max |<[h,u]_m, v> + <u, [h,v]_m>|`` over basis vectors and
    ``max alpha([h, X]_m)`` over the h-basis.  Both vanish for an invariant
    metric; with ``h = 0`` they are trivially zero.
    """
    alg, split, met = space.algebra, space.split, space.metric
    a = met.inner_product
    skew = 0.0
    drift = 0.0
    for i in split.h_indices:
        e = alg.basis(i)
        # ad(e) restricted to m, in m-coordinates
        ad_m = np.array([space.bracket_m(e, split.embed(col)) for col in np.eye(met.dim)]).T
        skew = max(skew, float(np.max(np.abs(ad_m.T @ a + a @ ad_m))))
        drift = max(drift, met.alpha(space.bracket_m(e, space.x_full)))
    return skew, drift
