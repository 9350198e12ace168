"""(alpha, beta)-metrics ``F = alpha * phi(beta / alpha)`` on the subspace m.

All vectors here are coordinate arrays of length ``dim m``; the inner
product matrix ``A`` gives ``alpha(y) = sqrt(y^T A y)`` and the invariant
vector ``X`` gives ``beta(y) = X^T A y``.

Two families have hand-derived fundamental tensors:

* exponential, ``phi(s) = exp(s)``;
* infinite series, ``phi(s) = s**2 / (s - 1)``, i.e. ``F = beta**2 / (beta - alpha)``.

Any other ``phi`` can be supplied as a :class:`CustomPhi` and is served by the
Hessian oracle only.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import hyperdual as hd
from .errors import DomainError, InputError, SingularityError

log = logging.getLogger(__name__)

INFINITE_CONE_EPS = 1e-6
SYMMETRY_TOL = 1e-12
CUSTOM_SHEN_GRID = 1001


class MetricKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    INFINITE_SERIES = "infinite_series"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CustomPhi:
    """A profile ``phi`` with derivatives: ``func(s) -> (phi, phi', phi'')``."""

    name: str
    func: Callable[[float], tuple[float, float, float]] = field(compare=False)


def _phi_riemannian(s):
    return 1.0, 0.0, 0.0


def _phi_randers(s):
    return 1.0 + s, 1.0, 0.0


PHI_PRESETS: dict[str, CustomPhi] = {
    "riemannian": CustomPhi("riemannian", _phi_riemannian),
    "randers": CustomPhi("randers", _phi_randers),
}


@dataclass(frozen=True)
class ShenReport:
    b: float
    interval: tuple[float, float]
    n_grid: int
    min_value: float
    argmin: float

    @property
    def passed(self) -> bool:
        return self.min_value > 0.0

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "interval": list(self.interval),
            "n_grid": self.n_grid,
            "min_E": self.min_value,
            "argmin_s": self.argmin,
            "pass": self.passed,
        }


@dataclass(frozen=True, eq=False)
class Metric:
    """An (alpha, beta)-metric on m.

    ``x`` holds the m-coordinates of the invariant vector.  ``b0`` bounds the
    admissible length of ``x``; it defaults to unbounded because neither
    built-in profile has a natural radius.
    """

    kind: MetricKind
    inner_product: np.ndarray
    x: np.ndarray
    b0: float = math.inf
    custom_phi: CustomPhi | None = None

    def __post_init__(self):
        kind = MetricKind(self.kind)
        a = np.array(self.inner_product, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InputError(f"inner product must be a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("inner product has non-finite entries")
        asym = np.abs(a - a.T)
        if asym.max() > SYMMETRY_TOL:
            i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
            raise InputError(f"inner product is not symmetric: entry ({i + 1},{j + 1})={float(a[i, j])!r} vs {float(a[j, i])!r}")
        a = (a + a.T) / 2.0
        eig = np.linalg.eigvalsh(a)
        if eig[0] <= 0.0:
            raise InputError(f"inner product is not positive definite: smallest eigenvalue {float(eig[0])!r}")
        x = np.array(self.x, dtype=float)
        if x.shape != (a.shape[0],):
            raise InputError(f"invariant vector has shape {x.shape}, expected ({a.shape[0]},)")
        if not np.all(np.isfinite(x)):
            raise InputError("invariant vector has non-finite entries")
        if not self.b0 > 0:
            raise InputError(f"b0 must be positive, got {self.b0!r}")
        if kind is MetricKind.CUSTOM:
            if self.custom_phi is None:
                raise InputError("custom metric needs a phi profile")
        elif self.custom_phi is not None:
            raise InputError(f"phi profile given for built-in kind {kind.value}")
        a.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "inner_product", a)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "b0", float(self.b0))
        self._check_admissible_b()

    def _check_admissible_b(self):
        b = self.b
        if not b < self.b0:
            raise DomainError(f"|X| = {b!r} must be below b0 = {self.b0!r}")
        if self.kind is MetricKind.EXPONENTIAL and not b < 1.0:
            raise DomainError(f"exponential metric needs |X| < 1 for Shen's condition, got |X| = {b!r}")
        if self.kind is MetricKind.INFINITE_SERIES and not b > 1.0 + INFINITE_CONE_EPS:
            raise DomainError(
                f"infinite series metric needs |X| > 1 + {INFINITE_CONE_EPS} for a non-empty cone, got |X| = {b!r}"
            )
        if self.kind is MetricKind.CUSTOM:
            grid = np.linspace(-b, b, CUSTOM_SHEN_GRID)
            vals = [self.custom_phi.func(float(s))[0] for s in grid]
            if min(vals) <= 0.0:
                raise DomainError(f"phi profile {self.custom_phi.name!r} is not positive on [-|X|, |X|]")
            report = shen_check(self, b, CUSTOM_SHEN_GRID)
            if not report.passed:
                raise DomainError(
                    f"phi profile {self.custom_phi.name!r} fails Shen's condition at s={report.argmin!r} "
                    f"(E={report.min_value!r})"
                )

    @property
    def dim(self) -> int:
        return self.inner_product.shape[0]

    @property
    def b(self) -> float:
        """Length of the invariant vector, ``sqrt(<X, X>)``."""
        return math.sqrt(float(self.x @ self.inner_product @ self.x))

    def ip(self, u, v) -> float:
        return float(np.asarray(u) @ self.inner_product @ np.asarray(v))

    def alpha(self, y) -> float:
        return math.sqrt(max(self.ip(y, y), 0.0))

    def beta(self, y) -> float:
        return self.ip(self.x, y)

    def vector(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.dim,):
            raise InputError(f"expected an m-vector of length {self.dim}, got shape {y.shape}")
        return y

    def with_x(self, x) -> "Metric":
        return Metric(self.kind, self.inner_product, x, self.b0, self.custom_phi)


def exponential(inner_product, x, b0: float = math.inf) -> Metric:
    return Metric(MetricKind.EXPONENTIAL, inner_product, x, b0)


def infinite_series(inner_product, x, b0: float = math.inf) -> Metric:
    return Metric(MetricKind.INFINITE_SERIES, inner_product, x, b0)


def custom(inner_product, x, phi: CustomPhi | str, b0: float = math.inf) -> Metric:
    if isinstance(phi, str):
        try:
            phi = PHI_PRESETS[phi]
        except KeyError:
            raise InputError(f"unknown phi preset {phi!r}; known: {sorted(PHI_PRESETS)}") from None
    return Metric(MetricKind.CUSTOM, inner_product, x, b0, phi)


def riemannian(inner_product) -> Metric:
    """The plain inner-product norm, as the ``phi = 1`` custom metric with X = 0."""
    a = np.asarray(inner_product, dtype=float)
    return custom(a, np.zeros(a.shape[0]), "riemannian")


def phi_eval(metric: Metric, s: float) -> tuple[float, float, float]:
    """``(phi(s), phi'(s), phi''(s))`` for the metric's profile."""
    s = float(s)
    if metric.kind is MetricKind.EXPONENTIAL:
        e = math.exp(s)
        return e, e, e
    if metric.kind is MetricKind.INFINITE_SERIES:
        if s == 1.0:
            raise DomainError("infinite series phi(s) = s^2/(s-1) is undefined at s = 1")
        t = s - 1.0
        # s^2/(s-1) = t + 2 + 1/t
        return s * s / t, 1.0 - 1.0 / (t * t), 2.0 / (t * t * t)
    return tuple(float(v) for v in metric.custom_phi.func(s))


def _phi(metric: Metric, s):
    """phi evaluated on a float or a hyper-dual number."""
    if metric.kind is MetricKind.EXPONENTIAL:
        return hd.exp(s)
    if metric.kind is MetricKind.INFINITE_SERIES:
        return s * s / (s - 1.0)
    if isinstance(s, hd.HyperDual):
        return hd.lift(s, *metric.custom_phi.func(s.a))
    return metric.custom_phi.func(s)[0]


def shen_interval(metric: Metric, b: float) -> tuple[float, float]:
    if metric.kind is MetricKind.INFINITE_SERIES:
        lo = 1.0 + INFINITE_CONE_EPS
        if b < lo:
            raise DomainError(f"empty admissible interval [{lo}, {b}] for the infinite series metric")
        return lo, float(b)
    return -float(b), float(b)


def shen_check(metric: Metric, b: float, n_grid: int = 1001) -> ShenReport:
    """Minimum of ``phi - s phi' + (b^2 - s^2) phi''`` over a uniform grid.

    The grid covers ``|s| <= b`` except for the infinite series profile,
    which is only positive for ``s > 1`` and is sampled on ``[1 + eps, b]``.
    """
    b = float(b)
    if not 0.0 <= b < metric.b0:
        raise DomainError(f"b = {b!r} must satisfy 0 <= b < b0 = {metric.b0!r}")
    if n_grid < 3:
        raise InputError(f"n_grid must be at least 3, got {n_grid}")
    lo, hi = shen_interval(metric, b)
    grid = np.linspace(lo, hi, int(n_grid))
    if metric.kind is MetricKind.EXPONENTIAL:
        values = np.exp(grid) * (1.0 - grid + (b * b - grid * grid))
    else:
        values = np.empty_like(grid)
        for i, s in enumerate(grid):
            p0, p1, p2 = phi_eval(metric, s)
            values[i] = p0 - s * p1 + (b * b - s * s) * p2
    k = int(np.argmin(values))
    return ShenReport(b, (float(lo), float(hi)), int(n_grid), float(values[k]), float(grid[k]))


def cone_margin(metric: Metric, y) -> float:
    """Signed margin of ``y`` inside the admissible cone (positive = inside).

    For the infinite series metric this is ``beta - (1 + eps) alpha``; for
    other profiles it is ``alpha`` (every non-zero vector is admissible).
    """
    y = metric.vector(y)
    a = metric.alpha(y)
    if metric.kind is MetricKind.INFINITE_SERIES:
        return metric.beta(y) - (1.0 + INFINITE_CONE_EPS) * a
    return a


def is_admissible(metric: Metric, y) -> bool:
    y = metric.vector(y)
    if not np.all(np.isfinite(y)) or metric.alpha(y) == 0.0:
        return False
    return cone_margin(metric, y) > 0.0


def check_admissible(metric: Metric, y) -> np.ndarray:
    y = metric.vector(y)
    if not np.all(np.isfinite(y)):
        raise DomainError("vector has non-finite coordinates")
    if metric.alpha(y) == 0.0:
        raise DomainError("F is not defined at the zero vector")
    if metric.kind is MetricKind.INFINITE_SERIES and cone_margin(metric, y) <= 0.0:
        raise DomainError(
            f"y is outside the infinite series cone: <X,y> = {metric.beta(y)!r} must exceed "
            f"(1 + {INFINITE_CONE_EPS}) sqrt(<y,y>) = {(1.0 + INFINITE_CONE_EPS) * metric.alpha(y)!r}"
        )
    return y


def norm_from_invariants(metric: Metric, aa, beta):
    """``F`` from ``<y, y>`` and ``<X, y>``; accepts floats or hyper-duals."""
    alpha = hd.sqrt(aa)
    return alpha * _phi(metric, beta / alpha)


def finsler_norm(metric: Metric, y) -> float:
    """``F(y) = alpha(y) phi(beta(y) / alpha(y))``."""
    y = check_admissible(metric, y)
    return float(norm_from_invariants(metric, metric.ip(y, y), metric.beta(y)))


def _tagged_sum(name: str, terms: list[tuple[str, float]]) -> float:
    if log.isEnabledFor(logging.DEBUG):
        for tag, value in terms:
            log.debug("%s %s = %r", name, tag, value)
    return math.fsum(v for _, v in terms)


def exponential_terms(metric: Metric, y, u, v) -> tuple[float, list[tuple[str, float]]]:
    """Prefactor and tagged bracket terms of the printed exponential tensor (unsymmetrized)."""
    yy = metric.ip(y, y)
    ry = math.sqrt(yy)
    xy = metric.beta(y)
    xu, xv = metric.beta(u), metric.beta(v)
    yu, yv = metric.ip(y, u), metric.ip(y, v)
    uv = metric.ip(u, v)
    terms = [
        ("uv", uv),
        ("2xu.xv", 2.0 * xu * xv),
        ("-xy.yu.yv/yy^1.5", -xy * yu * yv / (yy * ry)),
        ("xu.yv/ry", xu * yv / ry),
        ("xv.yu/ry", xv * yu / ry),
        ("-xy.uv/ry", -xy * uv / ry),
        ("2xy^2.yu.yv/yy^2", 2.0 * xy * xy * yu * yv / (yy * yy)),
        ("-2xy.yu.xv/yy", -2.0 * xy * yu * xv / yy),
        ("-2xy.xu.yv/yy", -2.0 * xy * xu * yv / yy),
    ]
    return math.exp(2.0 * xy / ry), terms


def g_closed_exponential(metric: Metric, y, u, v) -> float:
    """Hand-derived fundamental tensor ``g_y(u, v)`` of ``F = alpha exp(beta/alpha)``.

    The bracket is summed with :func:`math.fsum` before the exponential
    prefactor is applied; the result is symmetrized in ``u, v``.
    """
    if metric.kind is not MetricKind.EXPONENTIAL:
        raise InputError(f"closed exponential tensor requested for a {metric.kind.value} metric")
    y, u, v = metric.vector(y), metric.vector(u), metric.vector(v)
    if metric.alpha(y) == 0.0:
        raise DomainError("fundamental tensor is undefined at y = 0")
    pre, t_uv = exponential_terms(metric, y, u, v)
    _, t_vu = exponential_terms(metric, y, v, u)
    s_uv = _tagged_sum("exp(u,v)", t_uv)
    s_vu = _tagged_sum("exp(v,u)", t_vu)
    return pre * ((s_uv + s_vu) / 2.0)


def infinite_terms(metric: Metric, y, u, v) -> tuple[float, list[tuple[str, float]]]:
    """Prefactor and the eleven printed bracket terms of the infinite series tensor.

    Transcribed exactly as typeset, including the ``-4 <Y,Y>^{3/2}`` term,
    which is not of the same homogeneity degree as the others.  The audit
    measures how far this expression is from the true Hessian.
    """
    yy = metric.ip(y, y)
    ry = math.sqrt(yy)
    xy = metric.beta(y)
    xu, xv = metric.beta(u), metric.beta(v)
    uy, vy = metric.ip(u, y), metric.ip(v, y)
    uv = metric.ip(u, v)
    terms = [
        ("T1 xy^2.xv.xu", xy * xy * xv * xu),
        ("T2 -4yy^1.5.xv.xu", -4.0 * yy * ry * xv * xu),
        ("T3 6yy.xv.xu", 6.0 * yy * xv * xu),
        ("T4 xy^2.xv.uy/ry", xy * xy * xv * uy / ry),
        ("T5 -4xy.xv.uy", -4.0 * xy * xv * uy),
        ("T6 -xy^3.uy.vy/yy^1.5", -(xy ** 3) * uy * vy / (yy * ry)),
        ("T7 xy^3.uv/ry", xy ** 3 * uv / ry),
        ("T8 4xy^2.uy.vy/yy", 4.0 * xy * xy * uy * vy / yy),
        ("T9 -xy^2.uv", -xy * xy * uv),
        ("T10 xy^2.xu.vy/ry", xy * xy * xu * vy / ry),
        ("T11 -4xy.xu.vy", -4.0 * xy * xu * vy),
    ]
    return xy * xy / (xy - ry) ** 4, terms


def singular_tol(metric: Metric, y) -> float:
    return 1e-9 * (1.0 + metric.alpha(y))


def g_closed_infinite(metric: Metric, y, u, v) -> float:
    """Printed closed form of ``g_y(u, v)`` for ``F = beta^2 / (beta - alpha)``, symmetrized.

    Raises :class:`SingularityError` within ``1e-9 (1 + alpha)`` of the cone
    boundary ``beta = alpha``.
    """
    if metric.kind is not MetricKind.INFINITE_SERIES:
        raise InputError(f"closed infinite series tensor requested for a {metric.kind.value} metric")
    y, u, v = metric.vector(y), metric.vector(u), metric.vector(v)
    if metric.alpha(y) == 0.0:
        raise DomainError("fundamental tensor is undefined at y = 0")
    gap = metric.beta(y) - metric.alpha(y)
    if abs(gap) < singular_tol(metric, y):
        raise SingularityError(f"<X,y> - sqrt(<y,y>) = {gap!r} is within the singular tolerance")
    check_admissible(metric, y)
    pre, t_uv = infinite_terms(metric, y, u, v)
    _, t_vu = infinite_terms(metric, y, v, u)
    s_uv = _tagged_sum("inf(u,v)", t_uv)
    s_vu = _tagged_sum("inf(v,u)", t_vu)
    return pre * ((s_uv + s_vu) / 2.0)


def g_closed(metric: Metric, y, u, v) -> float:
    if metric.kind is MetricKind.EXPONENTIAL:
        return g_closed_exponential(metric, y, u, v)
    if metric.kind is MetricKind.INFINITE_SERIES:
        return g_closed_infinite(metric, y, u, v)
    raise InputError("no closed-form tensor for custom phi profiles; use the Hessian oracle")
