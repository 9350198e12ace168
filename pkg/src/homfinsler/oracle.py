"""Fundamental tensor from first principles, and audits of the closed forms.

``g_y(u, v) = 1/2 d^2/ds dt F^2(y + s u + t v)`` at ``s = t = 0``, computed
either with hyper-dual numbers (exact to rounding) or with a four-point
central-difference stencil.  The two schemes share nothing but
``finsler_norm``'s scalar pipeline.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import hyperdual as hd
from .errors import DomainError, InputError
from .metric import (
    Metric,
    MetricKind,
    check_admissible,
    cone_margin,
    finsler_norm,
    g_closed,
    is_admissible,
    norm_from_invariants,
)

MIN_STEP = 1e-7
MAX_STEP = 1e-3


class OracleMethod(str, enum.Enum):
    DUAL = "dual"
    CENTRAL = "central"


@dataclass(frozen=True)
class OracleScheme:
    """How to differentiate ``F^2``.

    ``step=None`` with the central scheme means :func:`default_step`.
    """

    method: OracleMethod = OracleMethod.DUAL
    step: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", OracleMethod(self.method))
        if self.step is not None:
            if self.method is not OracleMethod.CENTRAL:
                raise InputError("a step only applies to the central-difference scheme")
            if not MIN_STEP <= self.step <= MAX_STEP:
                raise InputError(f"central-difference step {self.step!r} outside [{MIN_STEP}, {MAX_STEP}]")

    def to_dict(self) -> dict:
        return {"method": self.method.value, "step": self.step}


DUAL = OracleScheme(OracleMethod.DUAL)
CENTRAL = OracleScheme(OracleMethod.CENTRAL)


def default_step(metric: Metric, y) -> float:
    """``1e-5 (1 + alpha(y))``, shrunk near the infinite series cone boundary.

    Truncation error of the stencil grows like ``(h / margin)^2`` as ``y``
    approaches ``beta = alpha``, so the step is capped at ``1e-4 * margin``
    and kept within ``[1e-7, 1e-3]``.
    """
    h = 1e-5 * (1.0 + metric.alpha(y))
    if metric.kind is MetricKind.INFINITE_SERIES:
        h = min(h, 1e-4 * cone_margin(metric, y))
    return min(max(h, MIN_STEP), MAX_STEP)


def _g_dual(metric: Metric, y, u, v) -> float:
    ip = metric.ip
    # <w,w> and <X,w> for w = y + u e1 + v e2
    aa = hd.HyperDual(ip(y, y), 2.0 * ip(y, u), 2.0 * ip(y, v), 2.0 * ip(u, v))
    beta = hd.HyperDual(metric.beta(y), metric.beta(u), metric.beta(v), 0.0)
    f = norm_from_invariants(metric, aa, beta)
    return 0.5 * (f * f).d


def _g_central(metric: Metric, y, u, v, step: float) -> float:
    vals = []
    for su, sv in ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)):
        w = y + su * step * u + sv * step * v
        if not is_admissible(metric, w):
            raise DomainError(
                f"stencil point y{su:+.0f}h u{sv:+.0f}h v leaves the admissible cone at h = {step!r}; "
                "use a smaller step"
            )
        vals.append(finsler_norm(metric, w) ** 2)
    return 0.5 * (vals[0] - vals[1] - vals[2] + vals[3]) / (4.0 * step * step)


def g_oracle(metric: Metric, y, u, v, scheme: OracleScheme = DUAL) -> float:
    """Mixed second partial of ``F^2`` along ``u`` and ``v`` at ``y``, halved."""
    y = check_admissible(metric, y)
    u, v = metric.vector(u), metric.vector(v)
    if scheme.method is OracleMethod.DUAL:
        return _g_dual(metric, y, u, v)
    step = default_step(metric, y) if scheme.step is None else scheme.step
    return _g_central(metric, y, u, v, step)


def g_matrix(metric: Metric, y, scheme: OracleScheme = DUAL) -> np.ndarray:
    """Matrix ``g_ij`` of the fundamental tensor at ``y`` in the m-basis."""
    n = metric.dim
    eye = np.eye(n)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = g_oracle(metric, y, eye[i], eye[j], scheme)
    return g


def bilinear_scale(metric: Metric, y, u, v, scheme: OracleScheme = DUAL) -> float:
    """``sqrt(g_y(u,u) g_y(v,v))``, the Cauchy-Schwarz bound on ``|g_y(u,v)|``."""
    return math.sqrt(abs(g_oracle(metric, y, u, u, scheme)) * abs(g_oracle(metric, y, v, v, scheme)))


def relative_discrepancy(value: float, reference: float, scale: float) -> float:
    """``|value - reference|`` relative to ``max(|reference|, scale)``.

    ``scale`` is normally :func:`bilinear_scale`, so that an off-diagonal
    entry that happens to be near zero is judged against the size of the
    form rather than against itself.
    """
    denom = max(abs(reference), scale)
    diff = abs(value - reference)
    if denom == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / denom


def unit_sphere_sample(metric: Metric, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on ``{alpha(y) = 1}``."""
    z = rng.standard_normal(metric.dim)
    while not np.any(z):
        z = rng.standard_normal(metric.dim)
    # A = L L^T; y = L^{-T} z / |z| has y^T A y = 1
    chol = np.linalg.cholesky(metric.inner_product)
    y = np.linalg.solve(chol.T, z / np.linalg.norm(z))
    return y


def sample_admissible(metric: Metric, rng: np.random.Generator, max_draws: int) -> np.ndarray | None:
    for _ in range(max_draws):
        y = unit_sphere_sample(metric, rng)
        if is_admissible(metric, y):
            return y
    return None


@dataclass(frozen=True)
class AuditSample:
    index: int
    y: tuple[float, ...]
    u: tuple[float, ...]
    v: tuple[float, ...]
    closed: float
    oracle: float
    abs_discrepancy: float
    rel_discrepancy: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "y": list(self.y),
            "u": list(self.u),
            "v": list(self.v),
            "closed": self.closed,
            "oracle": self.oracle,
            "abs_discrepancy": self.abs_discrepancy,
            "rel_discrepancy": self.rel_discrepancy,
        }


@dataclass(frozen=True)
class AuditReport:
    kind: str
    seed: int
    scheme: OracleScheme
    per_sample: tuple[AuditSample, ...]

    @property
    def samples(self) -> int:
        return len(self.per_sample)

    @property
    def max_abs_discrepancy(self) -> float:
        return max(s.abs_discrepancy for s in self.per_sample)

    @property
    def worst(self) -> AuditSample:
        return max(self.per_sample, key=lambda s: (s.rel_discrepancy, -s.index))

    @property
    def max_rel_discrepancy(self) -> float:
        return self.worst.rel_discrepancy

    @property
    def worst_case_inputs(self) -> tuple[tuple[float, ...], ...]:
        w = self.worst
        return (w.y, w.u, w.v)

    def to_dict(self, include_samples: bool = True) -> dict:
        out = {
            "kind": self.kind,
            "seed": self.seed,
            "scheme": self.scheme.to_dict(),
            "samples": self.samples,
            "max_abs_discrepancy": self.max_abs_discrepancy,
            "max_rel_discrepancy": self.max_rel_discrepancy,
            "worst_case": self.worst.to_dict(),
        }
        if include_samples:
            out["per_sample"] = [s.to_dict() for s in self.per_sample]
        return out


def audit_closed_forms(
    metric: Metric,
    n_samples: int = 100,
    seed: int = 0,
    scheme: OracleScheme = DUAL,
) -> AuditReport:
    """Compare the closed-form tensor with :func:`g_oracle` on random inputs.

    ``y`` is uniform on the unit alpha-sphere (rejecting points outside the
    cone or whose stencil would leave it), ``u`` and ``v`` are standard
    normal.  Discrepancies are data: this never raises because of them.
    """
    if metric.kind not in (MetricKind.EXPONENTIAL, MetricKind.INFINITE_SERIES):
        raise InputError(f"no closed form to audit for a {metric.kind.value} metric")
    if n_samples < 1:
        raise InputError(f"n_samples must be at least 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    budget = 1000 * n_samples
    draws = 0
    out: list[AuditSample] = []
    while len(out) < n_samples:
        if draws >= budget:
            raise DomainError(f"no admissible samples after {budget} draws; the cone is too thin")
        draws += 1
        y = unit_sphere_sample(metric, rng)
        u = rng.standard_normal(metric.dim)
        v = rng.standard_normal(metric.dim)
        if not is_admissible(metric, y):
            continue
        try:
            oracle = g_oracle(metric, y, u, v, scheme)
            scale = bilinear_scale(metric, y, u, v, scheme)
            closed = g_closed(metric, y, u, v)
        except DomainError:
            continue
        out.append(
            AuditSample(
                len(out),
                tuple(map(float, y)),
                tuple(map(float, u)),
                tuple(map(float, v)),
                closed,
                oracle,
                abs(closed - oracle),
                relative_discrepancy(closed, oracle, scale),
            )
        )
    return AuditReport(metric.kind.value, int(seed), scheme, tuple(out))
