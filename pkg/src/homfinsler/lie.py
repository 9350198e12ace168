"""Real Lie algebras given by structure constants, with a reductive split.

A Lie algebra of dimension ``n`` is stored as a dense array ``c`` of shape
``(n, n, n)`` with ``[e_i, e_j] = sum_k c[i, j, k] e_k``.  Vectors are plain
length-``n`` float arrays of coordinates in that basis.  A
:class:`ReductiveSplit` partitions the basis indices into the isotropy part
``h`` and its complement ``m``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, StructureError

ANTISYMMETRY_TOL = 1e-12
DEFAULT_JACOBI_TOL = 1e-9


def default_jacobi_tol() -> float:
    """Jacobi/subalgebra tolerance, overridable through ``FG_TOL_JACOBI``."""
    raw = os.environ.get("FG_TOL_JACOBI")
    if raw is None:
        return DEFAULT_JACOBI_TOL
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"FG_TOL_JACOBI={raw!r} is not a number") from None
    if not value > 0:
        raise InputError(f"FG_TOL_JACOBI must be positive, got {value}")
    return value


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Structure constants of a real Lie algebra.

    On construction the constants are antisymmetrized.  With ``strict=True``
    (the default) the input is rejected when antisymmetrization moves any
    entry by more than ``1e-12``; ``strict=False`` keeps a defective input
    around so :func:`check_structure` can report on it.
    """

    raw_constants: np.ndarray
    labels: tuple[str, ...] = ()
    strict: bool = True
    structure_constants: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        raw = np.array(self.raw_constants, dtype=float)
        if raw.ndim != 3 or not (raw.shape[0] == raw.shape[1] == raw.shape[2]) or raw.shape[0] < 1:
            raise InputError(f"structure constants must have shape (n, n, n) with n >= 1, got {raw.shape}")
        if not np.all(np.isfinite(raw)):
            raise InputError("structure constants contain non-finite entries")
        n = raw.shape[0]
        labels = tuple(self.labels) if self.labels else tuple(f"e{i + 1}" for i in range(n))
        if len(labels) != n:
            raise InputError(f"expected {n} basis labels, got {len(labels)}")
        if len(set(labels)) != n:
            raise InputError("basis labels must be distinct")

        anti = (raw - raw.transpose(1, 0, 2)) / 2.0
        if self.strict:
            moved = np.abs(anti - raw)
            if moved.max() > ANTISYMMETRY_TOL:
                i, j, k = np.unravel_index(int(np.argmax(moved)), moved.shape)
                raise StructureError(
                    f"structure constants are not antisymmetric: c[{i + 1}][{j + 1}][{k + 1}]={float(raw[i, j, k])!r} "
                    f"but c[{j + 1}][{i + 1}][{k + 1}]={float(raw[j, i, k])!r} (1-based indices)"
                )
        raw.setflags(write=False)
        anti.setflags(write=False)
        object.__setattr__(self, "raw_constants", raw)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "structure_constants", anti)

    @property
    def dim(self) -> int:
        return self.structure_constants.shape[0]

    @classmethod
    def from_sparse(cls, dim: int, entries, labels=None) -> "LieAlgebra":
        """Build from ``(i, j, k, value)`` tuples with 1-based indices.

        Each entry also sets ``c[j][i][k] = -value``.  Conflicting entries
        (an explicit value that disagrees with an earlier completion) raise
        :class:`StructureError` naming the indices.
        """
        if dim < 1:
            raise InputError(f"dimension must be positive, got {dim}")
        c = np.zeros((dim, dim, dim))
        given = np.zeros((dim, dim, dim), dtype=bool)
        for pos, entry in enumerate(entries):
            if len(entry) != 4:
                raise InputError(f"bracket entry #{pos} must be (i, j, k, value), got {entry!r}")
            i, j, k, value = entry
            for idx in (i, j, k):
                if not isinstance(idx, (int, np.integer)) or not 1 <= idx <= dim:
                    raise InputError(f"bracket entry #{pos}: index {idx!r} outside 1..{dim}")
            value = float(value)
            a, b, r = i - 1, j - 1, k - 1
            if a == b and value != 0.0:
                raise StructureError(f"bracket entry #{pos}: [e{i}, e{i}] must vanish, got component {value!r} on e{k}")
            for (p, q, val) in ((a, b, value), (b, a, -value)):
                if given[p, q, r] and abs(c[p, q, r] - val) > ANTISYMMETRY_TOL:
                    raise StructureError(
                        f"bracket entry #{pos} conflicts with antisymmetry: c[{p + 1}][{q + 1}][{k}] "
                        f"already {float(c[p, q, r])!r}, entry implies {val!r}"
                    )
                c[p, q, r] = val
                given[p, q, r] = True
        return cls(c, tuple(labels) if labels else ())

    def to_sparse(self) -> list[tuple[int, int, int, float]]:
        """Nonzero entries with ``i < j`` as 1-based ``(i, j, k, value)``."""
        c = self.structure_constants
        n = self.dim
        return [
            (i + 1, j + 1, k + 1, float(c[i, j, k]))
            for i in range(n)
            for j in range(i + 1, n)
            for k in range(n)
            if c[i, j, k] != 0.0
        ]

    def basis(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def vector(self, coords) -> np.ndarray:
        v = np.asarray(coords, dtype=float)
        if v.shape != (self.dim,):
            raise InputError(f"expected a vector of length {self.dim}, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("vector has non-finite coordinates")
        return v

    def ad(self, a) -> np.ndarray:
        """Matrix of ``ad(a)``: column ``j`` holds ``[a, e_j]``."""
        a = self.vector(a)
        return np.einsum("i,ijk->kj", a, self.structure_constants)


def _half_bracket(c: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("i,j,ijk->k", a, b, c)


def bracket(algebra: LieAlgebra, a, b) -> np.ndarray:
    """Lie bracket ``[a, b]``.

    Evaluated as the difference of the two orderings so that
    ``bracket(a, b) == -bracket(b, a)`` holds bit for bit.
    """
    a = algebra.vector(a)
    b = algebra.vector(b)
    c = algebra.structure_constants
    return (_half_bracket(c, a, b) - _half_bracket(c, b, a)) / 2.0


@dataclass(frozen=True)
class ReductiveSplit:
    """Index partition of the basis into ``h`` (isotropy) and ``m``."""

    h_indices: tuple[int, ...]
    m_indices: tuple[int, ...]

    def __post_init__(self):
        h = tuple(int(i) for i in self.h_indices)
        m = tuple(int(i) for i in self.m_indices)
        if set(h) & set(m):
            raise InputError(f"h and m index sets overlap: {sorted(set(h) & set(m))}")
        if len(set(h)) != len(h) or len(set(m)) != len(m):
            raise InputError("duplicate indices in reductive split")
        if not m:
            raise InputError("m must be non-empty")
        n = len(h) + len(m)
        if set(h) | set(m) != set(range(n)):
            raise InputError(f"h and m must cover indices 0..{n - 1} exactly")
        object.__setattr__(self, "h_indices", tuple(sorted(h)))
        object.__setattr__(self, "m_indices", tuple(sorted(m)))

    @property
    def dim(self) -> int:
        return len(self.h_indices) + len(self.m_indices)

    @classmethod
    def trivial(cls, dim: int) -> "ReductiveSplit":
        """Split with ``h = 0``, i.e. the homogeneous space is the group itself."""
        return cls((), tuple(range(dim)))

    def check_dim(self, v: np.ndarray) -> None:
        if v.shape != (self.dim,):
            raise InputError(f"vector of shape {v.shape} does not match split of dimension {self.dim}")

    def m_coords(self, v) -> np.ndarray:
        """Coordinates of the ``m``-component, as a length-``dim m`` array."""
        v = np.asarray(v, dtype=float)
        self.check_dim(v)
        return v[list(self.m_indices)]

    def h_coords(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        self.check_dim(v)
        return v[list(self.h_indices)]

    def embed(self, m_part, h_part=None) -> np.ndarray:
        """Full coordinate vector from ``m`` (and optional ``h``) coordinates."""
        v = np.zeros(self.dim)
        v[list(self.m_indices)] = np.asarray(m_part, dtype=float)
        if h_part is not None and self.h_indices:
            v[list(self.h_indices)] = np.asarray(h_part, dtype=float)
        return v


def project_m(v, split: ReductiveSplit) -> np.ndarray:
    """Zero the ``h`` coordinates of ``v``."""
    out = np.array(v, dtype=float)
    split.check_dim(out)
    out[list(split.h_indices)] = 0.0
    return out


@dataclass(frozen=True)
class StructureReport:
    antisymmetry_residual: float
    jacobi_residual: float
    subalgebra_residual: float
    reductive_residual: float
    tol: float

    @property
    def antisymmetry_ok(self) -> bool:
        return self.antisymmetry_residual <= ANTISYMMETRY_TOL

    @property
    def jacobi_ok(self) -> bool:
        return self.jacobi_residual <= self.tol

    @property
    def subalgebra_ok(self) -> bool:
        return self.subalgebra_residual <= self.tol

    @property
    def reductive_ok(self) -> bool:
        return self.reductive_residual <= self.tol

    @property
    def passed(self) -> bool:
        return self.antisymmetry_ok and self.jacobi_ok and self.subalgebra_ok and self.reductive_ok

    def to_dict(self) -> dict:
        return {
            "antisymmetry": {"residual": self.antisymmetry_residual, "pass": self.antisymmetry_ok},
            "jacobi": {"residual": self.jacobi_residual, "pass": self.jacobi_ok},
            "h_subalgebra": {"residual": self.subalgebra_residual, "pass": self.subalgebra_ok},
            "h_m_reductive": {"residual": self.reductive_residual, "pass": self.reductive_ok},
            "tol": self.tol,
            "pass": self.passed,
        }


def jacobi_residuals(c: np.ndarray) -> np.ndarray:
    """``J[i, j, l, :]`` = coordinates of the Jacobiator of ``(e_i, e_j, e_l)``."""
    # [[e_i, e_j], e_l] + [[e_j, e_l], e_i] + [[e_l, e_i], e_j]
    t = np.einsum("ijk,klm->ijlm", c, c)
    return t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)


def check_structure(algebra: LieAlgebra, split: ReductiveSplit, tol: float | None = None) -> StructureReport:
    """Residuals of antisymmetry, Jacobi, ``[h,h] in h`` and ``[h,m] in m``.

    Antisymmetry is measured on the raw (pre-antisymmetrization) input; the
    remaining checks use the stored antisymmetric constants.  Failures are
    reported, never raised.
    """
    tol = default_jacobi_tol() if tol is None else float(tol)
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    if split.dim != algebra.dim:
        raise InputError(f"split dimension {split.dim} != algebra dimension {algebra.dim}")
    raw = algebra.raw_constants
    c = algebra.structure_constants
    anti = float(np.max(np.abs(raw + raw.transpose(1, 0, 2))))
    jac = float(np.max(np.abs(jacobi_residuals(c))))
    h, m = list(split.h_indices), list(split.m_indices)
    sub = float(np.max(np.abs(c[np.ix_(h, h, m)]))) if h else 0.0
    red = float(np.max(np.abs(c[np.ix_(h, m, h)]))) if h else 0.0
    return StructureReport(anti, jac, sub, red, tol)
