"""Dense linear algebra on finite tensor-product Hilbert spaces.

Composite indices are row-major with the leftmost local factor most
significant, i.e. ``|i_0 i_1 ... i_{n-1}>`` sits at
``i_0 * d_1 * ... * d_{n-1} + ... + i_{n-1}``.  This is the ordering of
``np.kron`` and of ``ndarray.reshape`` in C order.

All containers are frozen dataclasses holding read-only arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every module."""

    construction: float = 1e-12
    decomposition: float = 1e-10
    rank_cutoff: float = 1e-10
    support: float = 1e-10
    ppt: float = 1e-10
    psd: float = 1e-10


TOL = Tolerances()


class DimensionError(ValueError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HilbertDims:
    """Local dimensions plus an optional bipartite cut.

    ``cut`` is the number of leading factors on the A side; ``None`` means
    no bipartite view is attached.
    """

    locals: tuple[int, ...]
    cut: int | None = None

    def __post_init__(self):
        locs = tuple(int(d) for d in self.locals)
        if not locs or any(d < 1 for d in locs):
            raise DimensionError(f"local dimensions must be >= 1, got {self.locals}")
        object.__setattr__(self, "locals", locs)
        if self.cut is not None and not 1 <= self.cut < len(locs):
            raise DimensionError(f"cut {self.cut} invalid for {len(locs)} factors")

    @property
    def total(self) -> int:
        return int(np.prod(self.locals))

    @property
    def dim_a(self) -> int:
        return int(np.prod(self.locals[: self.require_cut()]))

    @property
    def dim_b(self) -> int:
        return int(np.prod(self.locals[self.require_cut():]))

    def require_cut(self) -> int:
        if self.cut is None:
            raise DimensionError("operation needs a bipartite cut")
        return self.cut

    def with_cut(self, cut: int | None) -> "HilbertDims":
        return HilbertDims(self.locals, cut)


def _as_dims(dims) -> HilbertDims:
    if isinstance(dims, HilbertDims):
        return dims
    return HilbertDims(tuple(dims))


@dataclass(frozen=True, eq=False)
class Ket:
    amplitudes: np.ndarray
    dims: HilbertDims
    tol: float = field(default=TOL.construction, compare=False, repr=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        dims = _as_dims(self.dims)
        if amp.size != dims.total:
            raise DimensionError(f"{amp.size} amplitudes for dims {dims.locals}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > self.tol:
            raise ValueError(f"ket norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", _frozen(amp))
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, amplitudes, dims) -> "Ket":
        amp = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(amp / np.linalg.norm(amp), dims)

    @classmethod
    def basis(cls, index: int, dims) -> "Ket":
        dims = _as_dims(dims)
        amp = np.zeros(dims.total, dtype=np.complex128)
        amp[index] = 1.0
        return cls(amp, dims)

    def matrix(self) -> np.ndarray:
        """Amplitudes reshaped to ``dim_a x dim_b`` across the cut."""
        return self.amplitudes.reshape(self.dims.dim_a, self.dims.dim_b)

    def projector(self) -> "Operator":
        return Operator(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims, hermitian=True)

    def inner(self, other: "Ket") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class Operator:
    entries: np.ndarray
    dims: HilbertDims
    hermitian: bool = False
    tol: float = field(default=TOL.construction, compare=False, repr=False)

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=np.complex128)
        dims = _as_dims(self.dims)
        if mat.ndim != 2 or mat.shape != (dims.total, dims.total):
            raise DimensionError(f"operator shape {mat.shape} does not match dims {dims.locals}")
        if self.hermitian:
            err = np.max(np.abs(mat - mat.conj().T), initial=0.0)
            if err > self.tol:
                raise ValueError(f"hermitian flag set but |A - A^H| = {err:.3e}")
        object.__setattr__(self, "entries", _frozen(mat))
        object.__setattr__(self, "dims", dims)

    @classmethod
    def identity(cls, dims) -> "Operator":
        dims = _as_dims(dims)
        return cls(np.eye(dims.total), dims, hermitian=True)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def is_density(self, tol: Tolerances = TOL) -> bool:
        if not self.hermitian:
            return False
        if abs(self.trace - 1.0) > tol.construction:
            return False
        return float(np.linalg.eigvalsh(self.entries)[0]) >= -tol.psd

    def require_density(self, tol: Tolerances = TOL) -> None:
        if not self.is_density(tol):
            raise ValueError("operator is not a density matrix")

    def scaled(self, factor: float) -> "Operator":
        return Operator(self.entries * factor, self.dims, hermitian=self.hermitian)


def density(psi: Ket) -> Operator:
    return psi.projector()


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    coefficients: np.ndarray
    left_vectors: tuple[Ket, ...]
    right_vectors: tuple[Ket, ...]

    @property
    def lambda1(self) -> float:
        return float(self.coefficients[0])

    def reconstruct(self, dims: HilbertDims) -> Ket:
        amp = sum(
            np.sqrt(lam) * np.kron(u.amplitudes, v.amplitudes)
            for lam, u, v in zip(self.coefficients, self.left_vectors, self.right_vectors)
        )
        return Ket(amp, dims, tol=1e-8)


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: tuple[Ket, ...]

    def reconstruct(self) -> np.ndarray:
        vecs = np.array([k.amplitudes for k in self.eigenvectors]).T
        return (vecs * self.eigenvalues) @ vecs.conj().T


# -- decomposition kernels -------------------------------------------------
# Every vector-returning eigen/SVD call goes through these two functions.


def eigh_desc(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with eigenvalues in non-increasing order.

    Returns ``(values, vectors)`` with eigenvectors as columns.
    """
    vals, vecs = np.linalg.eigh(mat)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def svd_desc(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return np.linalg.svd(mat, full_matrices=False)


# -- operations ------------------------------------------------------------


def tensor(x, y):
    """Kronecker product of two kets or two operators.

    The result carries the concatenated local dimensions with the cut placed
    between the two arguments.
    """
    if isinstance(x, Ket) and isinstance(y, Ket):
        dims = HilbertDims(x.dims.locals + y.dims.locals, len(x.dims.locals))
        return Ket(np.kron(x.amplitudes, y.amplitudes), dims, tol=1e-10)
    if isinstance(x, Operator) and isinstance(y, Operator):
        dims = HilbertDims(x.dims.locals + y.dims.locals, len(x.dims.locals))
        return Operator(np.kron(x.entries, y.entries), dims, hermitian=x.hermitian and y.hermitian)
    raise TypeError(f"cannot tensor {type(x).__name__} with {type(y).__name__}")


def permute(x, order: Sequence[int], cut: int | None = None):
    """Reorder the local factors of a ket or operator.

    ``order[k]`` names the old factor that becomes factor ``k``.
    """
    locs = x.dims.locals
    order = [int(i) for i in order]
    if sorted(order) != list(range(len(locs))):
        raise DimensionError(f"{order} is not a permutation of {len(locs)} factors")
    new_dims = HilbertDims(tuple(locs[i] for i in order), cut)
    if isinstance(x, Ket):
        amp = x.amplitudes.reshape(locs).transpose(order).reshape(-1)
        return Ket(amp, new_dims, tol=1e-10)
    n = len(locs)
    t = x.entries.reshape(locs + locs).transpose(order + [n + i for i in order])
    return Operator(t.reshape(new_dims.total, new_dims.total), new_dims, hermitian=x.hermitian)


def tensor_bipartite(x, y):
    """Tensor two bipartite objects and regroup as ``(A_x A_y | B_x B_y)``."""
    cx, cy = x.dims.require_cut(), y.dims.require_cut()
    nx, ny = len(x.dims.locals), len(y.dims.locals)
    raw = tensor(x, y)
    order = (
        list(range(cx))
        + [nx + i for i in range(cy)]
        + list(range(cx, nx))
        + [nx + i for i in range(cy, ny)]
    )
    return permute(raw, order, cut=cx + cy)


def partial_trace(op: Operator, keep: Sequence[int], tol: Tolerances = TOL) -> Operator:
    """Trace out every factor not listed in ``keep`` (kept in ascending order)."""
    locs = op.dims.locals
    keep = sorted({int(k) for k in keep})
    if not keep or keep[0] < 0 or keep[-1] >= len(locs):
        raise DimensionError(f"invalid keep set {keep} for {len(locs)} factors")
    drop = [i for i in range(len(locs)) if i not in keep]
    n = len(locs)
    t = op.entries.reshape(locs + locs)
    # move kept factors first on both row and column sides, then contract the rest
    t = t.transpose(keep + drop + [n + i for i in keep] + [n + i for i in drop])
    dk = int(np.prod([locs[i] for i in keep]))
    dd = int(np.prod([locs[i] for i in drop])) if drop else 1
    t = t.reshape(dk, dd, dk, dd)
    reduced = np.einsum("ajbj->ab", t)
    cut = None
    if op.dims.cut is not None:
        a_count = sum(1 for k in keep if k < op.dims.cut)
        if 1 <= a_count < len(keep):
            cut = a_count
    return Operator(reduced, HilbertDims(tuple(locs[i] for i in keep), cut), hermitian=op.hermitian)


def partial_transpose(op: Operator, side: str = "B") -> Operator:
    """Transpose the factors on one side of the cut."""
    cut = op.dims.require_cut()
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    da, db = op.dims.dim_a, op.dims.dim_b
    t = op.entries.reshape(da, db, da, db)
    t = t.transpose(0, 3, 2, 1) if side == "B" else t.transpose(2, 1, 0, 3)
    return Operator(t.reshape(da * db, da * db), op.dims.with_cut(cut), hermitian=op.hermitian)


def spectral(op: Operator) -> Spectrum:
    if not op.hermitian:
        raise ValueError("spectral decomposition requires a hermitian operator")
    vals, vecs = eigh_desc(op.entries)
    kets = tuple(Ket(vecs[:, k], op.dims, tol=1e-10) for k in range(vecs.shape[1]))
    return Spectrum(vals.copy(), kets)


def schmidt(psi: Ket) -> SchmidtForm:
    """Schmidt decomposition across the ket's cut.

    Coefficients are squared singular values of the ``dim_a x dim_b``
    amplitude matrix; zero coefficients are kept so the form always has
    ``min(dim_a, dim_b)`` terms.
    """
    cut = psi.dims.require_cut()
    u, s, vh = svd_desc(psi.matrix())
    lam = s**2
    lam = lam / lam.sum()
    left_dims = HilbertDims(psi.dims.locals[:cut])
    right_dims = HilbertDims(psi.dims.locals[cut:])
    left = tuple(Ket(u[:, i], left_dims, tol=1e-10) for i in range(len(s)))
    right = tuple(Ket(vh[i, :], right_dims, tol=1e-10) for i in range(len(s)))
    return SchmidtForm(lam, left, right)


def lambda1(psi: Ket) -> float:
    """Largest Schmidt coefficient across the cut."""
    s = np.linalg.svd(psi.matrix(), compute_uv=False)
    return float(s[0] ** 2)
