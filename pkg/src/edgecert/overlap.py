"""Maximal overlap of product vectors with a subspace.

For a subspace ``V`` with projector ``P`` this module estimates

    beta(V) = max_{|a>,|b>} <a (x) b| P |a (x) b>

Subspaces are kept as stacks of basis vectors reshaped into
``dim_a x dim_b`` matrices, never as ambient projectors.  With that layout

* ``<a (x) b|v> = a^H V b*`` for basis matrix ``V``,
* tensoring two subspaces across a grouped cut is ``kron`` of the matrices,

which is what keeps tensor powers of small subspaces cheap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor_core import (
    TOL,
    HilbertDims,
    Ket,
    Operator,
    Tolerances,
    eigh_desc,
    svd_desc,
)

DEFAULT_RESTARTS = 100
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
DEFAULT_BUDGET = 10**7  # complex entries held by a subspace basis

# half-steps may lose up to this much to roundoff before being called a decrease
_MONOTONE_SLACK = 1e-12


class SeesawMonotonicityError(RuntimeError):
    pass


class BudgetExceeded(MemoryError):
    pass


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal basis stored as an array of shape ``(k, dim_a, dim_b)``."""

    mats: np.ndarray
    dims: HilbertDims

    def __post_init__(self):
        mats = np.array(self.mats, dtype=np.complex128)
        self.dims.require_cut()
        if mats.ndim != 3 or mats.shape[1:] != (self.dims.dim_a, self.dims.dim_b):
            raise ValueError(f"basis shape {mats.shape} does not match dims {self.dims}")
        flat = mats.reshape(len(mats), -1)
        gram = flat.conj() @ flat.T
        err = np.max(np.abs(gram - np.eye(len(mats))), initial=0.0)
        if err > TOL.decomposition:
            raise ValueError(f"basis not orthonormal (gram error {err:.2e})")
        mats.setflags(write=False)
        object.__setattr__(self, "mats", mats)

    @classmethod
    def from_vectors(cls, vectors, dims: HilbertDims, orthonormalize: bool = True) -> "Subspace":
        """Build from ambient-length vectors (rows); orthonormalized via SVD by default."""
        vecs = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
        if orthonormalize:
            u, s, vh = svd_desc(vecs)
            vecs = vh[s > TOL.rank_cutoff * max(s[0], 1.0)]
        return cls(vecs.reshape(len(vecs), dims.dim_a, dims.dim_b), dims)

    @classmethod
    def span(cls, kets: Sequence[Ket]) -> "Subspace":
        return cls.from_vectors([k.amplitudes for k in kets], kets[0].dims)

    @property
    def dim(self) -> int:
        return self.mats.shape[0]

    @property
    def vectors(self) -> np.ndarray:
        return self.mats.reshape(self.dim, -1)

    def basis_kets(self) -> list[Ket]:
        return [Ket(v, self.dims, tol=1e-10) for v in self.vectors]

    def projector(self) -> np.ndarray:
        """Dense ambient projector; only for small ambient dimensions."""
        v = self.vectors
        return v.T @ v.conj()

    def overlap(self, a: np.ndarray, b: np.ndarray) -> float:
        """``<a (x) b|P|a (x) b>`` for unit vectors ``a``, ``b``."""
        amps = np.einsum("i,kij,j->k", a.conj(), self.mats, b.conj())
        return float(np.sum(np.abs(amps) ** 2))


@dataclass(frozen=True, eq=False)
class OverlapResult:
    beta: float
    maximizer_a: Ket
    maximizer_b: Ket
    restarts: int
    iterations_per_restart: tuple[int, ...]
    converged: bool
    seed: int
    restart_values: tuple[float, ...] = field(default=(), repr=False)
    method: str = "seesaw"

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "method": self.method,
            "restarts": self.restarts,
            "seed": self.seed,
            "converged": self.converged,
            "iterations_per_restart": list(self.iterations_per_restart),
            "maximizer_a": _ket_pairs(self.maximizer_a),
            "maximizer_b": _ket_pairs(self.maximizer_b),
        }


def _ket_pairs(k: Ket) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in k.amplitudes]


def support_projector(rho: Operator, cutoff: float = TOL.rank_cutoff) -> Subspace:
    """Subspace spanned by eigenvectors of ``rho`` with eigenvalue above ``cutoff``."""
    if not rho.hermitian:
        raise ValueError("support_projector needs a hermitian operator")
    vals, vecs = eigh_desc(rho.entries)
    if vals[-1] < -TOL.psd:
        raise ValueError(f"operator is not positive semidefinite (min eigenvalue {vals[-1]:.3e})")
    keep = vals > cutoff
    if not keep.any():
        raise ValueError("all eigenvalues below cutoff; support is empty")
    return Subspace.from_vectors(vecs[:, keep].T, rho.dims, orthonormalize=False)


# -- random product starts --------------------------------------------------


def haar_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def restart_rngs(seed: int, restarts: int) -> list[np.random.Generator]:
    """One independent PCG64 stream per restart, spawned from the root seed."""
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


# -- update steps -----------------------------------------------------------


def _best_b(mats: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, float]:
    # rows w_k with <a (x) b|v_k> = <b|w_k>; objective b^H (W^T W*) b
    w = np.tensordot(a.conj(), mats, axes=(0, 1))
    _, s, vh = svd_desc(w)
    return vh[0], float(s[0] ** 2)


def _best_a(mats: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    w = np.tensordot(mats, b.conj(), axes=(2, 0))
    _, s, vh = svd_desc(w)
    return vh[0], float(s[0] ** 2)


def _seesaw_run(mats, a, b, tol, max_iter, history=None):
    """Single restart; returns ``(value, a, b, iterations, converged)``."""
    value = float(np.sum(np.abs(np.einsum("i,kij,j->k", a.conj(), mats, b.conj())) ** 2))
    if history is not None:
        history.append(value)
    for it in range(1, max_iter + 1):
        prev = value
        b, half = _best_b(mats, a)
        if half < value - _MONOTONE_SLACK:
            raise SeesawMonotonicityError(f"B update decreased objective {value} -> {half}")
        a, value = _best_a(mats, b)
        if value < half - _MONOTONE_SLACK:
            raise SeesawMonotonicityError(f"A update decreased objective {half} -> {value}")
        if history is not None:
            history.extend([half, value])
        if value - prev < tol:
            return value, a, b, it, True
    return value, a, b, max_iter, False


def _schmidt_run(mats, a, b, tol, max_iter, history=None):
    """Alternate psi <- P|ab>/|P|ab>| and (a, b) <- top Schmidt pair of psi."""
    value = float(np.sum(np.abs(np.einsum("i,kij,j->k", a.conj(), mats, b.conj())) ** 2))
    if history is not None:
        history.append(value)
    for it in range(1, max_iter + 1):
        prev = value
        coeffs = np.einsum("i,kij,j->k", a.conj(), mats, b.conj())
        if np.linalg.norm(coeffs) == 0.0:
            # start orthogonal to V: move to a point with nonzero projection
            coeffs = np.zeros(len(mats), dtype=np.complex128)
            coeffs[0] = 1.0
        psi = np.tensordot(coeffs.conj(), mats, axes=(0, 0))
        psi /= np.linalg.norm(psi)
        u, s, vh = svd_desc(psi)
        lam1 = float(s[0] ** 2)
        a, b = u[:, 0], vh[0]
        value = float(np.sum(np.abs(np.einsum("i,kij,j->k", a.conj(), mats, b.conj())) ** 2))
        if value < prev - _MONOTONE_SLACK or value < lam1 - 1e-9:
            raise SeesawMonotonicityError(f"Schmidt step decreased objective {prev} -> {value}")
        if history is not None:
            history.append(value)
        if value - prev < tol:
            return value, a, b, it, True
    return value, a, b, max_iter, False


def _multistart(run, V: Subspace, restarts, tol, max_iter, seed, initial, method) -> OverlapResult:
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    mats = V.mats
    da, db = V.dims.dim_a, V.dims.dim_b
    starts = [(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)) for a, b in initial]
    for rng in restart_rngs(seed, restarts):
        starts.append((haar_vector(rng, da), haar_vector(rng, db)))
    results = [run(mats, a / np.linalg.norm(a), b / np.linalg.norm(b), tol, max_iter) for a, b in starts]
    # first index wins ties, so the merge order is the restart order
    best = max(range(len(results)), key=lambda i: (results[i][0], -i))
    value, a, b, _, conv = results[best]
    a_dims = HilbertDims(V.dims.locals[: V.dims.cut])
    b_dims = HilbertDims(V.dims.locals[V.dims.cut:])
    ka, kb = Ket.normalized(a, a_dims), Ket.normalized(b, b_dims)
    beta = V.overlap(ka.amplitudes, kb.amplitudes)
    return OverlapResult(
        beta=beta,
        maximizer_a=ka,
        maximizer_b=kb,
        restarts=len(starts),
        iterations_per_restart=tuple(r[3] for r in results),
        converged=conv,
        seed=seed,
        restart_values=tuple(r[0] for r in results),
        method=method,
    )


def seesaw_overlap(
    V: Subspace,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    initial: Sequence[tuple[np.ndarray, np.ndarray]] = (),
) -> OverlapResult:
    """Estimate beta(V) by alternating top-eigenvector updates from random starts.

    Each restart fixes ``a`` and sets ``b`` to the top eigenvector of
    ``M_B(a) = sum_k <a|v_k><v_k|a>``, then updates ``a`` symmetrically,
    until one full sweep gains less than ``tol``.  The objective never
    decreases along a restart; a decrease beyond roundoff raises
    :class:`SeesawMonotonicityError`.

    The returned beta is a lower estimate of the true maximum.  ``initial``
    prepends warm starts (e.g. tensor products of known maximizers) to the
    ``restarts`` random Haar starts; ``restarts`` in the result counts both.
    """
    return _multistart(_seesaw_run, V, restarts, tol, max_iter, seed, initial, "seesaw")


def max_schmidt_over_subspace(
    V: Subspace,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    initial: Sequence[tuple[np.ndarray, np.ndarray]] = (),
) -> OverlapResult:
    """Maximize the largest Schmidt coefficient over unit vectors of ``V``.

    Equal to :func:`seesaw_overlap` at the optimum; the maximizing state of
    ``V`` is ``P|a (x) b>`` normalized, see :func:`maximizing_state`.
    """
    return _multistart(_schmidt_run, V, restarts, tol, max_iter, seed, initial, "schmidt")


def maximizing_state(V: Subspace, result: OverlapResult) -> Ket:
    coeffs = np.einsum(
        "i,kij,j->k", result.maximizer_a.amplitudes.conj(), V.mats, result.maximizer_b.amplitudes.conj()
    )
    return Ket.normalized(coeffs.conj() @ V.vectors, V.dims)


# -- brute-force oracle -----------------------------------------------------


def _grid_states(d: int, resolution: int) -> np.ndarray:
    """Unit vectors on a hyperspherical angle/phase grid, global phase fixed.

    ``d - 1`` polar angles in ``[0, pi/2]`` (``resolution`` points, endpoints
    included) and ``d - 1`` relative phases in ``[0, 2 pi)``.
    """
    if d == 1:
        return np.ones((1, 1), dtype=np.complex128)
    thetas = np.linspace(0.0, np.pi / 2, resolution)
    phases = np.arange(resolution) * (2 * np.pi / resolution)
    out = []
    for angs in itertools.product(thetas, repeat=d - 1):
        mags = np.empty(d)
        rem = 1.0
        for i, t in enumerate(angs):
            mags[i] = rem * np.cos(t)
            rem *= np.sin(t)
        mags[-1] = rem
        for ph in itertools.product(phases, repeat=d - 1):
            out.append(mags * np.exp(1j * np.concatenate(([0.0], ph))))
    return np.array(out)


def grid_gap_bound(d: int, resolution: int) -> float:
    """Upper bound on ``beta - brute_force_overlap`` for a local dimension ``d`` grid.

    The maximum over the B side is exact, so only the A-side grid matters.
    Each hyperspherical coordinate moves the unit vector at speed <= 1, so the
    nearest grid point is within the sum of half-steps in Euclidean norm, and
    ``|<x|X|x> - <y|X|y>| <= sqrt(1 - |<x|y>|^2) <= |x - y|`` for
    ``0 <= X <= I``.
    """
    if d == 1:
        return 0.0
    half_theta = (np.pi / 2) / (resolution - 1) / 2
    half_phase = (2 * np.pi / resolution) / 2
    return float((d - 1) * (half_theta + half_phase))


def brute_force_overlap(V: Subspace, resolution: int = 32, max_local_dim: int = 3) -> float:
    """Maximum of the overlap over an A-side grid with exact B-side maximization.

    For each grid vector ``a`` the best ``b`` is the top eigenvalue of the
    ``dim_b x dim_b`` matrix ``M_B(a)``, evaluated in closed batch form, so
    the value is a lower bound on beta within :func:`grid_gap_bound`.  The
    smaller side is gridded.
    """
    da, db = V.dims.dim_a, V.dims.dim_b
    if max(da, db) > max_local_dim:
        raise ValueError(f"brute force limited to local dimensions <= {max_local_dim}")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    mats = V.mats
    if da > db:
        mats = mats.transpose(0, 2, 1)
        da, db = db, da
    grid = _grid_states(da, resolution)
    w = np.einsum("gi,kij->gkj", grid.conj(), mats)
    m = np.einsum("gkj,gkl->gjl", w, w.conj())
    best = 0.0
    for chunk in np.array_split(m, max(1, len(m) // 65536)):
        best = max(best, float(np.linalg.eigvalsh(chunk)[:, -1].max()))
    return best


# -- subspace constructions -------------------------------------------------


def attach_pure(V: Subspace, phi: Ket) -> Subspace:
    """Span of ``{v_k (x) phi}`` regrouped as ``(A_V A_phi | B_V B_phi)``."""
    cv, cp = V.dims.require_cut(), phi.dims.require_cut()
    pm = phi.matrix()
    mats = np.array([np.kron(m, pm) for m in V.mats])
    locs = V.dims.locals[:cv] + phi.dims.locals[:cp] + V.dims.locals[cv:] + phi.dims.locals[cp:]
    return Subspace(mats, HilbertDims(locs, cv + cp))


def tensor_power(V: Subspace, n: int, budget: int = DEFAULT_BUDGET) -> Subspace:
    """``V^{(x) n}`` with all A factors grouped before all B factors."""
    if n < 1:
        raise ValueError("tensor power needs n >= 1")
    size = V.dim**n * (V.dims.dim_a * V.dims.dim_b) ** n
    if size > budget:
        raise BudgetExceeded(f"V^{n} needs {size} complex entries, budget {budget}")
    cut = V.dims.cut
    a_locs, b_locs = V.dims.locals[:cut], V.dims.locals[cut:]
    mats = V.mats
    for _ in range(n - 1):
        mats = np.einsum("aij,bkl->abikjl", mats, V.mats).reshape(
            len(mats) * V.dim, mats.shape[1] * V.dims.dim_a, mats.shape[2] * V.dims.dim_b
        )
    return Subspace(mats, HilbertDims(a_locs * n + b_locs * n, len(a_locs) * n))


def product_start(*results: OverlapResult) -> tuple[np.ndarray, np.ndarray]:
    """Tensor product of maximizers, usable as a warm start on grouped composites."""
    a = np.ones(1, dtype=np.complex128)
    b = np.ones(1, dtype=np.complex128)
    for r in results:
        a = np.kron(a, r.maximizer_a.amplitudes)
        b = np.kron(b, r.maximizer_b.amplitudes)
    return a, b


def contains_product_vector(result: OverlapResult, tol: float = 1e-8) -> bool:
    return result.beta >= 1.0 - tol


def log2_safe(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf
