"""Reference states: EPR, GHZ, the Tiles UPB, edge states and purifications."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .tensor_core import (
    TOL,
    HilbertDims,
    Ket,
    Operator,
    Tolerances,
    eigh_desc,
    lambda1,
    partial_trace,
)

SQ2 = np.sqrt(2.0)


def epr() -> Ket:
    return Ket(np.array([1, 0, 0, 1]) / SQ2, HilbertDims((2, 2), 1))


def ghz() -> Ket:
    amp = np.zeros(8)
    amp[0] = amp[7] = 1 / SQ2
    return Ket(amp, HilbertDims((2, 2, 2), 1))


def product_ket(a, b) -> Ket:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return Ket(np.kron(a, b), HilbertDims((a.size, b.size), 1))


@dataclass(frozen=True)
class ProductBasis:
    vectors: tuple[Ket, ...]
    dims: HilbertDims

    def __post_init__(self):
        for v in self.vectors:
            if v.dims != self.dims:
                raise ValueError("basis member dims differ from basis dims")
            if abs(lambda1(v) - 1.0) > TOL.construction:
                raise ValueError("basis member is not a product vector")
        gram = self.gram()
        if np.max(np.abs(gram - np.eye(len(self.vectors))), initial=0.0) > TOL.construction:
            raise ValueError("basis members are not orthonormal")

    def gram(self) -> np.ndarray:
        mat = np.array([v.amplitudes for v in self.vectors])
        return mat.conj() @ mat.T

    def projector(self) -> np.ndarray:
        mat = np.array([v.amplitudes for v in self.vectors])
        return mat.T @ mat.conj()


def tiles_upb() -> ProductBasis:
    e = np.eye(3)
    minus01 = (e[0] - e[1]) / SQ2
    minus12 = (e[1] - e[2]) / SQ2
    uniform = np.ones(3) / np.sqrt(3)
    pairs = [
        (e[0], minus01),
        (e[2], minus12),
        (minus01, e[2]),
        (minus12, e[0]),
        (uniform, uniform),
    ]
    return ProductBasis(tuple(product_ket(a, b) for a, b in pairs), HilbertDims((3, 3), 1))


@dataclass(frozen=True)
class EdgeStateRecipe:
    basis: ProductBasis

    @property
    def ambient_dim(self) -> int:
        return self.basis.dims.total

    @property
    def rank(self) -> int:
        return self.ambient_dim - len(self.basis.vectors)


def tiles_recipe() -> EdgeStateRecipe:
    return EdgeStateRecipe(tiles_upb())


def edge_state(recipe: EdgeStateRecipe) -> Operator:
    """Normalized projector onto the orthogonal complement of a product basis."""
    if recipe.rank <= 0:
        raise ValueError("product basis spans the whole space; complement is empty")
    comp = np.eye(recipe.ambient_dim) - recipe.basis.projector()
    comp = (comp + comp.conj().T) / 2
    return Operator(comp / recipe.rank, recipe.basis.dims, hermitian=True)


def purify(rho: Operator, tol: Tolerances = TOL) -> Ket:
    """Purification on ``locals(rho) + (rank,)`` with cut between rho and the purifier.

    Eigenvalues at or below ``tol.rank_cutoff`` are dropped, so the
    purifying factor has dimension equal to the numerical rank.
    """
    if not rho.is_density(tol):
        raise ValueError("purify needs a density matrix")
    vals, vecs = eigh_desc(rho.entries)
    keep = vals > tol.rank_cutoff
    vals, vecs = vals[keep], vecs[:, keep]
    r = len(vals)
    amp = (vecs * np.sqrt(vals)).reshape(-1)  # column k of vecs pairs with |k> of the purifier
    amp = amp / np.linalg.norm(amp)
    locs = rho.dims.locals + (r,)
    return Ket(amp, HilbertDims(locs, len(rho.dims.locals)), tol=1e-10)


def ghz_marginal() -> Operator:
    """Two-qubit marginal of GHZ after tracing out the third qubit (separable)."""
    rho = partial_trace(ghz().projector(), [0, 1])
    return Operator(rho.entries, HilbertDims((2, 2), 1), hermitian=True)


def tiles_delta() -> Operator:
    return edge_state(tiles_recipe())


def tiles_purification() -> Ket:
    return purify(tiles_delta())


REGISTRY: dict[str, Callable[[], Ket | Operator]] = {
    "epr": epr,
    "ghz": ghz,
    "tiles-delta": tiles_delta,
    "tiles-purification": tiles_purification,
    "ghz-marginal": ghz_marginal,
}


def resolve(name: str) -> Ket | Operator:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown state {name!r}; choose from {sorted(REGISTRY)}") from None


def bipartite_density(name: str) -> Operator:
    """Density matrix of a registered state viewed across its A|B cut.

    The purification is reduced back to its AB marginal, since that is the
    bipartite state the certification pipeline analyses.
    """
    obj = resolve(name)
    if name == "tiles-purification":
        # the purification is cut AB|C; its AB marginal gets the A|B cut back
        marg = partial_trace(obj.projector(), [0, 1])
        obj = Operator(marg.entries, HilbertDims(marg.dims.locals, 1), hermitian=True)
    elif isinstance(obj, Ket):
        obj = obj.projector()
    if obj.dims.cut is None:
        raise ValueError(f"state {name!r} has no bipartite cut")
    return obj
