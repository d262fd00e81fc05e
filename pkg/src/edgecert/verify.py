"""Fast self-check of the library invariants, run by ``edgecert verify``."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import entropy as ent
from . import overlap as ov
from . import states
from .tensor_core import (
    HilbertDims,
    Ket,
    Operator,
    partial_trace,
    partial_transpose,
    schmidt,
    spectral,
    tensor_bipartite,
)


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_separable(rng: np.random.Generator, da: int, db: int, terms: int) -> np.ndarray:
    p = rng.dirichlet(np.ones(terms))
    out = np.zeros((da * db, da * db), dtype=np.complex128)
    for w in p:
        v = np.kron(ov.haar_vector(rng, da), ov.haar_vector(rng, db))
        out += w * np.outer(v, v.conj())
    return out


def _check_tensor_core() -> str:
    rng = np.random.default_rng(11)
    for _ in range(10):
        d = int(rng.integers(2, 10))
        h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = h + h.conj().T
        sp = spectral(Operator(h, HilbertDims((d,)), hermitian=True))
        assert np.max(np.abs(sp.reconstruct() - h)) <= 1e-10
    rho = Operator(random_density(rng, 6), HilbertDims((2, 3), 1), hermitian=True)
    assert np.array_equal(partial_transpose(partial_transpose(rho)).entries, rho.entries)
    psi = Ket.normalized(rng.standard_normal(12) + 1j * rng.standard_normal(12), HilbertDims((3, 4), 1))
    lam = schmidt(psi).coefficients
    marg = np.sort(np.linalg.eigvalsh(partial_trace(psi.projector(), [0]).entries))[::-1]
    assert np.max(np.abs(lam - marg[: len(lam)])) <= 1e-10
    ee = tensor_bipartite(states.epr(), states.epr())
    assert abs(schmidt(ee).coefficients[0] - 0.25) <= 1e-12
    return "decompositions reconstruct, partial transpose is an involution"


def _check_states() -> str:
    delta = states.tiles_delta()
    ok, lo = ent.ppt_check(delta)
    assert ok, lo
    vals = spectral(delta).eigenvalues
    assert np.sum(vals > 1e-10) == 4
    psi = states.purify(delta)
    assert np.max(np.abs(partial_trace(psi.projector(), [0, 1]).entries - delta.entries)) <= 1e-12
    return f"tiles edge state PPT (min PT eigenvalue {lo:.2e}), rank 4, purification round-trips"


def _check_overlap() -> str:
    V = ov.support_projector(states.tiles_delta())
    s = ov.seesaw_overlap(V, restarts=20, seed=3)
    m = ov.max_schmidt_over_subspace(V, restarts=20, seed=3)
    assert s.beta <= 1 - 0.01
    assert abs(s.beta - m.beta) <= 1e-6
    e = ov.seesaw_overlap(ov.attach_pure(V, states.epr()), restarts=20, seed=4)
    assert abs(e.beta - s.beta / 2) <= 1e-6
    return f"beta_T = {s.beta:.10f}, Schmidt form agrees, EPR attachment halves it"


def _check_entropy() -> str:
    rng = np.random.default_rng(5)
    dims = HilbertDims((2, 2), 1)
    V = ov.Subspace.from_vectors(rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)), dims)
    for _ in range(10):
        coeff = random_density(rng, 2)
        rho_m = V.vectors.T @ coeff @ V.vectors.conj()
        rho = Operator((rho_m + rho_m.conj().T) / 2, dims, hermitian=True)
        sigma = Operator(random_separable(rng, 2, 2, 6), dims, hermitian=True)
        s = ent.relative_entropy(rho, sigma).value
        assert s >= -1e-8
        assert s >= ent.relative_entropy(ent.pinch(V, rho), ent.pinch(V, sigma)).value - 1e-8
        pd = ent.pinch_decompose(V, sigma)
        assert s >= -math.log2(pd.t) + ent.relative_entropy(rho, pd.sigma_prime).value - 1e-8
    cert = ent.separability_ball_c(ov.support_projector(states.tiles_delta()))
    assert abs(cert.c - 9 / (math.sqrt(160) - 4)) <= 1e-9
    return "relative entropy non-negative, monotone under pinching, pinched chain holds"


CHECKS: dict[str, Callable[[], str]] = {
    "tensor_core": _check_tensor_core,
    "states": _check_states,
    "overlap": _check_overlap,
    "entropy": _check_entropy,
}


def run_checks() -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS.items():
        try:
            out.append((name, True, fn()))
        except AssertionError as exc:
            out.append((name, False, f"assertion failed {exc}"))
    return out
