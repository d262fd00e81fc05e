"""Relative entropy and the bounds built on it.

All logarithms are base 2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .overlap import Subspace
from .tensor_core import TOL, Operator, Tolerances, eigh_desc, partial_transpose


class SetChoice(enum.Enum):
    SEP = "Sep"
    PPT = "PPT"


class NotPPTError(ValueError):
    pass


class ProductVectorInSupport(ValueError):
    """The overlap bound reached 1, so no positive bound can be derived."""


@dataclass(frozen=True)
class RelEntropyValue:
    value: float
    support_contained: bool

    def __post_init__(self):
        if math.isinf(self.value) == self.support_contained:
            raise ValueError("value must be +inf exactly when support is not contained")

    def __float__(self):
        return self.value


def _xlog2x(vals: np.ndarray) -> float:
    vals = vals[vals > 0]
    return float(np.sum(vals * np.log2(vals)))


def relative_entropy(rho: Operator, sigma: Operator, tol: Tolerances = TOL) -> RelEntropyValue:
    """``S(rho||sigma) = tr rho log rho - tr rho log sigma``.

    Eigenvalues of ``sigma`` at or below ``tol.support`` are its kernel; if
    ``rho`` puts more than ``tol.support`` weight there the result is +inf.
    """
    if rho.dims.total != sigma.dims.total:
        raise ValueError(f"dimension mismatch {rho.dims.total} vs {sigma.dims.total}")
    r = rho.entries
    rvals = np.linalg.eigvalsh(r)
    svals, svecs = eigh_desc(sigma.entries)
    weights = np.real(np.einsum("ji,jk,ki->i", svecs.conj(), r, svecs))
    kernel = svals <= tol.support
    if weights[kernel].sum() > tol.support:
        return RelEntropyValue(math.inf, False)
    cross = float(np.sum(weights[~kernel] * np.log2(svals[~kernel])))
    value = _xlog2x(np.clip(rvals, 0, None)) - cross
    return RelEntropyValue(max(value, 0.0) if value > -1e-12 else value, True)


def pinch(P: Subspace, tau: Operator) -> Operator:
    """``P tau P + (I - P) tau (I - P)``."""
    if P.dims.total != tau.dims.total:
        raise ValueError("pinch: dimension mismatch")
    p = P.projector()
    q = np.eye(len(p)) - p
    t = tau.entries
    out = p @ t @ p + q @ t @ q
    return Operator((out + out.conj().T) / 2, tau.dims, hermitian=True)


@dataclass(frozen=True)
class PinchDecomposition:
    t: float
    sigma_prime: Operator


def pinch_decompose(P: Subspace, sigma: Operator) -> PinchDecomposition:
    """``t = tr(P sigma)`` and ``sigma' = P sigma P / t``."""
    p = P.projector()
    psp = p @ sigma.entries @ p
    t = float(np.real(np.trace(psp)))
    if t <= 0:
        raise ValueError("sigma has no weight on the subspace")
    return PinchDecomposition(t, Operator((psp + psp.conj().T) / (2 * t), sigma.dims, hermitian=True))


def esep_lower_bound(beta: float) -> float:
    if not 0 < beta <= 1 + 1e-10:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return max(-math.log2(min(beta, 1.0)), 0.0)


@dataclass(frozen=True)
class SeparabilityCertificate:
    """``(I + cP)/(D + c r)`` lies within the separable ball around ``I/D``."""

    c: float
    ball_radius: float
    distance: float
    D: int
    r: int

    def as_dict(self) -> dict:
        return {"c": self.c, "ball_radius": self.ball_radius, "distance": self.distance, "D": self.D, "r": self.r}


def ball_radius(D: int) -> float:
    """Frobenius radius around ``I/D`` inside which every state is separable (Gurvits-Barnum)."""
    return 1.0 / math.sqrt(D * (D - 1))


def ball_distance(c: float, D: int, r: int) -> float:
    """Frobenius distance from ``(I + cP)/(D + c r)`` to ``I/D`` for a rank-``r`` projector."""
    return c * math.sqrt(r * (D - r)) / (math.sqrt(D) * (D + c * r))


def separability_ball_c(V: Subspace) -> SeparabilityCertificate:
    """Largest ``c`` keeping ``(I + cP)`` normalized inside the separable ball.

    Solving ``ball_distance(c) = radius`` gives
    ``c = radius D sqrt(D) / (sqrt(r (D - r)) - radius r sqrt(D))`` whenever the
    denominator is positive; otherwise every ``c`` is inside and the
    distance tends to ``sqrt((D - r)/(r D))`` which is then below the radius.
    """
    D, r = V.dims.total, V.dim
    if r >= D:
        raise ValueError("subspace is the whole space; I + cP is never informative")
    rad = ball_radius(D)
    denom = math.sqrt(r * (D - r)) - rad * r * math.sqrt(D)
    if denom <= 0:
        raise RuntimeError("ball condition has no finite maximal c; radius too large for this r")
    c = rad * D * math.sqrt(D) / denom
    dist = ball_distance(c, D, r)
    if dist > rad * (1 + 1e-12):
        raise RuntimeError(f"internal: certified distance {dist} exceeds radius {rad}")
    return SeparabilityCertificate(c=c, ball_radius=rad, distance=dist, D=D, r=r)


@dataclass(frozen=True)
class AlphaBound:
    alpha1: float
    c: float

    @property
    def alpha(self) -> float:
        return (1 + self.alpha1 * self.c) / (1 + self.c)

    def as_dict(self) -> dict:
        return {"alpha1": self.alpha1, "c": self.c, "alpha": self.alpha}


def alpha_bound(alpha1: float, cert: SeparabilityCertificate | float) -> AlphaBound:
    c = cert.c if isinstance(cert, SeparabilityCertificate) else float(cert)
    if alpha1 >= 1:
        raise ProductVectorInSupport(f"alpha1 = {alpha1} >= 1: subspace contains a product vector")
    if alpha1 <= 0:
        raise ValueError("alpha1 must be positive")
    if c <= 0:
        raise ValueError("c must be positive")
    ab = AlphaBound(alpha1, c)
    if not alpha1 < ab.alpha < 1:
        raise RuntimeError(f"internal: ordering alpha1 < alpha < 1 violated ({alpha1}, {ab.alpha})")
    return ab


def regularized_lower_bound(ab: AlphaBound) -> float:
    return -math.log2(ab.alpha)


def combined_bound(n: int, m: int, ab: AlphaBound) -> float:
    """Lower bound ``-n log2(alpha) + m`` for n copies of the edge state and m EPR pairs."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    return -n * math.log2(ab.alpha) + m


def ppt_check(rho: Operator, tol: Tolerances = TOL) -> tuple[bool, float]:
    pt = partial_transpose(rho, "B")
    lo = float(np.linalg.eigvalsh(pt.entries)[0])
    return lo >= -tol.ppt, lo


def e_ppt_trivial(rho: Operator) -> RelEntropyValue:
    """Zero, witnessed by ``sigma = rho`` being PPT itself."""
    ok, lo = ppt_check(rho)
    if not ok:
        raise NotPPTError(f"state is not PPT (min partial-transpose eigenvalue {lo:.3e})")
    return RelEntropyValue(0.0, True)


def esep_upper_bound(rho: Operator, candidates: Sequence[Operator]) -> float:
    """Minimum of ``S(rho||sigma)`` over explicitly separable candidates.

    Candidates with a support violation give +inf and drop out of the minimum.
    """
    if not candidates:
        raise ValueError("no candidates given")
    best = math.inf
    for sigma in candidates:
        best = min(best, relative_entropy(rho, sigma).value)
    return best


def blended_candidates(basis_vectors: Sequence, dims, grid: Sequence[float]) -> list[Operator]:
    """``(1 - p) * uniform mixture of product vectors + p * I/D`` for each ``p``."""
    vecs = np.array([getattr(v, "amplitudes", v) for v in basis_vectors])
    mix = vecs.T @ vecs.conj() / len(vecs)
    D = mix.shape[0]
    out = []
    for p in grid:
        m = (1 - p) * mix + p * np.eye(D) / D
        out.append(Operator((m + m.conj().T) / 2, dims, hermitian=True))
    return out
