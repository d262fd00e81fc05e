import math

import numpy as np
import pytest
from scipy.linalg import logm

from edgecert import entropy as ent
from edgecert import overlap as ov
from edgecert import states
from edgecert.tensor_core import HilbertDims, Ket, Operator, tensor_bipartite
from edgecert.verify import random_density, random_separable

DIMS22 = HilbertDims((2, 2), 1)
TILES_C = 9 / (math.sqrt(160) - 4)


def _op(m, dims=DIMS22):
    return Operator((m + m.conj().T) / 2, dims, hermitian=True)


def _supported_in(rng, V, dims):
    coeff = random_density(rng, V.dim)
    return _op(V.vectors.T @ coeff @ V.vectors.conj(), dims)


def _s_logm(rho, sigma):
    """Full-rank relative entropy through scipy's matrix logarithm."""
    r, s = rho.entries, sigma.entries
    return float(np.real(np.trace(r @ (logm(r) - logm(s))))) / math.log(2)


# -- relative entropy -------------------------------------------------------


def test_relative_entropy_examples():
    zero = Ket.basis(0, (2,)).projector()
    half = Operator(np.eye(2) / 2, HilbertDims((2,)), hermitian=True)
    assert ent.relative_entropy(half, half).value == pytest.approx(0, abs=1e-12)
    assert ent.relative_entropy(zero, half).value == pytest.approx(1, abs=1e-12)
    inf = ent.relative_entropy(half, zero)
    assert math.isinf(inf.value) and not inf.support_contained


def test_relative_entropy_matches_logm_oracle(rng):
    for _ in range(20):
        rho = _op(random_density(rng, 4))
        sigma = _op(random_density(rng, 4))
        assert ent.relative_entropy(rho, sigma).value == pytest.approx(_s_logm(rho, sigma), abs=1e-9)


def test_relative_entropy_dimension_mismatch():
    with pytest.raises(ValueError):
        ent.relative_entropy(Operator.identity((2,)).scaled(0.5), Operator.identity((3,)).scaled(1 / 3))


def test_rel_entropy_value_invariant():
    with pytest.raises(ValueError):
        ent.RelEntropyValue(math.inf, True)
    with pytest.raises(ValueError):
        ent.RelEntropyValue(1.0, False)


def test_relative_entropy_nonnegative_and_zero_iff_equal(rng):
    for _ in range(100):
        d = int(rng.integers(2, 7))
        rank = int(rng.integers(1, d + 1))
        rho = _op(random_density(rng, d, rank), HilbertDims((d,)))
        sigma = _op(random_density(rng, d), HilbertDims((d,)))
        s = ent.relative_entropy(rho, sigma).value
        assert s >= -1e-8
        assert s > 1e-8  # distinct random states
        assert abs(ent.relative_entropy(rho, rho).value) <= 1e-8


# -- pinching and the single-copy chain ---------------------------------------


def test_pinch_examples(rng, random_subspace):
    V = random_subspace(rng, 2, 2, 2)
    inside = _supported_in(rng, V, DIMS22)
    np.testing.assert_allclose(ent.pinch(V, inside).entries, inside.entries, atol=1e-12)
    full = ov.Subspace.from_vectors(np.eye(4), DIMS22)
    tau = _op(random_density(rng, 4))
    np.testing.assert_allclose(ent.pinch(full, tau).entries, tau.entries, atol=1e-12)
    assert abs(ent.pinch(V, tau).trace - 1) <= 1e-12
    with pytest.raises(ValueError):
        ent.pinch(V, Operator.identity((3,)))


def test_data_processing_under_pinch(rng, random_subspace):
    for i in range(100):
        da, db = (2, 2) if i % 2 else (2, 3)
        dims = HilbertDims((da, db), 1)
        V = random_subspace(rng, da, db, int(rng.integers(1, da * db)))
        rho = _supported_in(rng, V, dims)
        sigma = _op(random_separable(rng, da, db, 2 * da * db), dims)
        s = ent.relative_entropy(rho, sigma).value
        sp = ent.relative_entropy(ent.pinch(V, rho), ent.pinch(V, sigma)).value
        assert s >= sp - 1e-8


def test_pinched_chain(rng, random_subspace):
    for i in range(100):
        dims = HilbertDims((3, 3), 1) if i % 2 else DIMS22
        da, db = dims.locals
        V = random_subspace(rng, da, db, int(rng.integers(1, min(5, da * db))))
        rho = _supported_in(rng, V, dims)
        terms = 2 * da * db
        p = rng.dirichlet(np.ones(terms))
        prods = [np.kron(ov.haar_vector(rng, da), ov.haar_vector(rng, db)) for _ in range(terms)]
        sigma = _op(sum(w * np.outer(v, v.conj()) for w, v in zip(p, prods)), dims)
        pd = ent.pinch_decompose(V, sigma)
        np.testing.assert_allclose(pd.sigma_prime.entries * pd.t, V.projector() @ sigma.entries @ V.projector(),
                                   atol=1e-12)
        s = ent.relative_entropy(rho, sigma).value
        s_prime = ent.relative_entropy(rho, pd.sigma_prime).value
        assert s >= -math.log2(pd.t) + s_prime - 1e-8
        best_term = max(V.overlap(*_split(v, da, db)) for v in prods)
        assert pd.t <= best_term + 1e-12 and best_term <= 1 + 1e-12


def _split(v, da, db):
    u, _, vh = np.linalg.svd(v.reshape(da, db))
    return u[:, 0], vh[0]


# -- lower and upper bounds ---------------------------------------------------


def test_esep_lower_bound_examples(tiles_beta):
    assert ent.esep_lower_bound(1.0) == 0.0
    assert ent.esep_lower_bound(0.5) == 1.0
    assert ent.esep_lower_bound(tiles_beta.beta) > 0
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            ent.esep_lower_bound(bad)


def _ball_c_line_search(D, r, radius):
    """Bisection on the Frobenius distance of the explicit matrix (I + cP)/(D + c r)."""
    p = np.diag([1.0] * r + [0.0] * (D - r))

    def dist(c):
        m = (np.eye(D) + c * p) / (D + c * r)
        return np.linalg.norm(m - np.eye(D) / D)

    lo, hi = 0.0, 1.0
    while dist(hi) <= radius:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if dist(mid) <= radius else (lo, mid)
    return lo


def test_separability_ball_c_tiles(tiles_support):
    cert = ent.separability_ball_c(tiles_support)
    assert (cert.D, cert.r) == (9, 4)
    assert cert.c == pytest.approx(TILES_C, abs=1e-12)
    assert cert.c == pytest.approx(_ball_c_line_search(9, 4, cert.ball_radius), abs=1e-9)
    assert cert.distance <= cert.ball_radius * (1 + 1e-12)
    assert cert.ball_radius == pytest.approx(1 / math.sqrt(72))


def test_separability_ball_c_rank_one():
    V = ov.support_projector(states.epr().projector())
    cert = ent.separability_ball_c(V)
    assert cert.c == pytest.approx(_ball_c_line_search(4, 1, cert.ball_radius), abs=1e-9)
    assert abs(cert.distance - cert.ball_radius) <= 1e-12
    # half the certified c is strictly inside
    assert ent.ball_distance(cert.c / 2, 4, 1) < cert.ball_radius


def test_separability_ball_c_full_space_rejected():
    with pytest.raises(ValueError):
        ent.separability_ball_c(ov.Subspace.from_vectors(np.eye(4), DIMS22))


def test_alpha_bound_examples(tiles_beta):
    assert ent.alpha_bound(0.5, 1.0).alpha == pytest.approx(0.75)
    assert ent.alpha_bound(0.5, 1e-9).alpha == pytest.approx(1.0, abs=1e-8)
    ab = ent.alpha_bound(tiles_beta.beta, TILES_C)
    assert tiles_beta.beta < ab.alpha < 1
    with pytest.raises(ent.ProductVectorInSupport):
        ent.alpha_bound(1.0, 1.0)


def test_alpha_monotone_in_c():
    cs = np.linspace(0.01, 10, 200)
    for a1 in (0.1, 0.5, 0.97):
        alphas = [ent.alpha_bound(a1, c).alpha for c in cs]
        assert np.all(np.diff(alphas) < 0)
        assert all(a1 < a < 1 for a in alphas)


def test_regularized_lower_bound_examples():
    assert ent.regularized_lower_bound(ent.AlphaBound(0.5, 1.0)) == pytest.approx(-math.log2(0.75))
    assert ent.regularized_lower_bound(ent.AlphaBound(0.0, 1.0)) == pytest.approx(1.0)


def test_combined_bound():
    ab = ent.AlphaBound(0.0, 1.0)  # alpha = 1/2
    assert ent.combined_bound(1, 1, ab) == 2
    ab = ent.AlphaBound(0.5, 1.0)
    assert ent.combined_bound(1, 0, ab) == ent.regularized_lower_bound(ab)
    with pytest.raises(ValueError):
        ent.combined_bound(0, 0, ab)


def test_ppt_check_examples(tiles_delta):
    ok, lo = ent.ppt_check(tiles_delta)
    assert ok and lo >= -1e-10
    ok, lo = ent.ppt_check(states.epr().projector())
    assert not ok and lo == pytest.approx(-0.5)
    ok, lo = ent.ppt_check(Operator(np.eye(4) / 4, DIMS22, hermitian=True))
    assert ok and lo == pytest.approx(0.25)


def test_e_ppt_trivial(tiles_delta):
    assert ent.e_ppt_trivial(tiles_delta).value == 0
    assert ent.e_ppt_trivial(Operator(np.diag([0.5, 0, 0, 0.5]), DIMS22, hermitian=True)).value == 0
    assert ent.e_ppt_trivial(tensor_bipartite(tiles_delta, tiles_delta)).value == 0
    with pytest.raises(ent.NotPPTError):
        ent.e_ppt_trivial(states.epr().projector())


def test_esep_upper_bound_examples():
    sep = Operator(np.diag([0.5, 0, 0, 0.5]), DIMS22, hermitian=True)
    assert ent.esep_upper_bound(sep, [sep]) == pytest.approx(0, abs=1e-12)
    assert ent.esep_upper_bound(states.epr().projector(), [sep]) == pytest.approx(1, abs=1e-12)
    assert ent.esep_upper_bound(states.epr().projector(), [Ket.basis(0, DIMS22).projector(), sep]) == pytest.approx(1)
    with pytest.raises(ValueError):
        ent.esep_upper_bound(sep, [])


def test_esep_upper_bound_tiles_sandwich(tiles_delta, tiles_beta):
    grid = np.linspace(0.05, 1, 20)
    cands = ent.blended_candidates(states.tiles_upb().vectors, tiles_delta.dims, grid)
    upper = ent.esep_upper_bound(tiles_delta, cands)
    # oracle: on the support of delta each candidate equals p/9, delta has entropy 2
    assert upper == pytest.approx(min(math.log2(9 / p) - 2 for p in grid), abs=1e-10)
    assert math.isfinite(upper)
    assert upper >= ent.esep_lower_bound(tiles_beta.beta) - 1e-8
    # p = 0 is the bare UPB mixture, orthogonal to delta, so it drops out
    (bare,) = ent.blended_candidates(states.tiles_upb().vectors, tiles_delta.dims, [0.0])
    assert math.isinf(ent.relative_entropy(tiles_delta, bare).value)
    assert ent.esep_upper_bound(tiles_delta, [bare] + cands) == upper
