import numpy as np
import pytest

from edgecert import overlap as ov
from edgecert import states
from edgecert.tensor_core import HilbertDims, Ket, Operator, lambda1

DIMS22 = HilbertDims((2, 2), 1)
S = 1 / np.sqrt(2)


def _span(*vecs, dims=DIMS22):
    return ov.Subspace.from_vectors(np.array(vecs, dtype=complex), dims)


def test_support_projector_examples(tiles_delta, tiles_support):
    assert tiles_support.dim == 4
    for v in states.tiles_upb().vectors:
        assert np.max(np.abs(tiles_support.vectors.conj() @ v.amplitudes)) <= 1e-12
    epr = ov.support_projector(states.epr().projector())
    assert epr.dim == 1
    assert abs(abs(np.vdot(epr.vectors[0], states.epr().amplitudes)) - 1) <= 1e-12
    full = ov.support_projector(Operator(np.eye(4) / 4, DIMS22, hermitian=True))
    assert full.dim == 4


def test_support_projector_errors():
    with pytest.raises(ValueError):
        ov.support_projector(Operator(np.zeros((4, 4)), DIMS22, hermitian=True))
    with pytest.raises(ValueError):
        ov.support_projector(Operator(np.diag([1, -1, 0, 0.0]), DIMS22, hermitian=True))


def test_subspace_invariants(tiles_support):
    p = tiles_support.projector()
    np.testing.assert_allclose(p @ p, p, atol=1e-10)
    with pytest.raises(ValueError):
        ov.Subspace(np.ones((2, 2, 2)), DIMS22)


def test_seesaw_trivial_subspaces():
    assert ov.seesaw_overlap(_span([1, 0, 0, 0]), restarts=5).beta == pytest.approx(1, abs=1e-12)
    r = ov.seesaw_overlap(_span([S, 0, 0, S]), restarts=5)
    assert r.beta == pytest.approx(0.5, abs=1e-12)
    assert r.converged


def test_seesaw_result_consistency(tiles_support, tiles_beta):
    r = tiles_beta
    assert r.restarts == 100 and len(r.iterations_per_restart) == 100
    assert r.beta <= 1 + 1e-10
    val = tiles_support.overlap(r.maximizer_a.amplitudes, r.maximizer_b.amplitudes)
    assert abs(val - r.beta) <= 1e-10
    # direct evaluation on the dense ambient projector
    ab = np.kron(r.maximizer_a.amplitudes, r.maximizer_b.amplitudes)
    assert abs(np.vdot(ab, tiles_support.projector() @ ab).real - r.beta) <= 1e-10


def test_tiles_gap(tiles_beta):
    assert tiles_beta.beta <= 1 - 0.01
    assert tiles_beta.beta > 0.5


def test_seesaw_monotone_history(rng, random_subspace):
    for _ in range(20):
        V = random_subspace(rng, 3, 3, int(rng.integers(1, 5)))
        hist = []
        ov._seesaw_run(V.mats, ov.haar_vector(rng, 3), ov.haar_vector(rng, 3), 1e-12, 200, history=hist)
        assert np.all(np.diff(hist) >= -1e-12)
        hist = []
        ov._schmidt_run(V.mats, ov.haar_vector(rng, 3), ov.haar_vector(rng, 3), 1e-12, 200, history=hist)
        assert np.all(np.diff(hist) >= -1e-12)


def test_seesaw_flags_nonconvergence(tiles_support):
    r = ov.seesaw_overlap(tiles_support, restarts=3, tol=1e-300, max_iter=2, seed=1)
    assert not r.converged
    assert all(n == 2 for n in r.iterations_per_restart)


def test_seesaw_rejects_zero_restarts(tiles_support):
    with pytest.raises(ValueError):
        ov.seesaw_overlap(tiles_support, restarts=0)


def test_seesaw_deterministic(tiles_support):
    a = ov.seesaw_overlap(tiles_support, restarts=30, seed=99)
    b = ov.seesaw_overlap(tiles_support, restarts=30, seed=99)
    assert a.beta.hex() == b.beta.hex()
    assert a.maximizer_a.amplitudes.tobytes() == b.maximizer_a.amplitudes.tobytes()


def test_restart_streams_are_prefix_stable():
    # a larger budget replays the smaller budget's starts first
    small = [g.standard_normal(3) for g in ov.restart_rngs(5, 10)]
    large = [g.standard_normal(3) for g in ov.restart_rngs(5, 50)][:10]
    for x, y in zip(small, large):
        np.testing.assert_array_equal(x, y)


def test_max_schmidt_examples():
    assert ov.max_schmidt_over_subspace(_span([S, 0, 0, S]), restarts=5).beta == pytest.approx(0.5, abs=1e-12)
    assert ov.max_schmidt_over_subspace(_span([0, S, -S, 0]), restarts=5).beta == pytest.approx(0.5, abs=1e-12)


def test_max_schmidt_tiles_agrees(tiles_support, tiles_beta):
    r = ov.max_schmidt_over_subspace(tiles_support, restarts=100, seed=7)
    assert abs(r.beta - tiles_beta.beta) <= 1e-6
    psi = ov.maximizing_state(tiles_support, r)
    # maximizer lies in V and its largest Schmidt coefficient equals beta
    p = tiles_support.projector()
    np.testing.assert_allclose(p @ psi.amplitudes, psi.amplitudes, atol=1e-10)
    assert abs(lambda1(psi) - r.beta) <= 1e-8


def test_seesaw_equals_schmidt_form_random(rng, random_subspace):
    for i in range(20):
        da = db = 2 if i < 10 else 3
        V = random_subspace(rng, da, db, int(rng.integers(1, da * db - 1)))
        s = ov.seesaw_overlap(V, restarts=50, seed=i)
        m = ov.max_schmidt_over_subspace(V, restarts=50, seed=i)
        assert abs(s.beta - m.beta) <= 1e-6


def test_brute_force_examples():
    assert ov.brute_force_overlap(_span([S, 0, 0, S]), resolution=64) == pytest.approx(0.5, abs=1e-2)
    assert ov.brute_force_overlap(_span([1, 0, 0, 0]), resolution=8) == pytest.approx(1, abs=1e-2)
    with pytest.raises(ValueError):
        ov.brute_force_overlap(ov.attach_pure(_span([1, 0, 0, 0]), states.epr()))


def test_brute_force_tiles(tiles_support, tiles_beta):
    brute = ov.brute_force_overlap(tiles_support, resolution=16)
    assert abs(brute - tiles_beta.beta) <= 1e-2
    assert brute <= tiles_beta.beta + 1e-9


def test_brute_force_consistency_2x2(rng, random_subspace):
    res = 48
    gap = ov.grid_gap_bound(2, res)
    for i in range(10):
        V = random_subspace(rng, 2, 2, 1)
        s = ov.seesaw_overlap(V, restarts=20, seed=i).beta
        b = ov.brute_force_overlap(V, resolution=res)
        assert abs(s - b) <= gap + 1e-6
        assert b <= s + 1e-9


def test_grid_gap_bound_shrinks():
    assert ov.grid_gap_bound(3, 32) < ov.grid_gap_bound(3, 16)
    assert ov.grid_gap_bound(1, 4) == 0.0


def test_contains_product_vector_detected(rng):
    for i in range(10):
        a, b = ov.haar_vector(rng, 3), ov.haar_vector(rng, 3)
        others = rng.standard_normal((2, 9)) + 1j * rng.standard_normal((2, 9))
        V = ov.Subspace.from_vectors(np.vstack([np.kron(a, b), others]), HilbertDims((3, 3), 1))
        r = ov.seesaw_overlap(V, restarts=20, seed=i)
        assert r.beta >= 1 - 1e-8
        assert ov.contains_product_vector(r)


def test_attach_pure_structure(tiles_support):
    W = ov.attach_pure(tiles_support, states.epr())
    assert W.dims == HilbertDims((3, 2, 3, 2), 2)
    assert W.dim == 4
    W0 = ov.attach_pure(tiles_support, Ket.basis(0, HilbertDims((2, 2), 1)))
    r = ov.seesaw_overlap(W0, restarts=30, seed=1)
    assert r.beta == pytest.approx(ov.seesaw_overlap(tiles_support, restarts=30, seed=1).beta, abs=1e-8)


def test_attach_pure_epr_halves(tiles_support, tiles_beta):
    r = ov.seesaw_overlap(ov.attach_pure(tiles_support, states.epr()), restarts=100, seed=3)
    assert abs(r.beta - tiles_beta.beta / 2) <= 1e-6


def test_attach_pure_scales_by_top_schmidt_random(rng, random_subspace):
    for i in range(8):
        V = random_subspace(rng, 2, 3, int(rng.integers(1, 3)))
        phi = Ket.normalized(rng.standard_normal(4) + 1j * rng.standard_normal(4), HilbertDims((2, 2), 1))
        bv = ov.seesaw_overlap(V, restarts=50, seed=i).beta
        bw = ov.seesaw_overlap(ov.attach_pure(V, phi), restarts=50, seed=i).beta
        assert abs(bw - bv * lambda1(phi)) <= 1e-6


def test_tensor_power_structure(tiles_support):
    np.testing.assert_array_equal(ov.tensor_power(tiles_support, 1).mats, tiles_support.mats)
    V2 = ov.tensor_power(tiles_support, 2)
    assert V2.dim == 16
    assert V2.dims == HilbertDims((3, 3, 3, 3), 2)
    # each basis matrix equals the regrouped tensor product of two basis vectors
    v = tiles_support.vectors
    raw = np.kron(v[1], v[2]).reshape(3, 3, 3, 3).transpose(0, 2, 1, 3).reshape(9, 9)
    np.testing.assert_allclose(V2.mats[1 * 4 + 2], raw, atol=1e-15)


def test_tensor_power_budget(tiles_support):
    with pytest.raises(ov.BudgetExceeded):
        ov.tensor_power(tiles_support, 3, budget=1000)
    with pytest.raises(ValueError):
        ov.tensor_power(tiles_support, 0)


def test_supermultiplicativity(rng, random_subspace, tiles_support, tiles_beta):
    for i in range(5):
        V = random_subspace(rng, 2, 2, 1)
        r1 = ov.seesaw_overlap(V, restarts=20, seed=i)
        r2 = ov.seesaw_overlap(ov.tensor_power(V, 2), restarts=20, seed=i, initial=[ov.product_start(r1, r1)])
        assert r2.beta >= r1.beta**2 - 1e-8
    r2 = ov.seesaw_overlap(
        ov.tensor_power(tiles_support, 2), restarts=20, seed=1, initial=[ov.product_start(tiles_beta, tiles_beta)]
    )
    assert r2.beta >= tiles_beta.beta**2 - 1e-8
