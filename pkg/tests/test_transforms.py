import numpy as np
import pytest

from momentforge import matkit, seqkit, transforms
from momentforge.errors import SingularLftError
from momentforge.herglotz import Const, Linear, StieltjesOf, Zero
from momentforge.measures import dirac, random_measure
from momentforge.seqkit import MatrixSeq

from conftest import rand_matrix

ZGRID = [r * np.exp(1j * th) for r in (0.5, 2.0, 9.0, 50.0) for th in (np.pi / 6, np.pi / 2, 5 * np.pi / 6)]


def scalar_seq(*vals):
    return MatrixSeq([np.array([[complex(v)]]) for v in vals])


# -- matrix LFT ---------------------------------------------------------------


def test_lft_identity(rng):
    X = rand_matrix(rng, 2, 2)
    assert np.allclose(transforms.lft(np.eye(4), X), X)


def test_lft_base_case():
    z = 1.7j
    E = np.array([[0, -1], [1, z]], dtype=complex)  # the rank-one backward factor at z
    assert np.isclose(transforms.lft(E, np.zeros((1, 1)))[0, 0], -1 / z)


def test_lft_composition(rng):
    for _ in range(10):
        E1 = rand_matrix(rng, 4, 4) + 2 * np.eye(4)
        E2 = rand_matrix(rng, 4, 4) + 2 * np.eye(4)
        X = 0.3 * rand_matrix(rng, 2, 2)
        lhs = transforms.lft(E2, transforms.lft(E1, X))
        rhs = transforms.lft(E2 @ E1, X)
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_lft_singular_denominator():
    E = np.block([[np.eye(2), np.eye(2)], [np.zeros((2, 2)), np.zeros((2, 2))]])
    with pytest.raises(SingularLftError):
        transforms.lft(E, np.eye(2))


# -- matrix polynomials --------------------------------------------------------


def test_v_poly_example():
    at = transforms.v_poly(np.array([[1.0]]))
    z = 2.5j
    assert np.allclose(at(z), np.array([[0, -1], [1, z]]))


def test_w_poly_zero_coefficient():
    at = transforms.w_poly(np.zeros((2, 2)))
    z = 1.3j
    assert np.allclose(at(z), np.block([[z * np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), np.eye(2)]]))


def test_w_v_product_structure(rng):
    # W_{A,B}(z) V_{A,B}(z) is block upper triangular with (1,1) block A A^+
    for _ in range(10):
        q = int(rng.integers(1, 4))
        A = rand_matrix(rng, q, q)
        if rng.random() < 0.5 and q > 1:
            A = rand_matrix(rng, q, 1) @ rand_matrix(rng, 1, q)
        B = rand_matrix(rng, q, q)
        z = complex(rng.normal(), abs(rng.normal()) + 0.1)
        P = transforms.w_poly(A, B)(z) @ transforms.v_poly(A, B)(z)
        assert np.allclose(P[q:, :q], 0, atol=1e-10)
        assert np.allclose(P[:q, :q], A @ matkit.pinv(A), atol=1e-10)


# -- resolvent products ---------------------------------------------------------


def test_resolvent_examples():
    z = 2j
    V0 = transforms.resolvent_v(scalar_seq(1), 0)
    assert np.allclose(V0(z), np.array([[0, -1], [1, z]]))
    V2 = transforms.resolvent_v(scalar_seq(1, 0, 0), 2)
    assert np.allclose(V2(z), np.array([[0, -z], [0, z * z]]))
    b = 0.7
    V1 = transforms.resolvent_v(scalar_seq(1, b), 1)
    assert np.allclose(V1(z), np.array([[0, -1], [1, z - b]]))
    with pytest.raises(IndexError):
        transforms.resolvent_v(scalar_seq(1, 0), 3)


def test_factor_product_consistency(rng):
    # V^(2n) extends V^(2n-1) by one trailing B = 0 factor
    seq, _ = seqkit.random_extendable_seq(2, 6, rng_seed=rng)
    v_even = transforms.resolvent_v(seq, 6)
    v_odd = transforms.resolvent_v(seq, 5)
    assert len(v_even.factors) == len(v_odd.factors) + 1
    for f, g in zip(v_odd.factors, v_even.factors):
        assert f.kind == g.kind and np.allclose(f.a, g.a)
    assert v_even.factors[-1].kind == "v"
    z = 1.5j
    assert np.allclose(v_even(z), v_odd(z) @ v_even.factors[-1].eval_at(z, transforms.DOUBLE))


def test_resolvent_serialization_roundtrip(rng):
    from momentforge.serialize import resolvent_from_json, resolvent_to_json

    seq, _ = seqkit.random_extendable_seq(2, 5, rng_seed=rng)
    rp = transforms.resolvent_w(seq, 5)
    rp2 = resolvent_from_json(resolvent_to_json(rp))
    z = 0.4 + 1.1j
    assert np.allclose(rp(z), rp2(z))


# -- function transforms ---------------------------------------------------------


def test_schur_plus_examples():
    F = StieltjesOf(dirac(0.0, [[1.0]]))  # -1/z
    out = transforms.schur_plus(F, np.array([[1.0]]))
    for z in ZGRID:
        assert abs(out.eval(z)[0, 0]) < 1e-12
    B0 = np.array([[2.0, 0.0], [0.0, 3.0]])
    const = transforms.schur_plus(Linear(np.eye(2)), np.zeros((2, 2)), B0)
    assert np.allclose(const.eval(1j), B0)
    alpha = np.array([[2.0]])
    out = transforms.schur_plus(Const(alpha), np.array([[1.0]]))
    for z in (1j, 2 + 3j):
        assert np.isclose(out.eval(z)[0, 0], -1 / 2 - z)


def test_schur_minus_examples():
    A = np.array([[1.0]])
    out = transforms.schur_minus(Zero(1), A)
    for z in ZGRID:
        assert np.isclose(out.eval(z)[0, 0], -1 / z)
    b = 1.2
    out = transforms.schur_minus(Zero(1), A, np.array([[b]]))
    for z in ZGRID:
        assert np.isclose(out.eval(z)[0, 0], -1 / (z - b))
    # affine input collapses to a point mass at the origin
    beta = np.array([[0.5]])
    B = np.array([[0.3]])
    from momentforge.herglotz import Sum

    out = transforms.schur_minus(Sum((Const(B), Linear(beta))), A, B)
    for z in (1j, 0.5 + 2j):
        assert np.isclose(out.eval(z)[0, 0], -(1 / z) * 1 / (1 + 0.5))


def test_inverse_pair_on_solutions(rng):
    # minus-after-plus and plus-after-minus reproduce Cauchy transforms
    for _ in range(8):
        q = int(rng.integers(1, 4))
        kappa = int(rng.integers(1, 7))
        seq, sigma = seqkit.random_extendable_seq(q, kappa, rng_seed=rng)
        F = StieltjesOf(sigma)
        s0, s1 = seq[0], seq[1]
        back_fwd = transforms.schur_minus(transforms.schur_plus(F, s0, s1), s0, s1)
        fwd_back = transforms.schur_plus(transforms.schur_minus(F, s0, s1), s0, s1)
        for z in ZGRID:
            ref = F.eval(z)
            assert np.linalg.norm(back_fwd.eval(z) - ref, 2) <= 1e-9 * (1 + np.linalg.norm(ref, 2))
            assert np.linalg.norm(fwd_back.eval(z) - ref, 2) <= 1e-9 * (1 + np.linalg.norm(ref, 2))


def test_lft_form_of_forward_transform(rng):
    # on solutions, the forward transform is the LFT by the companion W-polynomial
    for _ in range(8):
        q = int(rng.integers(1, 4))
        kappa = int(rng.integers(1, 7))
        seq, sigma = seqkit.random_extendable_seq(q, kappa, rng_seed=rng)
        F = StieltjesOf(sigma)
        s0, s1 = seq[0], seq[1]
        plus = transforms.schur_plus(F, s0, s1)
        plus0 = transforms.schur_plus(F, s0)
        w_at = transforms.w_poly(s0, s1)
        w0_at = transforms.w_poly(s0)
        for z in ZGRID:
            Fz = F.eval(z)
            lhs = transforms.lft(w_at(z), Fz, z=z)
            assert np.linalg.norm(lhs - plus.eval(z), 2) <= 1e-9 * (1 + np.linalg.norm(lhs, 2))
            lhs0 = transforms.lft(w0_at(z), Fz, z=z)
            assert np.linalg.norm(lhs0 - plus0.eval(z), 2) <= 1e-9 * (1 + np.linalg.norm(lhs0, 2))


def test_lft_form_of_backward_transform(rng):
    # on admissible parameters, the backward transform is the LFT by the V-polynomial
    for _ in range(8):
        q = int(rng.integers(1, 4))
        seq, sigma = seqkit.random_extendable_seq(q, 1, rng_seed=rng)
        s0, s1 = seq[0], seq[1]
        # a parameter supported on ran(s0): compress a Cauchy transform
        r = matkit.rank(s0)
        if r == 0:
            continue
        U = matkit.orthonormal_range_basis(s0)
        from momentforge.herglotz import Compressed

        inner = StieltjesOf(random_measure(r, rng, max_atoms=2, p_rank_deficient=0.0))
        G = Compressed(U, inner)
        minus = transforms.schur_minus(G, s0, s1, certified=True)
        v_at = transforms.v_poly(s0, s1)
        for z in ZGRID:
            Gz = G.eval(z)
            lhs = transforms.lft(v_at(z), Gz, z=z)
            assert np.linalg.norm(lhs - minus.eval(z), 2) <= 1e-9 * (1 + np.linalg.norm(lhs, 2))


def test_chain_equals_resolvent_lft(rng):
    # backward chain == LFT by V^(m); forward chain == LFT by W^(m) on solutions
    for _ in range(6):
        q = int(rng.integers(1, 3))
        n = int(rng.integers(0, 3))
        parity = "even" if rng.random() < 0.5 else "odd"
        kappa = 2 * n + (1 if parity == "odd" else 0)
        seq, sigma = seqkit.random_extendable_seq(q, kappa, rng_seed=rng)
        F = StieltjesOf(sigma)
        fwd = transforms.sn_chain_forward(seq, F, n, parity)
        W = transforms.resolvent_w(seq, kappa)
        for z in ZGRID[:6]:
            lhs = transforms.lft(W(z), F.eval(z), z=z)
            rhs = fwd.eval(z)
            assert np.linalg.norm(lhs - rhs, 2) <= 1e-8 * (1 + np.linalg.norm(lhs, 2))
        # backward chain from the zero parameter
        G = Zero(q)
        back = transforms.sn_chain_backward(seq, G, n, parity)
        V = transforms.resolvent_v(seq, kappa)
        for z in ZGRID[:6]:
            lhs = transforms.lft(V(z), G.eval(z), z=z)
            rhs = back.eval(z)
            assert np.linalg.norm(lhs - rhs, 2) <= 1e-8 * (1 + np.linalg.norm(lhs, 2))


def test_backward_chain_examples():
    out = transforms.sn_chain_backward(scalar_seq(1), Zero(1), 0, "even")
    for z in (1j, 2 + 2j):
        assert np.isclose(out.eval(z)[0, 0], -1 / z)
    b = 0.4
    out = transforms.sn_chain_backward(scalar_seq(1, b), Zero(1), 0, "odd")
    for z in (1j, 2 + 2j):
        assert np.isclose(out.eval(z)[0, 0], -1 / (z - b))
    out = transforms.sn_chain_backward(scalar_seq(1, 0, 0), Zero(1), 1, "even")
    for z in (1j, 2 + 2j):
        assert np.isclose(out.eval(z)[0, 0], -1 / z)


def test_forward_chain_examples():
    F = StieltjesOf(dirac(0.0, [[1.0]]))
    out = transforms.sn_chain_forward(scalar_seq(1), F, 0, "even")
    assert abs(out.eval(1j)[0, 0]) < 1e-12
    b = 0.9
    Fb = StieltjesOf(dirac(b, [[1.0]]))
    out = transforms.sn_chain_forward(scalar_seq(1, b), Fb, 0, "odd")
    assert abs(out.eval(1j)[0, 0]) < 1e-12
    from momentforge.measures import MolecularMeasure

    two = StieltjesOf(
        MolecularMeasure(1, ((-1.0, np.array([[0.5]])), (1.0, np.array([[0.5]]))))
    )
    out = transforms.sn_chain_forward(scalar_seq(1, 0, 1, 0), two, 0, "odd")
    val = out.eval(2j)
    assert np.isfinite(val).all()
    im = (val - val.conj().T) / 2j
    assert np.linalg.eigvalsh(im).min() >= -1e-9


def test_chain_image_kernel_condition(rng):
    # chain images of solutions keep the kernel of the corresponding head
    for _ in range(5):
        q = 2
        kappa = int(rng.integers(2, 7))
        seq, sigma = seqkit.random_extendable_seq(q, kappa, rng_seed=rng, p_rank_deficient=0.6)
        F = StieltjesOf(sigma)
        cur = F
        for k in range(1, kappa // 2 + 1):
            s_prev = seqkit.schur_transform(seq, k - 1)
            cur = transforms.schur_plus(cur, s_prev[0], s_prev[1])
            head = s_prev[0]
            val = cur.eval(1.3j)
            assert matkit.kernel_contained(head, val)
