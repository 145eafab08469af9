import numpy as np
import pytest

from momentforge import matkit, seqkit, solver, verify
from momentforge.errors import ContractError, NotExtendableError
from momentforge.herglotz import Const, StieltjesOf, Zero
from momentforge.measures import MolecularMeasure, dirac, random_measure
from momentforge.pipelines import parameter_gallery, roundtrip_grid
from momentforge.seqkit import MatrixSeq


def scalar_seq(*vals):
    return MatrixSeq([np.array([[complex(v)]]) for v in vals])


def test_open_problem_examples():
    p = solver.open_problem(scalar_seq(1, 0, 1))
    assert p.parity == "even" and p.n == 1 and p.slot.r == 1
    assert np.isclose(p.l_matrix[0, 0], 1.0)

    p = solver.open_problem(scalar_seq(1, 0, 0))
    assert p.determinate and p.slot.r == 0

    with pytest.raises(NotExtendableError):
        solver.open_problem(scalar_seq(0, 1))


def test_solve_examples():
    p = solver.open_problem(scalar_seq(1))
    F = solver.solve(p, Zero(1))
    for z in (1j, 0.5 + 2j):
        assert np.isclose(F.eval(z)[0, 0], -1 / z)

    b = 0.8
    p = solver.open_problem(scalar_seq(1, b))
    F = solver.solve(p, Zero(1))
    expect = StieltjesOf(dirac(b, [[1.0]]))
    for z in (1j, 0.5 + 2j):
        assert np.isclose(F.eval(z)[0, 0], expect.eval(z)[0, 0])

    a = 1.4
    p = solver.open_problem(scalar_seq(1))
    F = solver.solve(p, Const(np.array([[a]])))
    for z in (1j, 3j):
        assert np.isclose(F.eval(z)[0, 0], -1 / (z + a))  # point mass at -a


def test_solve_contract_errors():
    p = solver.open_problem(scalar_seq(1, 0, 0))
    with pytest.raises(ContractError):
        solver.solve(p, Zero(1))  # determinate takes no parameter
    p2 = solver.open_problem(scalar_seq(1, 0, 1))
    with pytest.raises(ContractError):
        solver.solve(p2, None)
    with pytest.raises(ContractError):
        solver.solve(p2, Zero(2))  # wrong size


def test_determinate_solution_examples():
    p = solver.open_problem(scalar_seq(1, 0, 0))
    F = solver.determinate_solution(p)
    for z in (1j, 2 + 5j):
        assert np.isclose(F.eval(z)[0, 0], -1 / z)

    p = solver.open_problem(scalar_seq(1, 1, 1))  # moments of the unit mass at 1
    F = solver.determinate_solution(p)
    for z in (1j, 2 + 5j):
        assert np.isclose(F.eval(z)[0, 0], -1 / (z - 1))

    p = solver.open_problem(scalar_seq(2, 0, 2, 0))  # L_1 = 2: indeterminate
    with pytest.raises(ContractError):
        solver.determinate_solution(p)


def test_recover_examples():
    p = solver.open_problem(scalar_seq(1))
    f = solver.recover_parameter(p, StieltjesOf(dirac(0.0, [[1.0]])))
    assert abs(f.eval(2j)[0, 0]) < 1e-12

    b = 0.6
    p = solver.open_problem(scalar_seq(1, b))
    f = solver.recover_parameter(p, StieltjesOf(dirac(b, [[1.0]])))
    assert abs(f.eval(2j)[0, 0]) < 1e-12

    sym = MolecularMeasure(1, ((-1.0, np.array([[0.5]])), (1.0, np.array([[0.5]]))))
    p = solver.open_problem(sym.moments_prefix(3))
    f = solver.recover_parameter(p, StieltjesOf(sym))
    for z in (2j, 1 + 1j):
        assert abs(f.eval(z)[0, 0]) < 1e-10
    # and the roundtrip closes: solve(p, f) agrees with the transform
    F2 = solver.solve(p, f)
    ref = StieltjesOf(sym)
    for z in (2j, 1 + 1j):
        assert np.isclose(F2.eval(z)[0, 0], ref.eval(z)[0, 0], atol=1e-9)


def test_roundtrip_property(rng):
    worst = 0.0
    for trial in range(24):
        q = int(rng.integers(1, 4))
        n = int(rng.integers(0, 3))
        parity = int(rng.integers(0, 2))
        kappa = 2 * n + parity
        seq, _ = seqkit.random_extendable_seq(q, kappa, rng_seed=rng)
        p = solver.open_problem(seq)
        if p.slot.r == 0:
            continue
        f = parameter_gallery(p.slot.r, p.parity, rng)
        F = solver.solve(p, f)
        fhat = solver.recover_parameter(p, F)
        rep = verify.compare(fhat, f, roundtrip_grid(), 1e-8, dps=40)
        worst = max(worst, rep.max_residual)
        assert rep.passed, (q, kappa, rep.max_residual)
    assert worst < 1e-8


def test_solution_kernel_and_range(rng):
    # solutions share kernel and range with the zeroth moment
    for _ in range(6):
        q = int(rng.integers(2, 4))
        seq, sigma = seqkit.random_extendable_seq(q, 4, rng_seed=rng, p_rank_deficient=0.8)
        p = solver.open_problem(seq)
        f = Zero(p.slot.r) if p.slot.r else None
        F = solver.solve(p, f)
        from momentforge.tolerances import Tolerances

        tol7 = Tolerances(rank_rtol=1e-10, psd_atol=1e-7, eq_atol=1e-7)
        for z in (1.2j, -0.5 + 2j):
            val = F.eval(z)
            assert matkit.kernel_contained(seq[0], val, tol7)
            assert matkit.kernel_contained(val, seq[0], tol7)
            assert matkit.range_contained(val, seq[0], tol7)
            assert matkit.range_contained(seq[0], val, tol7)


def test_determinacy_equivalence(rng):
    # r = 0 iff the solution is unique: distinct parameters produce
    # pointwise-distinct solutions whenever r >= 1
    for _ in range(6):
        q = int(rng.integers(1, 3))
        n = int(rng.integers(1, 3))
        sigma = random_measure(q, rng, n_atoms=n + 1, p_rank_deficient=0.0)
        seq = sigma.moments_prefix(2 * n)
        p = solver.open_problem(seq)
        assert p.slot.r >= 1
        f1 = Zero(p.slot.r)
        f2 = Const((0.5 + 0.5j) * np.eye(p.slot.r))
        F1, F2 = solver.solve(p, f1), solver.solve(p, f2)
        sep = max(
            np.linalg.norm(F1.eval(z) - F2.eval(z), 2) for z in roundtrip_grid()
        )
        assert sep >= 1e-4


def test_determinate_matches_generating_measure(rng):
    for _ in range(6):
        q = int(rng.integers(1, 3))
        n = int(rng.integers(1, 4))
        n_atoms = int(rng.integers(1, n + 1))
        sigma = random_measure(q, rng, n_atoms=n_atoms, p_rank_deficient=0.0)
        for kappa in (2 * n, 2 * n + 1):
            seq = sigma.moments_prefix(kappa)
            p = solver.open_problem(seq)
            assert p.determinate, (q, n, n_atoms, kappa)
            F = solver.determinate_solution(p)
            ref = StieltjesOf(sigma)
            for z in (1j, 0.7 + 1.5j, 4j):
                assert np.linalg.norm(F.eval(z) - ref.eval(z), 2) <= 1e-9


def test_provenance_block():
    p = solver.open_problem(scalar_seq(1, 0, 1))
    doc = p.provenance("resolvent-lft")
    assert doc == {"path": "resolvent-lft", "parity": "even", "n": 1, "q": 1, "rank": 1}
