"""Shared fixtures: reference algebras and a seeded random solvable corpus."""

import numpy as np
import pytest

import solvhull
from solvhull import builtin_problem, validate_algebra
from solvhull.verify import build_stages


def abelian_structure(n):
    return np.zeros((n, n, n))


def heisenberg_structure():
    """Basis (X, Y, Z) with [X, Y] = Z."""
    c = np.zeros((3, 3, 3), dtype=complex)
    c[0, 1, 2] = 1.0
    c[1, 0, 2] = -1.0
    return c


def filiform4_structure():
    """Basis (e1, e2, e3, e4) with [e1, e2] = e3 and [e1, e3] = e4."""
    c = np.zeros((4, 4, 4), dtype=complex)
    c[0, 1, 2] = 1.0
    c[1, 0, 2] = -1.0
    c[0, 2, 3] = 1.0
    c[2, 0, 3] = -1.0
    return c


def heisenberg5_structure():
    """Basis (X1, Y1, X2, Y2, Z) with [X1, Y1] = [X2, Y2] = Z."""
    c = np.zeros((5, 5, 5), dtype=complex)
    for i, j in ((0, 1), (2, 3)):
        c[i, j, 4] = 1.0
        c[j, i, 4] = -1.0
    return c


def skewed_basis_structure():
    """The algebra [A, B] = C, [A, C] = C written in the basis (A+B, A-B, C).

    Splitting the adjoint of each basis vector separately gives a wrong
    answer here, so this case guards the joint construction.
    """
    c = np.zeros((3, 3, 3), dtype=complex)
    c[0, 1, 2] = -2.0
    c[1, 0, 2] = 2.0
    c[0, 2, 2] = 1.0
    c[2, 0, 2] = -1.0
    c[1, 2, 2] = 1.0
    c[2, 1, 2] = -1.0
    return c


def sl2_structure():
    """Basis (h, e, f) of the split simple algebra, for negative tests."""
    c = np.zeros((3, 3, 3), dtype=complex)
    c[0, 1, 1] = 2.0
    c[1, 0, 1] = -2.0
    c[0, 2, 2] = -2.0
    c[2, 0, 2] = 2.0
    c[1, 2, 0] = 1.0
    c[2, 1, 0] = -1.0
    return c


def conjugate_structure(c, p):
    """Structure constants in the basis f_i whose coordinates are p[:, i]."""
    pinv = np.linalg.inv(p)
    return np.einsum("ai,bj,abm,km->ijk", p, p, c, pinv)


def _upper_matrix(rng, m):
    mat = np.zeros((m, m))
    for i in range(m):
        mat[i, i] = rng.integers(-2, 3)
        for j in range(i + 1, m):
            mat[i, j] = rng.integers(-1, 2)
    return mat


def random_solvable_structure(seed):
    """A seeded random solvable algebra of dimension at most 6.

    Three families: commuting operators acting on an abelian part,
    diagonal scaling derivations of a graded nilpotent part, and plain
    nilpotent algebras. A random orthogonal change of basis hides the
    adapted coordinates from the solver.
    """
    rng = np.random.default_rng(20240000 + seed)
    kind = ("operators", "graded", "nilpotent")[int(rng.integers(0, 3))]

    if kind == "operators":
        m = int(rng.integers(2, 5))
        k = int(rng.integers(1, 3))
        m0 = _upper_matrix(rng, m)
        mats = []
        for _ in range(k):
            coeffs = rng.integers(-2, 3, size=3)
            mats.append(
                coeffs[0] * np.eye(m) + coeffs[1] * m0 + coeffs[2] * (m0 @ m0)
            )
        n = k + m
        c = np.zeros((n, n, n), dtype=complex)
        for a in range(k):
            for i in range(m):
                for j in range(m):
                    c[a, k + i, k + j] = mats[a][j, i]
                    c[k + i, a, k + j] = -mats[a][j, i]
    elif kind == "graded":
        base = (heisenberg_structure, filiform4_structure)[int(rng.integers(0, 2))]()
        m = base.shape[0]
        k = int(rng.integers(1, 3))
        if m == 3:
            frees = [(1, 0, 1), (0, 1, 1)]
        else:
            frees = [(1, 0, 1, 2), (0, 1, 1, 1)]
        lams = []
        for _ in range(k):
            a, b = int(rng.integers(-2, 3)), int(rng.integers(-2, 3))
            lams.append(a * np.array(frees[0]) + b * np.array(frees[1]))
        n = k + m
        c = np.zeros((n, n, n), dtype=complex)
        c[k:, k:, k:] = base
        for t in range(k):
            for i in range(m):
                c[t, k + i, k + i] = lams[t][i]
                c[k + i, t, k + i] = -lams[t][i]
    else:
        base = (
            abelian_structure(4),
            heisenberg_structure(),
            filiform4_structure(),
            heisenberg5_structure(),
        )[int(rng.integers(0, 4))]
        c = base.copy()

    n = c.shape[0]
    if rng.random() < 0.7:
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        c = conjugate_structure(c, q)
    # Rounding in the basis change breaks exact table antisymmetry.
    return 0.5 * (c - np.swapaxes(c, 0, 1))


CORPUS_SEEDS = tuple(range(25))


@pytest.fixture(scope="session")
def sol_problem():
    return builtin_problem("sol")


@pytest.fixture(scope="session")
def sect4_problem():
    return builtin_problem("sect4")


@pytest.fixture(scope="session")
def sol_stages(sol_problem):
    return build_stages(sol_problem)


@pytest.fixture(scope="session")
def sect4_stages(sect4_problem):
    return build_stages(sect4_problem)


@pytest.fixture(scope="session")
def corpus():
    """25 validated random solvable algebras, keyed by seed."""
    return {
        seed: validate_algebra(random_solvable_structure(seed))
        for seed in CORPUS_SEEDS
    }


@pytest.fixture(scope="session")
def corpus_splittings(corpus):
    """Semisimple splittings of the whole corpus, built once."""
    from solvhull import build_splitting

    return {seed: build_splitting(alg) for seed, alg in corpus.items()}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS or FAIL line per acceptance criterion at the end of a run."""
    verdicts = {}
    for rep in terminalreporter.stats.get("passed", []):
        nodeid = getattr(rep, "nodeid", "")
        if "test_acceptance.py::test_criterion" in nodeid and rep.when == "call":
            verdicts.setdefault(nodeid.split("::")[-1], "PASS")
    for key in ("failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion" in nodeid:
                verdicts[nodeid.split("::")[-1]] = "FAIL"
    if verdicts:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(verdicts):
            terminalreporter.write_line(f"{verdicts[name]} {name}")
