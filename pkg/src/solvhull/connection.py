"""Flat triangular connection form attached to the enveloping module.

Each algebra element is sent to an upper triangular matrix: the diagonal
carries the accumulated torus characters of the monomials, the strictly
upper part is left multiplication in the module. The assignment is a Lie
homomorphism by construction, which is exactly flatness of the induced
connection, so parallel transport along loops is path independent.

The diagonal entries, viewed as linear functionals on the algebra, span
a finitely generated additive group. A basis of that group is computed
over the integers so every diagonal character gets integer coordinates.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import NotInLattice, SolvHullError
from .tolerances import DEFAULT


def _real_stack(vectors):
    """Stack complex vectors into one real matrix, columns per vector."""
    cols = [np.concatenate([v.real, v.imag]) for v in vectors]
    return np.stack(cols, axis=1)


def _row_hnf(rows):
    """Hermite-style row basis of the integer lattice spanned by rows.

    Plain integer row reduction with exact Python ints; returns the
    nonzero reduced rows. Quadratic in the input size, which is tiny.
    """
    mat = [list(map(int, r)) for r in rows]
    if not mat:
        return []
    ncols = len(mat[0])
    top = 0
    for col in range(ncols):
        while True:
            pivots = [i for i in range(top, len(mat)) if mat[i][col] != 0]
            if not pivots:
                break
            best = min(pivots, key=lambda i: abs(mat[i][col]))
            mat[top], mat[best] = mat[best], mat[top]
            done = True
            for i in range(top + 1, len(mat)):
                if mat[i][col] != 0:
                    q = mat[i][col] // mat[top][col]
                    mat[i] = [a - q * b for a, b in zip(mat[i], mat[top])]
                    if mat[i][col] != 0:
                        done = False
            if done:
                break
        if any(mat[i][col] != 0 for i in range(top, len(mat))) and mat[top][col] != 0:
            if mat[top][col] < 0:
                mat[top] = [-a for a in mat[top]]
            top += 1
            if top == len(mat):
                break
    return [r for r in mat[:top] if any(r)]


def _integer_coords(basis, f, tol):
    """Integer coordinates of f in the lattice spanned by basis.

    Returns (coords, in_span_residual, rounding_residual); the first
    residual measures distance to the real span, the second distance to
    the nearest integer point.
    """
    if not basis:
        norm = float(np.linalg.norm(f))
        return np.zeros(0, dtype=int), norm, norm
    a = _real_stack(basis)
    b = np.concatenate([f.real, f.imag])
    alpha, *_ = np.linalg.lstsq(a, b, rcond=None)
    span_resid = float(np.linalg.norm(a @ alpha - b))
    m = np.round(alpha)
    round_resid = float(np.linalg.norm(a @ m - b))
    return m.astype(int), span_resid, round_resid


def _refine_lattice(basis, alpha, tol):
    """Shrink the lattice so a rational in-span vector becomes integral.

    alpha are the real coordinates of the new vector in the current
    basis. Coordinates are snapped to nearby rationals; the refined
    lattice is generated by the old basis plus the new vector, computed
    through an integer Hermite reduction of the scaled generators.
    """
    fracs = []
    for a in alpha:
        fr = Fraction(float(a)).limit_denominator(10 ** 6)
        if abs(float(fr) - float(a)) > tol:
            raise NotInLattice(abs(float(fr) - float(a)), tol)
        fracs.append(fr)
    q = 1
    for fr in fracs:
        q = q * fr.denominator // gcd(q, fr.denominator)
    rows = [[q if i == j else 0 for j in range(len(basis))] for i in range(len(basis))]
    rows.append([int(fr * q) for fr in fracs])
    hnf = _row_hnf(rows)
    if len(hnf) != len(basis):
        raise NotInLattice(float(len(hnf)), float(len(basis)))
    new_basis = []
    for row in hnf:
        vec = sum((row[i] / q) * basis[i] for i in range(len(basis)))
        new_basis.append(vec)
    return new_basis


def integer_lattice_basis(generators, tol):
    """Basis of the additive group generated by the given vectors.

    Vectors are inserted smallest first; each is either already an
    integer combination, a new independent direction, or triggers a
    rational refinement of the existing basis.
    """
    gens = [np.asarray(g, dtype=complex).ravel() for g in generators]
    gens = [g for g in gens if np.linalg.norm(g) > tol]
    gens.sort(
        key=lambda g: (
            float(np.linalg.norm(g)),
            tuple((round(z.real, 9), round(z.imag, 9)) for z in g),
        )
    )
    basis = []
    for f in gens:
        if not basis:
            basis = [f.copy()]
            continue
        a = _real_stack(basis)
        b = np.concatenate([f.real, f.imag])
        alpha, *_ = np.linalg.lstsq(a, b, rcond=None)
        span_resid = float(np.linalg.norm(a @ alpha - b))
        if span_resid > tol:
            basis.append(f.copy())
            continue
        m = np.round(alpha)
        if float(np.linalg.norm(a @ m - b)) <= tol:
            continue
        basis = _refine_lattice(basis, alpha, tol)
        coords, _, round_resid = _integer_coords(basis, f, tol)
        if round_resid > tol:
            raise NotInLattice(round_resid, tol)
    return _canonical_basis(basis, tol)


def _canonical_basis(basis, tol):
    """Fix signs and order so the basis is reproducible."""
    out = []
    for v in basis:
        flip = False
        for z in v:
            if abs(z) > tol:
                if z.real < -tol:
                    flip = True
                elif abs(z.real) <= tol and z.imag < 0:
                    flip = True
                break
        out.append(-v if flip else v)
    out.sort(
        key=lambda g: (
            float(np.linalg.norm(g)),
            tuple((round(z.real, 9), round(z.imag, 9)) for z in g),
        )
    )
    return out


@dataclass(frozen=True)
class ConnectionForm:
    """Upper triangular matrix-valued one form with diagonal characters.

    psi_tensor[i] is the matrix attached to basis vector i; omega[w, i]
    the diagonal character of monomial w evaluated there. char_basis
    generates the additive group of all diagonal characters and
    char_coeffs gives each monomial's integer coordinates in it.
    """

    envelope: object
    psi_tensor: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    char_basis: tuple
    char_coeffs: np.ndarray = field(repr=False)
    flatness: float
    residuals: dict

    @property
    def r(self):
        return self.psi_tensor.shape[1]

    @property
    def dim(self):
        return self.psi_tensor.shape[0]

    @property
    def words(self):
        return self.envelope.words

    def psi(self, x):
        """Connection matrix of an algebra element."""
        return np.einsum("i,irs->rs", np.asarray(x, dtype=complex), self.psi_tensor)

    def diagonal_characters(self, x):
        """Diagonal of psi(x), one character value per monomial."""
        return self.omega @ np.asarray(x, dtype=complex)

    def entry_functional(self, p, q):
        """The (p, q) matrix entry of psi as a functional on the algebra."""
        return np.ascontiguousarray(self.psi_tensor[:, p, q])


def build_connection_form(env, tolerances=DEFAULT):
    """Assemble the connection form from a truncated enveloping module."""
    split = env.split
    alg = split.base
    n = alg.dim
    r = env.r

    omega = env.word_chars @ split.torus_coords.astype(complex)

    psi = np.zeros((n, r, r), dtype=complex)
    for i in range(n):
        coords = env.generator_inverse[:, i]
        psi[i] = env.letter_action(coords)
        psi[i][np.diag_indices(r)] += omega[:, i]

    c = alg.structure
    scale = max(1.0, float(np.max(np.abs(psi))))
    flat = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            lhs = psi[i] @ psi[j] - psi[j] @ psi[i]
            rhs = np.einsum("k,krs->rs", c[i, j, :].astype(complex), psi)
            flat = max(flat, float(np.max(np.abs(lhs - rhs))))
    flat = flat / scale
    if flat > 1e3 * tolerances.num:
        raise SolvHullError(f"connection form is not flat: residual {flat:.3e}")

    # Character lattice: monomial characters are nonnegative integer sums
    # of generator characters, so the generator level characters generate
    # the same additive group and seed the basis computation.
    gen_functionals = [
        np.asarray(env.gen_chars[a], dtype=complex) @ split.torus_coords.astype(complex)
        for a in range(env.generators.shape[1])
    ]
    basis = integer_lattice_basis(gen_functionals, tolerances.integer)

    coeffs = np.zeros((r, len(basis)), dtype=int)
    worst_round = 0.0
    for w in range(r):
        f = omega[w, :]
        m, span_resid, round_resid = _integer_coords(basis, f, tolerances.integer)
        if max(span_resid, round_resid) > tolerances.integer:
            raise NotInLattice(max(span_resid, round_resid), tolerances.integer)
        worst_round = max(worst_round, round_resid)
        coeffs[w, :] = m

    residuals = dict(env.residuals)
    residuals["flatness"] = flat
    residuals["character_rounding"] = worst_round

    return ConnectionForm(
        envelope=env,
        psi_tensor=psi,
        omega=omega,
        char_basis=tuple(basis),
        char_coeffs=coeffs,
        flatness=flat,
        residuals=residuals,
    )
