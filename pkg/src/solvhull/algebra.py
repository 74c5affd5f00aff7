"""Finite dimensional Lie algebras given by structure constants.

The table convention is [e_i, e_j] = sum_k structure[i, j, k] e_k. Real
and complex coefficient fields are both supported; the dtype of the
structure table decides which one is in play.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    AntisymmetryViolation,
    JacobiViolation,
    NotNilpotent,
    NotSolvable,
    SolvHullError,
)
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class LieAlgebra:
    """Validated Lie algebra with a fixed ordered basis."""

    structure: np.ndarray = field(repr=False)
    names: tuple

    @property
    def dim(self):
        return self.structure.shape[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.structure)

    def adjoint(self, x):
        """Matrix of ad_x acting on coordinate vectors."""
        x = np.asarray(x)
        return np.einsum("i,ijk->kj", x, self.structure)

    def bracket(self, x, y):
        return np.einsum("i,j,ijk->k", np.asarray(x), np.asarray(y), self.structure)

    def adjoint_basis(self):
        """List of ad matrices of the basis vectors."""
        return [np.einsum("jk->kj", self.structure[i]) for i in range(self.dim)]

    def basis_vector(self, i):
        v = np.zeros(self.dim, dtype=self.structure.dtype)
        v[i] = 1.0
        return v


def _jacobi_residual(c):
    t1 = np.einsum("jkl,ilm->ijkm", c, c)
    t2 = np.einsum("kil,jlm->ijkm", c, c)
    t3 = np.einsum("ijl,klm->ijkm", c, c)
    return t1 + t2 + t3


def validate_algebra(structure, names=None, tolerances=DEFAULT):
    """Build a LieAlgebra after checking the table is one.

    Antisymmetry is required exactly at the table level. The Jacobi
    identity is checked to the algebraic tolerance, scaled by the squared
    magnitude of the table. Solvability is certified by running the
    derived series to zero.
    """
    c = np.asarray(structure)
    if not np.iscomplexobj(c):
        c = np.ascontiguousarray(c, dtype=float)
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise AntisymmetryViolation(
            None, f"structure table must be cubic, got shape {c.shape}"
        )
    n = c.shape[0]

    skew = c + np.swapaxes(c, 0, 1)
    if np.any(skew != 0):
        bad = np.argwhere(skew != 0)[0]
        raise AntisymmetryViolation(tuple(int(v) for v in bad))

    scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
    resid = _jacobi_residual(c)
    worst = float(np.max(np.abs(resid))) if c.size else 0.0
    if worst > tolerances.alg * scale * scale:
        flat = np.max(np.abs(resid), axis=3)
        i, j, k = np.unravel_index(int(np.argmax(flat)), flat.shape)
        raise JacobiViolation((int(i), int(j), int(k)), worst, resid[i, j, k])

    if names is None:
        names = tuple(f"e{i}" for i in range(n))
    else:
        names = tuple(str(s) for s in names)
        if len(names) != n:
            raise AntisymmetryViolation(
                None, f"{len(names)} names for dimension {n}"
            )

    cc = c.copy()
    cc.flags.writeable = False
    alg = LieAlgebra(structure=cc, names=names)
    derived_series(alg, tolerances)
    return alg


def _pairwise_bracket_span(alg, left, right, tol):
    """Span of brackets between two column families, orthonormalized."""
    cols = []
    for a in range(left.shape[1]):
        for b in range(right.shape[1]):
            cols.append(alg.bracket(left[:, a], right[:, b]))
    if not cols:
        return left[:, :0]
    mat = np.stack(cols, axis=1)
    return linalg.orthonormal_columns(mat, tol)


def derived_series(alg, tolerances=DEFAULT):
    """Derived series as orthonormal bases, ending at the zero space.

    Raises NotSolvable when the series stops shrinking above zero.
    """
    tol = tolerances.alg
    dtype = complex if alg.is_complex else float
    current = np.eye(alg.dim, dtype=dtype)
    series = [current]
    while current.shape[1] > 0:
        nxt = _pairwise_bracket_span(alg, current, current, tol)
        if nxt.shape[1] >= current.shape[1]:
            raise NotSolvable(
                f"derived series stalls at dimension {current.shape[1]}"
            )
        series.append(nxt)
        current = nxt
    return series


def lower_central_series(alg, tolerances=DEFAULT):
    """Lower central series bases; raises NotNilpotent if it stalls."""
    tol = tolerances.alg
    dtype = complex if alg.is_complex else float
    full = np.eye(alg.dim, dtype=dtype)
    current = full
    series = [current]
    while current.shape[1] > 0:
        nxt = _pairwise_bracket_span(alg, full, current, tol)
        if nxt.shape[1] >= current.shape[1]:
            raise NotNilpotent(
                f"lower central series stalls at dimension {current.shape[1]}"
            )
        series.append(nxt)
        current = nxt
    return series


def nilpotency_class(alg, tolerances=DEFAULT):
    """Length of the lower central series, zero for the zero algebra."""
    return len(lower_central_series(alg, tolerances)) - 1


def _field_kernel(mat, is_complex, tol):
    if is_complex:
        return linalg.nullspace(mat, tol)
    return linalg.real_nullspace(mat, tol)


def _canon_basis(v, is_complex, tol):
    q = linalg.canon_columns(np.asarray(v, dtype=complex), tol)
    if is_complex:
        return q
    imag = float(np.max(np.abs(q.imag))) if q.size else 0.0
    if imag > 1e-8:
        raise SolvHullError(
            f"expected a real subspace, imaginary residue {imag:.3e}"
        )
    return np.ascontiguousarray(q.real)


@dataclass(frozen=True)
class NilradicalResult:
    """Maximal nilpotent ideal plus the triangular data that produced it."""

    basis: np.ndarray
    flag_characters: np.ndarray
    triangularizer: np.ndarray
    triangular_residual: float

    @property
    def dim(self):
        return self.basis.shape[1]


def nilradical(alg, tolerances=DEFAULT):
    """Nilradical of a solvable algebra via flag characters.

    The adjoint family is simultaneously triangularized; the diagonal of
    the triangular form is a family of linear characters, and an element
    has nilpotent adjoint exactly when every character kills it. The
    kernel of the stacked character matrix is therefore the set of all
    ad-nilpotent elements, which for solvable algebras is the nilradical.
    """
    tol = tolerances.alg
    mats = alg.adjoint_basis()
    u, tri_resid = linalg.triangularize_family(mats, tol)
    n = alg.dim
    chars = np.zeros((n, n), dtype=complex)
    for i, m in enumerate(mats):
        t = u.conj().T @ m.astype(complex) @ u
        chars[:, i] = np.diag(t)

    if tri_resid > 1e4 * tol:
        raise SolvHullError(
            f"triangularization residual {tri_resid:.3e} too large for tolerance {tol:.1e}"
        )

    kernel = _field_kernel(chars, alg.is_complex, max(tol, 10 * tri_resid))
    basis = _canon_basis(kernel, alg.is_complex, tol)

    for j in range(basis.shape[1]):
        ad = alg.adjoint(basis[:, j])
        if not linalg.is_nilpotent_matrix(ad, tolerances.num):
            raise SolvHullError(
                "flag character kernel contains an element with non-nilpotent adjoint"
            )
    if basis.shape[1]:
        brackets = []
        for i in range(n):
            for j in range(basis.shape[1]):
                brackets.append(alg.bracket(alg.basis_vector(i), basis[:, j]))
        resid = linalg.subspace_residual(np.stack(brackets, axis=1), basis)
        if resid > tolerances.num:
            raise SolvHullError(f"nilradical ideal residual {resid:.3e}")

    return NilradicalResult(
        basis=basis,
        flag_characters=chars,
        triangularizer=u,
        triangular_residual=tri_resid,
    )


def restricted_structure(alg, q, tolerances=DEFAULT):
    """Structure constants of a subalgebra in the basis q.

    Returns (table, residual) where residual measures how far the
    brackets fall outside span(q).
    """
    m = q.shape[1]
    dtype = complex if (alg.is_complex or np.iscomplexobj(q)) else float
    table = np.zeros((m, m, m), dtype=dtype)
    worst = 0.0
    for a in range(m):
        for b in range(m):
            v = alg.bracket(q[:, a], q[:, b])
            coords = q.conj().T @ v
            resid = v - q @ coords
            worst = max(worst, float(np.linalg.norm(resid)))
            table[a, b, :] = coords
    table = (table - np.swapaxes(table, 0, 1)) / 2.0
    return table, worst


def _fitting_null(adx, cluster_scale):
    """Invariant subspace for the eigenvalue cluster at zero."""
    width, norm = linalg._cluster_width(adx, cluster_scale)
    n = adx.shape[0]
    if norm == 0.0:
        return np.eye(n, dtype=complex), n
    eigs = np.linalg.eigvals(adx)
    labels, means, counts, _ = linalg.cluster_scalars(eigs, width)
    snap = cluster_scale * max(1.0, norm)
    zero_idx = None
    snapped = []
    for ci, m in enumerate(means):
        re = 0.0 if abs(m.real) < snap else m.real
        im = 0.0 if abs(m.imag) < snap else m.imag
        snapped.append(complex(re, im))
        if re == 0.0 and im == 0.0:
            zero_idx = ci
    if zero_idx is None:
        return None, 0

    def selector(x, idx=zero_idx):
        dists = [abs(x - mm) for mm in snapped]
        return int(np.argmin(dists)) == idx

    q, sdim = linalg.invariant_subspace(adx, selector)
    return q, sdim


def _cartan_candidates(alg):
    """Deterministic stream of elements to test for regularity."""
    n = alg.dim
    dtype = complex if alg.is_complex else float
    for i in range(n):
        yield alg.basis_vector(i)
    for i in range(n):
        for j in range(i + 1, n):
            v = np.zeros(n, dtype=dtype)
            v[i] = 1.0
            v[j] = 1.0
            yield v
    rng = np.random.default_rng(8128)
    for _ in range(20):
        v = rng.standard_normal(n)
        if alg.is_complex:
            v = v + 1j * rng.standard_normal(n)
        yield v / np.linalg.norm(v)


def _try_cartan(alg, x, tolerances):
    """Fitting-null subalgebra of ad_x, or None if it is not a Cartan."""
    adx = alg.adjoint(x).astype(complex)
    q, dim = _fitting_null(adx, tolerances.cluster_scale)
    if q is None or dim == 0:
        return None
    if not alg.is_complex:
        if not linalg.is_real_subspace(q, tolerances.num):
            return None
        q = linalg.realify_columns(q, tolerances.num)
    q = _canon_basis(q, alg.is_complex, tolerances.alg)

    # Subalgebra check.
    brackets = []
    for a in range(q.shape[1]):
        for b in range(a + 1, q.shape[1]):
            brackets.append(alg.bracket(q[:, a], q[:, b]))
    if brackets:
        if linalg.subspace_residual(np.stack(brackets, axis=1), q) > tolerances.num:
            return None

    # Nilpotency of the restricted algebra.
    table, resid = restricted_structure(alg, q, tolerances)
    if resid > tolerances.num:
        return None
    sub = LieAlgebra(structure=table, names=tuple(f"h{i}" for i in range(q.shape[1])))
    try:
        lower_central_series(sub, tolerances)
    except NotNilpotent:
        return None

    # Self-normalizing check: nothing outside q brackets into span(q).
    n = alg.dim
    proj = q @ q.conj().T
    rows = []
    for b in range(q.shape[1]):
        lb = np.einsum("ijk,j->ki", alg.structure, q[:, b])
        rows.append((np.eye(n) - proj) @ lb)
    normalizer = _field_kernel(np.vstack(rows), alg.is_complex, tolerances.num)
    if normalizer.shape[1] != q.shape[1]:
        return None
    return q


def _weight_blocks(alg, cartan, cluster_scale):
    """Common generalized weight decomposition for the Cartan action.

    Returns (blocks, weights) with one weight tuple per block, one entry
    per Cartan basis vector. Blocks are complex column bases.
    """
    n = alg.dim
    blocks = [np.eye(n, dtype=complex)]
    weights = [()]
    for a in range(cartan.shape[1]):
        m = alg.adjoint(cartan[:, a]).astype(complex)
        new_blocks = []
        new_weights = []
        for b, w in zip(blocks, weights):
            mb = b.conj().T @ m @ b
            width, norm = linalg._cluster_width(mb, cluster_scale)
            if norm == 0.0:
                new_blocks.append(b)
                new_weights.append(w + (0.0 + 0.0j,))
                continue
            eigs = np.linalg.eigvals(mb)
            labels, means, counts, _ = linalg.cluster_scalars(eigs, width)
            snap = cluster_scale * max(1.0, norm)
            snapped = []
            for mm in means:
                re = 0.0 if abs(mm.real) < snap else mm.real
                im = 0.0 if abs(mm.imag) < snap else mm.imag
                snapped.append(complex(re, im))
            for ci in range(len(means)):
                def selector(x, idx=ci):
                    dists = [abs(x - mm) for mm in snapped]
                    return int(np.argmin(dists)) == idx

                qc, sdim = linalg.invariant_subspace(mb, selector)
                if sdim != counts[ci]:
                    raise SolvHullError(
                        "weight space extraction disagreed with eigenvalue clustering"
                    )
                new_blocks.append(b @ qc)
                new_weights.append(w + (snapped[ci],))
        blocks = new_blocks
        weights = new_weights

    def key(w):
        return tuple((round(z.real, 9), round(z.imag, 9)) for z in w)

    order = sorted(range(len(blocks)), key=lambda k: key(weights[k]))
    return [blocks[k] for k in order], [weights[k] for k in order]


@dataclass(frozen=True)
class SemisimpleAdjoint:
    """Linear map sending x to the semisimple part of ad_x.

    tensor[i] is the image of the i-th basis vector; apply() extends by
    linearity. The map vanishes exactly on the nilradical, its image is
    a commuting family of semisimple derivations, and it kills brackets,
    making it a homomorphism onto an abelian algebra.
    """

    tensor: np.ndarray = field(repr=False)
    cartan: np.ndarray = field(repr=False)
    blocks: tuple = field(repr=False)
    weights: tuple
    condition: float
    residuals: dict

    def apply(self, x):
        return np.einsum("i,iab->ab", np.asarray(x), self.tensor)


def semisimple_adjoint(alg, nilrad=None, tolerances=DEFAULT):
    """Construct the semisimple part of the adjoint representation.

    Works relative to a Cartan subalgebra: the generalized weight space
    decomposition for the Cartan action turns the semisimple part of
    each ad into a weight-scaled projection sum, which is linear in the
    element by construction. Candidate regular elements are scanned in a
    fixed order so the result is deterministic.
    """
    if nilrad is None:
        nilrad = nilradical(alg, tolerances)
    n = alg.dim
    nil_basis = nilrad.basis

    best = None
    for cand in _cartan_candidates(alg):
        q = _try_cartan(alg, cand, tolerances)
        if q is None:
            continue
        combined = np.hstack([q.astype(complex), nil_basis.astype(complex)])
        if linalg.orthonormal_columns(combined, tolerances.alg).shape[1] != n:
            continue
        if best is None or q.shape[1] < best.shape[1]:
            best = q
            if q.shape[1] == max(1, n - nil_basis.shape[1]):
                break
    if best is None:
        raise SolvHullError("no Cartan subalgebra found among deterministic candidates")
    cartan = best

    blocks, weights = _weight_blocks(alg, cartan, tolerances.cluster_scale)
    p, cond = linalg.block_transform(blocks)
    pinv = np.linalg.inv(p)

    # Cartan components of the basis vectors, minimum norm when the
    # Cartan overlaps the nilradical.
    frame = np.hstack([cartan.astype(complex), nil_basis.astype(complex)])
    coeffs, *_ = np.linalg.lstsq(frame, np.eye(n, dtype=complex), rcond=None)
    h_coords = coeffs[: cartan.shape[1], :]

    block_sizes = [b.shape[1] for b in blocks]
    tensor = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        lam_cols = []
        for w, size in zip(weights, block_sizes):
            lam = sum(h_coords[a, i] * w[a] for a in range(cartan.shape[1]))
            lam_cols.extend([lam] * size)
        tensor[i] = p @ np.diag(np.array(lam_cols)) @ pinv

    if not alg.is_complex:
        imag = float(np.max(np.abs(tensor.imag)))
        if imag > tolerances.num * max(1.0, float(np.max(np.abs(tensor)))):
            raise SolvHullError(
                f"semisimple adjoint of a real algebra came out complex ({imag:.3e})"
            )
        tensor = np.ascontiguousarray(tensor.real)

    residuals = _semisimple_residuals(alg, tensor, nil_basis, tolerances)
    worst = max(residuals.values())
    if worst > 1e3 * tolerances.num:
        raise SolvHullError(
            f"semisimple adjoint residual {worst:.3e} exceeds tolerance budget"
        )

    return SemisimpleAdjoint(
        tensor=tensor,
        cartan=cartan,
        blocks=tuple(blocks),
        weights=tuple(weights),
        condition=cond,
        residuals=residuals,
    )


def _semisimple_residuals(alg, tensor, nil_basis, tolerances):
    n = alg.dim
    c = alg.structure
    scale = max(1.0, float(np.max(np.abs(tensor))))

    commute = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            commute = max(
                commute,
                float(np.max(np.abs(tensor[i] @ tensor[j] - tensor[j] @ tensor[i]))),
            )

    on_brackets = float(np.max(np.abs(np.einsum("ijk,kab->ijab", c, tensor)))) if n else 0.0

    derivation = 0.0
    for i in range(n):
        d = tensor[i]
        left = np.einsum("ab,jkb->jka", d, c)
        term1 = np.einsum("bj,bkm->jkm", d, c)
        term2 = np.einsum("bk,jbm->jkm", d, c)
        derivation = max(derivation, float(np.max(np.abs(left - term1 - term2))))

    flat = np.stack([tensor[i].ravel() for i in range(n)], axis=1)
    kernel = _field_kernel(flat, alg.is_complex, tolerances.num)
    k_in_n = linalg.subspace_residual(kernel, nil_basis.astype(complex)) if kernel.shape[1] else 0.0
    n_in_k = (
        linalg.subspace_residual(nil_basis.astype(complex), kernel)
        if nil_basis.shape[1]
        else 0.0
    )
    kernel_dim_gap = abs(kernel.shape[1] - nil_basis.shape[1])

    return {
        "commuting": commute / scale,
        "kills_brackets": on_brackets / scale,
        "derivation": derivation / scale,
        "kernel_in_nilradical": float(k_in_n) + kernel_dim_gap,
        "nilradical_in_kernel": float(n_in_k),
    }
