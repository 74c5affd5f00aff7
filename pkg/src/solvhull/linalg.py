"""Dense linear algebra kernels shared across the package.

Everything here works on small matrices (dimension a few dozen at most), so
the implementations favor clarity and reproducibility over asymptotics.
All randomness is excluded; ties are broken by lowest index so repeated runs
produce identical output.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EigenClusterAmbiguity

_EPS = float(np.finfo(float).eps)


def _as_matrix(a):
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    return a


def nullspace(a, tol=1e-12):
    """Orthonormal basis for the kernel of a, as columns.

    The rank cutoff is the larger of tol and the usual eps-relative
    threshold, both scaled by the leading singular value.
    """
    a = _as_matrix(a)
    if a.size == 0:
        return np.eye(a.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(a)
    if s.size == 0:
        return np.eye(a.shape[1], dtype=complex)
    cutoff = max(tol * max(1.0, s[0]), s[0] * max(a.shape) * _EPS)
    rank = int(np.sum(s > cutoff))
    return vh[rank:].conj().T


def real_nullspace(a, tol=1e-12):
    """Kernel of a complex matrix viewed as a map on real vectors.

    Stacks real and imaginary parts so the returned basis is real even
    when a has complex entries.
    """
    a = _as_matrix(a)
    stacked = np.vstack([a.real, a.imag])
    ker = nullspace(stacked, tol)
    return np.ascontiguousarray(ker.real)


def orthonormal_columns(v, tol=1e-12):
    """Orthonormal basis (as columns) for the column span of v."""
    v = _as_matrix(v)
    if v.shape[1] == 0:
        return v.copy()
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    if s.size == 0:
        return v[:, :0]
    cutoff = max(tol * max(1.0, s[0]), s[0] * max(v.shape) * _EPS)
    rank = int(np.sum(s > cutoff))
    return u[:, :rank]


def subspace_residual(vectors, basis):
    """Relative distance from each column of vectors to span(basis).

    Returns the worst-case relative projection residual. A value below
    the working tolerance certifies containment.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if vectors.shape[0] == 1 and basis.shape[0] != 1:
        vectors = vectors.T
    if vectors.shape[1] == 0:
        return 0.0
    q = orthonormal_columns(basis) if basis.shape[1] else basis
    if q.shape[1] == 0:
        norms = np.linalg.norm(vectors, axis=0)
        return float(np.max(norms / np.maximum(1.0, norms)))
    proj = q @ (q.conj().T @ vectors)
    resid = np.linalg.norm(vectors - proj, axis=0)
    scale = np.maximum(1.0, np.linalg.norm(vectors, axis=0))
    return float(np.max(resid / scale))


def subspace_intersection(a, b, tol=1e-10):
    """Orthonormal basis of the intersection of two column spans."""
    a = orthonormal_columns(_as_matrix(a), tol)
    b = orthonormal_columns(_as_matrix(b), tol)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return a[:, :0].astype(complex)
    paired = np.hstack([a, -b]).astype(complex)
    ker = nullspace(paired, tol)
    if ker.shape[1] == 0:
        return a[:, :0].astype(complex)
    inter = a @ ker[: a.shape[1], :]
    return orthonormal_columns(inter, tol)


def canon_columns(v, tol=1e-12):
    """Deterministic orthonormal basis of span(v).

    The result depends only on the subspace, not on the incoming basis:
    it is rebuilt from the orthogonal projector by greedy column pivoting
    followed by QR with a positive-diagonal convention.
    """
    q = orthonormal_columns(_as_matrix(v).astype(complex), tol)
    r = q.shape[1]
    if r == 0:
        return q
    proj = q @ q.conj().T
    work = proj.copy()
    picked = []
    for _ in range(r):
        norms = np.linalg.norm(work, axis=0)
        j = int(np.argmax(norms))
        col = proj[:, j].copy()
        picked.append(j)
        ucol = work[:, j] / max(np.linalg.norm(work[:, j]), _EPS)
        work = work - np.outer(ucol, ucol.conj() @ work)
        work[:, j] = 0.0
    b = proj[:, picked]
    q2, r2 = np.linalg.qr(b)
    d = np.diag(r2).copy()
    d[np.abs(d) < _EPS] = 1.0
    phases = d / np.abs(d)
    return q2 * phases.conj()


def is_real_subspace(q, tol=1e-10):
    """True when span(q) is closed under complex conjugation."""
    return subspace_residual(np.conj(q), q) <= tol


def realify_columns(q, tol=1e-10):
    """Real orthonormal basis of a conjugation-closed complex span."""
    stacked = np.hstack([q.real, q.imag])
    basis = orthonormal_columns(stacked, tol)
    return np.ascontiguousarray(basis.real)


def cluster_scalars(values, width):
    """Group scalars by transitive closeness within width.

    Returns (labels, means, counts, gap) where gap is the smallest
    distance between distinct cluster means (inf for a single cluster).
    Cluster indices are ordered by mean, lexicographically on
    (real, imag), so the output is reproducible.
    """
    vals = np.asarray(values, dtype=complex).ravel()
    n = vals.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= width:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    roots = {}
    for i in range(n):
        roots.setdefault(find(i), []).append(i)
    groups = list(roots.values())
    means = [complex(np.mean(vals[idx])) for idx in groups]
    order = sorted(range(len(groups)), key=lambda k: (means[k].real, means[k].imag))
    groups = [groups[k] for k in order]
    means = [means[k] for k in order]
    counts = [len(g) for g in groups]
    labels = np.empty(n, dtype=int)
    for ci, idx in enumerate(groups):
        labels[idx] = ci
    if len(means) < 2:
        gap = float("inf")
    else:
        gap = min(
            abs(means[i] - means[j])
            for i in range(len(means))
            for j in range(i + 1, len(means))
        )
    return labels, means, counts, gap


def invariant_subspace(a, selector):
    """Orthonormal basis of the invariant subspace for selected eigenvalues.

    Uses an ordered Schur decomposition, so no matrix powers are formed
    and clustered or defective eigenvalues stay well conditioned.
    """
    a = _as_matrix(a).astype(complex)
    t, z, sdim = scipy.linalg.schur(a, output="complex", sort=selector)
    return z[:, :sdim], int(sdim)


@dataclass(frozen=True)
class JordanDecomposition:
    """Additive decomposition a = semisimple + nilpotent.

    eigenvalues holds one snapped cluster mean per cluster,
    multiplicities the matching algebraic multiplicities, and
    condition the condition number of the similarity transform.
    """

    semisimple: np.ndarray
    nilpotent: np.ndarray
    transform: np.ndarray
    eigenvalues: tuple
    multiplicities: tuple
    condition: float


def _cluster_width(a, cluster_scale):
    n = a.shape[0]
    norm = float(np.linalg.norm(a, 2))
    if norm == 0.0:
        return 0.0, 0.0
    # Defective eigenvalues move like eps**(1/k) under rounding, so the
    # width needs a floor that grows with dimension or nilpotent blocks
    # shatter into spurious clusters.
    width = max(cluster_scale * max(1.0, norm), 4.0 * norm * _EPS ** (1.0 / n))
    return width, norm


def jordan_decompose(a, cluster_scale=1e-7, ambiguity_factor=10.0):
    """Additive Jordan decomposition of a square matrix.

    Eigenvalues are clustered with a width scaled by the matrix norm,
    cluster means are snapped to zero when indistinguishable from it,
    and each generalized eigenspace is extracted from an ordered Schur
    form. Raises EigenClusterAmbiguity when two cluster means are closer
    than ambiguity_factor times the clustering width.
    """
    a = _as_matrix(a)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError("jordan_decompose expects a square matrix")
    was_real = not np.iscomplexobj(a)
    ac = a.astype(complex)
    width, norm = _cluster_width(ac, cluster_scale)
    if norm == 0.0:
        zero = np.zeros_like(ac) if not was_real else np.zeros(a.shape)
        return JordanDecomposition(
            semisimple=zero.copy(),
            nilpotent=zero.copy(),
            transform=np.eye(n, dtype=complex),
            eigenvalues=(0.0 + 0.0j,),
            multiplicities=(n,),
            condition=1.0,
        )

    eigs = np.linalg.eigvals(ac)
    labels, means, counts, gap = cluster_scalars(eigs, width)
    if len(means) > 1 and gap < ambiguity_factor * width:
        raise EigenClusterAmbiguity(gap, ambiguity_factor * width)

    snap = cluster_scale * max(1.0, norm)
    snapped = []
    for m in means:
        re = 0.0 if abs(m.real) < snap else m.real
        im = 0.0 if abs(m.imag) < snap else m.imag
        snapped.append(complex(re, im))

    blocks = []
    for ci, mean in enumerate(snapped):
        def selector(x, idx=ci):
            dists = [abs(x - mm) for mm in snapped]
            return int(np.argmin(dists)) == idx

        q, sdim = invariant_subspace(ac, selector)
        if sdim != counts[ci]:
            raise EigenClusterAmbiguity(gap, ambiguity_factor * width)
        blocks.append(q)

    p = np.hstack(blocks)
    cond = float(np.linalg.cond(p))
    diag = np.concatenate(
        [np.full(counts[ci], snapped[ci], dtype=complex) for ci in range(len(snapped))]
    )
    s = p @ np.diag(diag) @ np.linalg.inv(p)
    if was_real and np.max(np.abs(s.imag)) <= 1e3 * _EPS * max(1.0, norm) * n:
        s = s.real
        nil = a.astype(float) - s
    else:
        nil = ac - s
    return JordanDecomposition(
        semisimple=s,
        nilpotent=nil,
        transform=p,
        eigenvalues=tuple(snapped),
        multiplicities=tuple(int(c) for c in counts),
        condition=cond,
    )


def is_nilpotent_matrix(a, tol=1e-9):
    """Check nilpotency by powering the norm-scaled matrix to the dimension."""
    a = _as_matrix(a).astype(complex)
    n = a.shape[0]
    norm = float(np.linalg.norm(a, 2))
    if norm <= tol:
        # Below the tolerance the matrix counts as zero; scaling pure
        # rounding residue up to unit norm would manufacture a fake
        # non-nilpotent direction.
        return True
    scaled = a / norm
    power = np.linalg.matrix_power(scaled, n)
    return float(np.max(np.abs(power))) < tol


def _span_basis(mats, tol):
    """Orthonormal basis of the linear span of a list of matrices."""
    if not mats:
        return []
    shape = mats[0].shape
    flat = np.stack([m.ravel() for m in mats], axis=1)
    q = orthonormal_columns(flat, tol)
    return [q[:, k].reshape(shape) for k in range(q.shape[1])]


def _snapped_eigenvector(m, tol):
    """One eigenvector of m, robust to defective eigenvalues.

    Eigenvalues of a defective block computed by QR iteration carry an
    error near sqrt(machine epsilon), but their cluster mean is accurate
    to roughly machine epsilon. Snapping to the mean and taking the
    least singular vector of the shifted matrix recovers the eigenvector
    at full precision. The smallest eigenvalue cluster in the (real,
    imaginary) lexicographic order is chosen for determinism.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape[0] == 1:
        return np.ones(1, dtype=complex)
    evals = np.linalg.eigvals(m)
    width, _ = _cluster_width(m, tol)
    _, means, _, _ = cluster_scalars(evals, width)
    lam = means[0]
    shifted = m - lam * np.eye(m.shape[0])
    _, _, vh = np.linalg.svd(shifted)
    return vh[-1].conj()


def _joint_eigen_residual(mats, v):
    worst = 0.0
    for m in mats:
        mv = m @ v
        worst = max(worst, float(np.linalg.norm(mv - np.vdot(v, mv) * v)))
    return worst


def _refine_joint_eigenvector(mats, v, iters=4):
    """Gauss-Newton polish of an approximate joint eigenvector.

    The recursive construction loses accuracy at every deflation level
    because eigenvalue errors are divided by local spectral gaps, and
    those losses compound multiplicatively down the flag. One or two
    Newton steps on the joint least squares problem restore the vector
    to the accuracy supported by the input, so each level starts clean.
    """
    if not mats:
        return v
    n = v.shape[0]
    k = len(mats)
    v = v / np.linalg.norm(v)
    best_v = v
    best_r = _joint_eigen_residual(mats, v)
    eye = np.eye(n, dtype=complex)
    for _ in range(iters):
        if best_r == 0.0:
            break
        lams = [np.vdot(v, m @ v) for m in mats]
        res = np.concatenate([m @ v - lam * v for m, lam in zip(mats, lams)])
        a = np.zeros((k * n + 1, n + k), dtype=complex)
        rhs = np.concatenate([-res, [0.0]])
        for i, (m, lam) in enumerate(zip(mats, lams)):
            a[i * n : (i + 1) * n, :n] = m - lam * eye
            a[i * n : (i + 1) * n, n + i] = -v
        a[-1, :n] = v.conj()
        sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
        cand = v + sol[:n]
        nrm = float(np.linalg.norm(cand))
        if nrm < 0.5:
            break
        cand = cand / nrm
        r = _joint_eigen_residual(mats, cand)
        if r < best_r:
            best_r, best_v = r, cand
            v = cand
        else:
            break
    return best_v


def _common_eigenvector(ops, dim, tol):
    """Common eigenvector for a family spanning a solvable matrix algebra.

    Recursive construction: find a codimension-one ideal containing the
    derived span, take its joint eigenspace through a recursively found
    eigenvector, then diagonalize the leftover direction on that space.
    """
    basis = _span_basis(ops, tol)
    d = len(basis)
    if d == 0 or dim == 1:
        v = np.zeros(dim, dtype=complex)
        v[0] = 1.0
        return v

    derived = [
        basis[i] @ basis[j] - basis[j] @ basis[i]
        for i in range(d)
        for j in range(i + 1, d)
    ]
    # Coordinates of the derived span inside the span of the family.
    flat_basis = np.stack([b.ravel() for b in basis], axis=1)
    if derived:
        coords = flat_basis.conj().T @ np.stack([m.ravel() for m in derived], axis=1)
        dspan = orthonormal_columns(coords, tol)
    else:
        dspan = np.zeros((d, 0), dtype=complex)
    comp = nullspace(dspan.conj().T, tol) if dspan.shape[1] else np.eye(d, dtype=complex)
    if comp.shape[1] == 0:
        # Derived span fills the family, which contradicts solvability.
        # Fall back to an eigenvector of the first operator.
        v = _snapped_eigenvector(basis[0], tol)
        return v / np.linalg.norm(v)

    # Any hyperplane containing the derived span is an ideal. Split off
    # the last complement direction and keep the rest inside the ideal.
    z_coord = comp[:, -1]
    ideal_coords = np.hstack([dspan, comp[:, :-1]])
    ideal = [
        sum(ideal_coords[i, k] * basis[i] for i in range(d))
        for k in range(ideal_coords.shape[1])
    ]
    z = sum(z_coord[i] * basis[i] for i in range(d))

    v = _common_eigenvector(ideal, dim, tol)

    # Joint eigenspace of the ideal through v.
    if ideal:
        rows = []
        for mat in ideal:
            lam = v.conj() @ mat @ v
            rows.append(mat - lam * np.eye(dim))
        stacked = np.vstack(rows)
        w = nullspace(stacked, tol)
    else:
        w = np.eye(dim, dtype=complex)
    if w.shape[1] == 0:
        w = v.reshape(-1, 1)

    m = w.conj().T @ z @ w
    u = _snapped_eigenvector(m, tol)
    out = w @ u
    out = out / np.linalg.norm(out)
    out = _refine_joint_eigenvector(basis, out)
    # Canonical phase: largest component made real positive.
    k = int(np.argmax(np.abs(out)))
    phase = out[k] / abs(out[k])
    return out * phase.conj()


def triangularize_family(mats, tol=1e-9):
    """Unitary q with q^H m q upper triangular for every family member.

    The family must span a solvable matrix Lie algebra. Returns the
    unitary together with the worst below-diagonal residual across the
    transformed family, leaving the caller to judge it.
    """
    mats = [_as_matrix(m).astype(complex) for m in mats]
    if not mats:
        return np.eye(0, dtype=complex), 0.0
    n = mats[0].shape[0]
    q_total = np.eye(n, dtype=complex)
    work = [m.copy() for m in mats]
    for k in range(n - 1):
        sub = n - k
        v = _common_eigenvector(work, sub, tol)
        # Householder-style unitary with first column v.
        e1 = np.zeros(sub, dtype=complex)
        e1[0] = 1.0
        u = v - e1 if np.linalg.norm(v - e1) > 0.5 else v + e1
        u = u / np.linalg.norm(u)
        h = np.eye(sub, dtype=complex) - 2.0 * np.outer(u, u.conj())
        # Fix the phase so that h @ e1 is exactly proportional to v.
        first = h[:, 0]
        phase = np.vdot(first, v)
        phase = phase / abs(phase) if abs(phase) > 0 else 1.0
        h = h * phase

        embed = np.eye(n, dtype=complex)
        embed[k:, k:] = h
        q_total = q_total @ embed
        work = [h.conj().T @ m @ h for m in work]
        work = [m[1:, 1:] for m in work]

    scale = max(1.0, max(float(np.linalg.norm(m, 2)) for m in mats))
    resid = 0.0
    for m in mats:
        t = q_total.conj().T @ m @ q_total
        resid = max(resid, float(np.max(np.abs(np.tril(t, -1)))))
    return q_total, resid / scale


def joint_eigenbasis(mats, cluster_scale=1e-7, tol=1e-8):
    """Simultaneous eigenbasis of a commuting semisimple family.

    Returns (basis, chars, residual) where basis columns are joint
    eigenvectors, chars[k] is the tuple of eigenvalues of column k under
    each family member, and residual measures how far the family is from
    acting diagonally in that basis.

    The family must be diagonalizable: eigenvalue noise is then near
    machine epsilon rather than a fractional power of it, so the
    clustering width is the plain tolerance scaled by the matrix norm.
    Using the defective-matrix width here would merge genuinely distinct
    eigenvalues that happen to be close.
    """
    mats = [_as_matrix(m).astype(complex) for m in mats]
    if not mats:
        raise ValueError("joint_eigenbasis needs at least one matrix")
    n = mats[0].shape[0]
    blocks = [np.eye(n, dtype=complex)]
    charlists = [[]]
    for m in mats:
        norm = float(np.linalg.norm(m, 2))
        width = cluster_scale * max(1.0, norm)
        new_blocks = []
        new_chars = []
        for b, chars in zip(blocks, charlists):
            mb = b.conj().T @ m @ b
            if norm == 0.0:
                new_blocks.append(b)
                new_chars.append(chars + [0.0 + 0.0j])
                continue
            evals = np.linalg.eigvals(mb)
            labels, means, counts, gap = cluster_scalars(evals, width)
            for ci, mean in enumerate(means):
                eig = nullspace(mb - mean * np.eye(mb.shape[0]), max(tol, width))
                if eig.shape[1] != counts[ci]:
                    raise EigenClusterAmbiguity(gap, width)
                new_blocks.append(b @ eig)
                new_chars.append(chars + [mean])
        blocks = new_blocks
        charlists = new_chars

    # Deterministic block order by character tuple.
    def key(chars):
        return tuple((round(c.real, 9), round(c.imag, 9)) for c in chars)

    order = sorted(range(len(blocks)), key=lambda k: key(charlists[k]))
    blocks = [canon_columns(blocks[k]) for k in order]
    charlists = [charlists[k] for k in order]

    cols = []
    chars = []
    for b, ch in zip(blocks, charlists):
        for j in range(b.shape[1]):
            cols.append(b[:, j])
            chars.append(tuple(ch))
    basis = np.stack(cols, axis=1)

    resid = 0.0
    for mi, m in enumerate(mats):
        lam = np.array([c[mi] for c in chars])
        err = m @ basis - basis * lam[np.newaxis, :]
        resid = max(resid, float(np.max(np.abs(err))) / max(1.0, float(np.linalg.norm(m, 2))))
    return basis, chars, resid


def block_transform(blocks):
    """Stack block bases into one transform and report its conditioning."""
    p = np.hstack(blocks)
    return p, float(np.linalg.cond(p))
