"""Truncated enveloping module of the nilpotent shadow.

The module is spanned by normally ordered monomials in a generator basis
chosen as joint eigenvectors of the torus, adapted to the lower central
series. Left multiplication by a generator strictly raises the total
series weight of a monomial, so ordering monomials by descending weight
makes every action matrix strictly upper triangular, while the torus
acts diagonally with the monomial's accumulated character.

Truncation drops monomials beyond a cap. Two regimes are used. For
shadows of nilpotency class at most two, plain total degree is capped at
the class; left multiplication is then an exact Lie homomorphism because
every discarded commutator correction already vanishes. From class three
on, plain-degree truncation stops being a homomorphism, so the cap
switches to the series-weighted degree: the span of monomials above any
weight cap is a two sided ideal, and the quotient action is exact for
every class.
"""

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from . import linalg
from .errors import SolvHullError, TruncationOverflow
from .tolerances import DEFAULT

_CHAR_MATCH = 1e-6
_CHAR_SNAP = 1e-9


class _CharRegistry:
    """Canonical store of character tuples matched up to a small radius.

    Restricting the torus to different invariant subspaces recomputes the
    same eigenvalues with independent rounding noise; the registry makes
    those recomputations land on identical canonical tuples.
    """

    def __init__(self):
        self.chars = []

    def canon(self, char):
        char = tuple(complex(z) for z in char)
        snapped = []
        for z in char:
            re = 0.0 if abs(z.real) < _CHAR_SNAP else z.real
            im = 0.0 if abs(z.imag) < _CHAR_SNAP else z.imag
            snapped.append(complex(re, im))
        snapped = tuple(snapped)
        for known in self.chars:
            if all(abs(a - b) <= _CHAR_MATCH for a, b in zip(known, snapped)):
                return known
        self.chars.append(snapped)
        return snapped


def _char_key(char):
    return tuple((z.real, z.imag) for z in char)


def _grouped_eigencolumns(mats, basis, tolerances):
    """Joint eigenvectors of the torus restricted to span(basis).

    Returns a dict mapping character tuples to orthonormal column bases
    expressed in ambient coordinates, plus the worst invariance residual.
    """
    d = basis.shape[1]
    if d == 0:
        return {}, 0.0
    resid = 0.0
    restricted = []
    for m in mats:
        mb = basis.conj().T @ m @ basis
        err = m @ basis - basis @ mb
        scale = max(1.0, float(np.linalg.norm(m, 2)))
        resid = max(resid, float(np.max(np.abs(err))) / scale)
        restricted.append(mb)
    if not restricted:
        return {(): basis}, resid
    vecs, chars, diag_resid = linalg.joint_eigenbasis(
        restricted, tolerances.cluster_scale, tolerances.num
    )
    resid = max(resid, diag_resid)
    groups = {}
    for j, ch in enumerate(chars):
        groups.setdefault(ch, []).append(basis @ vecs[:, j])
    out = {}
    for ch, cols in groups.items():
        out[ch] = linalg.canon_columns(np.stack(cols, axis=1), tolerances.alg)
    return out, resid


def _complement_within(big, small, tol):
    """Orthonormal basis of the orthogonal complement of small inside big."""
    if big.shape[1] == 0:
        return big
    if small is None or small.shape[1] == 0:
        return big
    overlap = small.conj().T @ big
    ker = linalg.nullspace(overlap, tol)
    if ker.shape[1] == 0:
        return big[:, :0]
    return linalg.canon_columns(big @ ker, tol)


@dataclass(frozen=True)
class EnvelopingTruncation:
    """Truncated enveloping module with the generator action matrices.

    words are normally ordered letter tuples sorted by descending weight.
    letter_matrices[a] is left multiplication by generator a on the
    module. word_chars[w, b] is the accumulated character of word w under
    torus element b, which is exactly how the torus acts diagonally.
    """

    split: object
    generators: np.ndarray = field(repr=False)
    generator_inverse: np.ndarray = field(repr=False)
    gen_weights: tuple
    gen_chars: tuple
    gamma: np.ndarray = field(repr=False)
    mode: str
    cap: int
    words: tuple
    word_weights: np.ndarray = field(repr=False)
    word_chars: np.ndarray = field(repr=False)
    letter_matrices: np.ndarray = field(repr=False)
    residuals: dict

    @property
    def r(self):
        return len(self.words)

    def letter_action(self, coords):
        """Matrix of left multiplication by sum_a coords[a] * generator a."""
        return np.einsum("a,aij->ij", np.asarray(coords, dtype=complex), self.letter_matrices)

    def shadow_action(self, x):
        """Left multiplication by an algebra element in shadow coordinates."""
        return self.letter_action(self.generator_inverse @ np.asarray(x, dtype=complex))

    def torus_diagonal(self, torus_coeffs):
        """Diagonal of the derivation action for given torus coordinates."""
        return self.word_chars @ np.asarray(torus_coeffs, dtype=complex)


def _build_generators(split, tolerances):
    """LCS adapted joint eigenbasis of the torus on shadow coordinates."""
    shadow = split.shadow
    n = shadow.dim
    series = list(split.shadow_series)
    cls = split.shadow_class
    mats = [split.torus[b].astype(complex) for b in range(split.torus.shape[0])]
    registry = _CharRegistry()

    level_groups = []
    worst = 0.0
    for k in range(1, cls + 2):
        basis = series[k - 1] if k - 1 < len(series) else series[-1]
        groups, resid = _grouped_eigencolumns(mats, basis.astype(complex), tolerances)
        worst = max(worst, resid)
        level_groups.append({registry.canon(ch): q for ch, q in groups.items()})

    letters = []
    for k in range(cls, 0, -1):
        here = level_groups[k - 1]
        deeper = level_groups[k] if k < len(level_groups) else {}
        for ch in sorted(here.keys(), key=_char_key):
            comp = _complement_within(here[ch], deeper.get(ch), tolerances.alg)
            for j in range(comp.shape[1]):
                letters.append((comp[:, j], k, ch))

    if len(letters) != n:
        raise SolvHullError(
            f"generator extraction produced {len(letters)} letters for dimension {n}"
        )
    gmat = np.stack([vec for vec, _, _ in letters], axis=1)
    cond = float(np.linalg.cond(gmat))
    ginv = np.linalg.inv(gmat)
    weights = tuple(w for _, w, _ in letters)
    chars = tuple(ch for _, _, ch in letters)
    return gmat, ginv, weights, chars, worst, cond


def _generator_table(split, gmat, ginv, weights, chars, tolerances):
    """Shadow bracket in the generator basis, with forbidden entries zeroed.

    A bracket of weight-j and weight-k generators lies in series step
    j + k and carries the summed character; components violating either
    rule are rounding noise and are removed after being measured.
    """
    shadow = split.shadow
    n = shadow.dim
    gamma = np.zeros((n, n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            gamma[a, b, :] = ginv @ shadow.bracket(gmat[:, a], gmat[:, b])
    gamma = (gamma - np.swapaxes(gamma, 0, 1)) / 2.0

    scale = max(1.0, float(np.max(np.abs(gamma))))
    forbidden = 0.0
    for a in range(n):
        for b in range(n):
            target_char = tuple(
                za + zb for za, zb in zip(chars[a], chars[b])
            )
            for m in range(n):
                bad_weight = weights[m] < weights[a] + weights[b]
                bad_char = any(
                    abs(zm - zt) > _CHAR_MATCH
                    for zm, zt in zip(chars[m], target_char)
                )
                if bad_weight or bad_char:
                    forbidden = max(forbidden, abs(gamma[a, b, m]))
                    gamma[a, b, m] = 0.0
    if forbidden > tolerances.num * scale:
        raise SolvHullError(
            f"generator bracket has weight or character violation of size {forbidden:.3e}"
        )
    return gamma, forbidden


def _enumerate_words(n, weights, mode, cap, max_dim):
    words = []
    max_len = cap
    for length in range(0, max_len + 1):
        for combo in combinations_with_replacement(range(n), length):
            w = sum(weights[a] for a in combo)
            if mode == "weighted" and w > cap:
                continue
            words.append(combo)
            if len(words) > max_dim:
                raise TruncationOverflow(len(words), max_dim)
    return words


def _order_words(words, weights, chars):
    def word_weight(word):
        return sum(weights[a] for a in word)

    def word_char_key(word):
        t = len(chars[0]) if chars else 0
        acc = [0.0 + 0.0j] * t
        for a in word:
            for b in range(t):
                acc[b] += chars[a][b]
        return tuple((round(z.real, 9), round(z.imag, 9)) for z in acc)

    return sorted(
        words,
        key=lambda w: (-word_weight(w), -len(w), word_char_key(w), w),
    )


def build_enveloping_rep(split, tolerances=DEFAULT, max_dim=512, cap=None, mode=None):
    """Build the truncated enveloping module and its action matrices."""
    shadow = split.shadow
    n = shadow.dim
    cls = max(1, split.shadow_class)
    if mode is None:
        mode = "plain" if cls <= 2 else "weighted"
    if mode not in ("plain", "weighted"):
        raise ValueError(f"unknown truncation mode {mode!r}")
    if cap is None:
        cap = cls

    gmat, ginv, weights, chars, gen_resid, cond = _build_generators(split, tolerances)
    gamma, forbidden = _generator_table(split, gmat, ginv, weights, chars, tolerances)

    words = _order_words(_enumerate_words(n, weights, mode, cap, max_dim), weights, chars)
    index = {w: i for i, w in enumerate(words)}
    r = len(words)

    def keep(word):
        if mode == "plain":
            return len(word) <= cap
        return sum(weights[a] for a in word) <= cap

    cache = {}

    def normal_product(a, word):
        key = (a, word)
        hit = cache.get(key)
        if hit is not None:
            return hit
        out = {}
        if not word or a <= word[0]:
            new = (a,) + word
            if keep(new):
                out[new] = out.get(new, 0.0) + 1.0
        else:
            b, rest = word[0], word[1:]
            for w2, c2 in normal_product(a, rest).items():
                for w3, c3 in normal_product(b, w2).items():
                    out[w3] = out.get(w3, 0.0) + c2 * c3
            for m in range(n):
                coeff = gamma[a, b, m]
                if coeff == 0.0:
                    continue
                for w2, c2 in normal_product(m, rest).items():
                    out[w2] = out.get(w2, 0.0) + coeff * c2
        out = {w: c for w, c in out.items() if c != 0.0}
        cache[key] = out
        return out

    letter_matrices = np.zeros((n, r, r), dtype=complex)
    for a in range(n):
        for col, word in enumerate(words):
            for w2, c2 in normal_product(a, word).items():
                letter_matrices[a, index[w2], col] = c2

    # Strict upper triangularity in the chosen order.
    tri = 0.0
    for a in range(n):
        tri = max(tri, float(np.max(np.abs(np.tril(letter_matrices[a])))))
    if tri > 0.0:
        raise SolvHullError(
            f"monomial order failed to make the action strictly triangular ({tri:.3e})"
        )

    t_dim = split.torus.shape[0]
    word_chars = np.zeros((r, t_dim), dtype=complex)
    for i, word in enumerate(words):
        for b in range(t_dim):
            word_chars[i, b] = sum(chars[a][b] for a in word)
    word_weights = np.array([sum(weights[a] for a in w) for w in words], dtype=int)

    # Left multiplication must be a Lie homomorphism on the quotient.
    hom = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            lhs = letter_matrices[a] @ letter_matrices[b] - letter_matrices[b] @ letter_matrices[a]
            rhs = np.einsum("m,mij->ij", gamma[a, b, :], letter_matrices)
            hom = max(hom, float(np.max(np.abs(lhs - rhs))))

    # The torus acts diagonally and satisfies the Leibniz rule with each
    # generator, shifting it by the generator's character.
    leib = 0.0
    for b in range(t_dim):
        diag = word_chars[:, b]
        for a in range(n):
            lhs = diag[:, None] * letter_matrices[a] - letter_matrices[a] * diag[None, :]
            leib = max(leib, float(np.max(np.abs(lhs - chars[a][b] * letter_matrices[a]))))

    scale = max(1.0, float(np.max(np.abs(letter_matrices))) if r else 1.0)
    residuals = {
        "generator_invariance": gen_resid,
        "generator_condition": cond,
        "forbidden_bracket_components": forbidden,
        "action_homomorphism": hom / scale,
        "torus_leibniz": leib / scale,
    }
    budget = {k: v for k, v in residuals.items() if k != "generator_condition"}
    if max(budget.values()) > 1e3 * tolerances.num:
        raise SolvHullError(
            f"enveloping action residuals exceed budget: {budget}"
        )

    return EnvelopingTruncation(
        split=split,
        generators=gmat,
        generator_inverse=ginv,
        gen_weights=weights,
        gen_chars=chars,
        gamma=gamma,
        mode=mode,
        cap=cap,
        words=tuple(words),
        word_weights=word_weights,
        word_chars=word_chars,
        letter_matrices=letter_matrices,
        residuals=residuals,
    )
