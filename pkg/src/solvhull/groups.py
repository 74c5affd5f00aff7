"""Semidirect product groups, their exponentials, and lattice words.

The model is a translation group acting on a complex fiber through
commuting matrices: (t1, v1)(t2, v2) = (t1 + t2, v1 + phi(t1) v2) with
phi(t) the exponential of the t-weighted sum of the action matrices.
Algebra coordinates list the translation directions first and the fiber
directions after them, matching the structure tables of the builtins.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EndpointMismatch, ValidationError
from .matfuncs import expm, phi1_apply
from .paths import PathWord
from .tolerances import DEFAULT


@dataclass(frozen=True)
class GroupElement:
    """Point of the semidirect product: translation part and fiber part."""

    translation: tuple
    fiber: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "translation", tuple(float(x) for x in self.translation)
        )
        object.__setattr__(self, "fiber", tuple(complex(z) for z in self.fiber))

    @property
    def t(self):
        return np.array(self.translation, dtype=float)

    @property
    def v(self):
        return np.array(self.fiber, dtype=complex)


class SemidirectModel:
    """Concrete group model behind an algebra's structure table."""

    def __init__(self, fiber_mats, tolerances=DEFAULT):
        mats = [np.asarray(m, dtype=complex) for m in fiber_mats]
        if not mats:
            raise ValidationError("at least one translation direction is required")
        m_dim = mats[0].shape[0]
        for m in mats:
            if m.shape != (m_dim, m_dim):
                raise ValidationError("fiber matrices must share one square shape")
        worst = 0.0
        for a in range(len(mats)):
            for b in range(a + 1, len(mats)):
                worst = max(
                    worst, float(np.max(np.abs(mats[a] @ mats[b] - mats[b] @ mats[a])))
                )
        if worst > tolerances.alg:
            raise ValidationError(
                f"fiber matrices must commute, commutator size {worst:.3e}"
            )
        self.mats = mats
        self.k = len(mats)
        self.m = m_dim
        self.tolerances = tolerances

    @property
    def dim(self):
        return self.k + self.m

    def identity(self):
        return GroupElement((0.0,) * self.k, (0.0,) * self.m)

    def action_generator(self, t):
        """Fiber derivative of the action along a translation direction."""
        t = np.asarray(t, dtype=float)
        out = np.zeros((self.m, self.m), dtype=complex)
        for a in range(self.k):
            out += t[a] * self.mats[a]
        return out

    def phi(self, t):
        """Holonomy of the translation part on the fiber."""
        return expm(self.action_generator(t))

    def multiply(self, g, h):
        return GroupElement(
            tuple(g.t + h.t), tuple(g.v + self.phi(g.t) @ h.v)
        )

    def inverse(self, g):
        return GroupElement(tuple(-g.t), tuple(-(self.phi(-g.t) @ g.v)))

    def power(self, g, n):
        n = int(n)
        base = g if n >= 0 else self.inverse(g)
        out = self.identity()
        for _ in range(abs(n)):
            out = self.multiply(out, base)
        return out

    def distance(self, g, h):
        return float(np.linalg.norm(g.t - h.t) + np.linalg.norm(g.v - h.v))

    def split_direction(self, x):
        """Translation and fiber components of an algebra coordinate vector."""
        x = np.asarray(x, dtype=complex).ravel()
        if x.size != self.dim:
            raise ValidationError(
                f"direction has {x.size} coordinates, model expects {self.dim}"
            )
        t = x[: self.k]
        imag = float(np.max(np.abs(t.imag))) if self.k else 0.0
        if imag > self.tolerances.exact:
            raise ValidationError("translation components must be real")
        return t.real, x[self.k :]

    def exp(self, x, duration=1.0):
        """Endpoint of the exponential arc of x run for the given time."""
        t, z = self.split_direction(x)
        s = float(duration)
        gen = self.action_generator(t)
        fiber = phi1_apply(s * gen, s * z)
        return GroupElement(tuple(s * t), tuple(fiber))

    def endpoint(self, path):
        """Fold a path word into its group endpoint from the identity."""
        out = self.identity()
        for seg in path:
            out = self.multiply(out, self.exp(seg.vector, seg.duration))
        return out

    def direction_of(self, t_part, fiber_part):
        """Algebra coordinates from translation and fiber components."""
        vec = np.zeros(self.dim, dtype=complex)
        vec[: self.k] = np.asarray(t_part, dtype=float)
        vec[self.k :] = np.asarray(fiber_part, dtype=complex)
        return vec

    def loop_of(self, g, check=True):
        """Canonical two segment word from the identity to g.

        First the pure translation arc, then the fiber arc conjugated
        back to time zero. The endpoint is verified against g.
        """
        segments = []
        tnorm = float(np.linalg.norm(g.t))
        if tnorm > 0.0:
            segments.append((self.direction_of(g.t, np.zeros(self.m)), 1.0))
        w = self.phi(-g.t) @ g.v
        if float(np.linalg.norm(w)) > 0.0:
            segments.append((self.direction_of(np.zeros(self.k), w), 1.0))
        path = PathWord(segments)
        if check:
            reached = self.endpoint(path)
            dev = self.distance(reached, g)
            if dev > self.tolerances.num * max(1.0, self.distance(g, self.identity())):
                raise EndpointMismatch(dev, self.tolerances.num)
        return path

    def induced_structure(self):
        """Structure table of the algebra this model exponentiates.

        Translations commute with each other, the fiber is abelian, and
        a translation direction brackets a fiber direction through its
        action matrix.
        """
        n = self.dim
        real = all(float(np.max(np.abs(m.imag))) == 0.0 for m in self.mats)
        c = np.zeros((n, n, n), dtype=float if real else complex)
        for a in range(self.k):
            mat = self.mats[a].real if real else self.mats[a]
            for j in range(self.m):
                for i in range(self.m):
                    c[a, self.k + j, self.k + i] = mat[i, j]
                    c[self.k + j, a, self.k + i] = -mat[i, j]
        return c


@dataclass(frozen=True)
class Lattice:
    """Named lattice generators in a semidirect model, plus word helpers."""

    model: SemidirectModel
    generators: tuple  # pairs (name, GroupElement)
    relations: tuple = ()

    def generator(self, name):
        for key, g in self.generators:
            if key == name:
                return g
        raise KeyError(f"unknown generator {name!r}")

    @property
    def names(self):
        return tuple(k for k, _ in self.generators)

    def element_of(self, word):
        out = self.model.identity()
        for name, exp in word:
            out = self.model.multiply(out, self.model.power(self.generator(name), exp))
        return out

    def path_of(self, word, check=True):
        """Concatenated canonical loops for a lattice word.

        Each letter contributes the loop of its generator (or inverse),
        repeated for the exponent; the whole path runs from the identity
        to the word's group element.
        """
        segments = []
        for name, exp in word:
            g = self.generator(name)
            step = g if exp >= 0 else self.model.inverse(g)
            for _ in range(abs(int(exp))):
                segments.extend(self.model.loop_of(step, check=False).segments)
        path = PathWord(segments)
        if check and segments:
            reached = self.model.endpoint(path)
            target = self.element_of(word)
            dev = self.model.distance(reached, target)
            scale = max(1.0, self.model.distance(target, self.model.identity()))
            if dev > self.model.tolerances.num * scale * max(1, len(segments)):
                raise EndpointMismatch(dev, self.model.tolerances.num)
        return path


def parse_word(text):
    """Parse a lattice word like "a b1^-1 a^2" into (name, exponent) pairs.

    Letters are whitespace separated; an optional caret suffix carries an
    integer exponent.
    """
    word = []
    for token in str(text).split():
        if "^" in token:
            name, _, expo = token.partition("^")
            try:
                exp = int(expo)
            except ValueError as err:
                raise ValidationError(f"bad exponent in token {token!r}") from err
        else:
            name, exp = token, 1
        if not name:
            raise ValidationError(f"bad token {token!r}")
        word.append((name, exp))
    return tuple(word)
