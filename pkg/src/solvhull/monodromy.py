"""Monodromy of lattice elements and its integral decompositions.

Transport along any path from the identity to a lattice point is path
independent because the connection is flat, so it defines a matrix
valued function of the group element alone. Every matrix entry of that
function decomposes as a finite sum of exponential iterated integrals
over strictly increasing index chains, which is how closedness of those
integrals is certified here: the chain sums are recomputed over several
paths with the same endpoint and compared.
"""

from dataclasses import dataclass

import numpy as np

from .integrals import IntegralWord, exp_iterated_integral, transport
from .paths import PathWord


def monodromy(form, model, target, check=True):
    """Transport along the canonical path to a group element."""
    return transport(form, model.loop_of(target, check=check))


def word_monodromy(form, lattice, word):
    """Transport along the concatenated canonical path of a lattice word."""
    path = lattice.path_of(word)
    if len(path) == 0:
        return np.eye(form.r, dtype=complex)
    return transport(form, path)


@dataclass(frozen=True)
class MonodromyRep:
    """Monodromy matrices of the lattice generators."""

    form: object
    lattice: object
    matrices: tuple

    def generator_matrix(self, name):
        for key, m in zip(self.lattice.names, self.matrices):
            if key == name:
                return m
        raise KeyError(f"unknown generator {name!r}")

    def of_word(self, word):
        """Product of generator monodromies, using flatness for powers."""
        out = np.eye(self.form.r, dtype=complex)
        for name, exp in word:
            m = self.generator_matrix(name)
            step = m if exp >= 0 else np.linalg.inv(m)
            for _ in range(abs(int(exp))):
                out = out @ step
        return out


def build_monodromy_rep(form, lattice):
    mats = tuple(
        monodromy(form, lattice.model, g) for _, g in lattice.generators
    )
    return MonodromyRep(form=form, lattice=lattice, matrices=mats)


def path_variants(model, target, seed=0, trials=4):
    """Distinct paths from the identity to the same group element.

    Includes the canonical loop, segment subdivisions of it, and detour
    paths that first run along a random direction and then take the
    canonical path of the remaining factor.
    """
    rng = np.random.default_rng(seed)
    base = model.loop_of(target)
    variants = [base]
    for k in (2, 3):
        variants.append(base.subdivide(k))
    for _ in range(trials):
        t_dir = rng.standard_normal(model.k)
        fiber = rng.standard_normal(model.m)
        if any(np.iscomplexobj(m) and np.max(np.abs(m.imag)) > 0 for m in model.mats):
            fiber = fiber + 1j * rng.standard_normal(model.m)
        y = model.direction_of(t_dir, fiber)
        y = y / max(1.0, float(np.linalg.norm(y)))
        s = float(rng.uniform(0.2, 0.9))
        head = model.exp(y, s)
        rest = model.multiply(model.inverse(head), target)
        detour = PathWord([(y, s)]).concat(model.loop_of(rest, check=False))
        variants.append(detour)
    return variants


def path_independence_residual(form, model, target, seed=0, trials=4):
    """Largest transport deviation across endpoint equal paths."""
    variants = path_variants(model, target, seed=seed, trials=trials)
    base = transport(form, variants[0])
    scale = max(1.0, float(np.max(np.abs(base))))
    worst = 0.0
    for path in variants[1:]:
        diff = transport(form, path) - base
        worst = max(worst, float(np.max(np.abs(diff))) / scale)
    return worst


def _chain_steps(form, tol=0.0):
    """Adjacency of the strictly upper entries that can ever be nonzero."""
    r = form.r
    steps = [[] for _ in range(r)]
    for p in range(r):
        for q in range(p + 1, r):
            if float(np.max(np.abs(form.psi_tensor[:, p, q]))) > tol:
                steps[p].append(q)
    return steps


def entry_chains(form, p, q):
    """Strictly increasing index chains from p to q with live steps."""
    steps = _chain_steps(form)
    chains = []

    def rec(node, acc):
        if node == q:
            chains.append(tuple(acc))
            return
        for nxt in steps[node]:
            if nxt <= q:
                rec(nxt, acc + [nxt])

    rec(p, [p])
    return chains


def entry_chain_value(form, path, p, q):
    """Entry (p, q) of the transport as a sum of exponential integrals.

    Solving the triangular transport equation by variation of parameters
    expands each entry over strictly increasing chains; every chain
    contributes one exponential iterated integral whose exponents are
    the diagonal characters along the chain and whose factors are the
    off diagonal entry functionals of the steps.
    """
    if p > q:
        return 0.0 + 0.0j
    total = 0.0 + 0.0j
    for chain in entry_chains(form, p, q):
        exponents = [form.omega[node, :] for node in chain]
        factors = [
            form.entry_functional(chain[i], chain[i + 1])
            for i in range(len(chain) - 1)
        ]
        word = IntegralWord(tuple(exponents), tuple(factors))
        total += exp_iterated_integral(word, path)
    return total


def closedness_residual(form, model, target, seed=0, entries=None, trials=3):
    """Certify that monodromy entries are closed exponential integrals.

    Every selected entry is evaluated through its chain decomposition on
    several endpoint equal paths and compared against the transport.
    Returns the worst spread across paths and the worst disagreement
    with the transport entries.
    """
    variants = path_variants(model, target, seed=seed, trials=trials)
    base = transport(form, variants[0])
    scale = max(1.0, float(np.max(np.abs(base))))
    r = form.r
    if entries is None:
        entries = [(p, q) for p in range(r) for q in range(p, r)]
    spread = 0.0
    mismatch = 0.0
    for p, q in entries:
        values = [entry_chain_value(form, path, p, q) for path in variants]
        for v in values:
            mismatch = max(mismatch, abs(v - base[p, q]) / scale)
        for v in values[1:]:
            spread = max(spread, abs(v - values[0]) / scale)
    return spread, mismatch


def separation_demo(form, lattice, tolerances=None):
    """Contrast ordinary and exponential iterated integrals on a commutator.

    The commutator of a translation generator with a fiber generator has
    zero displacement, so every ordinary depth one iterated integral of a
    constant form vanishes on its path. Its monodromy is still far from
    the identity. The commutator of two fiber generators is the negative
    control: genuinely trivial, with identity monodromy.
    """
    model = lattice.model
    trans_name = None
    fiber_names = []
    for name, g in lattice.generators:
        if float(np.linalg.norm(g.t)) > 0:
            if trans_name is None:
                trans_name = name
        else:
            fiber_names.append(name)
    if trans_name is None or not fiber_names:
        raise ValueError("separation demo needs one translation and one fiber generator")
    fiber_name = None
    for name in fiber_names:
        g = lattice.generator(name)
        conj = model.multiply(
            model.multiply(lattice.generator(trans_name), g),
            model.inverse(lattice.generator(trans_name)),
        )
        if model.distance(conj, g) > 1e-6:
            fiber_name = name
            break
    if fiber_name is None:
        fiber_name = fiber_names[0]

    word = (
        (trans_name, 1),
        (fiber_name, 1),
        (trans_name, -1),
        (fiber_name, -1),
    )
    path = lattice.path_of(word)
    rho = word_monodromy(form, lattice, word)
    eye = np.eye(form.r, dtype=complex)
    displacement = float(np.linalg.norm(path.displacement()))
    sep = float(np.max(np.abs(rho - eye)))

    control = None
    if len(fiber_names) >= 2:
        other = [n for n in fiber_names if n != fiber_name][0]
        control_word = ((fiber_name, 1), (other, 1), (fiber_name, -1), (other, -1))
        control_rho = word_monodromy(form, lattice, control_word)
        control = float(np.max(np.abs(control_rho - eye)))

    return {
        "word": " ".join(f"{n}^{e}" if e != 1 else n for n, e in word),
        "displacement_norm": displacement,
        "monodromy_distance_from_identity": sep,
        "fiber_commutator_distance": control,
    }
