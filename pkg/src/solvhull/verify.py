"""End to end construction and invariant verification.

build_stages runs the full pipeline on a validated problem and returns
every intermediate object. run_verification re-derives the key
invariants with deterministic seeded sampling and renders them into a
plain dict of numbers and booleans, suitable for canonical JSON output:
two runs with the same inputs produce byte identical reports.
"""

import numpy as np

from . import linalg
from .algebra import derived_series, nilradical, semisimple_adjoint, _jacobi_residual
from .connection import build_connection_form
from .envelope import build_enveloping_rep
from .integrals import (
    IntegralWord,
    exp_iterated_integral,
    exp_iterated_integral_series,
    iterated_integral,
    iterated_integral_quadrature,
    shuffle_identity_residual,
    transport,
    transport_series,
)
from .monodromy import (
    build_monodromy_rep,
    closedness_residual,
    path_independence_residual,
    separation_demo,
    word_monodromy,
)
from .paths import PathWord
from .splitting import build_splitting
from .groups import parse_word


def build_stages(problem):
    """Run the pipeline and return all intermediate objects as a dict."""
    alg = problem.algebra
    tol = problem.tolerances
    nil = nilradical(alg, tol)
    ads = semisimple_adjoint(alg, nil, tol)
    split = build_splitting(alg, semisimple=ads, nilrad=nil, tolerances=tol)
    env = build_enveloping_rep(split, tol)
    form = build_connection_form(env, tol)
    return {
        "algebra": alg,
        "nilradical": nil,
        "semisimple": ads,
        "splitting": split,
        "envelope": env,
        "form": form,
    }


def _word_label(env, word):
    if not word:
        return "1"
    names = [f"g{a}" for a in word]
    return "*".join(names)


def _random_path(rng, dim, segments, is_complex, growth_cap, form):
    dirs = []
    durs = []
    for _ in range(segments):
        v = rng.standard_normal(dim)
        if is_complex:
            v = v + 1j * rng.standard_normal(dim)
        v = v / max(1.0, float(np.linalg.norm(v)))
        dirs.append(v)
        durs.append(float(rng.uniform(0.2, 0.8)))
    growth = sum(
        float(np.linalg.norm(form.psi(v), "fro")) * t for v, t in zip(dirs, durs)
    )
    if growth > growth_cap:
        scale = growth_cap / growth
        durs = [t * scale for t in durs]
    return PathWord(list(zip(dirs, durs)))


def _integral_section(problem, form, seed, depth):
    alg = problem.algebra
    n = alg.dim
    rng = np.random.default_rng(seed)
    coords = [np.eye(n)[i] for i in range(n)]

    shuffle_worst = 0.0
    for _ in range(5):
        path = _random_path(rng, n, 3, alg.is_complex, 3.0, form)
        wa = tuple(int(rng.integers(0, n)) for _ in range(2))
        wb = tuple(int(rng.integers(0, n)) for _ in range(int(rng.integers(1, 3))))
        lhs_scale = max(
            1.0,
            abs(iterated_integral([coords[i] for i in wa], path)),
        )
        shuffle_worst = max(
            shuffle_worst,
            shuffle_identity_residual(coords, wa, wb, path) / lhs_scale,
        )

    path = _random_path(rng, n, 4, alg.is_complex, 3.0, form)
    full = transport(form, path)
    series = transport_series(form, path, depth)
    transport_diff = float(np.max(np.abs(full - series.value)))

    # Exponential integral: diagonal characters of the two extreme
    # monomials with the connecting entry functional, when one exists.
    r = form.r
    word = None
    for p in range(r):
        for q in range(p + 1, r):
            if float(np.max(np.abs(form.psi_tensor[:, p, q]))) > 0:
                word = IntegralWord(
                    (form.omega[p, :], form.omega[q, :]),
                    (form.entry_functional(p, q),),
                )
                break
        if word is not None:
            break
    if word is None:
        word = IntegralWord((form.omega[0, :],), ())
    closed = exp_iterated_integral(word, path)
    ser = exp_iterated_integral_series(word, path, depth)
    exp_diff = abs(closed - ser.value)

    quad_word = [coords[0], coords[min(1, n - 1)]]
    exact = iterated_integral(quad_word, path)
    quad = iterated_integral_quadrature(quad_word, path, points=4000)
    quad_diff = abs(exact - quad)
    quad_tol = 100.0 / 4000.0 * max(1.0, abs(exact))

    ok = (
        shuffle_worst <= 1e-10
        and transport_diff <= series.tail_bound
        and exp_diff <= ser.tail_bound
        and quad_diff <= quad_tol
    )
    return {
        "shuffle_residual": shuffle_worst,
        "transport_series_diff": transport_diff,
        "transport_series_tail": series.tail_bound,
        "exp_integral_diff": exp_diff,
        "exp_integral_tail": ser.tail_bound,
        "quadrature_diff": quad_diff,
        "quadrature_tolerance": quad_tol,
        "series_depth": depth,
        "ok": ok,
    }


def _monodromy_section(problem, form, seed):
    lattice = problem.lattice
    model = problem.model
    tol = problem.tolerances
    rep = build_monodromy_rep(form, lattice)

    triangular = 0.0
    for m in rep.matrices:
        triangular = max(triangular, float(np.max(np.abs(np.tril(m, -1)))))

    relation_worst = 0.0
    for lhs, rhs in lattice.relations:
        wl = parse_word(lhs)
        wr = parse_word(rhs)
        ml = word_monodromy(form, lattice, wl)
        mr = word_monodromy(form, lattice, wr)
        scale = max(1.0, float(np.max(np.abs(ml))))
        relation_worst = max(relation_worst, float(np.max(np.abs(ml - mr))) / scale)

    # Generator products against the dedicated word transport.
    hom_worst = 0.0
    names = lattice.names
    test_words = [((names[0], 1), (names[-1], 1))]
    if len(names) >= 2:
        test_words.append(((names[0], 1), (names[1], -1), (names[0], -1)))
    for word in test_words:
        direct = word_monodromy(form, lattice, word)
        composed = rep.of_word(word)
        scale = max(1.0, float(np.max(np.abs(direct))))
        hom_worst = max(hom_worst, float(np.max(np.abs(direct - composed))) / scale)

    pi_worst = 0.0
    for name in names[: min(2, len(names))]:
        pi_worst = max(
            pi_worst,
            path_independence_residual(form, model, lattice.generator(name), seed=seed),
        )
    target = lattice.element_of(test_words[0])
    pi_worst = max(pi_worst, path_independence_residual(form, model, target, seed=seed))

    r = form.r
    entries = [(0, q) for q in range(r)] + [(p, p) for p in range(1, r)]
    entries += [(p, r - 1) for p in range(1, r - 1)]
    spread, mismatch = closedness_residual(
        form, model, target, seed=seed, entries=entries
    )

    demo = separation_demo(form, lattice)

    limit = 100 * tol.num
    ok = (
        triangular <= limit
        and relation_worst <= limit
        and hom_worst <= limit
        and pi_worst <= limit
        and spread <= limit
        and mismatch <= limit
        and demo["displacement_norm"] <= limit
    )
    section = {
        "triangular_residual": triangular,
        "relation_residual": relation_worst,
        "generator_product_residual": hom_worst,
        "path_independence_residual": pi_worst,
        "closedness_spread": spread,
        "closedness_transport_mismatch": mismatch,
        "separation": demo,
        "ok": ok,
    }
    if form.r <= 16:
        section["generator_matrices"] = {
            name: rep.generator_matrix(name) for name in names
        }
    return section


def run_verification(problem, seed=0, depth=20):
    """Full invariant suite; returns (report dict, overall ok)."""
    tol = problem.tolerances
    alg = problem.algebra
    stages = build_stages(problem)
    nil = stages["nilradical"]
    ads = stages["semisimple"]
    split = stages["splitting"]
    env = stages["envelope"]
    form = stages["form"]
    limit = 100 * tol.num

    jac = float(np.max(np.abs(_jacobi_residual(alg.structure))))
    validation = {
        "dim": alg.dim,
        "basis_names": list(alg.names),
        "derived_length": len(derived_series(alg, tol)) - 1,
        "jacobi_residual": jac,
        "ok": True,
    }

    rng = np.random.default_rng(seed)
    member_ok = True
    for _ in range(10):
        v = rng.standard_normal(alg.dim)
        if alg.is_complex:
            v = v + 1j * rng.standard_normal(alg.dim)
        if nil.basis.shape[1]:
            proj = nil.basis @ (nil.basis.conj().T @ v.astype(complex))
            if not linalg.is_nilpotent_matrix(alg.adjoint(proj), tol.num):
                member_ok = False
        if nil.basis.shape[1] < alg.dim:
            resid = linalg.subspace_residual(
                v.reshape(-1, 1).astype(complex), nil.basis.astype(complex)
            )
            if resid > 0.1:
                if linalg.is_nilpotent_matrix(alg.adjoint(v), tol.exact):
                    member_ok = False
    nil_section = {
        "dim": int(nil.dim),
        "triangular_residual": nil.triangular_residual,
        "membership_sampling_ok": member_ok,
        "ok": bool(member_ok and nil.triangular_residual <= limit),
    }

    semi_section = dict(ads.residuals)
    semi_section["cartan_dim"] = int(ads.cartan.shape[1])
    semi_section["condition"] = ads.condition
    semi_section["ok"] = max(ads.residuals.values()) <= limit

    split_section = {
        "shadow_class": split.shadow_class,
        "torus_dim": int(split.torus.shape[0]),
        "ok": max(split.residuals.values()) <= limit,
    }
    split_section.update(split.residuals)

    env_budget = {
        k: v for k, v in env.residuals.items() if k != "generator_condition"
    }
    env_section = {
        "r": env.r,
        "mode": env.mode,
        "cap": env.cap,
        "monomials": [_word_label(env, w) for w in env.words],
        "generator_weights": [int(w) for w in env.gen_weights],
        "ok": max(env_budget.values()) <= limit,
    }
    env_section.update(env.residuals)

    coeff_rows = sorted({tuple(int(v) for v in row) for row in form.char_coeffs})
    conn_section = {
        "flatness": form.flatness,
        "character_rounding": form.residuals["character_rounding"],
        "char_basis": [np.asarray(b) for b in form.char_basis],
        "coefficient_rows": [list(row) for row in coeff_rows],
        "ok": form.flatness <= limit
        and form.residuals["character_rounding"] <= tol.integer,
    }

    integral_section = _integral_section(problem, form, seed, depth)

    sections = {
        "validation": validation,
        "nilradical": nil_section,
        "semisimple_adjoint": semi_section,
        "splitting": split_section,
        "envelope": env_section,
        "connection": conn_section,
        "integrals": integral_section,
    }
    if problem.lattice is not None:
        sections["monodromy"] = _monodromy_section(problem, form, seed)

    ok = all(bool(s["ok"]) for s in sections.values())
    report = {
        "problem": problem.name,
        "spec_digest": problem.spec_digest,
        "seed": int(seed),
        "sections": sections,
        "ok": ok,
    }
    return report, ok
