"""Command line interface.

Subcommands cover the pipeline at increasing depth: analyze stops at the
algebra level invariants, hull builds the triangular representation,
monodromy and integrate evaluate transports along lattice words or
explicit paths, and verify runs the whole deterministic invariant suite
and emits a canonical JSON report.

Exit codes: 0 success, 1 invariant failure, 2 input validation failure,
3 resource cap exceeded, 4 loop endpoint mismatch.
"""

import argparse
import json
import sys
import time

import numpy as np

from .builtin_models import BUILTINS, builtin_problem
from .errors import (
    EndpointMismatch,
    SolvHullError,
    TruncationOverflow,
    ValidationError,
)
from .groups import parse_word
from .integrals import transport, transport_series
from .monodromy import (
    build_monodromy_rep,
    path_independence_residual,
    separation_demo,
    word_monodromy,
)
from .paths import PathWord
from .report import canonical_json, digest
from .specfile import parse_problem
from .tolerances import Tolerances
from .verify import build_stages, run_verification

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_ENDPOINT = 4


def _tolerances_from(args):
    base = Tolerances()
    kwargs = {}
    for name, attr in (
        ("alg", "tol_alg"),
        ("num", "tol_num"),
        ("exact", "tol_exact"),
        ("integer", "tol_integer"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            kwargs[name] = value
    if kwargs:
        return Tolerances(
            alg=kwargs.get("alg", base.alg),
            num=kwargs.get("num", base.num),
            exact=kwargs.get("exact", base.exact),
            integer=kwargs.get("integer", base.integer),
            cluster_scale=base.cluster_scale,
        )
    return base


def _load_problem(args):
    tol = _tolerances_from(args)
    if getattr(args, "example", None):
        return builtin_problem(args.example, tolerances=tol)
    if getattr(args, "spec", None):
        return parse_problem(args.spec, tolerances=tol)
    raise ValidationError("provide either --example or --spec")


def _complexlist(m):
    """Nested [re, im] lists for human readable JSON output."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [_complexlist(sub) for sub in arr]


def _print(args, text):
    print(text)


def cmd_analyze(args):
    problem = _load_problem(args)
    stages = build_stages(problem)
    alg = problem.algebra
    nil = stages["nilradical"]
    ads = stages["semisimple"]
    split = stages["splitting"]
    payload = {
        "problem": problem.name,
        "dim": alg.dim,
        "basis_names": list(alg.names),
        "nilradical_dim": int(nil.dim),
        "nilradical_basis": nil.basis,
        "cartan_dim": int(ads.cartan.shape[1]),
        "shadow_class": split.shadow_class,
        "torus_dim": int(split.torus.shape[0]),
        "residuals": {**ads.residuals, **split.residuals},
    }
    if args.json:
        _print(args, canonical_json(payload))
    else:
        _print(args, f"problem: {problem.name}")
        _print(args, f"dimension: {alg.dim}  basis: {' '.join(alg.names)}")
        _print(args, f"nilradical dimension: {nil.dim}")
        _print(args, f"cartan dimension: {ads.cartan.shape[1]}")
        _print(args, f"shadow nilpotency class: {split.shadow_class}")
        _print(args, f"torus dimension: {split.torus.shape[0]}")
        worst = max(payload["residuals"].values())
        _print(args, f"worst residual: {worst:.3e}")
    return EXIT_OK


def cmd_hull(args):
    problem = _load_problem(args)
    stages = build_stages(problem)
    env = stages["envelope"]
    form = stages["form"]
    monomials = []
    for w in env.words:
        monomials.append("1" if not w else "*".join(f"g{a}" for a in w))
    payload = {
        "problem": problem.name,
        "module_dimension": env.r,
        "truncation_mode": env.mode,
        "truncation_cap": env.cap,
        "monomials": monomials,
        "generator_weights": [int(x) for x in env.gen_weights],
        "flatness": form.flatness,
        "char_basis": [np.asarray(b) for b in form.char_basis],
        "char_coefficients": form.char_coeffs,
    }
    if args.json:
        _print(args, canonical_json(payload))
    else:
        _print(args, f"problem: {problem.name}")
        _print(args, f"module dimension: {env.r} (mode {env.mode}, cap {env.cap})")
        _print(args, f"monomial order: {' > '.join(monomials)}")
        _print(args, f"flatness residual: {form.flatness:.3e}")
        _print(args, f"character basis size: {len(form.char_basis)}")
        for i, b in enumerate(form.char_basis):
            _print(args, f"  basis[{i}] = {np.array2string(np.asarray(b), precision=6)}")
        rows = sorted({tuple(int(v) for v in row) for row in form.char_coeffs})
        _print(args, f"integer coefficient rows: {rows}")
    return EXIT_OK


def cmd_monodromy(args):
    problem = _load_problem(args)
    if problem.lattice is None:
        raise ValidationError("this problem has no lattice")
    stages = build_stages(problem)
    form = stages["form"]
    word = parse_word(args.word)
    rho = word_monodromy(form, problem.lattice, word)
    target = problem.lattice.element_of(word)
    pi = path_independence_residual(form, problem.model, target, seed=args.seed)
    payload = {
        "problem": problem.name,
        "word": args.word,
        "monodromy": rho,
        "path_independence_residual": pi,
        "endpoint_translation": list(target.translation),
        "endpoint_fiber": _complexlist(target.fiber),
    }
    if args.json:
        _print(args, canonical_json(payload))
    else:
        _print(args, f"word: {args.word}")
        _print(args, f"endpoint translation: {target.translation}")
        _print(args, f"endpoint fiber: {target.fiber}")
        _print(args, "monodromy matrix:")
        _print(args, np.array2string(rho, precision=8, suppress_small=True))
        _print(args, f"path independence residual: {pi:.3e}")
    return EXIT_OK


def _path_from_file(problem, path_file):
    with open(path_file) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "segments" not in data:
        raise ValidationError("path file needs a segments list")
    segs = []
    for seg in data["segments"]:
        direction = seg.get("direction")
        duration = seg.get("duration")
        if direction is None or duration is None:
            raise ValidationError("every segment needs direction and duration")
        vec = []
        for entry in direction:
            if isinstance(entry, (list, tuple)):
                vec.append(complex(entry[0], entry[1]))
            else:
                vec.append(complex(entry))
        if len(vec) != problem.algebra.dim:
            raise ValidationError(
                f"direction has {len(vec)} entries, need {problem.algebra.dim}"
            )
        segs.append((np.array(vec), float(duration)))
    return PathWord(segs)


def cmd_integrate(args):
    problem = _load_problem(args)
    stages = build_stages(problem)
    form = stages["form"]
    if args.word:
        if problem.lattice is None:
            raise ValidationError("--word needs a lattice")
        path = problem.lattice.path_of(parse_word(args.word))
    elif args.path:
        path = _path_from_file(problem, args.path)
    else:
        raise ValidationError("provide --word or --path")
    full = transport(form, path)
    series = transport_series(form, path, args.depth)
    diff = float(np.max(np.abs(full - series.value)))
    payload = {
        "problem": problem.name,
        "transport": full,
        "series_depth": args.depth,
        "series_tail_bound": series.tail_bound,
        "series_agreement": diff,
        "series_within_bound": bool(diff <= series.tail_bound),
    }
    if args.json:
        _print(args, canonical_json(payload))
    else:
        _print(args, "transport matrix:")
        _print(args, np.array2string(full, precision=8, suppress_small=True))
        _print(
            args,
            f"series at depth {args.depth}: agreement {diff:.3e}, tail bound {series.tail_bound:.3e}",
        )
    if diff > series.tail_bound:
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_verify(args):
    problem = _load_problem(args)
    started = time.monotonic()
    report, ok = run_verification(problem, seed=args.seed, depth=args.depth)
    text = canonical_json(report)
    elapsed = time.monotonic() - started
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
            fh.write("\n")
    else:
        _print(args, text)
    print(f"verify runtime: {elapsed:.2f}s digest: {digest(text)}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_INVARIANT


def build_parser():
    parser = argparse.ArgumentParser(
        prog="solvhull",
        description="Triangular hull representations and exponential iterated integrals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, lattice_word=False):
        p.add_argument("--example", choices=sorted(BUILTINS), help="builtin problem")
        p.add_argument("--spec", help="path to a problem JSON file")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
        p.add_argument("--json", action="store_true", help="emit canonical JSON")
        p.add_argument("--tol-alg", type=float, default=None, dest="tol_alg")
        p.add_argument("--tol-num", type=float, default=None, dest="tol_num")
        p.add_argument("--tol-exact", type=float, default=None, dest="tol_exact")
        p.add_argument("--tol-integer", type=float, default=None, dest="tol_integer")

    p = sub.add_parser("analyze", help="algebra level invariants")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("hull", help="build the triangular representation")
    common(p)
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("monodromy", help="monodromy of a lattice word")
    common(p)
    p.add_argument("--word", required=True, help="lattice word, e.g. 'a b1 a^-1'")
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("integrate", help="transport along a word or explicit path")
    common(p)
    p.add_argument("--word", help="lattice word")
    p.add_argument("--path", help="JSON file with a segments list")
    p.add_argument("--depth", type=int, default=20, help="series truncation depth")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("verify", help="full deterministic invariant suite")
    common(p)
    p.add_argument("--depth", type=int, default=20, help="series truncation depth")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TruncationOverflow as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    except EndpointMismatch as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ENDPOINT
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolvHullError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
