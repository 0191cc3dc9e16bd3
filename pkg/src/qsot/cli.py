"""Command-line interface: ``qsot <command> ...``.

Exit codes: 0 success, 1 a check or axiom failed, 2 unreadable input,
3 shape mismatch, 4 numerical anomaly.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
from contextlib import contextmanager

import numpy as np

from . import experiments as ex
from ._tol import resolve_tol
from .algebra import AlgebraShape, ShapeMismatchError, eigenvalues, is_positive, selfadjoint_violation
from .classical import (
    NotClassicalError,
    UnsupportedShapeError,
    bloom_symmetry_check,
    commutator_check,
    find_classical_model,
)
from .io import ParseError, dumps, encode_element, encode_matrix, load_channel, load_effects, load_state
from .linmap import cp_violation, dagger_violation, functional_of, unital_violation
from .sampling import (
    planted_classical_pair,
    random_hermitian_density,
    random_state,
    random_unital_dagger_map,
    rng_from,
)
from .sot import (
    StateOverTime,
    check_axiom_a,
    check_axiom_b,
    check_axiom_c,
    check_axiom_d,
    check_axiom_e,
    star,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_SHAPE, EXIT_ANOMALY = 0, 1, 2, 3, 4
DEFAULT_SHAPES = ((2,), (3,), (2, 1), (2, 2))


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_text(text: str, path):
    with _output(path) as fh:
        fh.write(text)


def _map_flags(f, tol: float) -> dict:
    return {
        "unital": unital_violation(f) <= tol,
        "dagger_preserving": dagger_violation(f) <= tol,
        "completely_positive": cp_violation(f) <= tol,
    }


def _require_finite(*maps):
    for m in maps:
        if not np.all(np.isfinite(m.matrix)):
            raise ex.AnomalyError("input contains non-finite entries")


def _sot_report(sot: StateOverTime, tol: float) -> dict:
    spectrum = eigenvalues(sot.density)
    if not np.all(np.isfinite(spectrum)):
        raise ex.AnomalyError("non-finite spectrum")
    return {
        "density": encode_element(sot.density),
        "spectrum": [float(v) for v in spectrum],
        "min_eigenvalue": float(spectrum[0]),
        "self_adjoint": selfadjoint_violation(sot.density) <= tol,
        "positive": is_positive(sot.density, tol),
        "marginal_left": encode_element(sot.marginal_left()),
        "marginal_right": encode_element(sot.marginal_right()),
        "channel": _map_flags(sot.channel, tol),
    }


# commands


def cmd_compute(args) -> int:
    tol = resolve_tol(args.tol)
    f = load_channel(args.channel)
    omega = load_state(args.state, default_shape=f.codomain)
    _require_finite(f, omega)
    report = _sot_report(star(f, omega), tol)
    _write_text(dumps(report), args.out)
    return EXIT_OK


def _parse_dims(values) -> list[AlgebraShape]:
    if not values:
        return [AlgebraShape(s) for s in DEFAULT_SHAPES]
    shapes = []
    for v in values:
        try:
            shapes.append(AlgebraShape(tuple(int(t) for t in v.split(","))))
        except ValueError as exc:
            raise ParseError(f"--dims {v!r}: expected comma-separated block sizes") from exc
    return shapes


def run_axiom_suite(seed: int, shapes, trials: int, tol: float) -> dict:
    """Random unital †-preserving pairs (every other one non-CP) through axioms (a)-(e).

    Axiom (c) is also run on a planted classical pair for every single-block shape.
    """
    rng = rng_from(seed)
    summary = {k: {"runs": 0, "vacuous": 0, "failures": 0, "max_violation": 0.0} for k in "abcde"}
    failures = []

    def record(rep, trial, shape):
        s = summary[rep.axiom]
        s["runs"] += 1
        if not rep.preconditions_met:
            s["vacuous"] += 1
        s["max_violation"] = max(s["max_violation"], rep.max_violation)
        if not rep.passed:
            s["failures"] += 1
            failures.append({"trial": trial, "shape": list(shape.blocks), **rep.to_dict()})

    for t in range(trials):
        a = shapes[t % len(shapes)]
        b = shapes[rng.integers(len(shapes))]
        c = shapes[rng.integers(len(shapes))]
        f = random_unital_dagger_map(b, a, rng, ensure_non_cp=(t % 2 == 1))
        g = random_unital_dagger_map(b, a, rng)
        h = random_unital_dagger_map(c, b, rng)
        omega = random_state(a, rng)
        xi = functional_of(random_hermitian_density(a, rng))
        lam = complex(rng.standard_normal(), rng.standard_normal())
        record(check_axiom_a(f, omega, tol), t, a)
        record(check_axiom_b(f, g, omega, xi, lam=lam, tol=tol), t, a)
        record(check_axiom_c(f, omega, tol=tol), t, a)
        record(check_axiom_d(f, omega, tol), t, a)
        record(check_axiom_e(f, h, omega, tol), t, a)
        if a.is_matrix_algebra and b.is_matrix_algebra:
            fc, wc, *_ = planted_classical_pair(a.dim, b.dim, rng)
            record(check_axiom_c(fc, wc, tol=max(tol, 1e-9)), t, a)
    return {
        "seed": seed,
        "trials": trials,
        "tol": tol,
        "shapes": [list(s.blocks) for s in shapes],
        "axioms": summary,
        "failures": failures,
        "passed": not failures,
    }


def cmd_check_axioms(args) -> int:
    tol = resolve_tol(args.tol)
    report = run_axiom_suite(args.seed, _parse_dims(args.dims), args.trials, tol)
    _write_text(dumps(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


SWEEP_HEADER = ["p", "delta", "epsilon", "min_eig", "lambda", "positive"]
LS_HEADER = ["p", "prob_star", "prob_ls", "case"]


def sweep_csv(records) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in records:
        w.writerow([fmt(r.p), fmt(r.delta), fmt(r.epsilon), fmt(r.min_eigenvalue), fmt(r.lambda_formula), str(r.positive).lower()])
    return buf.getvalue()


def cmd_noise_sweep(args) -> int:
    g = ex.grid(args.grid)
    records = ex.noise_sweep(g, g, g)
    bad = ex.monotonicity_violations(records)
    if bad:
        print(f"warning: {len(bad)} monotonicity violations in the positivity region", file=sys.stderr)
    _write_text(sweep_csv(records), args.out)
    return EXIT_OK


def ls_csv(records) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LS_HEADER)
    for r in records:
        w.writerow([fmt(r.p), fmt(r.prob_star), fmt(r.prob_ls), r.case])
    return buf.getvalue()


def cmd_ls_compare(args) -> int:
    if args.effects:
        m, n = load_effects(args.effects)
        case = "custom"
    else:
        case = args.case
        m, n = ex.LS_EFFECTS[case]
    records = ex.ls_tangency_scan(ex.grid(args.grid), m, n, case)
    _write_text(ls_csv(records), args.out)
    return EXIT_OK


def cmd_epr(args) -> int:
    tol = resolve_tol(args.tol)
    sot = ex.epr_example()
    report = _sot_report(sot, tol)
    report["max_deviation_from_epr"] = float(np.abs(sot.density.to_dense() - ex.EPR_DENSITY).max())
    _write_text(dumps(report), args.out)
    return EXIT_OK


def cmd_classical_check(args) -> int:
    tol = resolve_tol(args.tol)
    f = load_channel(args.channel)
    omega = load_state(args.state, default_shape=f.codomain)
    if omega.domain != f.codomain:
        raise ShapeMismatchError(f"state on {omega.domain.blocks} but channel lands in {f.codomain.blocks}")
    _require_finite(f, omega)
    sym_ok, sym_norm = bloom_symmetry_check(f, omega, tol)
    com_ok, com_norm = commutator_check(f, omega, tol)
    report = {
        "bloom_symmetric": sym_ok,
        "bloom_asymmetry": sym_norm,
        "densities_commute": com_ok,
        "commutator_norm": com_norm,
        "model": None,
    }
    code = EXIT_OK
    try:
        model = find_classical_model(f, omega, tol)
        report["model"] = {
            "basis_A": encode_matrix(model.basis_A),
            "basis_B": encode_matrix(model.basis_B),
            "stochastic": model.stochastic.tolist(),
            "diag_rho": model.diag_rho.tolist(),
            "diag_theta": model.diag_theta.tolist(),
        }
    except NotClassicalError as exc:
        report["not_classical"] = {"reason": exc.reason, "norm": exc.norm}
        if exc.witness is not None:
            report["not_classical"]["witness"] = encode_matrix(np.asarray(exc.witness))
        code = EXIT_FAIL
    except UnsupportedShapeError as exc:
        report["model_unsupported"] = str(exc)
        code = EXIT_OK if (sym_ok and com_ok) else EXIT_FAIL
    _write_text(dumps(report), args.out)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=True):
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        if tol:
            p.add_argument("--tol", type=float, default=None, help="tolerance (default: QSOT_DEFAULT_TOL or 1e-10)")

    p = sub.add_parser("compute", help="state over time of a channel and a state")
    p.add_argument("channel", help="channel JSON file")
    p.add_argument("state", help="state JSON file or preset (maximally_mixed, diag:p=0.3)")
    common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("check-axioms", help="run the axiom suite on seeded random pairs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", action="append", help="algebra shape as block sizes, e.g. 2,1 (repeatable)")
    p.add_argument("--trials", type=int, default=20)
    common(p)
    p.set_defaults(func=cmd_check_axioms)

    p = sub.add_parser("noise-sweep", help="CSV of the noised identity-channel spectrum")
    p.add_argument("--grid", type=int, default=21, help="points per axis")
    common(p, tol=False)
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("ls-compare", help="CSV comparing star and Leifer-Spekkens probabilities")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--case", choices=sorted(ex.LS_EFFECTS), default="a")
    g.add_argument("--effects", help="JSON file with 2x2 effects M and N")
    p.add_argument("--grid", type=int, default=101)
    common(p, tol=False)
    p.set_defaults(func=cmd_ls_compare)

    p = sub.add_parser("epr", help="the EPR state as a state over time")
    common(p)
    p.set_defaults(func=cmd_epr)

    p = sub.add_parser("classical-check", help="classicality checks and model search")
    p.add_argument("channel")
    p.add_argument("state")
    common(p)
    p.set_defaults(func=cmd_classical_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ShapeMismatchError as exc:
        print(f"shape mismatch: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except ex.AnomalyError as exc:
        print(f"numerical anomaly: {exc}", file=sys.stderr)
        return EXIT_ANOMALY


if __name__ == "__main__":
    sys.exit(main())
