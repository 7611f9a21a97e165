"""Command-line entry points.

Subcommands: ``check``, ``isomorphize``, ``extend``, ``gallery``,
``counterexample``.  Structure sources are file paths or
``gallery:<name>``.  Exit codes: 0 all checks pass / structure found,
1 some check failed / budget exhausted, 2 usage or input error.  The
environment variable COXKIT_TOL overrides the default tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cox_isomorphism import full_pipeline
from .errors import CoxkitError, ExhaustedBudget
from .event_algebra import Event
from .gallery import GALLERY, build_gallery, search_counterexample
from .plausibility_model import PlausibilityModel
from .product_extension import ProductStructure, extend, repeated_event_convergence
from .serialization import dumps, model_from_json, model_to_json, product_to_json
from .structure_checks import CoxConfig, default_tolerance


def _load_source(src: str, tolerance: float):
    if src.startswith("gallery:"):
        return build_gallery(src[len("gallery:") :])
    with open(src, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return model_from_json(data, tolerance=tolerance)


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_check(args, config: CoxConfig) -> int:
    structure = _load_source(args.src, config.tolerance)
    if isinstance(structure, ProductStructure):
        ok = all(c["verdict"] == "pass" for c in structure.checks)
        _emit(dumps({"kind": "product_checks", "passed": ok, "entries": structure.checks}), args.out)
        return 0 if ok else 1
    report, _, _ = full_pipeline(structure, config)
    for line in report.lines():
        print(line, file=sys.stderr)
    _emit(dumps(report.to_json()), args.out)
    return 0 if report.passed else 1


def _cmd_isomorphize(args, config: CoxConfig) -> int:
    structure = _load_source(args.src, config.tolerance)
    if isinstance(structure, ProductStructure):
        print("isomorphize expects a plain model, not a product", file=sys.stderr)
        return 2
    report, prob, iso = full_pipeline(structure, config)
    if iso is None:
        _emit(dumps(report.to_json()), args.out)
        return 1
    _emit(dumps(iso.to_json(structure.algebra)), args.out)
    return 0


def _cmd_extend(args, config: CoxConfig) -> int:
    structure = _load_source(args.src, config.tolerance)
    if isinstance(structure, ProductStructure):
        print("source is already a product structure", file=sys.stderr)
        return 2
    report, _, iso = full_pipeline(structure, config)
    completion = iso.canonical_form if iso is not None else None
    product = extend(
        structure, args.n, completion=completion, config=config,
        skip_prechecks=completion is not None,
    )
    _emit(dumps(product_to_json(product, seed=config.sample_seed)), args.out)
    if args.csv:
        _write_convergence_csv(structure, completion, args, config)
    return 0


def _write_convergence_csv(model, completion, args, config):
    space = model.algebra.space
    full = model.algebra.full
    if args.event:
        c = Event.from_members(space, args.event.split(","))
    else:
        bottom = model.value_by_masks(0, full.mask)
        top = model.value_by_masks(full.mask, full.mask)
        c = next(
            e
            for e in model.algebra.events
            if bottom < model.value(e, full) < top
        )
    d = Event.from_members(space, args.given.split(",")) if args.given else full
    result = repeated_event_convergence(
        model, c, d, i_max=args.imax, completion=completion, config=config
    )
    with open(args.csv, "w", encoding="utf-8") as fh:
        for row in result.csv_rows():
            fh.write(row + "\n")


def _cmd_gallery(args, config: CoxConfig) -> int:
    structure = build_gallery(args.name)
    if isinstance(structure, ProductStructure):
        _emit(dumps(product_to_json(structure, seed=config.sample_seed)), args.out)
    else:
        _emit(dumps(model_to_json(structure)), args.out)
    return 0


def _cmd_counterexample(args, config: CoxConfig) -> int:
    try:
        result = search_counterexample(
            values=args.values,
            seed=args.seed,
            atoms=args.atoms,
            budget=args.budget,
            config=config,
        )
    except ExhaustedBudget as exc:
        _emit(dumps({"found": False, "reason": str(exc), "stats": exc.stats}), args.out)
        return 1
    _emit(dumps(result), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coxkit",
        description=(
            "Check finite conditional plausibility structures against the "
            "axioms of probable reasoning and construct the isomorphism "
            "onto conditional probability."
        ),
    )
    parser.add_argument("--tol", type=float, default=None, help="override tolerance")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run the full check suite on a structure")
    p.add_argument("src", help="structure JSON path or gallery:<name>")
    p.add_argument("--out", help="write report JSON here instead of stdout")

    p = sub.add_parser("isomorphize", help="construct the probability isomorphism")
    p.add_argument("src")
    p.add_argument("--out")

    p = sub.add_parser("extend", help="build the n-fold product structure")
    p.add_argument("src")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--csv", help="also write a repeated-event convergence trace")
    p.add_argument("--event", help="comma-separated atoms of the repeated event")
    p.add_argument("--given", help="comma-separated atoms of the conditioning event")
    p.add_argument("--imax", type=int, default=24)

    p = sub.add_parser("gallery", help="emit a gallery structure as JSON")
    p.add_argument("name", help=f"one of {sorted(GALLERY)} or transform:<F>:<base>")
    p.add_argument("--out")

    p = sub.add_parser("counterexample", help="search for an extension counterexample")
    p.add_argument("--values", type=int, default=4, help="value-set size (≤ 5 is the supported desk scale)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--atoms", type=int, default=3)
    p.add_argument("--budget", type=int, default=500_000, help="DFS node budget")
    p.add_argument("--out")
    return parser


COMMANDS = {
    "check": _cmd_check,
    "isomorphize": _cmd_isomorphize,
    "extend": _cmd_extend,
    "gallery": _cmd_gallery,
    "counterexample": _cmd_counterexample,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    tolerance = args.tol if args.tol is not None else default_tolerance()
    config = CoxConfig(tolerance=tolerance)
    try:
        return COMMANDS[args.command](args, config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 2
    except CoxkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())
