"""Command-line front end: a thin client over the service handlers.

Every subcommand builds the corresponding request model, invokes the same
handler the HTTP routes use, and serializes the response.  Exit status:
0 success, 1 validation/computation error, 2 negative hypothesis verdict or
violated gluing hypothesis (so shell pipelines can branch on the outcome).
"""

from __future__ import annotations

import argparse
import io
import json
import sys

from pydantic import ValidationError

from . import __version__
from .errors import AcylGlueError, HypothesisViolatedError, NoContractionStartError
from .gluer.experiments import PRESET_NAMES
from .service import handlers
from .service import schemas as sc

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)


def _csv_from_rows(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(x) for x in row) + "\n")
    return buf.getvalue()


def _csv_cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _lattice_spec(args) -> sc.LatticeSpec:
    if args.basis:
        vals = [float(v) for v in args.basis.split(",")]
        if len(vals) != 4:
            raise AcylGlueError("basis needs 4 comma-separated numbers a,b,c,d")
        return sc.LatticeSpec(basis=[[vals[0], vals[2]], [vals[1], vals[3]]])
    return sc.LatticeSpec(preset=args.lattice)


def cmd_spectrum(args) -> int:
    req = sc.SpectrumRequest(
        lattice=_lattice_spec(args), cutoff=args.cutoff, indicial=not args.no_indicial
    )
    resp = handlers.spectrum(req)
    _emit(_json(resp.model_dump()), args.out)
    return EXIT_OK


def _parse_ends(args) -> list[sc.EndSpec]:
    ends = []
    for token in args.ends.split(","):
        token = token.strip()
        if token.startswith("sl:"):
            b0, b1 = token.split(":")[1:]
            ends.append(sc.EndSpec(kind="sl", b0_sigma=int(b0), b1_sigma=int(b1)))
        else:
            ends.append(
                sc.EndSpec(
                    kind="torus",
                    lattice=sc.LatticeSpec(preset=token),
                    spectrum_cutoff=args.spectrum_cutoff,
                )
            )
    return ends


def cmd_index(args) -> int:
    rates = [float(r) for r in args.rates.split(",")] if args.rates else None
    req = sc.IndexRequest(ends=_parse_ends(args), variant=args.variant, rates=rates)
    resp = handlers.index(req)
    _emit(_json(resp.model_dump(exclude_none=True)), args.out)
    return EXIT_OK


def cmd_curve(args) -> int:
    if args.m_range or args.k_range:
        req = sc.CurveRequest(
            m_range=_parse_range(args.m_range or f"{args.m}:{args.m}"),
            k_range=_parse_range(args.k_range or f"{args.k}:{args.k}"),
        )
    else:
        req = sc.CurveRequest(m=args.m, k=args.k)
    resp = handlers.curve(req)
    if args.format == "csv":
        header = list(sc.CurveRow.model_fields)
        rows = [[getattr(r, f) for f in header] for r in resp.rows]
        _emit(_csv_from_rows(header, rows), args.out)
    else:
        _emit(_json(resp.model_dump()), args.out)
    return EXIT_OK


def _parse_range(text: str) -> tuple[int, int]:
    lo, hi = text.split(":")
    return int(lo), int(hi)


def cmd_hypothesis(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise AcylGlueError(f"line {exc.lineno}: malformed JSON: {exc.msg}") from exc
    req = sc.HypothesisRequest(**payload)
    resp = handlers.hypothesis(req)
    _emit(_json(resp.model_dump()), args.out)
    return EXIT_OK if resp.verdict else EXIT_NEGATIVE


def cmd_catalog(args) -> int:
    if args.pairs:
        resp = handlers.catalog_pairs(args.source)
        if args.format == "csv":
            rows = [[p[0], p[1], q[0], q[1]] for p, q in resp.pairs]
            _emit(
                _csv_from_rows(["plus_rank", "plus_number", "minus_rank", "minus_number"], rows),
                args.out,
            )
        else:
            _emit(_json(resp.model_dump()), args.out)
        return EXIT_OK
    if args.examples:
        resp = handlers.catalog_examples()
        _emit(_json(resp.model_dump()), args.out)
        ok = all(r["verdict"] for r in resp.records)
        return EXIT_OK if ok else EXIT_NEGATIVE
    req = sc.CatalogQuery(
        very_ample=args.very_ample, line_candidate=args.line_candidates, source=args.source
    )
    resp = handlers.catalog_records(req)
    if args.format == "csv":
        header = ["picard_rank", "number_in_rank", "fano_index", "very_ample", "line_candidate"]
        rows = [[r[h] for h in header] for r in resp.records]
        _emit(_csv_from_rows(header, rows), args.out)
    else:
        _emit(_json(resp.model_dump()), args.out)
    return EXIT_OK


def cmd_glue(args) -> int:
    req = sc.GlueRequest(
        preset=args.preset,
        tmin=args.tmin,
        tmax=args.tmax,
        tstep=args.tstep,
        experiment=args.experiment,
        seed=args.seed,
        restricted=not args.unrestricted,
        lam=args.decay_bound,
        mode_cutoff=args.mode_cutoff,
        points_per_unit=args.points_per_unit,
    )
    resp = handlers.glue(req)
    if args.format == "csv":
        from .gluer.experiments import GluingReport

        report = GluingReport(
            t_grid=resp.report["t_grid"],
            error_norms=resp.report["error_norms"],
            sigma_min=resp.report["sigma_min"],
            solution_distances=resp.report["solution_distances"],
            converged=resp.report["converged"],
        )
        _emit(report.to_csv(), args.out)
    else:
        _emit(_json(resp.report), args.out)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("acylglue.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def _apply_config(argv: list[str]) -> list[str]:
    """Prepend key=value pairs from --config FILE as --key value flags."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    extra: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise AcylGlueError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            extra.extend([f"--{key.replace('_', '-')}", value])
    # config supplies defaults: command-line flags come later and win
    return rest[:1] + extra + rest[1:]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="acylglue",
        description="Indicial roots, index calculus, gluing hypothesis checks "
        "and neck-stretching model experiments.",
    )
    ap.add_argument("--version", action="version", version=f"acylglue {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp_ = sub.add_parser("spectrum", help="torus Laplace spectrum and indicial data")
    sp_.add_argument("--lattice", default="square2pi")
    sp_.add_argument("--basis", help="explicit basis a,b,c,d (columns (a,b),(c,d))")
    sp_.add_argument("--cutoff", type=float, required=True)
    sp_.add_argument("--no-indicial", action="store_true")
    sp_.add_argument("--out")
    sp_.set_defaults(func=cmd_spectrum)

    ix = sub.add_parser("index", help="weighted Fredholm index of a multi-ended cylinder")
    ix.add_argument("--ends", required=True, help="comma list: lattice preset or sl:b0:b1")
    ix.add_argument("--spectrum-cutoff", type=float, default=9.0)
    ix.add_argument("--rates", help="comma list, one weight per end")
    ix.add_argument("--variant", choices=("full", "fixed", "varying"), default="full")
    ix.add_argument("--out")
    ix.set_defaults(func=cmd_index)

    cu = sub.add_parser("curve", help="normal-bundle cohomology and rigidity table")
    cu.add_argument("--m", type=int)
    cu.add_argument("--k", type=int)
    cu.add_argument("--m-range", help="inclusive range lo:hi")
    cu.add_argument("--k-range", help="inclusive range lo:hi")
    cu.add_argument("--format", choices=("json", "csv"), default="json")
    cu.add_argument("--out")
    cu.set_defaults(func=cmd_curve)

    hy = sub.add_parser("hypothesis", help="run a gluing-hypothesis checker on a JSON file")
    hy.add_argument("--input", required=True)
    hy.add_argument("--out")
    hy.set_defaults(func=cmd_hypothesis)

    ca = sub.add_parser("catalog", help="Fano family catalog queries")
    ca.add_argument("--source", help="dataset path (default: embedded)")
    ca.add_argument("--very-ample", action="store_const", const=True, default=None)
    ca.add_argument("--line-candidates", action="store_const", const=True, default=None)
    ca.add_argument("--pairs", action="store_true")
    ca.add_argument("--examples", action="store_true")
    ca.add_argument("--format", choices=("json", "csv"), default="json")
    ca.add_argument("--out")
    ca.set_defaults(func=cmd_catalog)

    gl = sub.add_parser("glue", help="run a neck-stretching preset over a T grid")
    gl.add_argument("--preset", required=True, choices=PRESET_NAMES)
    gl.add_argument("--tmin", type=float, default=3.0)
    gl.add_argument("--tmax", type=float, default=12.0)
    gl.add_argument("--tstep", type=float, default=1.0)
    gl.add_argument("--experiment", choices=("full", "error", "linear"), default="full")
    gl.add_argument("--seed", type=int, default=0)
    gl.add_argument("--unrestricted", action="store_true")
    gl.add_argument("--decay-bound", type=float, help="Lambda of the linear estimate")
    gl.add_argument("--mode-cutoff", type=int)
    gl.add_argument("--points-per-unit", type=int)
    gl.add_argument("--format", choices=("json", "csv"), default="json")
    gl.add_argument("--out")
    gl.set_defaults(func=cmd_glue)

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.set_defaults(func=cmd_serve)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the validation code so
        # exit status 2 stays reserved for negative verdicts
        code = exc.code if isinstance(exc.code, int) else EXIT_ERROR
        return EXIT_OK if code == 0 else EXIT_ERROR
    except (HypothesisViolatedError, NoContractionStartError) as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (AcylGlueError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
