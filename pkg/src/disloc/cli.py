"""Command-line front end.

Exit codes: 0 when every check passes, 1 on an invariant failure, 2 on a
configuration error. Settings are taken from flags, then the config file,
then defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import config as cfgmod
from .bravais import bravais_svg, count_endpoints
from .checks import dislocation_suite, full_suite
from .config import ConfigError, RunConfig
from .currents import random_test_forms, random_test_functions
from .dislocation import DislocationForm, ParameterError, smoothing
from .forms import Point, catalog
from .homogenization import DislocationArray, converge
from .quadrature import QuadratureSpec, circulation, rectangle_path
from .torsion import Coframe, ReferencePointError, burgers_record, burgers_vector, dual_frame, dumps_records, torsion_homogenization

log = logging.getLogger("disloc")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _spec(cfg: RunConfig) -> QuadratureSpec:
    return QuadratureSpec(cfg.order, cfg.max_panel, cfg.tol)


def _form(cfg: RunConfig, beta, r):
    if cfg.n == 1:
        return DislocationForm(beta, cfg.a, r)
    return DislocationArray(beta, cfg.a, cfg.n, r, shrink_segments=cfg.shrink_segments)


# -- commands ------------------------------------------------------------------


def cmd_build(cfg: RunConfig, beta, r) -> tuple[dict, int]:
    d = DislocationForm(beta, cfg.a, r)
    line = QuadratureSpec(order=16, max_panel=1 / 32)
    summary = {
        "command": "build",
        "config": cfg.to_record(),
        "form": d.to_record(),
        "circulation": d.circulation,
        "circulation_line_integral": circulation(beta, spec=line),
        "jump_integral": d.jump_integral(),
        "segments": [list(d.segment)],
        "total_cut_length": d.cuts.total_length(),
    }
    if cfg.n > 1:
        arr = DislocationArray(beta, cfg.a, cfg.n, r, shrink_segments=cfg.shrink_segments)
        summary["array"] = {
            **arr.to_record(),
            "segment_count": len(arr.segments()),
            "total_cut_length": arr.total_cut_length(),
            "cell_circulations": [[arr.cell_circulation(k, j) for j in range(cfg.n)] for k in range(cfg.n)],
        }
    return summary, EXIT_OK


def cmd_check(cfg: RunConfig, beta, r) -> tuple[dict, int]:
    p_ref = Point(*cfg.p_ref)
    if cfg.fault:
        results = dislocation_suite(beta, cfg.a, r)
    else:
        results = full_suite(r=r, p_ref=p_ref)
    failed = [res for res in results if not res.passed]
    report = {
        "command": "check",
        "config": cfg.to_record(),
        "passed": not failed,
        "total": len(results),
        "failures": len(failed),
        "results": [res.to_record() for res in results],
    }
    return report, EXIT_OK if not failed else EXIT_FAIL


def cmd_converge(cfg: RunConfig, beta, r) -> tuple[dict, int, str]:
    forms = random_test_forms(cfg.seed, cfg.n_tests)
    table = converge(beta, cfg.a, forms, cfg.n_list, r, _spec(cfg), cfg.shrink_segments)
    summary = {"command": "converge", "config": cfg.to_record(), **table.meta}
    return summary, EXIT_OK if table.meta["all_bounds_ok"] else EXIT_FAIL, table.to_csv()


def cmd_torsion(cfg: RunConfig, beta, r) -> tuple[dict, int, str, str]:
    p_ref = Point(*cfg.p_ref)
    etas = random_test_functions(cfg.seed, cfg.n_tests)
    table = torsion_homogenization(
        beta, cfg.a, etas, cfg.n_list, p_ref=p_ref, r=r, spec=_spec(cfg), shrink_segments=cfg.shrink_segments
    )
    partner = catalog("dx")
    d = DislocationForm(beta, cfg.a, r)
    records = []
    for cf in (Coframe(beta, partner), Coframe(d, partner)):
        frame = dual_frame(cf, p_ref)
        for delta in (0.2, 0.05):
            loop = rectangle_path(d.x_left - delta, d.x_right + delta, 0.5 - delta, 0.5 + delta)
            rec = burgers_record(loop, burgers_vector(cf, loop, p_ref), frame)
            rec["coframe"] = "singular" if cf.singular[0] else "smooth"
            records.append(rec)
    summary = {"command": "torsion", "config": cfg.to_record(), **table.meta}
    return summary, EXIT_OK, table.to_csv(), dumps_records(records)


def cmd_bravais(cfg: RunConfig, beta, r) -> tuple[dict, int, str]:
    form = _form(cfg, beta, r)
    svg, contours = bravais_svg(form, cfg.h, cfg.resolution)
    summary = {
        "command": "bravais",
        "config": cfg.to_record(),
        "levels": len(contours.levels),
        "chains": sum(len(c) for c in contours.chains.values()),
        "segments": [list(s) for s in form.cuts.horizontal_segments],
    }
    if cfg.n == 1:
        summary["strip_endpoints"] = count_endpoints(contours, (form.x_left, form.x_right, 0.0, 1.0))
    return summary, EXIT_OK, svg


# -- argument handling ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disloc", description="Edge-dislocation layering forms, currents and homogenization experiments.")
    p.add_argument("--cmd", choices=cfgmod.COMMANDS, help="command to run")
    p.add_argument("command", nargs="?", choices=cfgmod.COMMANDS, help="command (alternative to --cmd)")
    p.add_argument("--config", help="INI config file")
    p.add_argument("--beta", help="catalog form name")
    p.add_argument("--a", type=float, help="segment width parameter")
    p.add_argument("--r", help="smoothing function name")
    p.add_argument("--n", type=int, help="array size for build/bravais")
    p.add_argument("--n-list", help="comma-separated ascending tile counts")
    p.add_argument("--order", type=int, help="Gauss nodes per panel")
    p.add_argument("--max-panel", type=float, help="largest panel edge")
    p.add_argument("--tol", type=float, help="quadrature tolerance")
    p.add_argument("--seed", type=int, help="seed for test families")
    p.add_argument("--n-tests", type=int, help="size of the test family")
    p.add_argument("--h", type=float, help="level spacing for bravais")
    p.add_argument("--resolution", type=int, help="contour grid resolution")
    p.add_argument("--p-ref", help="reference point as 'x,y'")
    p.add_argument("--out", help="output directory")
    p.add_argument("--large-n", action="store_true", default=None, help="allow n up to 32")
    p.add_argument("--wide-segments", action="store_true", default=None, help="tile width a instead of a/n")
    p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    p.add_argument("--inject-fault", choices=("corrupted-r",), help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _float_pair(text: str) -> tuple:
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse point {text!r}; expected 'x,y'") from None
    return (x, y)


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"cannot parse n-list {text!r}") from None


def resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = cfgmod.load(args.config, cfg)
    cmd = args.cmd or args.command
    cfg = cfg.override(
        cmd=cmd,
        beta_name=args.beta,
        a=args.a,
        r_name=args.r,
        n=args.n,
        n_list=_int_list(args.n_list) if args.n_list else None,
        order=args.order,
        max_panel=args.max_panel,
        tol=args.tol,
        seed=args.seed,
        n_tests=args.n_tests,
        h=args.h,
        resolution=args.resolution,
        p_ref=_float_pair(args.p_ref) if args.p_ref else None,
        out=args.out,
        allow_large_n=args.large_n,
        shrink_segments=False if args.wide_segments else None,
        fault=args.inject_fault,
    )
    return cfg.validate()


def run(cfg: RunConfig) -> int:
    beta = catalog(cfg.beta_name)
    r = smoothing(cfg.r_name, allow_faulty=cfg.fault == "corrupted-r")
    os.makedirs(cfg.out, exist_ok=True)
    files = {}
    if cfg.cmd == "build":
        summary, code = cmd_build(cfg, beta, r)
        files["summary.json"] = _dump_json(summary)
    elif cfg.cmd == "check":
        report, code = cmd_check(cfg, beta, r)
        files["report.json"] = _dump_json(report)
    elif cfg.cmd == "converge":
        summary, code, csv_text = cmd_converge(cfg, beta, r)
        files["table.csv"] = csv_text
        files["summary.json"] = _dump_json(summary)
    elif cfg.cmd == "torsion":
        summary, code, csv_text, burgers = cmd_torsion(cfg, beta, r)
        files["table.csv"] = csv_text
        files["burgers.json"] = burgers
        files["summary.json"] = _dump_json(summary)
    else:
        summary, code, svg = cmd_bravais(cfg, beta, r)
        files["bravais.svg"] = svg
        files["summary.json"] = _dump_json(summary)
    files["config.ini"] = cfgmod.dumps(cfg)
    for name in sorted(files):
        _write(os.path.join(cfg.out, name), files[name])
    log.info("%s: wrote %s to %s", cfg.cmd, ", ".join(sorted(files)), cfg.out)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dump_config:
        sys.stdout.write(cfgmod.dumps(cfg))
        return EXIT_OK
    try:
        return run(cfg)
    except (ParameterError, ReferencePointError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
