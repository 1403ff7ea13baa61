"""Command-line entry point.

Every subcommand writes to ``--output`` (default stdout) in ``--format``
json or csv. In csv mode, commands with metadata (stationary, rate,
transience, drift-check) write it next to the table as ``<output>.meta.json``,
or to stderr when writing to stdout.

Settings may come from an INI file (``--config``), section ``[run]``, keys
named like the long flags with dashes or underscores::

    [run]
    a = 0.6
    b = 0.3
    lambda = 1
    seed = 7

Flags given on the command line override the file.

Exit codes: 0 success, 1 domain error (wrong region, truncation too lossy,
box too small, unsound certificate), 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .classification import DEFAULT_TOL, classify, dominant_eigenvalue, irreducibility
from .errors import DomainError
from .kernel import build_kernel, geometric_rate, index_state, stationary
from .lyapunov import DEFAULT_BOX, MAX_BOX, certify
from .process import Params, State, simulate
from .schemas import SCHEMAS
from .sweep import phase_diagram, to_csv
from .transience import (
    DEFAULT_ESCAPE_LEVEL,
    DEFAULT_HORIZON,
    choose_eps_T2b,
    choose_r,
    escape_statistics,
)

COMMANDS = (
    "classify", "simulate", "drift-check", "stationary",
    "rate", "transience", "irreducibility", "phase-diagram",
)
_CSV_DEFAULT = {"stationary", "rate", "phase-diagram"}


@dataclass
class RunConfig:
    """A fully resolved invocation."""

    command: str
    params: Params
    seed: int = 0
    output: str | None = None
    format: str = "json"
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        return cls(
            command=d["command"],
            params=Params.from_dict(d["params"]),
            seed=int(d["seed"]),
            output=d.get("output"),
            format=d["format"],
            options=dict(d.get("options", {})),
        )


def _state(values) -> list[int]:
    return [int(v) for v in values]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with a [run] section")
    common.add_argument("--a", type=float, help="lag-1 coefficient")
    common.add_argument("--b", type=float, help="lag-2 coefficient")
    common.add_argument("--lambda", dest="lam", type=float, default=1.0, help="baseline rate (default 1)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"))

    parser = argparse.ArgumentParser(prog="inhibhawkes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="phase, sub-regions, theta, irreducibility")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("simulate", parents=[common], help="simulate one trajectory")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--init", nargs=2, type=int, default=[0, 0], metavar=("X1", "X0"))

    p = sub.add_parser("drift-check", parents=[common], help="Foster-Lyapunov certificate")
    p.add_argument("--box", type=int, default=DEFAULT_BOX)
    p.add_argument("--max-box", type=int, default=MAX_BOX)

    p = sub.add_parser("stationary", parents=[common], help="invariant law on a truncated box")
    p.add_argument("--N", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--defect-budget", type=float, default=1e-3)

    p = sub.add_parser("rate", parents=[common], help="TV distance to pi and fitted geometric rate")
    p.add_argument("--N", type=int, default=50)
    p.add_argument("--horizon", type=int, default=60)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--defect-budget", type=float, default=1e-3)
    p.add_argument("--init", nargs=2, type=int, default=[0, 0], metavar=("X1", "X0"))

    p = sub.add_parser("transience", parents=[common], help="escape ensemble from (0,0)")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--escape-level", type=float, default=DEFAULT_ESCAPE_LEVEL)

    sub.add_parser("irreducibility", parents=[common], help="strong irreducibility verdict")

    p = sub.add_parser("phase-diagram", parents=[common], help="classify an (a, b) grid")
    p.add_argument("--a-min", type=float, default=-4.0)
    p.add_argument("--a-max", type=float, default=4.0)
    p.add_argument("--b-min", type=float, default=-4.0)
    p.add_argument("--b-max", type=float, default=4.0)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--simulate", action="store_true", help="add a short run per grid point")
    return parser


def _config_defaults(path: str, parser: argparse.ArgumentParser, command: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        parser.error(f"--config: cannot read {path}")
    if "run" not in cp:
        parser.error(f"--config: {path} has no [run] section")
    sub = parser._subparsers._group_actions[0].choices[command]  # noqa: SLF001
    dests = {a.dest: a for a in sub._actions}  # noqa: SLF001
    out = {}
    for key, raw in cp["run"].items():
        dest = {"lambda": "lam"}.get(key, key.replace("-", "_"))
        if dest not in dests:
            parser.error(f"--config: unknown key {key!r}")
        action = dests[dest]
        try:
            if action.nargs == 2:
                out[dest] = [action.type(v) for v in raw.split()]
            elif action.type is not None:
                out[dest] = action.type(raw)
            else:
                out[dest] = raw.lower() in ("1", "true", "yes", "on") if action.const is True else raw
        except ValueError:
            parser.error(f"--config: bad value for {key}: {raw!r}")
    return out


def parse_config(argv: list[str] | None = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        sub = parser._subparsers._group_actions[0].choices[ns.command]  # noqa: SLF001
        sub.set_defaults(**_config_defaults(ns.config, parser, ns.command))
        ns = parser.parse_args(argv)
    if ns.command != "phase-diagram" and (ns.a is None or ns.b is None):
        parser.error("--a and --b are required")
    try:
        params = Params(ns.a if ns.a is not None else 0.0, ns.b if ns.b is not None else 0.0, ns.lam)
    except ValueError as e:
        parser.error(f"--a/--b/--lambda: {e}")
    fmt = ns.format or ("csv" if ns.command in _CSV_DEFAULT else "json")
    skip = {"command", "a", "b", "lam", "seed", "output", "format", "config"}
    options = {k: v for k, v in vars(ns).items() if k not in skip}
    return RunConfig(ns.command, params, ns.seed, ns.output, fmt, options)


# -- output -------------------------------------------------------------------


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _write(cfg: RunConfig, text: str, meta: dict | None = None) -> None:
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
        if meta is not None:
            with open(cfg.output + ".meta.json", "w") as fh:
                fh.write(_dumps(_clean(meta)))
    else:
        sys.stdout.write(text)
        if meta is not None:
            sys.stderr.write(_dumps(_clean(meta)))


def _emit(cfg: RunConfig, doc: dict, rows: list[list] | None = None, header: list[str] | None = None,
          table_key: str | None = None) -> None:
    """Write ``doc`` as JSON, or ``rows`` as CSV with ``doc`` as sidecar metadata."""
    if cfg.format == "json":
        if rows is not None and table_key is not None:
            doc = {**doc, table_key: rows}
        _write(cfg, _dumps(_clean(doc)))
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if rows is None:
        flat = {k: v for k, v in doc.items() if not isinstance(v, (dict, list))}
        w.writerow(flat.keys())
        w.writerow(flat.values())
        _write(cfg, buf.getvalue())
        return
    w.writerow(header)
    w.writerows(rows)
    _write(cfg, buf.getvalue(), doc)


# -- commands ---------------------------------------------------------------------


def _cmd_classify(cfg: RunConfig) -> int:
    p = cfg.params
    lab = classify(p, cfg.options["tol"])
    doc = {
        "params": p.to_dict(),
        "phase": lab.phase.value,
        "sublabels": list(lab.sublabels),
        "theta": dominant_eigenvalue(p),
        "irreducibility": irreducibility(p).to_dict(),
    }
    if cfg.format == "csv":
        doc = {**doc, "sublabels": ";".join(lab.sublabels), "irreducibility": doc["irreducibility"]["verdict"]}
        doc.pop("params")
        doc = {**cfg.params.to_dict(), **doc}
    _emit(cfg, doc)
    return 0


def _cmd_simulate(cfg: RunConfig) -> int:
    o = cfg.options
    t = simulate(cfg.params, State(*o["init"]), o["steps"], cfg.seed)
    _write(cfg, t.to_csv() if cfg.format == "csv" else _dumps(t.to_json_dict()))
    return 0


def _cmd_drift(cfg: RunConfig) -> int:
    rep = certify(cfg.params, cfg.options["box"], cfg.options["max_box"])
    doc = rep.to_dict()
    if cfg.format == "csv":
        _emit(cfg, {k: v for k, v in doc.items() if k != "C"}, [list(s) for s in rep.C], ["i", "j"])
    else:
        _emit(cfg, doc)
    return 0 if doc["sound"] else 1


def _cmd_stationary(cfg: RunConfig) -> int:
    o = cfg.options
    k = build_kernel(cfg.params, o["N"])
    res = stationary(k, o["tol"], defect_budget=o["defect_budget"])
    doc = {
        "params": cfg.params.to_dict(),
        "N": o["N"],
        "tol": o["tol"],
        "residual": res.residual,
        "leak": res.leak,
        "max_row_defect": float(k.row_defect.max()),
        "iterations": res.iterations,
    }
    rows = [[*index_state(idx, o["N"]), float(w)] for idx, w in enumerate(res.pi.weights)]
    _emit(cfg, doc, rows, ["i", "j", "weight"], table_key="weights")
    return 0


def _cmd_rate(cfg: RunConfig) -> int:
    o = cfg.options
    k = build_kernel(cfg.params, o["N"])
    res = stationary(k, o["tol"], defect_budget=o["defect_budget"])
    fit = geometric_rate(k, State(*o["init"]), res.pi, o["horizon"])
    doc = {
        "params": cfg.params.to_dict(),
        "N": o["N"],
        "horizon": o["horizon"],
        "init": o["init"],
        "beta_hat": fit.beta_hat,
        "r_squared": fit.r_squared,
        "window": list(fit.window),
    }
    rows = [[n, float(d)] for n, d in enumerate(fit.tv)]
    if cfg.format == "json":
        _emit(cfg, {**doc, "tv": [r[1] for r in rows]})
    else:
        _emit(cfg, doc, rows, ["n", "tv"])
    return 0


def _cmd_transience(cfg: RunConfig) -> int:
    o, p = cfg.options, cfg.params
    stats = escape_statistics(p, o["runs"], o["horizon"], o["escape_level"], cfg.seed)
    theta = dominant_eigenvalue(p)
    r = eps = None
    if theta is not None and theta > 1:
        r = choose_r(p)
        if p.b < 0:
            eps = choose_eps_T2b(p, r)
    doc = {
        "params": p.to_dict(),
        "phase": classify(p).phase.value,
        "seed": cfg.seed,
        "runs": o["runs"],
        "horizon": o["horizon"],
        "escape_level": o["escape_level"],
        "theta": theta,
        "r": r,
        "eps_t2b": eps,
        "escape_fraction": stats.escape_fraction,
        "mean_escape_step": stats.mean_escape_step,
    }
    per_run = [
        {"index": rec.index, "escaped": rec.escaped, "escape_step": rec.escape_step,
         "growth_rate": rec.growth_rate, "ratio_fraction": rec.ratio_fraction}
        for rec in stats.runs
    ]
    if cfg.format == "json":
        _emit(cfg, {**doc, "per_run": per_run})
    else:
        rows = [[cfg.seed, d["index"], int(d["escaped"]),
                 "" if d["escape_step"] is None else d["escape_step"],
                 "" if d["growth_rate"] is None else repr(d["growth_rate"]),
                 "" if d["ratio_fraction"] is None else repr(d["ratio_fraction"])] for d in per_run]
        _emit(cfg, doc, rows, ["seed", "index", "escaped", "escape_step", "growth_rate", "ratio_fraction"])
    return 0


def _cmd_irreducibility(cfg: RunConfig) -> int:
    rep = irreducibility(cfg.params)
    doc = {"params": cfg.params.to_dict(), **rep.to_dict()}
    if cfg.format == "csv":
        doc["witness"] = "" if rep.witness is None else f"{rep.witness.i} {rep.witness.j}"
    _emit(cfg, doc)
    return 0


def _cmd_phase_diagram(cfg: RunConfig) -> int:
    o = cfg.options
    pts = phase_diagram(
        (o["a_min"], o["a_max"]), (o["b_min"], o["b_max"]), o["grid"],
        lam=cfg.params.lam, tol=o["tol"], with_simulation=o["simulate"], seed=cfg.seed,
    )
    if cfg.format == "csv":
        _write(cfg, to_csv(pts))
    else:
        docs = [{k: v for k, v in asdict(pt).items() if not (k in ("max_count", "escaped") and v is None)}
                for pt in pts]
        _write(cfg, _dumps(_clean(docs)))
    return 0


_DISPATCH = {
    "classify": _cmd_classify,
    "simulate": _cmd_simulate,
    "drift-check": _cmd_drift,
    "stationary": _cmd_stationary,
    "rate": _cmd_rate,
    "transience": _cmd_transience,
    "irreducibility": _cmd_irreducibility,
    "phase-diagram": _cmd_phase_diagram,
}


def run(cfg: RunConfig) -> int:
    try:
        return _DISPATCH[cfg.command](cfg)
    except DomainError as e:
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return 1


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as e:
        return int(e.code or 0)
    return run(cfg)


def schema(command: str) -> dict:
    return SCHEMAS[command]


if __name__ == "__main__":
    sys.exit(main())
