"""Command-line front end.

Subcommands: ``analyze``, ``table1``, ``mc``, ``gen-pop``, ``check-conditions``.
Tables go to stdout; with ``--out`` (or ``$DUALME_OUT_DIR``) CSV/JSON files and a
``manifest.json`` are written too. Exit codes: 0 ok, 1 I/O, 2 bad config,
3 numerical singularity, 4 Monte Carlo failure rate exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analytics import analyze, efficiency_conditions, pre
from .constants import PopulationParams
from .errors import ConfigError, MonteCarloFailure, NonPositiveMSEError, SingularityError
from .presets import REFERENCE_TABLE, PARAM_PRESETS, get_params, get_population_spec
from .simulation import MonteCarloConfig, SyntheticPopulationSpec, generate_population, run_monte_carlo

OUT_ENV = "DUALME_OUT_DIR"
MANIFEST = "manifest.json"
FLAG_REL = 0.05


def _g(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# manifest: {MANIFEST}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_g(v) for v in r])
    return buf.getvalue()


def _text_table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[_g(v) for v in r] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _finite(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _dumps(obj) -> str:
    return json.dumps(_finite(obj), indent=2, allow_nan=False) + "\n"


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


class _Output:
    """Collects result files for one command and writes them with a manifest."""

    def __init__(self, args, command: str):
        self.command = command
        self.args = args
        self.dir = args.out or os.environ.get(OUT_ENV)
        self.files: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def add(self, stem: str, header: list[str], rows: list[list], payload: dict):
        fmt = self.args.format
        if fmt in ("csv", "both"):
            self.files[f"{stem}.csv"] = _csv(header, rows)
        if fmt in ("json", "both"):
            self.files[f"{stem}.json"] = _dumps({"manifest": MANIFEST, **payload})

    def add_raw(self, name: str, text: str):
        self.files[name] = text

    def write(self, inputs: dict, seed=None):
        if not self.dir:
            return
        out = Path(self.dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            for name, text in self.files.items():
                (out / name).write_text(text)
            manifest = {
                "command": self.command,
                "inputs": inputs,
                "seed": seed,
                "version": __version__,
                "outputs": sorted(self.files),
                "duration_s": round(time.perf_counter() - self.t0, 6),
            }
            (out / MANIFEST).write_text(_dumps(manifest))
        except OSError as exc:
            raise OSError(f"{exc.filename or out}: {exc.strerror}") from None


def _params(args) -> tuple[PopulationParams, dict]:
    if args.params:
        d = _read_json(args.params)
        if not isinstance(d, dict):
            raise ConfigError(f"{args.params}: expected a JSON object")
        p = PopulationParams.from_dict(d)
        src = {"params": args.params}
    else:
        p = get_params(args.preset or "pop1")
        src = {"preset": args.preset or "pop1"}
    if getattr(args, "n", None):
        p = replace(p, n=args.n)
        src["n"] = args.n
    return p, src


def _conditions_by_candidate(conds):
    out: dict[str, list[str]] = {}
    for c in conds:
        if c.status.startswith("undefined"):
            tag = "undefined"
        elif c.boundary:
            tag = "boundary"
        else:
            tag = "T" if c.holds else "F"
        out.setdefault(c.candidate, []).append(f"{c.name}:{tag}")
    return out


def cmd_analyze(args) -> int:
    p, src = _params(args)
    results = analyze(p, strict=False)
    by_name = {r.name: r for r in results}
    conds = efficiency_conditions(p, by_name)
    cond_tags = _conditions_by_candidate(conds)
    if not by_name["ybar"].ok:
        raise NonPositiveMSEError(f"baseline variance is not positive; PRE undefined ({by_name['ybar'].status})")
    base = by_name["ybar"].min_mse
    header = ["estimator", "mse", "pre", "bias", "constants", "conditions", "status"]
    rows, payload_rows = [], []
    for r in results:
        pr = pre(base, r.min_mse) if r.ok else None
        consts = ";".join(f"{k}={_g(v)}" for k, v in r.optimum_constants.items())
        tags = ";".join(cond_tags.get(r.name, []))
        rows.append([r.name, r.min_mse, pr, r.bias, consts, tags, r.status])
        payload_rows.append({**r.to_dict(), "pre": pr})
    out = _Output(args, "analyze")
    out.add("analyze", header, rows,
            {"params": p.to_dict(), "rows": payload_rows, "conditions": [c.to_dict() for c in conds]})
    print(_text_table(header, rows))
    out.write(src)
    return 0


def _table1_rows():
    pops = [("pop1", "pop1"), ("pop1-corrected", "pop1"), ("pop2", "pop2")]
    rows = []
    for preset, col in pops:
        res = {r.name: r for r in analyze(PARAM_PRESETS[preset], strict=False)}
        base = res["ybar"].min_mse
        for name, ref in REFERENCE_TABLE.items():
            r = res[name]
            ppre, pmse = ref[col]
            if not r.ok:
                rows.append([preset, name, None, pmse, None, None, ppre, None, True, r.status])
                continue
            ours_pre = pre(base, r.min_mse)
            dm = (r.min_mse - pmse) / pmse
            dp = (ours_pre - ppre) / ppre
            flagged = abs(dm) > FLAG_REL or abs(dp) > FLAG_REL
            rows.append([preset, name, r.min_mse, pmse, dm, ours_pre, ppre, dp, flagged, "ok"])
    return rows


def cmd_table1(args) -> int:
    header = ["population", "estimator", "mse", "ref_mse", "rel_diff_mse",
              "pre", "ref_pre", "rel_diff_pre", "flagged", "status"]
    rows = _table1_rows()
    out = _Output(args, "table1")
    out.add("table1", header, rows, {"rows": [dict(zip(header, r)) for r in rows],
                                     "flag_threshold": FLAG_REL})
    print(_text_table(header, rows))
    nflag = sum(1 for r in rows if r[8])
    print(f"\n{nflag} of {len(rows)} cells flagged (|relative difference| > {FLAG_REL:.0%})")
    for preset in ("pop1", "pop1-corrected", "pop2"):
        k = sum(1 for r in rows if r[0] == preset and r[8])
        print(f"  {preset}: {k} flagged")
    out.write({"presets": ["pop1", "pop1-corrected", "pop2"]})
    return 0


def _pop_spec(args) -> tuple[SyntheticPopulationSpec, dict]:
    if args.spec:
        spec = SyntheticPopulationSpec.from_dict(_read_json(args.spec))
        src = {"spec": args.spec}
    else:
        name = args.preset or "pop1"
        spec = get_population_spec(name)
        src = {"preset": name}
    return spec, src


def cmd_gen_pop(args) -> int:
    spec, src = _pop_spec(args)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    pop = generate_population(spec)
    out = _Output(args, "gen-pop")
    out.add_raw("population.csv", pop.to_csv())
    out.add_raw("population.json", _dumps({"manifest": MANIFEST, **pop.sidecar()}))
    rows = [[k, v] for k, v in pop.moments.items()]
    print(_text_table(["moment", "value"], rows))
    out.write(src, seed=spec.seed)
    return 0


def cmd_mc(args) -> int:
    spec, src = _pop_spec(args)
    cfg_d = _read_json(args.config) if args.config else {}
    if args.config:
        src["config"] = args.config
    if args.reps is not None:
        cfg_d["replications"] = args.reps
    if args.n is not None:
        cfg_d["n"] = args.n
    if args.seed is not None:
        cfg_d["master_seed"] = args.seed
    if args.mode is not None:
        cfg_d["error_means_zeroed"] = args.mode == "theory"
    if args.workers is not None:
        cfg_d["workers"] = args.workers
    cfg = MonteCarloConfig.from_dict(cfg_d)
    pop = generate_population(spec)
    status = 0
    try:
        res = run_monte_carlo(pop, cfg)
    except MonteCarloFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        res, status = exc.result, 4
    header = ["estimator", "empirical_bias", "empirical_mse", "monte_carlo_se",
              "analytic_mse", "ratio", "flagged"]
    rows = [[s.name, s.empirical_bias, s.empirical_mse, s.monte_carlo_se, s.analytic_mse, s.ratio, s.flagged]
            for s in res.stats.values()]
    out = _Output(args, "mc")
    out.add("mc_result", header, rows, res.to_dict())
    print(_text_table(header, rows))
    out.write(src, seed=cfg.master_seed)
    return status


def cmd_check_conditions(args) -> int:
    p, src = _params(args)
    conds = efficiency_conditions(p, yp_member=args.member)
    header = ["condition", "candidate", "reference", "lhs", "sense", "holds", "boundary",
              "mse_candidate", "mse_reference", "direct", "agrees", "status"]
    rows = [[c.name, c.candidate, c.reference, c.lhs, c.sense, c.holds, c.boundary,
             c.mse_candidate, c.mse_reference, c.direct, c.agrees, c.status] for c in conds]
    out = _Output(args, "check-conditions")
    out.add("conditions", header, rows, {"params": p.to_dict(), "conditions": [c.to_dict() for c in conds]})
    print(_text_table(header, rows))
    out.write(src)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualme", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV}; stdout only if unset)")
        sp.add_argument("--format", choices=("csv", "json", "both"), default="both")

    sp = sub.add_parser("analyze", help="analytic MSE / PRE table for one parameter set")
    sp.add_argument("--params", help="PopulationParams JSON file")
    sp.add_argument("--preset", choices=sorted(PARAM_PRESETS))
    sp.add_argument("--n", type=int, help="override the sample size")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("table1", help="reference comparison table vs computed values")
    common(sp)
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("check-conditions", help="the seven pairwise efficiency conditions")
    sp.add_argument("--params")
    sp.add_argument("--preset", choices=sorted(PARAM_PRESETS))
    sp.add_argument("--n", type=int)
    sp.add_argument("--member", default="Yp1", help="difference-cum-dual member to compare (Yp1..Yp7)")
    common(sp)
    sp.set_defaults(func=cmd_check_conditions)

    for name, func, help_ in (("gen-pop", cmd_gen_pop, "generate a synthetic population"),
                              ("mc", cmd_mc, "Monte Carlo validation of the analytic MSEs")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--spec", "--params", dest="spec", help="SyntheticPopulationSpec JSON file")
        sp.add_argument("--preset", choices=("pop1", "pop2"))
        sp.add_argument("--seed", type=int, help="population seed (gen-pop) or master seed (mc)")
        if name == "mc":
            sp.add_argument("--config", help="MonteCarloConfig JSON file")
            sp.add_argument("--reps", type=int)
            sp.add_argument("--n", type=int)
            sp.add_argument("--workers", type=int)
            mode = sp.add_mutually_exclusive_group()
            mode.add_argument("--theory-conformant", dest="mode", action="store_const", const="theory",
                              help="finite-population mean-zero errors (default)")
            mode.add_argument("--literal", dest="mode", action="store_const", const="literal",
                              help="errors drawn with the generator's nonzero means")
        common(sp)
        sp.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SingularityError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except MonteCarloFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
