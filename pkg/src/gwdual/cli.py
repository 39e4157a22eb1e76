"""Command-line entry point: ``gwdual <subcommand> [options]``.

Exit codes: 0 every check passed, 1 a verified violation (or a failed
statistical check), 2 usage or configuration error.

Every run is keyed by a master seed; offspring ``u_t(x)`` is drawn from the
Philox stream ``(seed, t, x)``, so outputs do not depend on ``GWD_THREADS``.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, asdict

from . import analysis, embedding, forest, laws
from .core import DEFAULT_WIDTH, GwdualError, ReproductionGrid
from .duality import dual_grid, verify_all_windows, DualityReport
from ._parallel import parallel_map

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


class ConfigError(GwdualError, ValueError):
    pass


@dataclass
class RunConfig:
    """Merged file + command-line settings; ``to_dict`` is the normalised echo."""

    law: dict = None
    window: tuple = (0, 8)
    width: int = DEFAULT_WIDTH
    seed: int = 0
    samples: int = None
    out: str = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        d.pop("out")
        extra = d.pop("extra")
        d.update({k: extra[k] for k in sorted(extra)})
        return {k: d[k] for k in sorted(d) if d[k] is not None}


def _load_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path} is not valid JSON: {exc}") from None


def _resolve_law(value):
    if value is None:
        return None
    if isinstance(value, str):
        value = _load_json(value, "law")
    law = laws.law_from_config(value)
    return law.to_config()


def build_config(args):
    doc = _load_json(args.config, "config") if getattr(args, "config", None) else {}
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {"law", "window", "width", "seed", "samples", "out"}
    cfg = RunConfig(extra={k: v for k, v in doc.items() if k not in known})
    for key in ("window", "width", "seed", "samples", "out"):
        if key in doc:
            setattr(cfg, key, doc[key])
    law = doc.get("law")
    if getattr(args, "law", None) is not None:
        law = args.law if not args.law.lstrip().startswith("{") else json.loads(args.law)
    cfg.law = _resolve_law(law)
    for key in ("seed", "width", "samples", "out"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "window", None) is not None:
        cfg.window = tuple(args.window)
    try:
        cfg.window = (int(cfg.window[0]), int(cfg.window[1]))
        cfg.width = int(cfg.width)
        cfg.seed = int(cfg.seed)
    except (TypeError, ValueError, IndexError):
        raise ConfigError("window must be two integers, width and seed integers") from None
    if cfg.window[0] >= cfg.window[1]:
        raise ConfigError(f"empty window [{cfg.window[0]}, {cfg.window[1]})")
    if cfg.width < 1:
        raise ConfigError("width must be positive")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must lie in [0, 2**64)")
    return cfg


def _clean(obj):
    # JSON has no infinities or NaN
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need_law(cfg):
    if cfg.law is None:
        raise ConfigError("a law is required (--law or 'law' in --config)")
    return cfg.law


def _grid_from(args, cfg):
    if getattr(args, "grid", None):
        try:
            return ReproductionGrid.load(args.grid)
        except FileNotFoundError:
            raise ConfigError(f"grid file not found: {args.grid}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"grid file {args.grid} is not valid JSON: {exc}") from None
    return laws.sample_grid(_need_law(cfg), cfg.window[0], cfg.window[1], cfg.width, cfg.seed)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    cfg = build_config(args)
    grid = laws.sample_grid(_need_law(cfg), cfg.window[0], cfg.window[1], cfg.width, cfg.seed)
    _emit(grid.to_json(), cfg.out)
    return EXIT_OK


def cmd_dual(args):
    cfg = build_config(args)
    grid = _grid_from(args, cfg)
    system = dual_grid(grid)
    if args.twofold:
        system = dual_grid(system)
    doc = system.to_dict()
    _emit(json.dumps(doc, separators=(",", ":")) + "\n", cfg.out)
    return EXIT_OK


def _verify_one(grid, max_length=None):
    siegmund, shift = verify_all_windows(grid, max_length)
    cross = forest.check_noncrossing(grid)
    flipped, details = forest.flip_correspondence(grid)
    flip = DualityReport("flip_correspondence", checked=details["compared"])
    if not flipped:
        flip.violations.append(details)
    return [siegmund, shift, cross, flip]


def _tag(report, seed):
    for v in report.violations:
        v.setdefault("seed", seed)
    return report


def cmd_verify(args):
    cfg = build_config(args)
    max_length = args.max_length if args.max_length is not None else cfg.extra.get("max_length")
    if args.grid:
        grids = [(None, _grid_from(args, cfg))]
    else:
        seeds = args.seeds if args.seeds is not None else cfg.extra.get("seeds", 1)
        seeds = list(range(cfg.seed, cfg.seed + int(seeds))) if isinstance(seeds, int) else list(seeds)
        law = _need_law(cfg)
        grids = [(s, None) for s in seeds]

    def run(item):
        seed, grid = item
        if grid is None:
            grid = laws.sample_grid(law, cfg.window[0], cfg.window[1], cfg.width, seed)
        return [_tag(r, seed) if seed is not None else r for r in _verify_one(grid, max_length)]

    results = parallel_map(run, grids, args.threads)
    totals = [DualityReport(name) for name in
              ("siegmund", "twofold_shift", "noncrossing", "flip_correspondence")]
    for reports in results:
        for total, rep in zip(totals, reports):
            total.merge(rep)
    passed = all(r.passed for r in totals)
    doc = {"config": cfg.to_dict(), "grids": len(grids), "pass": passed,
           "checks": [r.to_dict() for r in totals]}
    if args.grid:
        doc["grid_file"] = args.grid
    _emit(dumps(doc), cfg.out)
    return EXIT_OK if passed else EXIT_VIOLATION


def _table_law(cfg, args):
    if getattr(args, "probs", None):
        return laws.GwLawTable(args.probs, getattr(args, "tail_ratio", None))
    law = laws.law_from_config(_need_law(cfg))
    if isinstance(law, laws.IidGwLaw):
        return law.table
    if isinstance(law, laws.LinearFractionalLaw) and law.time_homogeneous:
        return law.cell(0, 1).to_table()
    raise ConfigError(f"this analysis needs an i.i.d. GW table, got family {law.family}")


def cmd_analyze(args):
    cfg = build_config(args)
    samples = cfg.samples if cfg.samples is not None else analysis.DEFAULT_SAMPLES
    doc = {"analysis": args.what, "config": cfg.to_dict()}
    passed = True
    if args.what == "qhat":
        table = _table_law(cfg, args)
        doc["qhat"] = analysis.qhat_recursion(table, args.max_rank).to_list()
        doc["p0"] = table.p0
    elif args.what == "dual-dist":
        table = _table_law(cfg, args)
        qhat = analysis.qhat_recursion(table, args.max_rank)
        doc["closed_form"] = {
            str(x): [analysis.dual_marginal_pmf(table, x, k, qhat) for k in range(args.kmax + 1)]
            for x in range(1, args.max_rank + 1)}
        rep = analysis.dual_law_check(table, args.max_rank, samples, cfg.seed,
                                      threads=args.threads)
        doc["reports"] = [rep.to_dict()]
        passed = rep.passed
    elif args.what == "theorem2":
        pairs = [tuple(args.pq)] if args.pq else [(0.5, 0.8), (0.3, 1.0), (0.9, 0.2)]
        reps = [analysis.theorem2_check(p, q, args.max_rank, samples, cfg.seed,
                                        threads=args.threads) for p, q in pairs]
        doc["reports"] = [r.to_dict() for r in reps]
        passed = all(r.passed for r in reps)
    elif args.what == "bd-cases":
        cases = [tuple(args.probs)] if args.probs else [(0.4, 0.6, 0.0), (0.3, 0.0, 0.7),
                                                         (0.0, 0.4, 0.6)]
        for case in cases:
            if len(case) != 3:
                raise ConfigError("bd-cases needs three probabilities p0 p1 p2")
        reps = [analysis.birthdeath_subcases_check(*case, samples=samples, seed=cfg.seed,
                                                   max_rank=args.max_rank,
                                                   threads=args.threads) for case in cases]
        doc["reports"] = [r.to_dict() for r in reps]
        passed = all(r.passed for r in reps)
    doc["pass"] = passed
    _emit(dumps(doc), cfg.out)
    return EXIT_OK if passed else EXIT_VIOLATION


def cmd_embed(args):
    cfg = build_config(args)
    rates = embedding.RateSchedule.parse(args.lam, args.mu)
    k = embedding.kendall_params(rates, args.t0, args.t1, args.panels)
    doc = {"config": {**cfg.to_dict(), **rates.to_config(), "t0": args.t0, "t1": args.t1,
                      "panels": args.panels}, **k.to_dict()}
    samples = cfg.samples if cfg.samples is not None else 0
    doc["mc_comparison"] = None
    passed = True
    if samples:
        doc["mc_comparison"] = embedding.mc_comparison(rates, args.t0, args.t1, samples,
                                                       cfg.seed, args.panels,
                                                       threads=args.threads)
        passed = doc["mc_comparison"]["pass"]
    doc["pass"] = passed
    _emit(dumps(doc), cfg.out)
    return EXIT_OK if passed else EXIT_VIOLATION


def cmd_forest(args):
    cfg = build_config(args)
    grid = _grid_from(args, cfg)
    graphs = []
    if args.kind in ("primary", "both"):
        graphs.append(forest.build_primary_forest(grid))
    if args.kind in ("dual", "both"):
        graphs.append(forest.build_dual_forest(grid))
    if args.format == "dot":
        text = forest.export_dot(graphs)
    else:
        law = grid.law.to_config() if hasattr(grid.law, "to_config") else grid.law
        meta = {"seed": grid.seed, "law": json.dumps(law, sort_keys=True),
                "window": f"[{grid.t_start}, {grid.t_end})", "width": grid.width}
        text = forest.export_svg(graphs, meta=meta, leaf_ticks=not args.no_ticks)
    _emit(text, cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(parser, samples=False, fmt=None):
    parser.add_argument("--config", help="JSON config file (law, window, width, seed, ...)")
    parser.add_argument("--law", help="law JSON file or inline JSON object")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--width", type=int, help="rank window W")
    parser.add_argument("--window", type=int, nargs=2, metavar=("A", "B"),
                        help="generations [A, B)")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--threads", type=int, help="worker cap (default: GWD_THREADS or 1)")
    if samples:
        parser.add_argument("--samples", type=int)
    if fmt:
        parser.add_argument("--format", choices=fmt, default=fmt[0])


def build_parser():
    p = argparse.ArgumentParser(prog="gwdual",
                                description="Rank-dependent GW grids and their pathwise duals.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="sample a reproduction grid and write it as JSON")
    _common(s, fmt=["json"])
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("dual", help="dual grid of a grid file (or of a fresh sample)")
    _common(s, fmt=["json"])
    s.add_argument("grid", nargs="?")
    s.add_argument("--twofold", action="store_true", help="dual of the dual")
    s.set_defaults(func=cmd_dual)

    s = sub.add_parser("verify", help="exact duality checks on a grid file or a seed sweep")
    _common(s, fmt=["json"])
    s.add_argument("grid", nargs="?")
    s.add_argument("--seeds", type=int, help="number of consecutive seeds from --seed")
    s.add_argument("--max-length", type=int, help="longest sub-window b - a to check")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("analyze", help="dual-law analysis reports")
    _common(s, samples=True, fmt=["json"])
    s.add_argument("what", choices=["qhat", "dual-dist", "theorem2", "bd-cases"])
    s.add_argument("--max-rank", type=int, default=4)
    s.add_argument("--kmax", type=int, default=10, help="closed-form pmf support (dual-dist)")
    s.add_argument("--probs", type=float, nargs="+", help="GW table P_0 P_1 ...")
    s.add_argument("--tail-ratio", type=float)
    s.add_argument("--pq", type=float, nargs=2, metavar=("P", "Q"))
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("embed", help="Kendall parameters of a birth-death process")
    _common(s, samples=True, fmt=["json"])
    s.add_argument("--lambda", dest="lam", required=True,
                   help="birth rate: number or 'bp:val,bp:val,...'")
    s.add_argument("--mu", required=True, help="death rate, same syntax")
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--t1", type=float, default=1.0)
    s.add_argument("--panels", type=int, default=embedding.DEFAULT_PANELS)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("forest", help="export primary and dual forests")
    _common(s, fmt=["svg", "dot"])
    s.add_argument("grid", nargs="?")
    s.add_argument("--kind", choices=["both", "primary", "dual"], default="both")
    s.add_argument("--no-ticks", action="store_true", help="omit leaf ticks")
    s.set_defaults(func=cmd_forest)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GwdualError, ValueError, KeyError, OSError) as exc:
        print(f"gwdual {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
