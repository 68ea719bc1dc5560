"""Command-line front end: ``symtsg build | check | bench``.

Exit codes: 0 success, 1 a threshold property failed under ``--assert``,
2 usage, IO, parse or per-property errors, 3 value iteration did not converge.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import itertools
import math
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from .checker import CheckError, ConvergenceError, SolverConfig, check
from .explicit import SparseGame, solve_explicit
from .lang import build_explicit, build_symbolic, load_model
from .logic import Context, PropertyError, parse_properties, parse_property
from .model import ExplicitTsg, ModelError, encode, parse_text
from .mtbdd import MtbddError

__all__ = ["CSV_COLUMNS", "RunReport", "main"]

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2, 3

CSV_COLUMNS = (
    "model",
    "params",
    "engine",
    "property",
    "states",
    "transitions",
    "nodes",
    "construct_time",
    "qual_time",
    "quant_time",
    "total_time",
    "strategy_size",
    "value",
    "error",
)

ENGINES = ("symbolic", "explicit")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    """One row of output: a construction (empty ``property``) or a property check."""

    model: str
    params: str
    engine: str
    property: str = ""
    states: int | None = None
    transitions: int | None = None
    nodes: int | None = None
    construct_time: float | None = None
    qual_time: float | None = None
    quant_time: float | None = None
    total_time: float | None = None
    strategy_size: int | None = None
    value: Any = None
    error: str = ""
    extra: dict = field(default_factory=dict, repr=False)

    def row(self) -> dict[str, str]:
        out = {}
        for c in CSV_COLUMNS:
            v = getattr(self, c)
            if c.endswith("_time"):
                out[c] = "" if v is None else f"{v:.6f}"
            elif c == "value":
                out[c] = format_value(v)
            else:
                out[c] = "" if v is None else str(v)
        return out


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    text = f"{v:.10g}"
    return text if any(c in text for c in ".en") else text + ".0"


# ----------------------------------------------------------------------
# model loading


def resolve_model(path: str) -> Path:
    """A file path, or the name of a bundled model (``dice``, ``example`` ...)."""
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("symtsg") / "models"
    for cand in (path, f"{path}.tsg"):
        q = bundled / cand
        if q.is_file():
            return Path(str(q))
    raise UsageError(f"cannot read model file {path!r}")


def parse_overrides(pairs: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in pairs:
        for part in item.split(","):
            if not part.strip():
                continue
            name, sep, value = part.partition("=")
            if not sep or not name.strip():
                raise UsageError(f"bad constant override {part!r}; expected NAME=value")
            out[name.strip()] = value.strip()
    return out


@dataclass
class Built:
    game: Any  # SymbolicTsg or SparseGame
    report: RunReport
    explicit: ExplicitTsg | None = None


def build(path: Path, overrides: dict[str, str], engine: str, label: str | None = None) -> Built:
    """Construct one engine's representation and its construction report."""
    params = ",".join(f"{k}={v}" for k, v in overrides.items())
    rep = RunReport(label or path.stem, params, engine)
    warnings: list[str] = []
    t0 = time.perf_counter()
    if path.suffix == ".txt":
        if overrides:
            raise UsageError("constant overrides need a guarded-command model")
        eg = parse_text(path.read_text(encoding="utf-8"))
        game = encode(eg) if engine == "symbolic" else SparseGame(eg)
    else:
        ast = load_model(path)
        if engine == "symbolic":
            game, eg = build_symbolic(ast, overrides, warnings=warnings), None
        else:
            eg = build_explicit(ast, overrides, warnings=warnings)
            game = SparseGame(eg)
    rep.construct_time = time.perf_counter() - t0
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if engine == "symbolic":
        rep.states, rep.transitions, rep.nodes = game.num_states, game.num_transitions(), game.node_count()
    else:
        eg = game.game
        rep.states, rep.transitions = eg.num_states, eg.num_transitions
    return Built(game, rep, eg)


# ----------------------------------------------------------------------
# checking


def _explicit_strategy_text(eg: ExplicitTsg, strat: dict[int, set[int]]) -> str:
    lines = []
    for s, acts in sorted(strat.items()):
        lhs = ",".join(f"{n}={_show(v)}" for n, v in zip(eg.state_vars, eg.states[s]))
        lines.append(f"({lhs}) -> {' '.join(eg.actions[a] for a in sorted(acts))}")
    return "\n".join(lines) + ("\n" if lines else "")


def _explicit_strategy_dot(eg: ExplicitTsg, strat: dict[int, set[int]]) -> str:
    lines = ["digraph strategy {"]
    for s, acts in sorted(strat.items()):
        label = ",".join(f"{n}={_show(v)}" for n, v in zip(eg.state_vars, eg.states[s]))
        lines.append(f'  s{s} [label="{label}"];')
        for a in sorted(acts):
            lines.append(f'  s{s} -> a{s}_{a};')
            lines.append(f'  a{s}_{a} [shape=box,label="{eg.actions[a]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _show(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def run_property(built: Built, src: str, formula, cfg: SolverConfig) -> tuple[RunReport, Any]:
    """Check one formula; returns the report and the raw result."""
    base = built.report
    rep = RunReport(base.model, base.params, base.engine, src, base.states, base.transitions, base.nodes)
    if built.report.engine == "symbolic":
        res = check(formula, built.game, cfg)
        if res.strategy is not None:
            rep.strategy_size = res.strategy.size()
    else:
        res = solve_explicit(built.game, formula, cfg)
        if res.strategy is not None:
            rep.strategy_size = sum(len(a) for a in res.strategy.values())
        elif res.profile is not None:
            rep.strategy_size = len(res.profile)
    st = res.stats
    rep.qual_time, rep.quant_time, rep.total_time = st.get("qual_time", 0.0), st.get("quant_time", 0.0), st.get("total_time", 0.0)
    rep.value = res.init_value
    rep.extra["iterations"] = st.get("iterations", 0)
    return rep, res


def _strategy_payload(built: Built, res, fmt: str) -> str | None:
    if built.report.engine == "symbolic":
        if res.strategy is None:
            return None
        return res.strategy.to_dot() if fmt == "dot" else res.strategy.to_text()
    strat = res.strategy
    if strat is None and res.profile is not None:
        strat = {s: {a} for s, a in res.profile.items()}
    if strat is None:
        return None
    eg = built.game.game
    return _explicit_strategy_dot(eg, strat) if fmt == "dot" else _explicit_strategy_text(eg, strat)


def _vector_lines(built: Built, res) -> list[str]:
    if built.report.engine == "symbolic":
        sym = built.game
        vec = res.vector(sym)
        names = sym.state_var_names
        vals = [sym.valuation(c) for c in sym.codes]
    else:
        eg = built.game.game
        vec = res.values if res.values is not None else res.sat
        names, vals = eg.state_vars, eg.states
    out = []
    for val, v in zip(vals, vec):
        lhs = ",".join(f"{n}={_show(x)}" for n, x in zip(names, val))
        out.append(f"  ({lhs}) = {format_value(v if res.values is not None else bool(v))}")
    return out


def _flat_stats(stats: dict):
    for k, v in sorted(stats.items()):
        if k == "runs":
            continue
        yield k, f"{v:.6f}" if isinstance(v, float) else v


def _strategy_path(base: str, index: int, many: bool) -> Path:
    p = Path(base)
    return p.with_name(f"{p.stem}.{index}{p.suffix}") if many else p


# ----------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    path = resolve_model(args.model)
    overrides = parse_overrides(args.const)
    for engine in _engines(args.engine):
        built = build(path, overrides, engine)
        rep = built.report
        print(f"engine: {engine}")
        print(f"states: {rep.states}")
        print(f"transitions: {rep.transitions}")
        if rep.nodes is not None:
            print(f"mtbdd nodes: {rep.nodes}")
        print(f"construction time: {rep.construct_time:.3f}s")
        if args.stats and engine == "symbolic":
            mgr = built.game.manager
            print(f"manager variables: {mgr.nvars}")
            print(f"manager live nodes: {len(mgr)}")
    return EXIT_OK


def _engines(choice: str) -> tuple[str, ...]:
    return ENGINES if choice == "both" else (choice,)


def _load_props(args, ctx: Context):
    props = []
    if args.props:
        try:
            text = Path(args.props).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read property file: {exc}") from None
        props += parse_properties(text, ctx)
    for src in args.prop or ():
        try:
            props.append((None, src, parse_property(src, ctx)))
        except PropertyError as exc:
            props.append((None, src, exc))
    if not props:
        raise UsageError("no properties given (use --props FILE or --prop TEXT)")
    return props


def cmd_check(args) -> int:
    path = resolve_model(args.model)
    overrides = parse_overrides(args.const)
    cfg = SolverConfig(
        epsilon=args.epsilon,
        max_iters=args.max_iters,
        relative=not args.absolute,
        tie_break="lexicographic-least",
    )
    status = EXIT_OK
    for engine in _engines(args.engine):
        built = build(path, overrides, engine)
        rep = built.report
        print(f"engine: {engine}, states: {rep.states}, transitions: {rep.transitions}" + (f", nodes: {rep.nodes}" if rep.nodes is not None else ""))
        props = _load_props(args, Context.of(built.game.game if engine == "explicit" else built.game))
        many = len(props) > 1 or len(_engines(args.engine)) > 1
        for i, (name, src, f) in enumerate(props):
            title = f'"{name}": {src}' if name else src
            print(f"\n{title}")
            if isinstance(f, PropertyError):
                print(f"error: {f}", file=sys.stderr)
                status = max(status, EXIT_USAGE)
                continue
            try:
                prep, res = run_property(built, src, f, cfg)
            except ConvergenceError as exc:
                print(f"error: {exc}", file=sys.stderr)
                status = EXIT_DIVERGED
                continue
            except (CheckError, PropertyError, MtbddError) as exc:
                print(f"error: {exc}", file=sys.stderr)
                status = max(status, EXIT_USAGE) if status != EXIT_DIVERGED else status
                continue
            print(f"  result: {format_value(prep.value)}")
            print(f"  iterations: {prep.extra['iterations']}")
            print(f"  time: qual {prep.qual_time:.3f}s, quant {prep.quant_time:.3f}s, total {prep.total_time:.3f}s")
            if prep.strategy_size is not None:
                print(f"  strategy size: {prep.strategy_size}")
            if args.stats:
                print("\n".join(f"  {k}={v}" for k, v in _flat_stats(res.stats)))
            if args.vector:
                print("\n".join(_vector_lines(built, res)))
            if args.export_strategy:
                payload = _strategy_payload(built, res, args.strategy_format)
                if payload is None:
                    print("  (no strategy for this property)")
                else:
                    out = _strategy_path(args.export_strategy, i if engine == "symbolic" else i + len(props), many)
                    try:
                        out.write_text(payload, encoding="utf-8")
                    except OSError as exc:
                        raise UsageError(f"cannot write strategy: {exc}") from None
                    print(f"  strategy written to {out}")
            if args.assert_ and isinstance(prep.value, bool) and not prep.value and status == EXIT_OK:
                status = EXIT_ASSERT
    return status


# ----------------------------------------------------------------------
# benchmark harness


@dataclass
class BenchEntry:
    name: str
    model: Path
    grid: list[dict[str, str]]
    properties: list[tuple[str, str]]  # (column label, source)
    engines: tuple[str, ...]


def read_manifest(path: Path) -> list[BenchEntry]:
    """INI manifest: one section per model.

    Keys: ``model`` (file relative to the manifest), ``properties`` (a
    ``.props`` file, relative too), ``engines`` (default both) and
    ``param.NAME = v1, v2`` grids, expanded as a product in key order.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read manifest: {exc}") from None
    entries = []
    for sec in cp.sections():
        s = cp[sec]
        if "model" not in s:
            raise UsageError(f"manifest section [{sec}] has no model")
        names, values = [], []
        for k in s:
            if k.startswith("param."):
                names.append(k[len("param."):])
                values.append([v.strip() for v in s[k].split(",") if v.strip()])
        grid = [dict(zip(names, combo)) for combo in itertools.product(*values)]
        props = []
        if "properties" in s:
            ptext = (path.parent / s["properties"]).read_text(encoding="utf-8")
            props = [(name or src, src) for name, src, _ in parse_properties(ptext)]
        engines = tuple(e.strip() for e in s.get("engines", "symbolic, explicit").split(",") if e.strip())
        for e in engines:
            if e not in ENGINES:
                raise UsageError(f"unknown engine {e!r} in [{sec}]")
        entries.append(BenchEntry(sec, path.parent / s["model"], grid, props, engines))
    return entries


def bench(entries: Sequence[BenchEntry], cfg: SolverConfig) -> list[RunReport]:
    """Rows in manifest order: instance, then engine, then construction and properties."""
    rows: list[RunReport] = []
    for ent in entries:
        for params in ent.grid:
            pstr = ",".join(f"{k}={v}" for k, v in params.items())
            for engine in ent.engines:
                try:
                    built = build(ent.model, params, engine, label=ent.name)
                except (ModelError, MtbddError, UsageError, OSError) as exc:
                    rows.append(RunReport(ent.name, pstr, engine, error=str(exc)))
                    for label, _ in ent.properties:
                        rows.append(RunReport(ent.name, pstr, engine, label, error="build failed"))
                    continue
                rows.append(built.report)
                ctx = Context.of(built.game.game if engine == "explicit" else built.game)
                for label, src in ent.properties:
                    try:
                        rep, _ = run_property(built, label, parse_property(src, ctx), cfg)
                    except (CheckError, PropertyError, MtbddError) as exc:
                        b = built.report
                        rep = RunReport(ent.name, pstr, engine, label, b.states, b.transitions, b.nodes, error=str(exc))
                    rows.append(rep)
    return rows


def write_csv(rows: Sequence[RunReport], out) -> None:
    w = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.row())


def cmd_bench(args) -> int:
    models = Path(args.models) if args.models else Path(str(resources.files("symtsg") / "models"))
    manifest = Path(args.manifest) if args.manifest else models / "bench.ini"
    entries = read_manifest(manifest)
    if args.only:
        entries = [e for e in entries if e.name in args.only]
    cfg = SolverConfig(epsilon=args.epsilon, max_iters=args.max_iters, tie_break="lexicographic-least")
    rows = bench(entries, cfg)
    if args.out == "-":
        write_csv(rows, sys.stdout)
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                write_csv(rows, fh)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from None
        print(f"{len(rows)} rows written to {args.out}")
    return EXIT_OK


# ----------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symtsg", description="Symbolic model checking of turn-based stochastic games.")
    sub = ap.add_subparsers(dest="command", required=True)

    def model_args(p):
        p.add_argument("model", help="model file (.tsg or explicit .txt) or bundled model name")
        p.add_argument("-c", "--const", action="append", default=[], metavar="NAME=VALUE", help="constant override (repeatable, or comma separated)")
        p.add_argument("--engine", choices=("symbolic", "explicit", "both"), default="symbolic")

    def solver_args(p):
        p.add_argument("--epsilon", type=float, default=1e-6, help="value-iteration stopping threshold")
        p.add_argument("--max-iters", type=int, default=100_000)

    pb = sub.add_parser("build", help="construct a model and print its statistics")
    model_args(pb)
    pb.add_argument("--stats", action="store_true", help="also print decision-diagram manager statistics")
    pb.set_defaults(func=cmd_build)

    pc = sub.add_parser("check", help="check properties on a model")
    model_args(pc)
    solver_args(pc)
    pc.add_argument("--props", help="property file, one property per line")
    pc.add_argument("--prop", action="append", help="a property given inline (repeatable)")
    pc.add_argument("--absolute", action="store_true", help="absolute instead of relative convergence test")
    pc.add_argument("--vector", action="store_true", help="print the value of every reachable state")
    pc.add_argument("--stats", action="store_true", help="print solver statistics as key=value lines")
    pc.add_argument("--export-strategy", metavar="PATH", help="write the synthesised strategy here")
    pc.add_argument("--strategy-format", choices=("text", "dot"), default="text")
    pc.add_argument("--assert", dest="assert_", action="store_true", help="exit with code 1 if a threshold property fails in the initial state")
    pc.set_defaults(func=cmd_check)

    pn = sub.add_parser("bench", help="run a benchmark manifest and write CSV")
    pn.add_argument("--models", help="model directory (default: the bundled models)")
    pn.add_argument("--manifest", help="INI manifest (default: MODELS/bench.ini)")
    pn.add_argument("--out", default="-", help="CSV output path, '-' for stdout")
    pn.add_argument("--only", action="append", help="run only this manifest section (repeatable)")
    solver_args(pn)
    pn.set_defaults(func=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if getattr(args, "epsilon", 1.0) <= 0 or getattr(args, "max_iters", 1) < 1:
            raise UsageError("--epsilon must be positive and --max-iters at least 1")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ModelError, MtbddError, CheckError, PropertyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
