"""Batch command-line front end.

Subcommands::

    signaltrader ingest    clean raw tables, write cleaned CSVs, print row counts
    signaltrader sweep     score the window grid per stock, write the sweep table
    signaltrader backtest  fit, predict and replay per model and stock
    signaltrader compare   aggregate finished backtests into comparison tables

Settings come from an INI file (``--config``) with flag overrides; flags win.
Without ``--data`` the bundled synthetic stocks are used.  The output
directory is, in order of precedence, ``--out``, ``$SIGNALTRADER_OUT``, the
config's ``out`` key, ``./signaltrader-out``.

Exit status: 0 success, 2 configuration or usage error, 3 data error, 4
runtime error (divergence, stagnation, all windows skipped).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .backtest import REPLAY_SPANS, BacktestConfig, run_backtest
from .data import DEFAULT_COLUMNS, SPLIT_MODES, ColumnMap, clean_with_summary, read_table, write_bars
from .errors import ConfigError, DataError, SchemaError, SignalTraderError, UsageError
from .models import MODEL_KINDS, TrainConfig, dumps_model
from .report import RunMetrics, aggregate, count_table, emit
from .strategy import DEFAULT_BUY_THRESHOLD, DEFAULT_SELL_THRESHOLD, STRATEGY_KINDS, ThresholdConfig
from .synthetic import bundled_stock_paths
from .window import DEFAULT_WINDOWS, sweep_windows

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4
OUT_ENV = "SIGNALTRADER_OUT"
DEFAULT_OUT = "signaltrader-out"
SPLIT_ALIASES = {"chrono": "chronological", "shuffle": "shuffled"}


def exit_code_for(exc: BaseException) -> int:
    # column names are configurable, so a missing column is a config mismatch
    if isinstance(exc, (ConfigError, SchemaError)):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_RUNTIME


@dataclass(frozen=True)
class RunConfig:
    data_paths: tuple[Path, ...] = ()
    columns: ColumnMap = DEFAULT_COLUMNS
    window: int = 366
    windows: tuple[int, ...] = DEFAULT_WINDOWS
    model_kinds: tuple[str, ...] = ("logistic",)
    strategy_kind: str = "simple"
    buy_threshold: float = DEFAULT_BUY_THRESHOLD
    sell_threshold: float = DEFAULT_SELL_THRESHOLD
    fee: float = 0.0
    notional: float = 1000.0
    split_mode: str = "chronological"
    split_fraction: float = 0.8
    replay: str = "window"
    seed: int = 0
    workers: int = 1
    out_dir: Path = Path(DEFAULT_OUT)
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self) -> None:
        """Raise :class:`ConfigError` for anything unusable; touches no files."""
        if not self.data_paths:
            raise ConfigError("no input tables given")
        for p in self.data_paths:
            if not p.is_file():
                raise ConfigError(f"input table {p} does not exist")
            if not os.access(p, os.R_OK):
                raise ConfigError(f"input table {p} is not readable")
        stems = [p.stem for p in self.data_paths]
        if len(set(stems)) != len(stems):
            raise ConfigError("input tables must have distinct file names")
        if not self.model_kinds:
            raise ConfigError("no model kind selected")
        for k in self.model_kinds:
            if k not in MODEL_KINDS:
                raise ConfigError(f"unknown model kind {k!r}; expected one of {', '.join(MODEL_KINDS)}")
        if self.window < 1 or any(w < 1 for w in self.windows) or not self.windows:
            raise ConfigError("windows must be positive day counts")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("split fraction must lie in (0, 1)")
        if self.split_mode not in SPLIT_MODES:
            raise ConfigError(f"unknown split mode {self.split_mode!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.out_dir.exists() and not self.out_dir.is_dir():
            raise ConfigError(f"output path {self.out_dir} is not a directory")
        for m in self.model_kinds:
            self.backtest_config(m)

    def backtest_config(self, model_kind: str) -> BacktestConfig:
        return BacktestConfig(
            model_kind=model_kind,
            strategy_kind=self.strategy_kind,
            thresholds=ThresholdConfig(self.buy_threshold, self.sell_threshold),
            fee=self.fee,
            notional=self.notional,
            split_fraction=self.split_fraction,
            split_mode=self.split_mode,
            replay=self.replay,
            train=replace(self.train, seed=self.seed),
        )

    def fingerprint(self) -> dict:
        """Every setting that affects results; paths and the output directory excluded."""
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("data_paths", "out_dir", "workers")}
        d["columns"] = self.columns.as_dict()
        d["windows"] = list(self.windows)
        d["model_kinds"] = list(self.model_kinds)
        d["train"] = replace(self.train, seed=self.seed).to_dict()
        return d

    def config_hash(self) -> str:
        text = json.dumps(self.fingerprint(), sort_keys=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]

    def header(self) -> str:
        return f"seed={self.seed} config_hash={self.config_hash()}"

    def meta(self) -> dict:
        return {"seed": self.seed, "config_hash": self.config_hash()}


# ---------------------------------------------------------------- config file

def _split_list(text: str) -> list[str]:
    return [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]


def _expand_data(items, base: Path) -> list[Path]:
    out = []
    for item in items:
        p = Path(item)
        if not p.is_absolute():
            p = base / p
        if p.is_dir():
            out.extend(sorted(p.glob("*.csv")))
        else:
            out.append(p)
    return out


def _num(section, key, conv):
    try:
        return conv(section[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {section[key]!r}") from exc


def load_config_file(path) -> dict:
    """Read an INI file into RunConfig keyword arguments.

    Sections: ``[run]`` for run settings, ``[columns]`` for header names,
    ``[train]`` for :class:`~signaltrader.models.TrainConfig` fields.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";",))
    cp.optionxform = str  # keep case: the SVM penalty field is `C`
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    known = {"run", "columns", "train"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(extra))}")
    kw: dict = {}
    base = path.parent
    if cp.has_section("run"):
        run = cp["run"]
        allowed = {
            "data", "window", "windows", "models", "strategy", "buy_threshold", "sell_threshold",
            "fee", "notional", "split", "split_fraction", "replay", "seed", "workers", "out",
        }
        bad = set(run) - allowed
        if bad:
            raise ConfigError(f"unknown [run] keys: {', '.join(sorted(bad))}")
        if "data" in run:
            kw["data_paths"] = tuple(_expand_data(_split_list(run["data"]), base))
        for key, conv in (("window", int), ("seed", int), ("workers", int)):
            if key in run:
                kw[key] = _num(run, key, conv)
        for key in ("buy_threshold", "sell_threshold", "fee", "notional", "split_fraction"):
            if key in run:
                kw[key] = _num(run, key, float)
        if "windows" in run:
            try:
                kw["windows"] = tuple(int(w) for w in _split_list(run["windows"]))
            except ValueError as exc:
                raise ConfigError(f"bad window grid {run['windows']!r}") from exc
        if "models" in run:
            kw["model_kinds"] = tuple(_split_list(run["models"]))
        if "strategy" in run:
            kw["strategy_kind"] = run["strategy"].strip()
        if "split" in run:
            kw["split_mode"] = SPLIT_ALIASES.get(run["split"].strip(), run["split"].strip())
        if "replay" in run:
            kw["replay"] = run["replay"].strip()
        if "out" in run:
            out = Path(run["out"])
            kw["out_dir"] = out if out.is_absolute() else base / out
    if cp.has_section("columns"):
        names = {f.name for f in fields(ColumnMap)}
        bad = set(cp["columns"]) - names
        if bad:
            raise ConfigError(f"unknown [columns] keys: {', '.join(sorted(bad))}")
        kw["columns"] = ColumnMap(**dict(cp["columns"]))
    if cp.has_section("train"):
        types = {f.name: f.type for f in fields(TrainConfig)}
        tkw = {}
        for key, text in cp["train"].items():
            if key not in types or key == "seed":
                raise ConfigError(f"unknown [train] key {key!r}")
            default = getattr(TrainConfig(), key)
            try:
                if isinstance(default, tuple):
                    tkw[key] = tuple(int(h) for h in _split_list(text))
                else:
                    tkw[key] = type(default)(text)
            except ValueError as exc:
                raise ConfigError(f"bad value for [train] {key}: {text!r}") from exc
        kw["train"] = TrainConfig(**tkw)
    return kw


# ---------------------------------------------------------------- arguments

def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="INI settings file")
    p.add_argument("--data", action="append", help="input CSV or directory of CSVs (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--model", action="append", help=f"one of {', '.join(MODEL_KINDS)}; repeatable or comma-separated")
    p.add_argument("--strategy", choices=STRATEGY_KINDS)
    p.add_argument("--buy-threshold", type=float)
    p.add_argument("--sell-threshold", type=float)
    p.add_argument("--fee", type=float, help="flat fee per transaction")
    p.add_argument("--notional", type=float, help="amount traded per transaction")
    p.add_argument("--window", type=int, help="training window in days")
    p.add_argument("--split", choices=sorted(SPLIT_ALIASES))
    p.add_argument("--replay", choices=REPLAY_SPANS, help="replay every window day or only the test days")
    p.add_argument("--workers", type=int, help="parallel per-stock runs")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="signaltrader", description="Daily-bar signal backtesting toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="clean raw tables")
    sw = sub.add_parser("sweep", parents=[common], help="search the training-window grid")
    sw.add_argument("--windows", help="comma-separated window grid")
    sub.add_parser("backtest", parents=[common], help="train, predict and replay")
    sub.add_parser("compare", parents=[common], help="aggregate finished backtests")
    return parser


def resolve_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    kw = load_config_file(args.config) if args.config else {}
    if args.data:
        kw["data_paths"] = tuple(_expand_data(args.data, Path.cwd()))
    if args.model:
        kw["model_kinds"] = tuple(m for item in args.model for m in _split_list(item))
    simple = {
        "seed": args.seed,
        "strategy_kind": args.strategy,
        "buy_threshold": args.buy_threshold,
        "sell_threshold": args.sell_threshold,
        "fee": args.fee,
        "notional": args.notional,
        "window": args.window,
        "replay": args.replay,
        "workers": args.workers,
    }
    kw.update({k: v for k, v in simple.items() if v is not None})
    if args.split:
        kw["split_mode"] = SPLIT_ALIASES[args.split]
    if getattr(args, "windows", None):
        try:
            kw["windows"] = tuple(int(w) for w in _split_list(args.windows))
        except ValueError as exc:
            raise ConfigError(f"bad window grid {args.windows!r}") from exc
    elif args.command == "sweep" and args.window is not None:
        kw["windows"] = (args.window,)
    if args.out is not None:
        kw["out_dir"] = args.out
    elif environ.get(OUT_ENV):
        kw["out_dir"] = Path(environ[OUT_ENV])
    kw.setdefault("data_paths", tuple(bundled_stock_paths()))
    cfg = RunConfig(**kw)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- commands

def _report_failure(stock: str, exc: BaseException) -> None:
    print(f"error [{stock}]: {exc}", file=sys.stderr)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_all(cfg: RunConfig):
    """Parse every input up front; schema problems abort before any write."""
    loaded, failures = {}, {}
    for p in cfg.data_paths:
        try:
            raw = read_table(p, cfg.columns)
        except SchemaError as exc:
            raise SchemaError(exc.column, f"{p}: {exc}") from exc
        except DataError as exc:
            failures[p.stem] = DataError(f"{p}: {exc}")
            continue
        try:
            loaded[p.stem] = clean_with_summary(raw)
        except DataError as exc:
            failures[p.stem] = DataError(f"{p}: {exc}")
    return loaded, failures


def _finish(failures: dict) -> int:
    for stock, exc in failures.items():
        _report_failure(stock, exc)
    if not failures:
        return EXIT_OK
    return max(exit_code_for(e) for e in failures.values())


def cmd_ingest(cfg: RunConfig) -> int:
    loaded, failures = _load_all(cfg)
    for stock, (bars, summary) in loaded.items():
        buf = io.StringIO()
        write_bars(bars, buf, cfg.columns, comment=cfg.header())
        _write(cfg.out_dir / "cleaned" / f"{stock}.csv", buf.getvalue())
    for stock, (bars, summary) in loaded.items():
        print(f"{stock}:")
        for line in summary.lines():
            print(f"  {line}")
    return _finish(failures)


def _parallel(cfg: RunConfig, fn, items):
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def cmd_sweep(cfg: RunConfig) -> int:
    loaded, failures = _load_all(cfg)
    bt = cfg.backtest_config(cfg.model_kinds[0])

    def one(stock):
        try:
            return stock, sweep_windows(loaded[stock][0], cfg.windows, bt), None
        except SignalTraderError as exc:
            return stock, None, exc

    results = {}
    for stock, res, exc in _parallel(cfg, one, list(loaded)):
        if exc is not None:
            failures[stock] = exc
        else:
            results[stock] = res
    for stock, res in results.items():
        _write(cfg.out_dir / "sweep" / f"{stock}.csv", res.to_csv(cfg.header()))
    if results:
        _write(cfg.out_dir / "sweep.csv", sweep_table_csv(results, cfg.windows, cfg.header()))
    for stock, res in results.items():
        print(f"{stock}: best window {res.best_window} ({res.best_revenue:.6f}%)")
    return _finish(failures)


def sweep_table_csv(results: dict, windows, comment: str | None = None) -> str:
    """Windows as rows, stocks as columns, revenue in percent (blank when skipped)."""
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    stocks = list(results)
    w.writerow(["window", *stocks])
    lookup = {s: {o.window: o for o in r.per_window} for s, r in results.items()}
    for win in windows:
        row = []
        for s in stocks:
            o = lookup[s].get(win)
            row.append("" if o is None or o.skipped else f"{o.revenue:.6f}")
        w.writerow([f"Longs={win}", *row])
    w.writerow(["best window", *(results[s].best_window for s in stocks)])
    return buf.getvalue()


def _metrics_doc(cfg: RunConfig, result) -> dict:
    doc = {"meta": {**cfg.meta(), "window": cfg.window}}
    doc["metrics"] = result.metrics.to_dict(include_time=False)
    doc["trades"] = result.log.summary()
    return doc


def cmd_backtest(cfg: RunConfig) -> int:
    loaded, failures = _load_all(cfg)
    jobs = [(m, s) for m in cfg.model_kinds for s in loaded]

    def one(job):
        model_kind, stock = job
        try:
            return job, run_backtest(loaded[stock][0], cfg.window, cfg.backtest_config(model_kind), stock), None
        except SignalTraderError as exc:
            return job, None, exc

    timings = {}
    done = []
    for (model_kind, stock), res, exc in _parallel(cfg, one, jobs):
        if exc is not None:
            failures[f"{model_kind}/{stock}"] = exc
            continue
        d = cfg.out_dir / "backtest" / model_kind
        _write(d / f"{stock}_trades.csv", res.log.to_csv(cfg.header()))
        _write(d / f"{stock}_metrics.json", json.dumps(_metrics_doc(cfg, res), indent=2, sort_keys=True) + "\n")
        _write(d / f"{stock}_model.json", dumps_model(res.model, seed=cfg.seed))
        timings[f"{model_kind}/{stock}"] = res.metrics.total_time
        done.append(res.metrics)
    if timings:
        tpath = cfg.out_dir / "backtest" / "timings.json"
        merged = json.loads(tpath.read_text()) if tpath.is_file() else {}
        merged.update(timings)
        _write(tpath, json.dumps(merged, indent=2, sort_keys=True) + "\n")
    for m in done:
        print(
            f"{m.model_kind:12s} {m.stock_id:10s} revenue {m.total_revenue:10.4f}%  "
            f"train {m.train_accuracy:.3f}  test {m.test_accuracy:.3f}  "
            f"buys {m.buys} sells {m.sells} total {m.total}"
        )
    return _finish(failures)


def collect_runs(out_dir: Path, model_kinds=None, stocks=None) -> list[RunMetrics]:
    """Load every metrics file under ``out_dir/backtest``, with timings if present."""
    root = Path(out_dir) / "backtest"
    tpath = root / "timings.json"
    timings = json.loads(tpath.read_text()) if tpath.is_file() else {}
    runs = []
    for path in sorted(root.glob("*/*_metrics.json")):
        doc = json.loads(path.read_text())
        m = doc["metrics"]
        if model_kinds is not None and m["model_kind"] not in model_kinds:
            continue
        if stocks is not None and m["stock_id"] not in stocks:
            continue
        runs.append(RunMetrics.from_dict(m, timings.get(f"{m['model_kind']}/{m['stock_id']}")))
    return runs


def cmd_compare(cfg: RunConfig) -> int:
    stocks = {p.stem for p in cfg.data_paths}
    runs = collect_runs(cfg.out_dir, set(cfg.model_kinds), stocks)
    if not runs:
        raise UsageError(f"no finished backtests under {cfg.out_dir / 'backtest'}; run `backtest` first")
    order = {s: i for i, s in enumerate(p.stem for p in cfg.data_paths)}
    runs.sort(key=lambda r: (cfg.model_kinds.index(r.model_kind), order[r.stock_id]))
    out = cfg.out_dir / "compare"
    for kind in cfg.model_kinds:
        group = [r for r in runs if r.model_kind == kind]
        if not group:
            continue
        strategies = sorted({r.strategy_kind for r in group})
        table = aggregate(group, title=f"{kind} / {', '.join(strategies)}")
        for fmt in ("csv", "json"):
            _write(out / f"{kind}.{fmt}", emit(table, fmt))
        print(emit(table, "csv"))
    counts = count_table(runs)
    for fmt in ("csv", "json"):
        _write(out / f"counts.{fmt}", emit(counts, fmt))
    print(emit(counts, "csv"))
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "sweep": cmd_sweep, "backtest": cmd_backtest, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except SignalTraderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
