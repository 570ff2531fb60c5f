"""Command-line front end: sweeps, optimization, figure data and self-checks.

Every command writes ``<output>.csv`` plus a ``<output>.meta.json`` sidecar
recording the fully resolved configuration; report-style commands
(``reproduce``, ``coincidence``, ``sweep``) also render a PNG next to the
CSV unless ``--no-plot`` is given.

Angles are given in units of pi (``--delta-b 0.5`` means pi/2).  Exactly
one of an explicit dark-count probability (``--dark``) or the InGaAs
efficiency trade-off (``--tradeoff``) is active at a time.

Exit codes: 0 success, 1 domain error, 2 argument parse error, 3 sweep
finished with per-point failures (partial output retained).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from datetime import datetime, timezone

from . import __version__, chain, optimize, plotting, rates
from .detector import DetectorParams, EvidenceUnderflowError, ImpossiblePatternError
from .fock import CircuitParams, oracle_single_swap

FIGURE_IDS = (
    "coincidence-vs-deltab",
    "visibility-vs-chi",
    "visibility-vs-distance",
    "perfect-detector",
    "keyrate-vs-distance",
    "tgw-comparison",
)

SWEEP_COLUMNS = [
    "n_swaps",
    "chi",
    "eta0",
    "dark",
    "alpha",
    "alpha0",
    "length_km",
    "delta_a_pi",
    "delta_b_pi",
    "truncation",
    "kappa",
    "visibility",
    "qber",
    "r_sifted",
    "r_shor_preskill",
    "r_net",
    "log10_r_net",
    "r_tgw",
    "truncation_deficit",
    "wall_time_s",
]

_DOMAIN_ERRORS = (
    ValueError,
    ImpossiblePatternError,
    EvidenceUnderflowError,
    chain.TruncationError,
)


@dataclass
class RunConfig:
    """Fully resolved run parameters; JSON config keys match field names."""

    command: str = ""
    chi: float = 0.1
    eta0: float = 0.7
    eta: float | None = None
    dark: float | None = None
    trade_off_a: float | None = None
    trade_off_b: float | None = None
    alpha: float = 0.25
    alpha0: float = 4.0
    length_km: float = 0.0
    delta_a_pi: float = 0.5
    delta_b_pi: float = 0.5
    n_swaps: int = 1
    truncation: int = 3
    kappa: float = 1.0
    sweep_param: str | None = None
    sweep_from: float | None = None
    sweep_to: float | None = None
    sweep_steps: int = 25
    output: str | None = None
    format: str = "csv"
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.format not in ("csv", "json"):
            raise ValueError(f"unsupported output format {self.format!r}")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be at least 1")

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        return max(1, int(os.environ.get("SWAPQKD_WORKERS", "1")))

    @property
    def use_trade_off(self) -> bool:
        return self.trade_off_a is not None

    def resolved_dark(self, eta0: float | None = None) -> float:
        if self.use_trade_off:
            return rates.ingaas_dark_count(
                self.eta0 if eta0 is None else eta0, self.trade_off_a, self.trade_off_b
            )
        return self.dark if self.dark is not None else 0.0

    def link(self) -> rates.LinkParams:
        return rates.LinkParams(
            alpha=self.alpha, alpha0=self.alpha0, length_km=self.length_km, kappa=self.kappa
        )

    def chain_eta(self) -> float:
        if self.eta is not None:
            return self.eta
        return chain.effective_eta(
            self.eta0, self.alpha, self.alpha0, self.length_km, self.n_swaps
        )

    def chain_config(self, **overrides) -> chain.ChainConfig:
        values = dict(
            n_swaps=self.n_swaps,
            chi=self.chi,
            eta=self.chain_eta(),
            dark=self.resolved_dark(),
            delta_a=self.delta_a_pi * math.pi,
            delta_b=self.delta_b_pi * math.pi,
            truncation=self.truncation,
        )
        values.update(overrides)
        return chain.ChainConfig(**values)


# ---------------------------------------------------------------------------
# output plumbing


def _format_cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "NA"
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
        return repr(value)
    return str(value)


def _parse_cell(text: str) -> float:
    return math.nan if text == "NA" else float(text)


def write_table(
    stem: str,
    rows: list[dict],
    columns: list[str],
    config: RunConfig,
    extra_meta: dict | None = None,
) -> list[str]:
    """Write ``<stem>.csv`` (or .json) and the metadata sidecar."""
    outputs = []
    if config.format == "json":
        data_path = f"{stem}.json"
        with open(data_path, "w", encoding="utf-8") as fh:
            json.dump(
                [{c: row.get(c) for c in columns} for row in rows], fh, indent=1
            )
            fh.write("\n")
    else:
        data_path = f"{stem}.csv"
        with open(data_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_cell(row.get(c)) for c in columns])
    outputs.append(data_path)
    meta = {
        "command": config.command,
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "columns": columns,
        "config": asdict(config),
    }
    if extra_meta:
        meta.update(extra_meta)
    meta_path = f"{stem}.meta.json"
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    outputs.append(meta_path)
    return outputs


def read_rows(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# argument parsing


def _add_physics_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--chi", type=float, help="pair-production parameter")
    parser.add_argument("--eta0", type=float, help="intrinsic detector efficiency")
    parser.add_argument(
        "--eta",
        type=float,
        help="effective per-detector efficiency (bypasses the link budget)",
    )
    parser.add_argument("--dark", type=float, help="explicit dark-count probability")
    parser.add_argument(
        "--tradeoff",
        action="store_true",
        help="slave the dark counts to eta0 via the InGaAs trade-off A*exp(B*eta0)",
    )
    parser.add_argument("--tradeoff-a", type=float, default=None, help="trade-off constant A")
    parser.add_argument("--tradeoff-b", type=float, default=None, help="trade-off constant B")
    parser.add_argument("--alpha", type=float, help="fiber loss in dB/km")
    parser.add_argument("--alpha0", type=float, help="distance-independent loss in dB")
    parser.add_argument("--length", type=float, dest="length_km", help="total distance in km")
    parser.add_argument(
        "--delta-a", type=float, dest="delta_a_pi", help="rotator angle at A in units of pi"
    )
    parser.add_argument(
        "--delta-b", type=float, dest="delta_b_pi", help="rotator angle at B in units of pi"
    )
    parser.add_argument("--n-swaps", type=int, help="number of concatenated swaps N")
    parser.add_argument("--truncation", type=int, help="photon-number cutoff per index")
    parser.add_argument("--kappa", type=float, help="reconciliation efficiency")


def _add_io_args(parser: argparse.ArgumentParser, plot_default: bool = False) -> None:
    parser.add_argument("--output", "-o", help="output stem (files <stem>.csv, <stem>.meta.json)")
    parser.add_argument("--format", choices=("csv", "json"), help="data file format")
    parser.add_argument("--config", help="JSON config file (RunConfig keys; flags override)")
    parser.add_argument("--workers", type=int, help="worker processes for sweeps")
    if plot_default:
        parser.add_argument(
            "--no-plot", action="store_true", help="skip rendering the PNG figure"
        )
    else:
        parser.add_argument("--plot", action="store_true", help="also render a PNG figure")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapqkd",
        description="Concatenated entanglement-swapping QKD calculator",
    )
    parser.add_argument("--version", action="version", version=f"swapqkd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("visibility", help="four-photon visibility at one parameter point")
    _add_physics_args(p)
    _add_io_args(p)
    p.add_argument("--certify", action="store_true", help="re-evaluate at truncation+1")
    p.add_argument(
        "--extremize", action="store_true", help="extremize the coincidence sum over delta_B"
    )

    p = sub.add_parser("coincidence", help="coincidence sums vs delta_B")
    _add_physics_args(p)
    _add_io_args(p, plot_default=True)
    p.add_argument("--from", dest="sweep_from", type=float, help="delta_B start (pi units)")
    p.add_argument("--to", dest="sweep_to", type=float, help="delta_B end (pi units)")
    p.add_argument("--steps", dest="sweep_steps", type=int, help="number of delta_B samples")

    p = sub.add_parser("keyrate", help="key-rate stack at one parameter point")
    _add_physics_args(p)
    _add_io_args(p)

    p = sub.add_parser("optimize", help="maximize the key rate over (chi, eta0)")
    _add_physics_args(p)
    _add_io_args(p)
    _add_optimizer_args(p)

    p = sub.add_parser("sweep", help="sweep one parameter, reporting the key-rate stack")
    _add_physics_args(p)
    _add_io_args(p, plot_default=True)
    p.add_argument(
        "--param",
        dest="sweep_param",
        choices=("chi", "eta0", "length", "dark"),
        help="swept parameter",
    )
    p.add_argument("--from", dest="sweep_from", type=float, help="sweep start")
    p.add_argument("--to", dest="sweep_to", type=float, help="sweep end")
    p.add_argument("--steps", dest="sweep_steps", type=int, help="number of points")

    p = sub.add_parser("tgw", help="repeaterless TGW bound")
    p.add_argument("--alpha", type=float, help="fiber loss in dB/km")
    p.add_argument("--length", type=float, dest="length_km", help="distance in km")
    _add_io_args(p)

    p = sub.add_parser("oracle-check", help="closed form vs brute-force oracle at N=1")
    _add_physics_args(p)
    _add_io_args(p)
    p.add_argument("--oracle-truncation", type=int, help="oracle cutoff (advanced)")
    p.add_argument("--chain-truncation", type=int, help="closed-form cutoff (advanced)")
    p.add_argument("--tolerance", type=float, default=1e-9, help="max-abs failure threshold")

    p = sub.add_parser("reproduce", help="emit the dataset behind a figure")
    p.add_argument("figure", choices=FIGURE_IDS, help="figure identifier")
    _add_physics_args(p)
    _add_io_args(p, plot_default=True)
    p.add_argument("--n-swaps-list", default=None, help="comma list of N values, e.g. 1,2,3")
    p.add_argument("--lengths", default=None, help="comma list of distances in km")
    _add_optimizer_args(p)

    return parser


def _add_optimizer_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--chi-min", type=float, default=0.01)
    parser.add_argument("--chi-max", type=float, default=0.5)
    parser.add_argument("--eta0-min", type=float, default=0.05)
    parser.add_argument("--eta0-max", type=float, default=0.95)
    parser.add_argument("--coarse-steps", type=int, default=32)
    parser.add_argument("--refine-levels", type=int, default=3)
    parser.add_argument("--refine-steps", type=int, default=9)
    parser.add_argument("--loop-truncation", type=int, default=2)
    parser.add_argument("--final-truncation", type=int, default=3)


def _load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    values["command"] = args.command
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None and f.name != "command":
            values[f.name] = flag
    if getattr(args, "tradeoff", False):
        values["trade_off_a"] = (
            args.tradeoff_a if args.tradeoff_a is not None else rates.INGAAS_A
        )
        values["trade_off_b"] = (
            args.tradeoff_b if args.tradeoff_b is not None else rates.INGAAS_B
        )
    config = RunConfig(**values)
    if config.use_trade_off and config.dark is not None:
        raise ValueError("give either an explicit --dark or the --tradeoff, not both")
    if config.trade_off_a is None and config.trade_off_b is not None:
        raise ValueError("trade-off constants must be given together")
    return config


def _default_dark(config: RunConfig) -> RunConfig:
    """Figure-caption default: explicit dark = 1e-5 when nothing was chosen."""
    if config.dark is None and not config.use_trade_off:
        return replace(config, dark=1e-5)
    return config


def _stem(config: RunConfig, default: str) -> str:
    return config.output if config.output else default


# ---------------------------------------------------------------------------
# commands


def cmd_visibility(args) -> int:
    config = _default_dark(resolve_config(args))
    cfg = config.chain_config()
    table = chain.coincidence_table(cfg)
    if table.q_max + table.q_min == 0.0:
        raise ImpossiblePatternError("no outer coincidences at this configuration")
    row = {
        "n_swaps": config.n_swaps,
        "chi": config.chi,
        "eta": cfg.eta,
        "dark": cfg.dark,
        "delta_a_pi": config.delta_a_pi,
        "delta_b_pi": config.delta_b_pi,
        "truncation": config.truncation,
        "visibility": table.visibility,
        "q_max": table.q_max,
        "q_min": table.q_min,
        "truncation_deficit": table.truncation_deficit,
    }
    columns = list(row)
    if args.extremize:
        row["visibility"] = chain.visibility(cfg, extremize_delta_b=True)
    if args.certify:
        v, v_next, converged = chain.certify_visibility(cfg)
        row.update(visibility=v, visibility_next=v_next, converged=converged)
        columns += ["visibility_next", "converged"]
    write_table(_stem(config, "visibility"), [row], columns, config)
    print(f"visibility = {row['visibility']:.6f}")
    return 0


def cmd_coincidence(args) -> int:
    config = _default_dark(resolve_config(args))
    start = config.sweep_from if config.sweep_from is not None else -1.0
    stop = config.sweep_to if config.sweep_to is not None else 1.0
    rows = []
    for k in range(config.sweep_steps):
        frac = k / (config.sweep_steps - 1) if config.sweep_steps > 1 else 0.0
        delta_b_pi = start + (stop - start) * frac
        table = chain.coincidence_table(
            config.chain_config(delta_b=delta_b_pi * math.pi)
        )
        rows.append(
            {
                "delta_b_pi": delta_b_pi,
                "q_corr": table.q_max,
                "q_anti": table.q_min,
                "q_1010": table.q_values[(1, 0, 1, 0)],
                "q_0101": table.q_values[(0, 1, 0, 1)],
                "q_1001": table.q_values[(1, 0, 0, 1)],
                "q_0110": table.q_values[(0, 1, 1, 0)],
                "truncation_deficit": table.truncation_deficit,
            }
        )
    stem = _stem(config, "coincidence")
    write_table(stem, rows, list(rows[0]), config)
    if not getattr(args, "no_plot", False):
        plotting.plot_coincidence(rows, f"{stem}.png")
    return 0


def _keyrate_row(config: RunConfig) -> dict:
    started = time.perf_counter()
    dark = config.resolved_dark()
    result = rates.evaluate_key_rate(
        config.n_swaps, config.chi, config.eta0, dark, config.link(), config.truncation
    )
    r_tgw = rates.tgw_bound(config.alpha, config.length_km) if config.length_km > 0 else None
    return {
        "n_swaps": config.n_swaps,
        "chi": config.chi,
        "eta0": config.eta0,
        "dark": dark,
        "alpha": config.alpha,
        "alpha0": config.alpha0,
        "length_km": config.length_km,
        "delta_a_pi": config.delta_a_pi,
        "delta_b_pi": config.delta_b_pi,
        "truncation": config.truncation,
        "kappa": config.kappa,
        "visibility": result.visibility,
        "qber": result.qber,
        "r_sifted": result.r_sifted,
        "r_shor_preskill": result.r_shor_preskill,
        "r_net": result.r_net,
        "log10_r_net": result.log10_r_net,
        "r_tgw": r_tgw,
        "truncation_deficit": result.truncation_deficit,
        "wall_time_s": time.perf_counter() - started,
    }


def cmd_keyrate(args) -> int:
    config = _default_dark(resolve_config(args))
    if config.eta is not None:
        raise ValueError("keyrate derives eta from the link budget; --eta is not accepted")
    row = _keyrate_row(config)
    write_table(_stem(config, "keyrate"), [row], SWEEP_COLUMNS, config)
    print(
        f"V = {row['visibility']:.6f}  QBER = {row['qber']:.6f}  "
        f"R_net = {row['r_net']:.6e}"
    )
    return 0


def _optimizer_spec(config: RunConfig, args) -> optimize.OptimizationSpec:
    return optimize.OptimizationSpec(
        n_swaps=config.n_swaps,
        length_km=config.length_km,
        link=rates.LinkParams(
            alpha=config.alpha, alpha0=config.alpha0, length_km=config.length_km,
            kappa=config.kappa,
        ),
        chi_range=(args.chi_min, args.chi_max),
        eta0_range=(args.eta0_min, args.eta0_max),
        coarse_steps=args.coarse_steps,
        refinement_levels=args.refine_levels,
        refine_steps=args.refine_steps,
        trade_off=(
            config.trade_off_a if config.use_trade_off else rates.INGAAS_A,
            config.trade_off_b if config.use_trade_off else rates.INGAAS_B,
        ),
        fixed_dark=config.dark,
        loop_truncation=args.loop_truncation,
        final_truncation=args.final_truncation,
    )


def _optimum_row(spec: optimize.OptimizationSpec, result: optimize.OptimizationResult) -> dict:
    upper = optimize.upper_bound_rate(spec)
    r_tgw = rates.tgw_bound(spec.link.alpha, spec.length_km) if spec.length_km > 0 else None
    return {
        "n_swaps": result.n_swaps,
        "length_km": result.length_km,
        "r_max": result.r_max,
        "log10_r_max": result.log10_r_max,
        "chi_opt": result.chi_opt,
        "eta_opt": result.eta_opt,
        "dark_at_opt": result.dark_at_opt,
        "upper_bound": upper,
        "r_tgw": r_tgw,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "boundary": result.boundary,
        "no_key": result.no_key,
    }


def cmd_optimize(args) -> int:
    config = resolve_config(args)
    spec = _optimizer_spec(config, args)
    result = optimize.maximize_key_rate(spec)
    row = _optimum_row(spec, result)
    write_table(_stem(config, "optimize"), [row], list(row), config)
    print(
        f"r_max = {result.r_max:.6e} at chi = {result.chi_opt:.4f}, "
        f"eta0 = {result.eta_opt:.4f}"
    )
    return 0


def _sweep_eval(payload: dict) -> dict:
    config = RunConfig(**payload)
    return _keyrate_row(config)


def cmd_sweep(args) -> int:
    config = _default_dark(resolve_config(args))
    if config.sweep_param is None or config.sweep_from is None or config.sweep_to is None:
        raise ValueError("sweep requires --param, --from and --to")
    field_name = {"length": "length_km"}.get(config.sweep_param, config.sweep_param)
    payloads = []
    for k in range(config.sweep_steps):
        frac = k / (config.sweep_steps - 1) if config.sweep_steps > 1 else 0.0
        value = config.sweep_from + (config.sweep_to - config.sweep_from) * frac
        point = asdict(replace(config, **{field_name: value}))
        payloads.append(point)
    workers = config.resolved_workers()
    rows: list[dict] = []
    failures = 0
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_guarded, payloads))
    else:
        outcomes = [_sweep_guarded(p) for p in payloads]
    for payload, (row, error) in zip(payloads, outcomes):
        if error is not None:
            failures += 1
            row = {c: None for c in SWEEP_COLUMNS}
            row.update(
                {
                    "n_swaps": payload["n_swaps"],
                    "chi": payload["chi"],
                    "eta0": payload["eta0"],
                    "alpha": payload["alpha"],
                    "alpha0": payload["alpha0"],
                    "length_km": payload["length_km"],
                }
            )
        rows.append(row)
    stem = _stem(config, "sweep")
    write_table(stem, rows, SWEEP_COLUMNS, config, {"failures": failures})
    if not getattr(args, "no_plot", False) and any(
        r.get("visibility") is not None for r in rows
    ):
        plotting.plot_sweep(
            [r for r in rows if r.get("visibility") is not None],
            field_name,
            f"{stem}.png",
        )
    return 3 if failures else 0


def _sweep_guarded(payload: dict) -> tuple[dict | None, str | None]:
    try:
        return _sweep_eval(payload), None
    except _DOMAIN_ERRORS + (ArithmeticError,) as exc:
        return None, str(exc)


def cmd_tgw(args) -> int:
    config = resolve_config(args)
    if config.length_km <= 0:
        raise ValueError("tgw requires a positive --length (the bound diverges at 0)")
    value = rates.tgw_bound(config.alpha, config.length_km)
    row = {"alpha": config.alpha, "length_km": config.length_km, "r_tgw": value}
    write_table(_stem(config, "tgw"), [row], list(row), config)
    print(f"R_TGW = {value:.6f}")
    return 0


def cmd_oracle_check(args) -> int:
    config = resolve_config(args)
    oracle_tr = args.oracle_truncation or config.truncation
    chain_tr = args.chain_truncation or config.truncation
    if oracle_tr != chain_tr:
        print(
            f"truncation mismatch: oracle {oracle_tr} vs closed form {chain_tr}",
            file=sys.stderr,
        )
        return 1
    if config.n_swaps != 1:
        raise ValueError("the brute-force oracle covers a single swap (N=1)")
    eta = config.eta if config.eta is not None else config.eta0
    dark = config.resolved_dark() if (config.dark is not None or config.use_trade_off) else 0.0
    circuit = CircuitParams(
        chi=config.chi,
        delta_a=config.delta_a_pi * math.pi,
        delta_b=config.delta_b_pi * math.pi,
        n_max=oracle_tr,
    )
    oracle_table = oracle_single_swap(circuit, DetectorParams.from_eta(eta, dark))
    chain_table = chain.coincidence_table(
        chain.ChainConfig(
            n_swaps=1,
            chi=config.chi,
            eta=eta,
            dark=dark,
            delta_a=circuit.delta_a,
            delta_b=circuit.delta_b,
            truncation=chain_tr,
        )
    )
    rows = []
    for pattern in sorted(oracle_table.q_values):
        q_o = oracle_table.q_values[pattern]
        q_c = chain_table.q_values[pattern]
        rows.append(
            {
                "pattern": "".join(map(str, pattern)),
                "q_oracle": q_o,
                "q_chain": q_c,
                "abs_diff": abs(q_o - q_c),
            }
        )
    max_abs = max(r["abs_diff"] for r in rows)
    rms = math.sqrt(math.fsum(r["abs_diff"] ** 2 for r in rows) / len(rows))
    write_table(
        _stem(config, "oracle_check"),
        rows,
        ["pattern", "q_oracle", "q_chain", "abs_diff"],
        config,
        {"max_abs": max_abs, "rms": rms, "tolerance": args.tolerance},
    )
    print(f"max-abs = {max_abs:.3e}  rms = {rms:.3e}")
    return 0 if max_abs <= args.tolerance else 1


# ---------------------------------------------------------------------------
# figure reproduction


def _parse_int_list(text: str | None, default: tuple[int, ...]) -> tuple[int, ...]:
    if not text:
        return default
    return tuple(int(x) for x in text.split(","))


def _parse_float_list(text: str | None, default: tuple[float, ...]) -> tuple[float, ...]:
    if not text:
        return default
    return tuple(float(x) for x in text.split(","))


def cmd_reproduce(args) -> int:
    config = resolve_config(args)
    figure = args.figure
    stem = _stem(config, figure.replace("-", "_"))
    plot = not getattr(args, "no_plot", False)
    if figure == "coincidence-vs-deltab":
        rows = _fig_coincidence(config, args)
        renderer = plotting.plot_coincidence
    elif figure == "visibility-vs-chi":
        rows = _fig_visibility_vs_chi(config, args)
        renderer = plotting.plot_visibility_vs_chi
    elif figure == "visibility-vs-distance":
        rows = _fig_visibility_vs_distance(config, args)
        renderer = plotting.plot_visibility_vs_distance
    elif figure == "perfect-detector":
        rows = _fig_perfect_detector(config, args)
        renderer = plotting.plot_perfect_detector
    elif figure == "keyrate-vs-distance":
        rows = _fig_keyrate_vs_distance(config, args)
        renderer = plotting.plot_keyrate_vs_distance
    else:
        rows = _fig_tgw_comparison(config, args)
        renderer = plotting.plot_tgw_comparison
    outputs = write_table(stem, rows, list(rows[0]), config, {"figure": figure})
    if plot:
        renderer(rows, f"{stem}.png")
        outputs.append(f"{stem}.png")
    print("wrote " + ", ".join(outputs))
    return 0


def _fig_coincidence(config: RunConfig, args) -> list[dict]:
    # figure parameters: chi=0.24, eta=0.04, dark=1e-5, delta_A=pi/2, N=3
    base = replace(
        config,
        chi=config.chi if _given(args, "chi") else 0.24,
        eta=config.eta if config.eta is not None else 0.04,
        dark=config.dark if config.dark is not None else 1e-5,
        n_swaps=config.n_swaps if _given(args, "n_swaps") else 3,
    )
    rows = []
    steps = config.sweep_steps
    for k in range(steps):
        delta_b_pi = -1.0 + 2.0 * k / (steps - 1)
        table = chain.coincidence_table(base.chain_config(delta_b=delta_b_pi * math.pi))
        rows.append(
            {
                "delta_b_pi": delta_b_pi,
                "n_swaps": base.n_swaps,
                "q_corr": table.q_max,
                "q_anti": table.q_min,
            }
        )
    return rows


def _given(args, name: str) -> bool:
    return getattr(args, name, None) is not None


def _fig_visibility_vs_chi(config: RunConfig, args) -> list[dict]:
    ns = _parse_int_list(args.n_swaps_list, (1, 2, 3))
    eta = config.eta if config.eta is not None else 0.04
    dark = config.dark if config.dark is not None else 1e-5
    chis = [0.05 + 0.025 * k for k in range(15)]
    rows = []
    for chi in chis:
        row: dict = {"chi": chi}
        for n in ns:
            row[f"visibility_n{n}"] = chain.visibility(
                chain.ChainConfig(
                    n_swaps=n, chi=chi, eta=eta, dark=dark, truncation=config.truncation
                )
            )
        rows.append(row)
    return rows


def _fig_visibility_vs_distance(config: RunConfig, args) -> list[dict]:
    ns = _parse_int_list(args.n_swaps_list, (1, 2, 3))
    lengths = _parse_float_list(args.lengths, tuple(float(50 * k) for k in range(25)))
    chi = config.chi if _given(args, "chi") else 0.1
    dark = config.dark if config.dark is not None else 1e-5
    rows = []
    for length in lengths:
        row: dict = {"length_km": length}
        for n in ns:
            eta = chain.effective_eta(config.eta0, config.alpha, config.alpha0, length, n)
            row[f"visibility_n{n}"] = chain.visibility(
                chain.ChainConfig(
                    n_swaps=n, chi=chi, eta=eta, dark=dark, truncation=config.truncation
                )
            )
        rows.append(row)
    return rows


def _fig_perfect_detector(config: RunConfig, args) -> list[dict]:
    lengths = _parse_float_list(args.lengths, tuple(float(50 * k) for k in range(21)))
    n = config.n_swaps if _given(args, "n_swaps") else 2
    chi = config.chi if _given(args, "chi") else 0.1
    rows = []
    for length in lengths:
        eta = chain.effective_eta(1.0, config.alpha, 0.0, length, n)
        rows.append(
            {
                "length_km": length,
                "n_swaps": n,
                "visibility": chain.visibility(
                    chain.ChainConfig(
                        n_swaps=n, chi=chi, eta=eta, dark=0.0, truncation=config.truncation
                    )
                ),
            }
        )
    return rows


def _fig_keyrate_vs_distance(config: RunConfig, args) -> list[dict]:
    ns = _parse_int_list(args.n_swaps_list, (1, 2, 3))
    lengths = _parse_float_list(args.lengths, tuple(float(50 * k) for k in range(1, 14)))
    rows = []
    for n in ns:
        spec = _optimizer_spec(replace(config, n_swaps=n), args)
        for result in optimize.sweep_distance(spec, list(lengths), workers=config.workers):
            if isinstance(result, Exception):
                raise result
            point_spec = spec.at_length(result.length_km)
            rows.append(_optimum_row(point_spec, result))
    return rows


def _fig_tgw_comparison(config: RunConfig, args) -> list[dict]:
    ns = _parse_int_list(args.n_swaps_list, (1, 2, 3))
    lengths = _parse_float_list(args.lengths, tuple(25.0 * k for k in range(1, 21)))
    rows = []
    for length in lengths:
        row: dict = {
            "length_km": length,
            "r_tgw": rates.tgw_bound(config.alpha, length),
        }
        for n in ns:
            spec = _optimizer_spec(replace(config, n_swaps=n, length_km=length), args)
            row[f"upper_bound_n{n}"] = optimize.upper_bound_rate(spec)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------


_COMMANDS = {
    "visibility": cmd_visibility,
    "coincidence": cmd_coincidence,
    "keyrate": cmd_keyrate,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "tgw": cmd_tgw,
    "oracle-check": cmd_oracle_check,
    "reproduce": cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
