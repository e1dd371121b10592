"""Command-line front end: parameter ingestion, scenario dispatch, and
bit-stable CSV/JSON emission of reports, sweeps, and reproduction targets.

Determinism contract: the same command line (same flags, same seed)
produces byte-identical output across runs and across thread counts.
CSV floats use the shortest round-trip decimal form (repr); JSON objects
keep a fixed key order.  Exit codes: 0 success, 1 computation error,
2 validation error; every error message names the offending flag or
field.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Callable, Sequence

import numpy as np

from .core import (
    ChainConfig,
    PhysParams,
    SparseState,
    State,
    make_chain,
    make_named_state,
)
from .errors import ComputationError, ValidationError
from .measurement import (
    classical_fisher,
    jx_distribution,
    parity_distribution,
    parity_expectation,
)
from .noise import (
    NoiseModel,
    TrajectoryEnsemble,
    apply_channel,
    coherence_factor,
    correlation_integral,
    mc_coherence_magnitude,
    steady_twirl,
)
from .qfi import (
    FisherReport,
    qfi_dfs_subspace,
    qfi_dicke,
    qfi_general,
    qfi_max_entangled,
    qfi_max_separable,
    qfi_noisy_ghz,
    qfi_noisy_psim,
    qfi_product_steady,
    qfi_pure,
)
from .scenarios import (
    PlacementSpec,
    TableOne,
    brute_force_placement_search,
    critical_time,
    generate_placement,
    optimal_time_ghz,
    sweep_fig3,
    sweep_fig4,
    sweep_fig5,
    table1,
)

CSV_MAGIC = "# gradqfi v1"

COMMANDS = (
    "qfi", "cfi", "parity", "noise-scan", "tcrit",
    "reproduce", "validate", "placement-search",
)
TARGETS = ("fig3", "fig4", "fig5a", "fig5b", "table1")
SCENARIO_NAMES = ("known-b0", "unknown-b0", "noisy")

# flag metadata: long name -> (python kind, help text); the config file
# uses the same names, flags override file values
_INT_FLAGS = {
    "n": "number of qubits",
    "k": "excitation number for odf/dicke states (default n//2)",
    "m": "branch size for the psi-m state",
    "n-traj": "Monte Carlo trajectory count",
    "seed": "64-bit RNG seed",
    "grid-points": "grid points per qubit for placement-search",
    "points": "number of samples on the scan axis",
    "n-max": "largest qubit count for the fig5 sweeps",
}
_FLOAT_FLAGS = {
    "length": "chain interval length L in meters",
    "x0": "reference position x0 in meters",
    "theta": "relative phase for the ghz-theta state, radians",
    "gamma": "gyromagnetic ratio gamma (rad/s/T)",
    "gamma-prime": "noise coupling gamma' (rad/s/T)",
    "b0": "offset field B0 at x0 (T)",
    "grad": "field gradient G (T/m)",
    "t": "probing time in seconds",
    "delta-e": "noise fluctuation strength Delta E (T)",
    "tau-c": "noise correlation time tau_c in seconds",
    "t-max": "upper end of a time scan in seconds",
    "gamma-t": "sets gamma to this value and t = 1 (conflicts with --gamma/--t)",
}
_BOOL_FLAGS = {
    "dimensionless": "dimensionless mode: sets gamma = t = 1",
    "factor-out-gamma-t": "report QFI divided by (gamma t)^2",
    "normalized-index": "index-normalized tanh/tan placements (argument 2i/n - 1)",
}
_CHOICE_FLAGS = {
    "placement": ("equidistant", "all-at-end", "half-half", "tanh", "tan", "explicit"),
    "state": ("ghz", "ghz-theta", "product", "odf", "dicke", "psi-m"),
    "format": ("csv", "json"),
    "scenario": SCENARIO_NAMES,
    "objective": (
        "entangled-known-b0", "separable-known-b0", "dfs-max", "product-steady"
    ),
    "observable": ("parity-x", "jx"),
}
_STR_FLAGS = {
    "positions": "comma-separated qubit positions (with --placement explicit)",
    "out": "output file path (default: stdout; reproduce: <target>.csv)",
    "config": "flat key=value config file mirroring the flags",
}

_GLOBAL_DEFAULTS = {
    "n": 4, "length": 1.0, "x0": 0.0, "placement": "equidistant",
    "positions": None, "normalized_index": False, "state": "ghz",
    "k": None, "m": None, "theta": 0.0,
    "gamma": 1.0, "gamma_prime": 1.0, "b0": 0.0, "grad": 0.0, "t": 1.0,
    "delta_e": 0.0, "tau_c": 1.0,
    "n_traj": 10000, "seed": 12345,
    "scenario": "known-b0", "objective": "dfs-max", "observable": "parity-x",
    "grid_points": 5, "points": None, "t_max": None, "n_max": 1000,
    "format": None, "out": None,
    "dimensionless": False, "factor_out_gamma_t": False, "gamma_t": None,
}

_TARGET_DEFAULTS = {
    "fig3": {
        "n": 50, "length": 1.0, "gamma_prime": 2.0 * math.pi * 50.0,
        "delta_e": 1.0, "tau_c": 1.0, "points": 20001, "t_max": 0.02,
    },
    "fig4": {"n": 100, "length": 1.0},
    "fig5a": {"length": 1.0},
    "fig5b": {"length": 1.0},
    "table1": {"n": 4, "length": 3.0},
}

_FORMAT_DEFAULTS = {
    "qfi": "json", "cfi": "json", "parity": "json", "tcrit": "json",
    "placement-search": "json", "noise-scan": "csv", "reproduce": "csv",
}


# ----------------------------------------------------------------------
# emission
# ----------------------------------------------------------------------


def _fmt_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def emit_csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [CSV_MAGIC, ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _deliver(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeError(f"--out {out_path}: {exc}") from exc
    print(f"wrote {out_path}")


# ----------------------------------------------------------------------
# configuration resolution
# ----------------------------------------------------------------------


def _parse_positions(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ValidationError(
            f"--positions must be a comma-separated list of numbers, got {text!r}"
        ) from exc
    if not values:
        raise ValidationError("--positions must contain at least one number")
    return values


def _parse_bool(name: str, text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValidationError(f"config key {name}: expected a boolean, got {text!r}")


def _read_config_file(path: str) -> dict:
    """Flat key=value file; keys use the flag spelling without dashes prefix."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ValidationError(f"--config {path}: {exc}") from exc
    values: dict = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValidationError(
                f"--config {path}:{lineno}: expected key=value, got {stripped!r}"
            )
        key, _, text = stripped.partition("=")
        key = key.strip()
        text = text.strip()
        if key in _INT_FLAGS:
            try:
                values[key] = int(text)
            except ValueError as exc:
                raise ValidationError(
                    f"config key {key}: expected an integer, got {text!r}"
                ) from exc
        elif key in _FLOAT_FLAGS:
            try:
                values[key] = float(text)
            except ValueError as exc:
                raise ValidationError(
                    f"config key {key}: expected a number, got {text!r}"
                ) from exc
        elif key in _BOOL_FLAGS:
            values[key] = _parse_bool(key, text)
        elif key in _CHOICE_FLAGS:
            if text not in _CHOICE_FLAGS[key]:
                raise ValidationError(
                    f"config key {key}: must be one of {_CHOICE_FLAGS[key]}, got {text!r}"
                )
            values[key] = text
        elif key == "positions":
            values[key] = _parse_positions(text)
        elif key == "out":
            values[key] = text
        else:
            raise ValidationError(f"--config {path}: unknown key {key!r}")
    return values


class RunConfig:
    """Fully resolved run settings: flag > config file > target default > default."""

    def __init__(self, command: str, target: str | None, args: argparse.Namespace):
        self.command = command
        self.target = target
        file_values = _read_config_file(args.config) if args.config else {}

        def pick(name: str):
            flag = name.replace("_", "-")
            cli_value = getattr(args, name, None)
            if cli_value is not None:
                return cli_value
            if flag in file_values:
                return file_values[flag]
            if target is not None and name in _TARGET_DEFAULTS.get(target, {}):
                return _TARGET_DEFAULTS[target][name]
            return _GLOBAL_DEFAULTS[name]

        for name in _GLOBAL_DEFAULTS:
            setattr(self, name, pick(name))

        explicit = lambda name: getattr(args, name, None) is not None or (
            name.replace("_", "-") in file_values
        )
        if self.gamma_t is not None:
            if explicit("gamma") or explicit("t"):
                raise ValidationError(
                    "--gamma-t conflicts with --gamma/--t; it sets gamma and t = 1"
                )
            self.gamma = float(self.gamma_t)
            self.t = 1.0
        if self.dimensionless:
            if explicit("gamma") or explicit("t") or self.gamma_t is not None:
                raise ValidationError(
                    "--dimensionless conflicts with --gamma/--t/--gamma-t; "
                    "it sets gamma = t = 1"
                )
            self.gamma = 1.0
            self.t = 1.0

        if isinstance(self.positions, str):
            self.positions = _parse_positions(self.positions)
        if self.positions is not None and self.placement != "explicit":
            if explicit("placement") or command == "reproduce":
                raise ValidationError("--positions needs --placement explicit")
            self.placement = "explicit"
        if self.placement == "explicit":
            if self.positions is None:
                raise ValidationError("--placement explicit needs --positions")
            if explicit("n") and self.n != len(self.positions):
                raise ValidationError(
                    f"--n {self.n} does not match the {len(self.positions)} "
                    "values in --positions"
                )
            self.n = len(self.positions)

        if self.n < 1:
            raise ValidationError("n must be ≥ 1")
        if self.n_traj < 1:
            raise ValidationError(f"--n-traj must be ≥ 1, got {self.n_traj}")
        if not 0 <= self.seed < (1 << 64):
            raise ValidationError(f"--seed must fit in 64 bits, got {self.seed}")
        if command == "validate" and not explicit("n_traj"):
            self.n_traj = 20000
        if self.format is None:
            self.format = _FORMAT_DEFAULTS.get(command, "json")
        if command == "reproduce" and self.format != "csv":
            raise ValidationError("reproduce emits CSV only; drop --format")

    # -- builders ------------------------------------------------------

    def chain(self) -> ChainConfig:
        if self.placement == "explicit":
            return make_chain(self.positions, self.x0)
        spec = PlacementSpec(
            self.placement, self.n, 0.0, self.length,
            normalized_index=self.normalized_index,
        )
        return generate_placement(spec, x0=self.x0)

    def params(self) -> PhysParams:
        return PhysParams(
            gamma=self.gamma, b0=self.b0, grad=self.grad, t=self.t,
            gamma_prime=self.gamma_prime, delta_e=self.delta_e, tau_c=self.tau_c,
        )

    def k_value(self) -> int:
        return self.n // 2 if self.k is None else self.k

    def m_value(self) -> int:
        if self.m is None:
            raise ValidationError(f"--m is required for --state {self.state}")
        return self.m

    def named_state(self) -> SparseState:
        if self.state in ("odf", "dicke"):
            return make_named_state(self.state, self.n, k=self.k_value())
        if self.state == "psi-m":
            return make_named_state("psi-m", self.n, m=self.m_value())
        return make_named_state(self.state, self.n, theta=self.theta)

    def ensemble(self) -> TrajectoryEnsemble:
        return TrajectoryEnsemble(self.n_traj, seed=self.seed)

    def echo(self) -> dict:
        keys = (
            "command", "scenario", "state", "k", "m", "theta",
            "n", "placement", "length", "x0", "positions", "normalized_index",
            "gamma", "b0", "grad", "t", "gamma_prime", "delta_e", "tau_c",
            "observable", "seed", "n_traj",
        )
        data = {}
        for key in keys:
            value = getattr(self, key, None) if key != "command" else self.command
            if key == "positions" and value is not None:
                value = list(value)
            data[key] = value
        return data


# ----------------------------------------------------------------------
# scenario dispatch
# ----------------------------------------------------------------------


def _branch_sectors(cfg: RunConfig) -> tuple[int, int] | None:
    """Excitation sectors occupied by the named state; None = spans many."""
    if cfg.state in ("ghz", "ghz-theta"):
        return (0, cfg.n)
    if cfg.state == "odf":
        k = cfg.k_value()
        return (k, cfg.n - k)
    if cfg.state == "psi-m":
        m = cfg.m_value()
        return (m, cfg.n - m)
    if cfg.state == "dicke":
        k = cfg.k_value()
        return (k, k)
    return None


def _check_offset_insensitive(cfg: RunConfig) -> None:
    sectors = _branch_sectors(cfg)
    if sectors is None or sectors[0] != sectors[1]:
        detail = (
            "spans many excitation sectors" if sectors is None
            else f"spans excitation sectors {sectors[0]} and {sectors[1]}"
        )
        raise ValidationError(
            f"--scenario unknown-b0 needs an offset-insensitive probe (one "
            f"excitation sector); --state {cfg.state} {detail}; use dicke, or "
            "odf/psi-m with k = m = n/2"
        )


def _state_qfi(cfg: RunConfig, config: ChainConfig, params: PhysParams) -> FisherReport:
    if cfg.state in ("ghz", "ghz-theta", "psi-m"):
        return qfi_pure(cfg.named_state(), config, params)
    if cfg.state == "product":
        return qfi_max_separable(config, params)
    if cfg.state == "odf":
        return qfi_dfs_subspace(config, params, cfg.k_value())[0]
    return qfi_dicke(config, params, cfg.k_value())


def cmd_qfi(cfg: RunConfig) -> int:
    config = cfg.chain()
    params = cfg.params()
    if cfg.scenario == "noisy":
        if cfg.state in ("ghz", "ghz-theta"):
            report = qfi_noisy_ghz(config, params)
        elif cfg.state == "psi-m":
            report = qfi_noisy_psim(config, params, cfg.m_value())
        elif cfg.state == "dicke":
            report = qfi_dicke(config, params, cfg.k_value())
        elif cfg.state == "odf" and 2 * cfg.k_value() == cfg.n:
            report = qfi_dfs_subspace(config, params, cfg.k_value())[0]
        else:
            raise ValidationError(
                f"--scenario noisy has no closed form for --state {cfg.state} "
                "(supported: ghz, ghz-theta, psi-m, dicke, odf with k = n/2)"
            )
    else:
        if cfg.scenario == "unknown-b0":
            _check_offset_insensitive(cfg)
        report = _state_qfi(cfg, config, params)
    return _emit_report(cfg, report)


def _emit_report(cfg: RunConfig, report: FisherReport) -> int:
    if cfg.format == "csv":
        text = emit_csv(
            ("value", "path", "crb_variance"),
            ((report.value, report.path, report.crb_variance),),
        )
    else:
        text = emit_json({
            "value": report.value,
            "path": report.path,
            "crb_variance": report.crb_variance,
            "params_echo": cfg.echo(),
        })
    _deliver(text, cfg.out)
    return 0


def _measured_state(cfg: RunConfig, params: PhysParams) -> State:
    state: State = cfg.named_state()
    if cfg.scenario == "noisy":
        state = apply_channel(state, NoiseModel.from_params(params), params.t)
    elif cfg.scenario == "unknown-b0":
        _check_offset_insensitive(cfg)
    return state


def cmd_cfi(cfg: RunConfig) -> int:
    config = cfg.chain()
    params = cfg.params()
    state = _measured_state(cfg, params)
    if cfg.observable == "jx":
        dist = jx_distribution(state, config, params)
    else:
        dist = parity_distribution(state, config, params)
    return _emit_report(cfg, classical_fisher(dist))


def cmd_parity(cfg: RunConfig) -> int:
    config = cfg.chain()
    params = cfg.params()
    state = _measured_state(cfg, params)
    value = parity_expectation(state, config, params)
    dist = parity_distribution(state, config, params)
    grad = 2.0 * dist.outcomes[0][2]
    if abs(grad) > 1e-15:
        err_prop = (1.0 - value * value) / (grad * grad)
    else:
        err_prop = None
    if cfg.format == "csv":
        text = emit_csv(
            ("label", "probability", "derivative"),
            [(label, p, dp) for label, p, dp in dist.outcomes],
        )
    else:
        text = emit_json({
            "value": value,
            "gradient": grad,
            "error_propagation": err_prop,
            "outcomes": [
                {"label": label, "probability": p, "derivative": dp}
                for label, p, dp in dist.outcomes
            ],
            "params_echo": cfg.echo(),
        })
    _deliver(text, cfg.out)
    return 0


def cmd_noise_scan(cfg: RunConfig) -> int:
    params = cfg.params()
    model = NoiseModel.from_params(params)
    points = cfg.points if cfg.points is not None else 101
    if points < 2:
        raise ValidationError(f"--points must be ≥ 2, got {points}")
    t_max = cfg.t_max if cfg.t_max is not None else 3.0 * params.tau_c
    if not (math.isfinite(t_max) and t_max > 0):
        raise ValidationError(f"--t-max must be > 0, got {t_max!r}")
    rows = []
    for i in range(points):
        t = t_max * (i / (points - 1))
        rows.append((
            t,
            correlation_integral(model, t),
            coherence_factor(model, t, cfg.n),
        ))
    columns = ("t", "correlation", "coherence")
    if cfg.format == "csv":
        text = emit_csv(columns, rows)
    else:
        text = emit_json({
            "columns": list(columns),
            "rows": [list(row) for row in rows],
            "params_echo": cfg.echo(),
        })
    _deliver(text, cfg.out)
    return 0


def cmd_tcrit(cfg: RunConfig) -> int:
    config = cfg.chain()
    params = cfg.params()
    t_crit = critical_time(config, params)
    t_opt, qfi_opt = optimal_time_ghz(config, params)
    if cfg.format == "csv":
        text = emit_csv(
            ("t_crit", "t_opt", "qfi_opt"),
            ((t_crit, t_opt, qfi_opt),),
        )
    else:
        text = emit_json({
            "t_crit": t_crit,
            "t_opt": t_opt,
            "qfi_opt": qfi_opt,
            "params_echo": cfg.echo(),
        })
    _deliver(text, cfg.out)
    return 0


def cmd_placement_search(cfg: RunConfig) -> int:
    config, report = brute_force_placement_search(
        cfg.n, cfg.length, cfg.objective, cfg.grid_points,
        x_start=0.0, params=cfg.params(),
    )
    kind = "all-at-end" if cfg.objective.endswith("known-b0") else "half-half"
    if cfg.format == "csv":
        text = emit_csv(
            ("objective", "kind", "value", "crb_variance", "positions"),
            ((
                cfg.objective, kind, report.value, report.crb_variance,
                ";".join(repr(x) for x in config.positions),
            ),),
        )
    else:
        text = emit_json({
            "objective": cfg.objective,
            "kind": kind,
            "value": report.value,
            "path": report.path,
            "crb_variance": report.crb_variance,
            "positions": list(config.positions),
            "params_echo": cfg.echo(),
        })
    _deliver(text, cfg.out)
    return 0


# ----------------------------------------------------------------------
# reproduce
# ----------------------------------------------------------------------


def _table_text(table: TableOne) -> str:
    header = list(table.columns)
    body = [
        [label] + [repr(v) for v in values]
        for label, *values in table.rows
    ]
    widths = [
        max(len(header[j]), *(len(row[j]) for row in body))
        for j in range(len(header))
    ]
    lines = []
    for row in [header] + body:
        cells = [row[0].ljust(widths[0])] + [
            row[j].rjust(widths[j]) for j in range(1, len(row))
        ]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def cmd_reproduce(cfg: RunConfig) -> int:
    target = cfg.target
    out_path = cfg.out if cfg.out is not None else f"{target}.csv"
    if target == "table1":
        table = table1(cfg.n, cfg.length, cfg.gamma * cfg.t)
        text = emit_csv(table.columns, table.rows)
        sys.stdout.write(_table_text(table))
        _deliver(text, out_path)
        base, ext = os.path.splitext(out_path)
        txt_path = (base if ext else out_path) + ".txt"
        _deliver(_table_text(table), txt_path)
        return 0
    if target == "fig3":
        points = cfg.points if cfg.points is not None else 20001
        sweep = sweep_fig3(
            cfg.chain(), cfg.params(),
            points=points, t_max=cfg.t_max if cfg.t_max is not None else 0.02,
            factor_out_gamma_t=cfg.factor_out_gamma_t,
        )
    elif target == "fig4":
        sweep = sweep_fig4(cfg.n, cfg.length, cfg.gamma * cfg.t)
    else:
        case = "a" if target == "fig5a" else "b"
        if cfg.n_max < 2:
            raise ValidationError(f"--n-max must be ≥ 2, got {cfg.n_max}")
        sweep = sweep_fig5(range(2, cfg.n_max + 1), cfg.length, case, cfg.gamma * cfg.t)
    _deliver(emit_csv(sweep.columns, sweep.rows), out_path)
    return 0


# ----------------------------------------------------------------------
# validate
# ----------------------------------------------------------------------


def _rel_dev(a: float, b: float, scale: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), scale)


def cmd_validate(cfg: RunConfig) -> int:
    """Oracle-equivalence suite: closed forms vs the spectral evaluator,
    parity CFI vs QFI, and Monte Carlo coherence vs the analytic factor.

    All PASS lines are numberless except the Monte Carlo estimate, which
    is computed without BLAS; output is byte-stable across thread counts.
    """
    tol = 1e-9
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    chains: list[tuple[ChainConfig, PhysParams]] = []
    for n in range(2, 7):
        for _ in range(2):
            xs = np.sort(rng.uniform(-1.0, 1.0, size=n))
            x0 = float(rng.uniform(-0.25, 0.25))
            params = PhysParams(
                gamma=float(rng.uniform(0.5, 2.0)),
                b0=float(rng.uniform(-1.0, 1.0)),
                grad=float(rng.uniform(-1.0, 1.0)),
                t=float(rng.uniform(0.5, 2.0)),
                gamma_prime=float(rng.uniform(0.5, 2.0)),
                delta_e=float(rng.uniform(0.5, 1.5)),
                tau_c=float(rng.uniform(0.5, 2.0)),
            )
            chains.append((make_chain([float(x) for x in xs], x0), params))

    lines: list[str] = []
    failed: list[str] = []

    def run_check(name: str, pairs: Callable[[], list[tuple[float, float, float]]]):
        worst = 0.0
        for a, b, scale in pairs():
            worst = max(worst, _rel_dev(a, b, scale))
        if worst <= tol:
            lines.append(f"PASS {name}")
        else:
            lines.append(f"FAIL {name} worst_rel={worst:.3e}")
            failed.append(name)

    def scale_of(config: ChainConfig, params: PhysParams) -> float:
        gt = params.gamma * params.t
        return max(gt * gt * sum(abs(f) for f in config.f_values) ** 2, 1.0)

    def ghz_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            state = make_named_state("ghz", config.n)
            out.append((qfi_pure(state, config, params).value,
                        qfi_general(state, config, params).value, s))
        return out

    def max_entangled_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            report, state = qfi_max_entangled(config, params)
            out.append((report.value, qfi_general(state, config, params).value, s))
        return out

    def product_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            state = make_named_state("product", config.n)
            out.append((qfi_max_separable(config, params).value,
                        qfi_general(state, config, params).value, s))
        return out

    def odf_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            for k in range(config.n + 1):
                state = make_named_state("odf", config.n, k=k)
                out.append((qfi_dfs_subspace(config, params, k)[0].value,
                            qfi_general(state, config, params).value, s))
        return out

    def dicke_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            for k in range(config.n + 1):
                state = make_named_state("dicke", config.n, k=k)
                out.append((qfi_dicke(config, params, k).value,
                            qfi_general(state, config, params).value, s))
        return out

    def psim_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            for m in range(config.n + 1):
                state = make_named_state("psi-m", config.n, m=m)
                out.append((qfi_pure(state, config, params).value,
                            qfi_general(state, config, params).value, s))
        return out

    def steady_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            mixed = steady_twirl(make_named_state("product", config.n))
            out.append((qfi_product_steady(config, params).value,
                        qfi_general(mixed, config, params).value, s))
        return out

    def noisy_ghz_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            model = NoiseModel.from_params(params)
            mixed = apply_channel(make_named_state("ghz", config.n), model, params.t)
            out.append((qfi_noisy_ghz(config, params).value,
                        qfi_general(mixed, config, params).value, s))
        return out

    def parity_cfi_pairs():
        out = []
        for config, params in chains:
            s = scale_of(config, params)
            ghz = make_named_state("ghz", config.n)
            out.append((
                classical_fisher(parity_distribution(ghz, config, params)).value,
                qfi_pure(ghz, config, params).value, s,
            ))
            if config.n % 2 == 0:
                odf = make_named_state("odf", config.n, k=config.n // 2)
                out.append((
                    classical_fisher(parity_distribution(odf, config, params)).value,
                    qfi_pure(odf, config, params).value, s,
                ))
        return out

    run_check("closed-form-ghz", ghz_pairs)
    run_check("closed-form-max-entangled", max_entangled_pairs)
    run_check("closed-form-product", product_pairs)
    run_check("closed-form-odf", odf_pairs)
    run_check("closed-form-dicke", dicke_pairs)
    run_check("closed-form-psim", psim_pairs)
    run_check("closed-form-steady", steady_pairs)
    run_check("closed-form-noisy-ghz", noisy_ghz_pairs)
    run_check("parity-cfi", parity_cfi_pairs)

    # Monte Carlo coherence vs analytic decay, 3 standard-error band
    model = NoiseModel(gamma_prime=0.25, delta_e=1.0, tau_c=1.0)
    ens = TrajectoryEnsemble(cfg.n_traj, seed=cfg.seed)
    weight = 4
    mc_ok = True
    worst_pull = 0.0
    estimate = 0.0
    for t in (model.tau_c / 50.0, model.tau_c / 2.0, 2.0 * model.tau_c):
        estimate = mc_coherence_magnitude(model, t, weight, ens)
        d = coherence_factor(model, t, weight)
        d2 = coherence_factor(model, t, 2 * weight)
        sigma2 = max(0.5 * (1.0 + d2) - d * d, 0.0)
        se = math.sqrt(sigma2 / ens.n_traj)
        band = 3.0 * se + 1e-12
        worst_pull = max(worst_pull, abs(estimate - d) / band)
        if abs(estimate - d) > band:
            mc_ok = False
    if mc_ok:
        lines.append(f"PASS mc-coherence estimate={estimate:.12e}")
    else:
        lines.append(f"FAIL mc-coherence worst_pull_over_band={worst_pull:.3e}")
        failed.append("mc-coherence")

    lines.append(
        "all checks passed" if not failed else f"{len(failed)} checks failed"
    )
    _deliver("\n".join(lines) + "\n", cfg.out)
    return 0 if not failed else 1


# ----------------------------------------------------------------------
# parser and entry point
# ----------------------------------------------------------------------


def _add_flags(sp: argparse.ArgumentParser) -> None:
    for name, help_text in _INT_FLAGS.items():
        sp.add_argument(f"--{name}", type=int, default=None, help=help_text)
    for name, help_text in _FLOAT_FLAGS.items():
        sp.add_argument(f"--{name}", type=float, default=None, help=help_text)
    for name, help_text in _BOOL_FLAGS.items():
        sp.add_argument(
            f"--{name}", action="store_const", const=True, default=None,
            help=help_text,
        )
    for name, choices in _CHOICE_FLAGS.items():
        sp.add_argument(f"--{name}", choices=choices, default=None)
    for name, help_text in _STR_FLAGS.items():
        sp.add_argument(f"--{name}", type=str, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradqfi",
        description=(
            "Fisher-information bounds for field-gradient estimation with "
            "qubit chains.  All flags are in SI units (--length/--x0 in "
            "meters, --t/--tau-c in seconds, fields in tesla); "
            "--dimensionless sets gamma = t = 1."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "qfi": "quantum Fisher information of a probe state",
        "cfi": "classical Fisher information of a measured distribution",
        "parity": "parity expectation value, gradient, and outcome table",
        "noise-scan": "correlation integral and coherence factor over time",
        "tcrit": "GHZ/decoherence-free crossover and optimal probing time",
        "reproduce": "write a reference figure or table as CSV",
        "validate": "run the oracle-equivalence and Monte Carlo self-checks",
        "placement-search": "exhaustive grid search over qubit placements",
    }
    for command in COMMANDS:
        sp = sub.add_parser(command, help=descriptions[command])
        if command == "reproduce":
            sp.add_argument("target", choices=TARGETS)
        _add_flags(sp)
    return parser


_HANDLERS = {
    "qfi": cmd_qfi,
    "cfi": cmd_cfi,
    "parity": cmd_parity,
    "noise-scan": cmd_noise_scan,
    "tcrit": cmd_tcrit,
    "reproduce": cmd_reproduce,
    "validate": cmd_validate,
    "placement-search": cmd_placement_search,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.command, getattr(args, "target", None), args)
        return _HANDLERS[args.command](cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ComputationError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
