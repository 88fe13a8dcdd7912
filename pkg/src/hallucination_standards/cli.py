"""Command-line interface: scenario files in, CSV out.

Exit codes: 0 success, 1 validation, 2 numeric failure, 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .choice import utility_profile, shares
from .core import (
    ConsistencyError,
    ConvergenceError,
    CostModel,
    DomainError,
    DomainParams,
    Product,
    Scenario,
    ScenarioValidationError,
    cost,
    validate_scenario,
)
from .oracle import run_selfcheck
from .policy import (
    apply_standard,
    decompose,
    optimal_uniform_mandate,
    perfect_info_mandate,
    sweep_standard,
    unconstrained_optimum,
)
from .welfare import DegenerateShareError, net_welfare, nw_gradient

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

COMMANDS = ("validate", "shares", "welfare", "mandate", "optimize",
            "apply-standard", "decompose", "sweep", "selfcheck")
SWEEP_COLUMNS = ("cap", "delta_nw", "comp_i", "comp_ii", "comp_iii",
                 "avg_h_before", "avg_h_after", "avg_h_decreased")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario_path: Path | None = None
    cap: float | None = None
    grid: tuple[float, float, int] | None = None
    out_path: Path | None = None
    tol: float | None = None
    seed: int = 0

    def check(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.command != "selfcheck" and self.scenario_path is None:
            raise UsageError(f"{self.command} requires --scenario")
        if self.command in ("apply-standard", "decompose") and self.cap is None:
            raise UsageError(f"{self.command} requires --cap")
        if self.command == "sweep" and self.grid is None:
            raise UsageError("sweep requires --grid START:STOP:COUNT")


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x) + 0.0, ".17g")
    return str(x)


# --- scenario files ---------------------------------------------------------

def parse_scenario(doc: dict) -> Scenario:
    """Build a Scenario from the JSON document; raises InputError on bad shape."""
    try:
        d, c = doc["domain"], doc["cost"]
        domain = DomainParams(*(float(d[k]) for k in ("alpha", "theta", "rho", "zeta")))
        model = CostModel(
            c["family"], float(c["a"]), float(c["b"]),
            float(c.get("h_lo", 0.01)), float(c.get("h_hi", 1.0)),
        )
        products = tuple(
            Product(str(p["id"]), float(p["delta"]), float(p["omega"]), float(p["h"]))
            for p in doc["products"]
        )
    except KeyError as exc:
        raise InputError(f"missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed scenario: {exc}") from exc
    return Scenario(domain, model, products)


def scenario_to_dict(scenario: Scenario) -> dict:
    c = scenario.cost
    d = scenario.domain
    return {
        "domain": {"alpha": d.alpha, "theta": d.theta, "rho": d.rho, "zeta": d.zeta},
        "cost": {"family": c.family.value, "a": c.a, "b": c.b, "h_lo": c.h_lo, "h_hi": c.h_hi},
        "products": [{"id": p.id, "delta": p.delta, "omega": p.omega, "h": p.h}
                     for p in scenario.products],
    }


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file.

    Raises InputError for unreadable or malformed files and
    ScenarioValidationError listing every violated invariant.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    return validate_scenario(parse_scenario(doc))


def parse_grid(text: str) -> tuple[float, float, int]:
    try:
        start, stop, count = text.split(":")
        grid = float(start), float(stop), int(count)
    except ValueError as exc:
        raise UsageError(f"--grid expects START:STOP:COUNT, got {text!r}") from exc
    if grid[2] < 1:
        raise UsageError("--grid COUNT must be >= 1")
    return grid


def grid_values(grid: tuple[float, float, int]) -> list[float]:
    start, stop, count = grid
    return [float(x) for x in np.linspace(start, stop, count)]


# --- commands ---------------------------------------------------------------

def _table(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _pairs(items) -> str:
    return _table(("key", "value"), items)


def _cmd_validate(sc: Scenario, cfg: RunConfig) -> str:
    return _pairs([("status", "valid"), ("n_products", sc.n_products)])


def _cmd_shares(sc: Scenario, cfg: RunConfig) -> str:
    u = utility_profile(sc)
    s = shares(sc)
    prices = np.asarray(cost(sc.cost, sc.h)) + sc.omega
    rows = zip(sc.ids, sc.h, prices, u.v, u.v_tilde, s)
    return _table(("id", "h", "price", "v", "v_tilde", "share"), rows)


def _cmd_welfare(sc: Scenario, cfg: RunConfig) -> str:
    rep = net_welfare(sc)
    rows = [("cs", rep.cs), ("externality", rep.externality), ("nw", rep.nw),
            ("avg_h", rep.avg_h)]
    rows += [(f"gradient.{pid}", g) for pid, g in zip(sc.ids, nw_gradient(sc))]
    return _pairs(rows)


def _cmd_mandate(sc: Scenario, cfg: RunConfig) -> str:
    sol = perfect_info_mandate(sc.domain, sc.cost)
    uniform = optimal_uniform_mandate(sc)
    return _pairs([
        ("h_star", sol.h_star), ("residual", sol.residual), ("method", sol.method.value),
        ("iterations", sol.iterations), ("clamped", sol.clamped),
        ("uniform_h_star", uniform.h_star), ("uniform_residual", uniform.residual),
        ("uniform_iterations", uniform.iterations), ("uniform_clamped", uniform.clamped),
    ])


def _cmd_optimize(sc: Scenario, cfg: RunConfig) -> str:
    kwargs = {"seed": cfg.seed}
    if cfg.tol is not None:
        kwargs["tol"] = cfg.tol
    opt = unconstrained_optimum(sc, **kwargs)
    rows = [("nw", opt.nw), ("grad_norm", opt.grad_norm), ("iterations", opt.iterations),
            ("converged", opt.converged), ("interior", opt.interior),
            ("distinct_limits", len(opt.limits))]
    rows += [(f"h_opt.{pid}", h) for pid, h in zip(sc.ids, opt.h)]
    return _pairs(rows)


def _cmd_apply_standard(sc: Scenario, cfg: RunConfig) -> str:
    out = apply_standard(sc, cfg.cap)
    prices = np.asarray(cost(sc.cost, out.h_bar)) + sc.omega
    rows = zip(sc.ids, sc.h, out.h_bar, prices, out.v_bar, out.s_bar)
    table = _table(("id", "h", "h_bar", "price_bar", "v_bar", "s_bar"), rows)
    return table


def _report_row(rep) -> tuple:
    return (rep.cap, rep.delta_nw, rep.comp_i, rep.comp_ii, rep.comp_iii,
            rep.avg_h_before, rep.avg_h_after, rep.avg_h_decreased)


def _cmd_decompose(sc: Scenario, cfg: RunConfig) -> str:
    rep = decompose(sc, cfg.cap)
    return _table(SWEEP_COLUMNS, [_report_row(rep)])


def _cmd_sweep(sc: Scenario, cfg: RunConfig) -> str:
    results = sweep_standard(sc, grid_values(cfg.grid))
    return _table(SWEEP_COLUMNS, [_report_row(rep) for _, rep in results])


def _cmd_selfcheck(cfg: RunConfig) -> tuple[str, bool]:
    results = run_selfcheck(seed=cfg.seed)
    rows = [(r.name, r.cases, r.max_error, r.tolerance, r.passed) for r in results]
    return (_table(("check", "cases", "max_error", "tolerance", "passed"), rows),
            all(r.passed for r in results))


HANDLERS = {
    "validate": _cmd_validate,
    "shares": _cmd_shares,
    "welfare": _cmd_welfare,
    "mandate": _cmd_mandate,
    "optimize": _cmd_optimize,
    "apply-standard": _cmd_apply_standard,
    "decompose": _cmd_decompose,
    "sweep": _cmd_sweep,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.check()
        ok = True
        if cfg.command == "selfcheck":
            text, ok = _cmd_selfcheck(cfg)
        else:
            scenario = load_scenario(cfg.scenario_path)
            text = HANDLERS[cfg.command](scenario, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    except ScenarioValidationError as exc:
        for v in exc.violations:
            print(f"invalid: {v}", file=stderr)
        return EXIT_VALIDATION
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO
    except (DomainError, ValueError) as exc:
        print(f"invalid: {exc}", file=stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, ConsistencyError, DegenerateShareError) as exc:
        print(f"numeric failure: {exc}", file=stderr)
        return EXIT_NUMERIC

    try:
        if cfg.out_path is None:
            stdout.write(text)
        else:
            Path(cfg.out_path).write_text(text)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=stderr)
        return EXIT_IO
    if not ok:
        print("selfcheck: one or more oracle checks failed", file=stderr)
        return EXIT_NUMERIC
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hallstd",
        description="Welfare analysis of maximum hallucination standards for LLM products.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", type=Path, help="scenario JSON file")
    parser.add_argument("--cap", type=float, help="maximum hallucination rate")
    parser.add_argument("--grid", help="cap grid START:STOP:COUNT (inclusive)")
    parser.add_argument("--out", type=Path, help="output file (default stdout)")
    parser.add_argument("--tol", type=float, help="gradient tolerance for optimize")
    parser.add_argument("--seed", type=int, default=0, help="seed for selfcheck and multi-start")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        grid = parse_grid(args.grid) if args.grid is not None else None
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    cfg = RunConfig(
        command=args.command,
        scenario_path=args.scenario,
        cap=args.cap,
        grid=grid,
        out_path=args.out,
        tol=args.tol,
        seed=args.seed,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
