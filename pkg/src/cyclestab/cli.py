"""Command-line front end: design, stability, hodograph, simulate, verify.

Configuration is a flat key=value text file whose keys mirror
``ExperimentConfig``; command-line flags override file values.  All CSV
output is deterministic: a single header row, floating-point fields with
17 significant digits, and byte-identical output for identical configs.

Exit-code policy: scientific outcomes (a run that fails to converge, an
escaped trajectory) are data and exit 0; configuration mistakes, I/O
failures, and internal-consistency violations exit nonzero.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Sequence

from .dynamics import detect_cycle2, logistic, simulate_closed
from .gains import ControlGains, a_to_gamma, eps_to_a, optimal_gains
from .stability import (InternalConsistencyError, TrigPair, fejer_identity_residual,
                        hodograph_curve, j_value, mu_star_by_hodograph, mu_star_by_sweep)

__all__ = ["ExperimentConfig", "parse_config_text", "serialize_config", "main"]

_AGREEMENT_REL_TOL = 1e-3


class CliError(Exception):
    """Bad configuration or I/O problem; maps to a nonzero exit."""

    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = ""
    map: str = "logistic"
    h: float = 3.95
    N: int = 2
    eps: Optional[tuple[float, ...]] = None
    x0: float = 0.3
    steps: int = 20000
    burn_in: int = 10000
    resolution: int = 100000
    out: str = ""
    seed_policy: str = "open-loop-fill"
    seed: Optional[tuple[float, ...]] = None
    t_min: float = 0.0
    t_max: float = 2.0 * math.pi
    n_max: int = 6


_FLOAT_LIST_KEYS = {"eps", "seed"}
_INT_KEYS = {"N", "steps", "burn_in", "resolution", "n_max"}
_FLOAT_KEYS = {"h", "x0", "t_min", "t_max"}
_STR_KEYS = {"command", "map", "out", "seed_policy"}
_ALL_KEYS = _FLOAT_LIST_KEYS | _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def _parse_float_list(raw: str) -> Optional[tuple[float, ...]]:
    raw = raw.strip()
    if not raw:
        return None
    try:
        return tuple(float(part) for part in raw.split(","))
    except ValueError as exc:
        raise CliError(f"cannot parse float list {raw!r}: {exc}") from None


def parse_config_text(text: str) -> dict:
    """Parse flat key=value lines into typed values; '#' starts a comment."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise CliError(f"config line {lineno}: expected key=value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _ALL_KEYS:
            raise CliError(f"config line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(raw)
            elif key in _FLOAT_KEYS:
                values[key] = float(raw)
            elif key in _FLOAT_LIST_KEYS:
                values[key] = _parse_float_list(raw)
            else:
                values[key] = raw
        except ValueError as exc:
            raise CliError(f"config line {lineno}: {exc}") from None
    return values


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; parsing it back reproduces ``cfg`` exactly."""
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if f.name in _FLOAT_LIST_KEYS:
            rendered = "" if value is None else ",".join(repr(v) for v in value)
        elif f.name in _FLOAT_KEYS:
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name}={rendered}")
    return "\n".join(lines) + "\n"


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config {path!r}: {exc}") from None
    return parse_config_text(text)


def _merge_config(command: str, args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(command=command)
    if getattr(args, "config", None):
        file_values = _load_config(args.config)
        file_values.pop("command", None)
        cfg = replace(cfg, **file_values)
    overrides = {}
    for key in _ALL_KEYS - {"command"}:
        flag = getattr(args, key, None)
        if flag is not None:
            if key in _FLOAT_LIST_KEYS and isinstance(flag, str):
                flag = _parse_float_list(flag)
            overrides[key] = flag
    if overrides:
        cfg = replace(cfg, **overrides)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.N < 1:
        raise CliError(f"N must be >= 1, got {cfg.N}")
    if cfg.steps <= cfg.burn_in:
        raise CliError(f"steps ({cfg.steps}) must exceed burn_in ({cfg.burn_in})")
    if cfg.map != "logistic":
        raise CliError(f"unknown map {cfg.map!r} (available: logistic)")
    if cfg.seed_policy not in ("open-loop-fill", "explicit"):
        raise CliError(f"seed_policy must be open-loop-fill or explicit, got {cfg.seed_policy!r}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _emit_csv(cfg: ExperimentConfig, header: Sequence[str], rows) -> None:
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(_fmt(v) for v in row) + "\n"
    if cfg.out:
        try:
            with open(cfg.out, "w", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError(f"cannot write {cfg.out!r}: {exc}", code=1) from None
    else:
        sys.stdout.write(text)


def _gains_from_config(cfg: ExperimentConfig) -> ControlGains:
    if cfg.eps is not None:
        return eps_to_a(cfg.eps)
    return optimal_gains(cfg.N)


def cmd_design(cfg: ExperimentConfig) -> int:
    g = optimal_gains(cfg.N)
    gamma = a_to_gamma(g.a)
    rows = []
    for j in range(1, g.N + 1):
        eps_j = g.eps[j - 1] if j <= g.N - 1 else ""
        rows.append((j, g.a[j - 1], eps_j, gamma[j - 1]))
    print(f"optimal control design, N={g.N}")
    print(f"  predicted critical multiplier magnitude mu* = N^2 = {_fmt(float(g.N ** 2))}")
    print(f"  prehistory depth N* = 2(N-1) = {g.prehistory_depth}")
    for j, aj, ej, gj in rows:
        ej_txt = _fmt(ej) if ej != "" else "-"
        print(f"  j={j}  a_j={_fmt(aj)}  eps_j={ej_txt}  gamma_j={_fmt(gj)}")
    _emit_csv(cfg, ("j", "a_j", "eps_j", "gamma_j"), rows)
    return 0


def cmd_stability(cfg: ExperimentConfig) -> int:
    g = _gains_from_config(cfg)
    sweep = mu_star_by_sweep(g)
    hodo = mu_star_by_hodograph(g, resolution=cfg.resolution)
    diff = abs(sweep.mu_star_abs - hodo.mu_star_abs)
    rel = diff / max(abs(sweep.mu_star_abs), abs(hodo.mu_star_abs))
    sweep_witness = ";".join(f"{r.real:.12g}{r.imag:+.12g}i" for r in sweep.witness)
    t_min, omega_min = hodo.witness
    print(f"gains: N={g.N} eps={list(g.eps)} admissible={g.admissible}")
    print(f"mu* by root sweep:  {_fmt(sweep.mu_star_abs)}"
          + (" (censored)" if sweep.censored else ""))
    print(f"mu* by hodograph:   {_fmt(hodo.mu_star_abs)}")
    print(f"  minimizing t={_fmt(t_min)}  omega={_fmt(omega_min)}")
    if hodo.tangencies:
        pts = ", ".join(f"(t={t:.6g}, omega={w:.6g})" for t, w in hodo.tangencies)
        print(f"  grazing contacts (excluded from mu*): {pts}")
    print(f"difference: {_fmt(diff)} (relative {_fmt(rel)})")
    rows = [
        ("RootSweep", sweep.mu_star_abs, f"roots={sweep_witness}", sweep.censored),
        ("Hodograph", hodo.mu_star_abs, f"t={_fmt(t_min)};omega={_fmt(omega_min)}", False),
    ]
    _emit_csv(cfg, ("method", "mu_star_abs", "detail", "censored"), rows)
    if sweep.censored:
        return 0
    if rel > _AGREEMENT_REL_TOL:
        print(f"error: methods disagree beyond {_AGREEMENT_REL_TOL:g} relative "
              f"({_fmt(sweep.mu_star_abs)} vs {_fmt(hodo.mu_star_abs)})", file=sys.stderr)
        return 1
    return 0


def cmd_hodograph(cfg: ExperimentConfig) -> int:
    g = _gains_from_config(cfg)
    curve = hodograph_curve(g, resolution=cfg.resolution)
    rows = [(t, x, y) for t, x, y in curve.rows() if cfg.t_min <= t <= cfg.t_max]
    _emit_csv(cfg, ("t", "x", "y"), rows)
    return 0


def cmd_simulate(cfg: ExperimentConfig) -> int:
    model = logistic(cfg.h)
    g = _gains_from_config(cfg)
    need = 2 * (g.N - 1) + 1
    if cfg.seed_policy == "explicit":
        if cfg.seed is None or len(cfg.seed) != need:
            got = 0 if cfg.seed is None else len(cfg.seed)
            raise CliError(f"explicit seed policy needs exactly {need} values, got {got}")
        seed = list(cfg.seed)
    else:
        seed = [cfg.x0]
        for _ in range(need - 1):
            seed.append(model.f(seed[-1]))
    traj = simulate_closed(model, g, seed, cfg.steps)
    rows = [(n, traj.states[n], traj.controls[n]) for n in range(len(traj.states))]
    _emit_csv(cfg, ("n", "x", "u"), rows)

    if len(traj.states) >= 4:
        est = detect_cycle2(traj, tail=min(100, len(traj.states)), tol=1e-6, model=model)
        summary = (f"converged={est.converged} eta1={_fmt(est.eta1)} eta2={_fmt(est.eta2)} "
                   f"residual={_fmt(est.residual)} multiplier={_fmt(est.multiplier)}")
    else:
        summary = "converged=False (trajectory too short for cycle detection)"
    if model.analytic_cycle is not None and len(traj.states) > cfg.burn_in:
        post = traj.states[cfg.burn_in:]
        e1, e2 = model.analytic_cycle
        import numpy as np
        dist = np.minimum(np.abs(post - e1), np.abs(post - e2))
        summary += f" max_dist_to_cycle={_fmt(float(dist.max()))}"
    print(f"summary: {summary} escaped={traj.escaped}")
    return 0


def cmd_verify(cfg: ExperimentConfig) -> int:
    if cfg.n_max < 1 or cfg.n_max > 10:
        raise CliError(f"n_max must lie in 1..10, got {cfg.n_max}")
    rows = []
    failures = []
    for n in range(1, cfg.n_max + 1):
        g = optimal_gains(n)
        jv = j_value(g, resolution=cfg.resolution)
        sweep = mu_star_by_sweep(g)
        hodo = mu_star_by_hodograph(g, resolution=cfg.resolution)
        checks = {
            "J=1/N": abs(jv - 1.0 / n) <= 1e-8,
            "mu*_sweep=N^2": abs(sweep.mu_star_abs - n * n) <= 1e-4 * n * n,
            "mu*_hodo=N^2": abs(hodo.mu_star_abs - n * n) <= 1e-4 * n * n,
            "methods agree": abs(sweep.mu_star_abs - hodo.mu_star_abs)
                             <= _AGREEMENT_REL_TOL * max(sweep.mu_star_abs, hodo.mu_star_abs),
            "fejer identity": all(abs(fejer_identity_residual(n, t)) <= 1e-10
                                  for t in (0.3, 0.7, 1.0, 1.9, 2.6)),
            "gamma hook": abs(abs(TrigPair(g).s(math.pi / 2.0))
                              - abs(_gamma1(g))) <= 1e-12,
        }
        bad = [name for name, ok in checks.items() if not ok]
        status = "pass" if not bad else "FAIL:" + "|".join(bad)
        if bad:
            failures.append((n, bad))
        rows.append((n, jv, sweep.mu_star_abs, hodo.mu_star_abs, status))
        print(f"N={n}  J={_fmt(jv)}  mu*_sweep={_fmt(sweep.mu_star_abs)}  "
              f"mu*_hodograph={_fmt(hodo.mu_star_abs)}  {status}")
    _emit_csv(cfg, ("N", "J", "mu_star_sweep", "mu_star_hodograph", "status"), rows)
    if failures:
        print(f"error: {len(failures)} of {cfg.n_max} rows failed verification",
              file=sys.stderr)
        return 1
    print(f"all {cfg.n_max} rows pass")
    return 0


def _gamma1(g: ControlGains) -> float:
    return a_to_gamma(g.a)[0]


_COMMANDS = {
    "design": cmd_design,
    "stability": cmd_stability,
    "hodograph": cmd_hodograph,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--N", type=int, help="number of closed-loop weights")
    sub.add_argument("--h", type=float, help="map parameter")
    sub.add_argument("--eps", help="comma-separated feedback strengths (overrides --N gains)")
    sub.add_argument("--x0", type=float, help="initial state")
    sub.add_argument("--steps", type=int, help="number of closed-loop steps")
    sub.add_argument("--burn-in", dest="burn_in", type=int, help="transient length to discard")
    sub.add_argument("--resolution", type=int, help="sampling resolution")
    sub.add_argument("--out", help="CSV output path (default: stdout)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclestab",
        description="Design and verify delayed-feedback controls for period-2 cycles.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("design", "print/export the optimal gain table for a given N"),
        ("stability", "compute the critical multiplier by both methods"),
        ("hodograph", "export the boundary curve as CSV"),
        ("simulate", "run a closed-loop trajectory and report cycle convergence"),
        ("verify", "run the invariant suite over N = 1..n_max"),
    ]:
        sub = subs.add_parser(name, help=help_text)
        _add_common_flags(sub)
        if name == "simulate":
            sub.add_argument("--seed-policy", dest="seed_policy",
                             choices=("open-loop-fill", "explicit"))
            sub.add_argument("--seed", help="comma-separated explicit seed states")
        if name == "hodograph":
            sub.add_argument("--t-min", dest="t_min", type=float, help="window start")
            sub.add_argument("--t-max", dest="t_max", type=float, help="window end")
        if name == "verify":
            sub.add_argument("--n-max", dest="n_max", type=int,
                             help="largest N to verify (<= 10)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args.command, args)
        return _COMMANDS[args.command](cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InternalConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
