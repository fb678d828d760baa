"""Command-line interface.

Subcommands: ``analyze``, ``simulate``, ``spectrum``, ``verify``, ``export``.
Every JSON document carries ``schema_version`` and the resolved run
configuration.  Settings come from defaults, then a flat ``key=value``
config file (``--config``), then environment variables for the output
directory and thread cap, then flags; later sources win.

Exit codes: 0 success, 2 invalid configuration, 3 capacity refusal,
4 check failure, 5 every simulated run censored.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .classes import SCHEMA_VERSION, NamedState, build_lumped_chain
from .errors import (CapacityError, DimensionError, ParameterError, RegimeError,
                     UnreachableTargetError)
from .model import Params

log = logging.getLogger("clustered_ising")

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_CHECK, EXIT_CENSORED = 0, 2, 3, 4, 5

ENV_OUTPUT = "CLUSTERISING_OUTPUT_DIR"
ENV_THREADS = "CLUSTERISING_THREADS"

DEFAULTS = {
    "n": None, "k": 2, "epsilon": None, "h": None, "beta": "1",
    "output_dir": None, "threads": 1, "format": None,
    # simulate
    "from": "-1", "to": "+1", "trials": 100, "seed": 0, "max_steps": 10 ** 7,
    "lumped": False, "trajectories": 0, "delta": None,
    # spectrum
    "full": False, "mixing": False, "gamma": 0.25, "budget": 10 ** 6,
    # verify
    "grid": None, "gate_from_paper": False, "n_max": 5,
}

_BOOL = {"lumped", "full", "mixing", "gate_from_paper"}
_INT = {"n", "k", "threads", "trials", "seed", "max_steps", "trajectories", "budget", "n_max"}
_FLOAT = {"gamma", "delta"}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def read_config(path) -> dict:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        out[key] = val
    return out


def _coerce(key: str, val):
    if val is None or not isinstance(val, str):
        return val
    try:
        if key in _BOOL:
            low = val.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(val)
            return low in ("true", "1", "yes")
        if key in _INT:
            return int(val)
        if key in _FLOAT:
            return float(val)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {val!r}") from None
    return val


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    if os.environ.get(ENV_OUTPUT):
        cfg["output_dir"] = os.environ[ENV_OUTPUT]
    if os.environ.get(ENV_THREADS):
        cfg["threads"] = os.environ[ENV_THREADS]
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    cfg = {k: _coerce(k, v) for k, v in cfg.items()}
    if cfg["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    cfg["beta"] = _betas(cfg)
    return cfg


def _params(cfg: dict, beta: float | None = None) -> Params:
    missing = [k for k in ("n", "epsilon", "h") if cfg[k] is None]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join(missing))
    return Params(cfg["n"], cfg["k"], str(cfg["epsilon"]), str(cfg["h"]),
                  _betas(cfg)[0] if beta is None else beta)


def _betas(cfg: dict) -> list[float]:
    raw = cfg["beta"]
    if isinstance(raw, list):
        return raw
    try:
        out = [float(b) for b in str(raw).split(",") if b.strip()]
    except ValueError:
        raise ConfigError(f"bad beta list {cfg['beta']!r}") from None
    if not out or not all(b > 0 and math.isfinite(b) for b in out):
        raise ConfigError("beta values must be positive")
    return out


def _state_list(text: str, n: int) -> list:
    """Named states or explicit classes ``p1:p2:a``, comma separated."""
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            try:
                out.append(tuple(int(x) for x in tok.split(":")))
            except ValueError:
                raise ConfigError(f"bad class {tok!r}") from None
        else:
            try:
                out.append(NamedState.parse(tok))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    if not out:
        raise ConfigError("empty state list")
    return out


def _public_config(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if v is not None}


def _emit(doc: dict, cfg: dict, name: str, text: str | None = None) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc, "config": _public_config(cfg)}
    payload = json.dumps(doc, indent=2, default=str)
    if cfg["output_dir"]:
        out = Path(cfg["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_text(payload + "\n")
    if cfg["format"] == "table" and text is not None:
        print(text)
    else:
        print(payload)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_analyze(cfg: dict) -> int:
    from .landscape import analyze
    rep = analyze(_params(cfg))
    if cfg["format"] is None:
        cfg["format"] = "table"
    _emit(rep.to_json_dict(), cfg, "landscape_report", rep.render_table())
    return EXIT_OK


def cmd_simulate(cfg: dict) -> int:
    from .dynamics import sample_hitting_times, simulate, simulate_lumped
    p = _params(cfg)
    starts = _state_list(cfg["from"], p.n)
    if len(starts) != 1:
        raise ConfigError("simulate takes a single start state")
    start, targets = starts[0], _state_list(cfg["to"], p.n)
    if cfg["lumped"]:
        source = build_lumped_chain(p.n, p, p.beta)
    else:
        source = p
    stats = sample_hitting_times(source, start, targets, cfg["trials"], cfg["seed"],
                                 beta=p.beta, max_steps=cfg["max_steps"],
                                 delta=cfg["delta"], threads=cfg["threads"],
                                 gamma_ref=_gamma_ref(p, start) if cfg["delta"] else None)
    files = []
    if cfg["trajectories"] and cfg["output_dir"]:
        out = Path(cfg["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        for i in range(min(cfg["trajectories"], cfg["trials"])):
            if cfg["lumped"]:
                tr = simulate_lumped(source, start, targets, cfg["seed"], cfg["max_steps"], trial=i)
            else:
                tr = simulate(p, p.beta, start, targets, cfg["seed"], cfg["max_steps"], trial=i)
            path = out / f"trajectory_{i:04d}.csv"
            tr.write_csv(path)
            files.append(path.name)
    doc = stats.to_json_dict()
    doc["mode"] = "lumped" if cfg["lumped"] else "full"
    doc["trajectory_files"] = files
    doc["all_censored"] = stats.count == 0
    _emit(doc, cfg, "hitting_stats")
    if stats.count == 0:
        log.warning("all %d runs censored at %d steps", stats.censored, cfg["max_steps"])
        return EXIT_CENSORED
    if stats.censored:
        log.warning("%d of %d runs censored", stats.censored, cfg["trials"])
    return EXIT_OK


def _gamma_ref(p: Params, start) -> float | None:
    """Closed-form barrier relevant to a start state, for the window fraction."""
    from .landscape import gamma_values, identify_states
    g = gamma_values(p)
    if isinstance(start, NamedState):
        if start in identify_states(p).metastable:
            return None if g.gamma_m is None else float(g.gamma_m)
        return None if g.gamma_s is None else float(g.gamma_s)
    return None


def cmd_spectrum(cfg: dict) -> int:
    from .dynamics import full_spectral_gap, mixing_time, spectral_gap
    from .oracle import FULL_MATRIX_N_MAX, full_gibbs, full_transition_matrix
    p = _params(cfg)
    if cfg["full"] and p.n > FULL_MATRIX_N_MAX:
        raise CapacityError(f"--full needs n <= {FULL_MATRIX_N_MAX} "
                            f"({1 << (2 * p.n)} configurations requested)")
    betas = _betas(cfg)
    rows = []
    for b in betas:
        chain = build_lumped_chain(p.n, p, b)
        res = spectral_gap(chain)
        if cfg["mixing"]:
            mx = mixing_time(chain, cfg["gamma"], cfg["budget"])
            res.t_mix, res.t_mix_gamma = mx.t_mix, cfg["gamma"]
            if mx.t_mix is None:
                res.flags.append("mixing budget exhausted")
        d = res.to_json_dict()
        d.pop("schema_version")
        d.pop("kind")
        if cfg["full"]:
            q = p.with_beta(b)
            d["full_gap"] = full_spectral_gap(full_transition_matrix(q, b), full_gibbs(q, b))
        if len(betas) == 1:
            d.pop("log_rate")
        rows.append(d)
    lines = [f"{'beta':>8} {'gap':>14}" + ("" if len(betas) == 1 else f" {'-log(gap)/beta':>16}")]
    for d in rows:
        lines.append(f"{d['beta']:>8g} {d['gap']:>14.6e}"
                     + ("" if len(betas) == 1 else f" {d['log_rate']:>16.6f}"))
    _emit({"kind": "spectrum_result", "params": p.as_dict(), "results": rows}, cfg,
          "spectrum_result", "\n".join(lines))
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    from .checks import default_grid, gate_rows, run_verify
    from .oracle import StateGraph
    if cfg["n"] is None:
        raise ConfigError("missing required setting: n")
    n = cfg["n"]
    if n > cfg["n_max"]:
        raise CapacityError(f"oracle limited to n <= {cfg['n_max']} (2^{2 * n} configurations)")
    if cfg["grid"] is not None:
        if cfg["grid"] != "default":
            raise ConfigError("only --grid default is supported")
        grid = default_grid(n)
    else:
        grid = [_params(cfg)]
    rep = run_verify(n, grid, cfg["n_max"])
    if cfg["gate_from_paper"]:
        for p in grid:
            g = StateGraph(p, cfg["n_max"])
            for r in gate_rows(p, g):
                if r["role"] == "stated":
                    rep.checks.append({"check": "gate_from_paper", **r, "passed": r["is_gate"]})
    doc = rep.to_json_dict()
    doc["passed"] = rep.passed
    failed = [c for c in rep.checks if not c["passed"]]
    doc["failed"] = len(failed)
    lines = [f"{len(rep.checks)} checks, {len(failed)} failed"]
    for c in failed:
        lines.append(f"FAIL {c['check']} n={c['n']} eps={c['epsilon']} h={c['h']}"
                     + (f" {c.get('gate', '')} {c.get('transition', '')}"
                        if c["check"].startswith("gate") else ""))
    _emit(doc, cfg, "oracle_report", "\n".join(lines))
    return EXIT_OK if rep.passed else EXIT_CHECK


def cmd_export(cfg: dict) -> int:
    p = _params(cfg)
    chain = build_lumped_chain(p.n, p, p.beta)
    doc = chain.to_json_dict()
    doc.pop("schema_version", None)
    _emit(doc, cfg, "lumped_chain")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "spectrum": cmd_spectrum,
            "verify": cmd_verify, "export": cmd_export}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--n", type=int, help="vertices per cluster")
    g.add_argument("--k", type=int, help="number of clusters (analysis needs 2)")
    g.add_argument("--epsilon", help="cross-cluster coupling in [-1, 1], decimal or p/q")
    g.add_argument("--h", help="external field in [0, 1], decimal or p/q")
    g.add_argument("--beta", help="inverse temperature (comma list for spectrum)")
    o = common.add_argument_group("run")
    o.add_argument("--config", help="flat key=value settings file; flags win")
    o.add_argument("--output-dir", dest="output_dir",
                   help=f"write JSON/CSV here (env {ENV_OUTPUT})")
    o.add_argument("--threads", type=int, help=f"worker cap (env {ENV_THREADS})")
    o.add_argument("--format", choices=("json", "table"))
    o.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="clustered-ising",
                                 description="Metastability of Ising dynamics on two clusters.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="closed-form landscape report")

    s = sub.add_parser("simulate", parents=[common], help="seeded hitting-time sampling")
    s.add_argument("--from", dest="from", help="start state: +1, -1, +-1, -+1 or p1:p2:a")
    s.add_argument("--to", help="comma-separated target states")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--max-steps", dest="max_steps", type=int)
    s.add_argument("--lumped", action="store_true", help="simulate the class-level chain")
    s.add_argument("--trajectories", type=int,
                   help="write this many trajectory CSVs (needs --output-dir)")
    s.add_argument("--delta", type=float, help="report fraction of runs in exp(beta(G +- delta))")

    p = sub.add_parser("spectrum", parents=[common], help="spectral gap over a beta list")
    p.add_argument("--full", action="store_true", help="also solve the full matrix (n <= 4)")
    p.add_argument("--mixing", action="store_true", help="also compute the mixing time")
    p.add_argument("--gamma", type=float, help="mixing threshold (default 0.25)")
    p.add_argument("--budget", type=int, help="mixing step budget")

    v = sub.add_parser("verify", parents=[common], help="brute-force landscape checks")
    v.add_argument("--grid", help="'default' for the standard (epsilon, h) grid")
    v.add_argument("--gate-from-paper", dest="gate_from_paper", action="store_true",
                   help="verify the tabulated gate as stated")
    v.add_argument("--n-max", dest="n_max", type=int, help="oracle capacity (default 5)")

    sub.add_parser("export", parents=[common], help="lumped chain as JSON")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ParameterError, RegimeError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except UnreachableTargetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
