"""Command line for ground states, spectra, bifurcations and branches.

Every command accepts the same flag set and an optional flat key-value
config file (``--config``); flags given on the command line override the
file. Exit codes: 0 success, 1 numerical (or I/O) failure, 2 usage error.
Each run appends one JSON line to ``runs.log`` next to its output.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError, NumericalFailure

COMMANDS = ("ground-state", "spectrum", "bifurcations", "region-map", "ground", "branch",
            "verify")

DEFAULT_OUT = {
    "ground-state": "omega.csv",
    "spectrum": "spec.json",
    "bifurcations": "bif.json",
    "region-map": "region.csv",
    "ground": "gs.json",
    "branch": "branch.csv",
    "verify": None,
}

DEFAULT_TOL = {"newton": 1e-10, "gradient": 1e-6, "branch": 1e-9}

# flag name -> type; all default to None so that config values can show through
_FLAGS = {
    "dim": int, "radius": float, "nodes": int, "kappa": float, "beta": float,
    "mu1": float, "mu2": float, "j": int, "jmax": int, "count": int, "step": float,
    "max_points": int, "grid": str, "out": str, "seed": int,
}
_BOOL_FLAGS = ("cutoff", "fast")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Merged configuration of one command run."""

    command: str
    dim: int | None = None
    radius: float | None = None
    nodes: int | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOL))
    output_dir: Path = Path(".")
    out: Path | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.tolerances.items():
            if not v > 0:
                raise UsageError(f"tolerance {k} must be positive, got {v}")
        if self.nodes is not None and self.nodes < 64:
            raise UsageError(f"--nodes must be at least 64, got {self.nodes}")

    def get(self, key, default=None):
        v = self.params.get(key)
        return default if v is None else v

    def require(self, key):
        v = self.params.get(key)
        if v is None:
            raise UsageError(f"{self.command} needs --{key.replace('_', '-')}")
        return v

    def require_dim(self) -> int:
        if self.dim is None:
            raise UsageError(f"{self.command} needs --dim")
        if self.dim not in (1, 2, 3):
            raise UsageError(f"--dim must be 1, 2 or 3, got {self.dim}")
        return self.dim


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name, typ in _FLAGS.items():
        common.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    for name in _BOOL_FLAGS:
        common.add_argument("--" + name, dest=name, action="store_const", const=True,
                            default=None)
    common.add_argument("--tol", dest="tol", action="append", default=None,
                        metavar="NAME=VALUE", help="tolerance override, repeatable")
    common.add_argument("--config", dest="config", default=None, help="key = value file")

    parser = argparse.ArgumentParser(prog="schro", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    helps = {
        "ground-state": "scalar ground state ω on a radial grid",
        "spectrum": "smallest eigenvalues of -Δφ + C(κ)φ = λω²φ",
        "bifurcations": "roots κ_j of λ_j(κ) = f(β) along T⁺",
        "region-map": "existence verdicts on a (κ, β) grid",
        "ground": "Nehari ground state of the coupled system",
        "branch": "continue the branch bifurcating at κ_j",
        "verify": "run the acceptance checks",
    }
    parser.subcommands = {name: sub.add_parser(name, parents=[common], help=helps[name])
                          for name in COMMANDS}
    return parser


def _read_config(path) -> dict:
    text = Path(path).read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError:
        cp.read_string("[schro]\n" + text)
    out = {}
    for section in cp.sections():
        for k, v in cp.items(section):
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _coerce(key, raw):
    if key in _BOOL_FLAGS:
        return str(raw).lower() in ("1", "true", "yes", "on")
    typ = _FLAGS.get(key)
    if typ is None:
        raise UsageError(f"unknown config key {key!r}")
    try:
        return typ(raw)
    except ValueError:
        raise UsageError(f"bad value for {key}: {raw!r}") from None


def _parse_tols(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(val)
        except ValueError:
            raise UsageError(f"bad tolerance value in {item!r}") from None
    return out


def make_config(args: argparse.Namespace) -> RunConfig:
    merged = {}
    tols = dict(DEFAULT_TOL)
    if args.config:
        for k, raw in _read_config(args.config).items():
            if k.startswith("tol_"):
                tols.update(_parse_tols([f"{k[4:]}={raw}"]))
            elif k == "tol":
                tols.update(_parse_tols(raw.split(",")))
            else:
                merged[k] = _coerce(k, raw)
    for k in list(_FLAGS) + list(_BOOL_FLAGS):
        v = getattr(args, k)
        if v is not None:
            merged[k] = v
    tols.update(_parse_tols(args.tol))
    out = merged.pop("out", None) or DEFAULT_OUT[args.command]
    out = Path(out) if out else None
    return RunConfig(
        command=args.command,
        dim=merged.pop("dim", None),
        radius=merged.pop("radius", None),
        nodes=merged.pop("nodes", None),
        tolerances=tols,
        output_dir=out.parent if out else Path("."),
        out=out,
        params=merged,
    )


# -- helpers -------------------------------------------------------------------------

def _grid(cfg: RunConfig):
    from .ground_state import DEFAULT_GRIDS
    from .mesh import build_grid

    dim = cfg.require_dim()
    R0, n0 = DEFAULT_GRIDS[dim]
    return build_grid(dim, cfg.radius or R0, cfg.nodes or n0)


def _ground_state(cfg: RunConfig):
    from .ground_state import solve_ground_state

    return solve_ground_state(_grid(cfg), tol=cfg.tolerances["newton"])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def _params(cfg: RunConfig, kappa=None):
    from .system import Params

    try:
        return Params(cfg.require("kappa") if kappa is None else kappa, cfg.require("beta"),
                      cfg.get("mu1", 1.0), cfg.get("mu2", 1.0), cfg.require_dim())
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- commands ------------------------------------------------------------------------

def cmd_ground_state(cfg: RunConfig) -> list[Path]:
    gs = _ground_state(cfg)
    gs.omega.to_csv(cfg.out)
    side = cfg.out.with_suffix(".json")
    g = gs.grid
    _write_json(side, {"dim": g.dim, "center_value": gs.center_value,
                       "residual_norm": gs.residual_norm, "h": g.h, "R": g.radius})
    print(f"ω(0) = {gs.center_value!r}  residual {gs.residual_norm:.3e}  -> {cfg.out}")
    return [cfg.out, side]


def cmd_spectrum(cfg: RunConfig) -> list[Path]:
    from .spectrum import eigen_lambda

    gs = _ground_state(cfg)
    kappa = cfg.require("kappa")
    if not kappa > -1:
        raise UsageError(f"--kappa must exceed -1, got {kappa}")
    pairs = eigen_lambda(gs, kappa, cfg.get("count", 4))
    rows = [{"j": p.j, "kappa": p.kappa, "lambda": p.eigenvalue, "residual": p.residual}
            for p in pairs]
    _write_json(cfg.out, rows)
    for r in rows:
        print(f"λ_{r['j']}({kappa:g}) = {r['lambda']!r}")
    return [cfg.out]


def cmd_bifurcations(cfg: RunConfig) -> list[Path]:
    from .branches import branch_l2_norm, find_bifurcation_kappas

    gs = _ground_state(cfg)
    beta = cfg.require("beta")
    if not beta > -1:
        raise UsageError(f"--beta must exceed -1, got {beta}")
    bps = find_bifurcation_kappas(gs, beta, cfg.get("jmax", 3))
    rows = [{"j": bp.j, "kappa": bp.kappa_j, "l2_norm_u": branch_l2_norm(bp),
             "lambda": bp.eigenvalue, "in_unit_interval": bp.in_unit_interval}
            for bp in bps]
    _write_json(cfg.out, rows)
    for r in rows:
        print(f"κ_{r['j']} = {r['kappa']!r}  ‖u‖ = {r['l2_norm_u']:.6f}")
    return [cfg.out]


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        a, b = int(a), int(b)
    except ValueError:
        raise UsageError(f"--grid expects AxB, got {text!r}") from None
    if a < 2 or b < 2:
        raise UsageError("--grid needs at least 2 points per axis")
    return a, b


def cmd_region_map(cfg: RunConfig) -> list[Path]:
    from .branches import classify_region
    from .system import Params
    from .verify import region_axis

    nk, nb = _parse_grid(cfg.get("grid", "200x200"))
    mu1, mu2 = cfg.get("mu1", 1.0), cfg.get("mu2", 1.0)
    try:
        Params(0.0, 0.0, mu1, mu2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = []
    for k in region_axis(-2.0, 2.9, nk):
        for b in region_axis(-2.0, 2.9, nb):
            v = classify_region(Params(float(k), float(b), mu1, mu2))
            rows.append((float(k), float(b), v.value))
    _write_csv(cfg.out, ["kappa", "beta", "verdict"], rows)
    print(f"{len(rows)} rows -> {cfg.out}")
    return [cfg.out]


def cmd_ground(cfg: RunConfig) -> list[Path]:
    from .mesh import l2_norm
    from .nehari import minimize_ground_state

    p = _params(cfg)
    gs = _ground_state(cfg)
    st = minimize_ground_state(p, (gs.omega, gs.omega), tol=cfg.tolerances["gradient"],
                               max_iter=5000)
    u, v = st.pair
    g = u.grid
    _write_json(cfg.out, {"energy": st.energy, "residual": st.residual,
                          "l2_u": l2_norm(g, u), "l2_v": l2_norm(g, v),
                          "positive": st.positive, "converged": st.converged})
    pu = cfg.out.with_name(cfg.out.stem + "_u.csv")
    pv = cfg.out.with_name(cfg.out.stem + "_v.csv")
    u.to_csv(pu)
    v.to_csv(pv)
    print(f"I = {st.energy!r}  residual {st.residual:.3e}  positive {st.positive}")
    if not st.converged:
        raise NumericalFailure("Nehari descent did not reach the gradient tolerance",
                               residual=st.residual)
    return [cfg.out, pu, pv]


def cmd_branch(cfg: RunConfig) -> list[Path]:
    from .branches import find_bifurcation_kappas
    from .continuation import point_energy, trace_from_bifurcation
    from .mesh import l2_norm

    p = _params(cfg, kappa=0.0)
    gs = _ground_state(cfg)
    j = cfg.get("j", 1)
    bps = [bp for bp in find_bifurcation_kappas(gs, p.beta, j) if bp.j == j]
    if not bps:
        raise NumericalFailure(f"no bifurcation point κ_{j} for β={p.beta}")
    step = cfg.get("step", 0.02)
    if not 1e-4 < step <= 0.1:
        raise UsageError(f"--step must lie in (1e-4, 0.1], got {step}")
    seg = trace_from_bifurcation(bps[0], step=step, max_points=cfg.get("max_points", 100),
                                 cutoff=bool(cfg.get("cutoff", False)),
                                 params=p.with_kappa(bps[0].kappa_j),
                                 tol=cfg.tolerances["branch"])
    rows = []
    for q in seg.points:
        g = q.grid
        rows.append((q.arclength, q.kappa, l2_norm(g, q.pair[0]), l2_norm(g, q.pair[1]),
                     q.asymmetry, point_energy(p, q), str(q.positive).lower(), q.residual))
    _write_csv(cfg.out, ["arclength", "kappa", "l2_u", "l2_v", "asymmetry", "energy",
                         "positive", "residual"], rows)
    print(f"{len(rows)} points from κ_{j} = {bps[0].kappa_j!r}, "
          f"termination {seg.termination} -> {cfg.out}")
    return [cfg.out]


def cmd_verify(cfg: RunConfig) -> list[Path]:
    from .verify import run_checks

    dim = cfg.dim
    if dim is not None and dim not in (1, 2, 3):
        raise UsageError(f"--dim must be 1, 2 or 3, got {dim}")
    results = run_checks(fast=bool(cfg.get("fast", False)), dim=dim, seed=cfg.get("seed", 0))
    for r in results:
        print(r.line())
        for d in r.details:
            print("      " + d)
    cfg.params["_verdict"] = [(r.number, r.passed) for r in results]
    if not all(r.passed for r in results):
        raise NumericalFailure("acceptance checks failed",
                               failed=[r.number for r in results if not r.passed])
    return []


HANDLERS = {
    "ground-state": cmd_ground_state,
    "spectrum": cmd_spectrum,
    "bifurcations": cmd_bifurcations,
    "region-map": cmd_region_map,
    "ground": cmd_ground,
    "branch": cmd_branch,
    "verify": cmd_verify,
}


def _digest(paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def _log_run(cfg: RunConfig, status: str, seconds: float, digest: str | None) -> None:
    entry = {
        "command": cfg.command, "dim": cfg.dim, "radius": cfg.radius, "nodes": cfg.nodes,
        "parameters": {k: v for k, v in cfg.params.items() if not k.startswith("_")},
        "tolerances": cfg.tolerances, "status": status, "wall_time": seconds,
        "digest": digest,
    }
    if "_verdict" in cfg.params:
        entry["checks"] = cfg.params["_verdict"]
    try:
        with (cfg.output_dir / "runs.log").open("a") as fh:
            fh.write(json.dumps(entry, default=str) + "\n")
    except OSError as exc:
        print(f"warning: could not append to {cfg.output_dir / 'runs.log'}: {exc}",
              file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on unknown flags
    try:
        cfg = make_config(args)
    except (UsageError, OSError, configparser.Error) as exc:
        parser.subcommands[args.command].print_usage(sys.stderr)
        print(f"schro: error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    status, code, digest = "ok", 0, None
    try:
        written = HANDLERS[cfg.command](cfg)
        digest = _digest(written) if written else None
    except UsageError as exc:
        parser.subcommands[args.command].print_usage(sys.stderr)
        print(f"schro: error: {exc}", file=sys.stderr)
        status, code = "usage", 2
    except (NumericalFailure, ConfigurationError, ArithmeticError) as exc:
        print(f"schro: numerical failure: {exc}", file=sys.stderr)
        status, code = "numerical_failure", 1
    except OSError as exc:
        where = getattr(exc, "filename", None) or cfg.out
        print(f"schro: I/O error at {where}: {exc.strerror or exc}", file=sys.stderr)
        status, code = "io_error", 1
    _log_run(cfg, status, time.perf_counter() - t0, digest)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
