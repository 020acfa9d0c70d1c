"""Command-line front end.

Commands: solve, validate, converge, polygon-limit, render, scars. Every
run writes ``run.meta`` (the full effective configuration) next to its
outputs. Exit codes: 0 success, 1 pipeline failure, 2 usage error.

A ``--config`` file holds one ``key = value`` per line, using the long
flag names without the leading dashes (``chord-tol`` or ``chord_tol``);
``#`` starts a comment. Flags given on the command line win over the file.
"""
from __future__ import annotations

import argparse
import logging
import math
import re
import sys
from pathlib import Path


from . import __version__
from ._io import atomic_write, csv_text
from .analysis import (
    UnsupportedRegionForOracle,
    convergence_study,
    exact_levels,
    polygon_limit_study,
    validate_against_oracle,
    write_polygon_limit_csv,
    write_refinement_csv,
    write_validation_csv,
)
from .eigensolve import SolverOpts, energies
from .field import evaluate_eigenfunction, normalize_l2, rank_scar_candidates, write_pgm, write_scar_csv
from .geometry import InvalidSpec, build_region
from .mesh import MeshParams
from .pipeline import PipelineError, run_pipeline

log = logging.getLogger("fembilliards")

DEFAULTS = {
    "region": "stadium r=1 a=1",
    "h": 1e-3,
    "chord_tol": None,
    "order": 2,
    "states": 16,
    "tol": 1e-9,
    "min_angle": 20.0,
    "out": "out",
    "indices": None,
    "sides": "5,8,16,32,64,96",
    "radius": 1.0,
    "state": 1,
    "metric": "vstrip",
    "resolution": "512x512",
    "mode": "density",
    "top": 10,
    "width": 0.1,
}

SCAR_SPARE_STATES = 6

COMMANDS = ("solve", "validate", "converge", "polygon-limit", "render", "scars")


class UsageError(ValueError):
    pass


def _key(name: str) -> str:
    return name.strip().replace("-", "_")


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = _key(key)
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def parse_indices(text) -> list[int]:
    """``"1-16"``, ``"1..16"``, ``"100,200,300"`` or a mix of those."""
    if isinstance(text, (list, tuple)):
        return [int(i) for i in text]
    out = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        m = re.fullmatch(r"(\d+)(?:-|\.\.)(\d+)", part)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            out.extend(range(a, b + 1))
        elif part.isdigit():
            out.append(int(part))
        else:
            raise UsageError(f"bad index list {text!r}")
    return out


def _resolution(text) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", str(text))
    if not m:
        raise UsageError(f"resolution must look like 512x512, got {text!r}")
    nx, ny = int(m.group(1)), int(m.group(2))
    if nx < 2 or ny < 2:
        raise UsageError("resolution must be at least 2x2")
    return nx, ny


def _coerce(cfg: dict) -> dict:
    c = dict(cfg)
    try:
        c["h"] = float(c["h"])
        c["chord_tol"] = None if c["chord_tol"] in (None, "", "none", "None") else float(c["chord_tol"])
        c["order"] = int(c["order"])
        c["states"] = int(c["states"])
        c["tol"] = float(c["tol"])
        c["min_angle"] = float(c["min_angle"])
        c["radius"] = float(c["radius"])
        c["state"] = int(c["state"])
        c["top"] = int(c["top"])
        c["width"] = float(c["width"])
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if not (math.isfinite(c["h"]) and c["h"] > 0):
        raise UsageError("--h must be positive")
    if c["chord_tol"] is not None and not c["chord_tol"] > 0:
        raise UsageError("--chord-tol must be positive")
    if c["chord_tol"] is None:
        c["chord_tol"] = math.sqrt(c["h"]) / 10
    if c["order"] not in (1, 2):
        raise UsageError("--order must be 1 or 2")
    if c["states"] < 1:
        raise UsageError("--states must be at least 1")
    if not 0 < c["tol"] <= 1e-4:
        raise UsageError("--tol must lie in (0, 1e-4]")
    if not 0 < c["min_angle"] <= 30:
        raise UsageError("--min-angle must lie in (0, 30]")
    if c["metric"] not in ("ipr", "vstrip", "hstrip"):
        raise UsageError("--metric must be ipr, vstrip or hstrip")
    if c["mode"] not in ("psi", "density"):
        raise UsageError("--mode must be psi or density")
    if c["top"] < 0:
        raise UsageError("--top must be non-negative")
    if not 0 < c["width"] <= 1:
        raise UsageError("--width must lie in (0, 1]")
    if c["state"] < 1:
        raise UsageError("--state must be at least 1")
    c["resolution"] = "%dx%d" % _resolution(c["resolution"])
    try:
        c["region"] = build_region(str(c["region"])).spec()
    except InvalidSpec as exc:
        raise UsageError(f"bad region: {exc}") from exc
    return c


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("--region", help=f"region spec (default {DEFAULTS['region']!r})")
    g.add_argument("--h", help="max triangle area (default 1e-3)")
    g.add_argument("--chord-tol", dest="chord_tol", help="boundary chord tolerance (default sqrt(h)/10)")
    g.add_argument("--order", help="element order, 1 or 2 (default 2)")
    g.add_argument("--states", help="number of eigenstates (default 16)")
    g.add_argument("--tol", help="relative residual tolerance (default 1e-9)")
    g.add_argument("--min-angle", dest="min_angle", help="minimum triangle angle in degrees (default 20)")
    g.add_argument("--out", help="output directory (default ./out)")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="fembilliards",
                                description="FEM eigenstates of Dirichlet quantum billiards.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="write eigs.csv (n,k,E)")
    sub.add_parser("validate", parents=[common], help="compare with a closed-form spectrum")
    c = sub.add_parser("converge", parents=[common], help="refinement error between h and h/2")
    c.add_argument("--indices", help="state indices, e.g. 1-16 or 100,200,300 (default 1..states)")
    pl = sub.add_parser("polygon-limit", parents=[common], help="regular n-gons approaching the disk")
    pl.add_argument("--sides", help="comma separated side counts (default 5,8,16,32,64,96)")
    pl.add_argument("--radius", help="circumradius (default 1)")
    r = sub.add_parser("render", parents=[common], help="write state_<n>.pgm")
    r.add_argument("--state", help="1-based state index (default 1)")
    r.add_argument("--resolution", help="WxH (default 512x512)")
    r.add_argument("--mode", help="psi or density (default density)")
    s = sub.add_parser("scars", parents=[common], help="rank states by localization")
    s.add_argument("--indices", help="state range, e.g. 1-150 (default 1..states)")
    s.add_argument("--metric", help="ipr, vstrip or hstrip (default vstrip)")
    s.add_argument("--top", help="render this many top states (default 10)")
    s.add_argument("--width", help="strip width as a fraction of the bounding box (default 0.1)")
    s.add_argument("--resolution", help="WxH for the rendered states (default 512x512)")
    s.add_argument("--mode", help="psi or density (default density)")
    return p


def effective_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            cfg.update(read_config(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return _coerce(cfg)


def _meta(command: str, cfg: dict) -> str:
    lines = [f"# fembilliards {__version__}", f"command = {command}"]
    for key in sorted(cfg):
        value = cfg[key]
        lines.append(f"{key} = {'' if value is None else (repr(value) if isinstance(value, float) else value)}")
    return "\n".join(lines) + "\n"


def _params(cfg) -> MeshParams:
    return MeshParams(cfg["h"], cfg["chord_tol"], cfg["min_angle"])


def _opts(cfg, states: int) -> SolverOpts:
    return SolverOpts(states, cfg["tol"])


def _solve(cfg, states=None):
    return run_pipeline(cfg["region"], _params(cfg), cfg["order"], _opts(cfg, states or cfg["states"]))


def cmd_solve(cfg, out: Path) -> list[Path]:
    res = _solve(cfg)
    E = energies(res.spectrum)
    rows = [(n, float(k), float(e)) for n, (k, e) in enumerate(zip(res.k, E), start=1)]
    return [atomic_write(out / "eigs.csv", csv_text(("n", "k", "E"), rows))]


def cmd_validate(cfg, out: Path) -> list[Path]:
    exact = exact_levels(cfg["region"], cfg["states"])
    res = _solve(cfg)
    rows = validate_against_oracle(exact, res.spectrum)
    return [write_validation_csv(rows, out / "validation.csv")]


def cmd_converge(cfg, out: Path) -> list[Path]:
    idx = (parse_indices(cfg["indices"]) if cfg["indices"] is not None
           else list(range(1, cfg["states"] + 1)))
    if not idx or min(idx) < 1:
        raise UsageError("--indices must name states 1 and up")
    rows = convergence_study(cfg["region"], cfg["h"], idx, cfg["chord_tol"], cfg["order"],
                             _opts(cfg, max(idx)), min_angle=cfg["min_angle"])
    return [write_refinement_csv(rows, out / "refinement.csv")]


def cmd_polygon_limit(cfg, out: Path) -> list[Path]:
    try:
        sides = [int(s) for s in str(cfg["sides"]).split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --sides: {exc}") from exc
    if not sides or min(sides) < 3:
        raise UsageError("--sides needs integers >= 3")
    if not cfg["radius"] > 0:
        raise UsageError("--radius must be positive")
    rows = polygon_limit_study(sides, cfg["radius"], _params(cfg), 1, cfg["order"])
    return [write_polygon_limit_csv(rows, out / "polygon_limit.csv")]


def _render(res, n: int, cfg, out: Path) -> Path:
    nx, ny = _resolution(cfg["resolution"])
    c = normalize_l2(res.M, res.spectrum.vectors[:, n - 1])
    grid = evaluate_eigenfunction(res.mesh, res.dofs, c, nx, ny, bbox=res.region.bbox(), region=res.region)
    if grid.failures:
        log.info("state %d: %d grid points in boundary chord gaps masked out", n, grid.failures)
    return write_pgm(grid, out / f"state_{n}.pgm", cfg["mode"])


def cmd_render(cfg, out: Path) -> list[Path]:
    n = cfg["state"]
    if n > cfg["states"]:
        raise PipelineError("state selection", IndexError(f"state {n} beyond the {cfg['states']} computed states"))
    res = _solve(cfg)
    return [_render(res, n, cfg, out)]


def cmd_scars(cfg, out: Path) -> list[Path]:
    idx = (parse_indices(cfg["indices"]) if cfg["indices"] is not None
           else list(range(1, cfg["states"] + 1)))
    idx = sorted(set(idx))
    if not idx or idx[0] < 1:
        raise UsageError("--indices must be a non-empty range of states 1 and up")
    # a few spare states so a degenerate cluster at the top of the range is whole
    res = _solve(cfg, idx[-1] + SCAR_SPARE_STATES)
    reports = rank_scar_candidates(res.mesh, res.dofs, res.spectrum, idx, cfg["metric"],
                                   width_fraction=cfg["width"], bbox=res.region.bbox())
    written = [write_scar_csv(reports, out / "scars.csv")]
    for r in reports[:cfg["top"]]:
        written.append(_render(res, r.n, cfg, out))
    return written


HANDLERS = {
    "solve": cmd_solve,
    "validate": cmd_validate,
    "converge": cmd_converge,
    "polygon-limit": cmd_polygon_limit,
    "render": cmd_render,
    "scars": cmd_scars,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = effective_config(args)
        if args.command == "validate":
            exact_levels(cfg["region"], 1)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        atomic_write(out / "run.meta", _meta(args.command, cfg))
        written = HANDLERS[args.command](cfg, out)
    except UsageError as exc:
        print(f"fembilliards {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedRegionForOracle as exc:
        print(f"fembilliards {args.command}: oracle: {exc}", file=sys.stderr)
        return 1
    except PipelineError as exc:
        print(f"fembilliards {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is still a pipeline failure, not a crash
        print(f"fembilliards {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
