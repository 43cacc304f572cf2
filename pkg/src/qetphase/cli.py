"""Command-line front end.

    qetphase protocol --h 1 --k 1
    qetphase sweep --h-range 0.25:4:5 --k-range 0.25:4:5 --out sweep.csv
    qetphase wigner --stage ground --grid 9x8 --slice theta2=0,phi2=0
    qetphase entropy --h 1 --k 1
    qetphase verify [--tol T]

Exit status: 0 success, 1 numeric or check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import husimi, jsonfmt
from . import phasespace as ps
from . import qet
from .verify import run_verification

COMMANDS = ("verify", "protocol", "sweep", "wigner", "entropy")
STAGES = {
    "ground": qet.Stage.GROUND,
    "post-measurement": qet.Stage.POST_MEASUREMENT,
    "post_measurement": qet.Stage.POST_MEASUREMENT,
    "final": qet.Stage.POST_FEEDBACK,
    "post-feedback": qet.Stage.POST_FEEDBACK,
    "post_feedback": qet.Stage.POST_FEEDBACK,
}
DEFAULTS = {
    "h": 1.0,
    "k": 1.0,
    "grid": "9x8",
    "stage": "ground",
    "slice": None,
    "out": None,
    "tol": None,
    "limit_mode": False,
    "quad_theta": None,
    "quad_phi": None,
    "h_range": "0.25:4:5",
    "k_range": "0.25:4:5",
    "jobs": 1,
}
PROTOCOL_TOL = 1e-10
SWEEP_HEADER = ["h", "k", "E_A", "E_B", "neg_ground", "neg_final", "S_ground", "S_post", "S_final"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    h: float
    k: float
    grid: tuple[int, int]
    stage: str
    slice: tuple[float, float] | None
    out: str | None
    tol: float | None
    limit_mode: bool
    quad_theta: int | None
    quad_phi: int | None
    h_range: tuple[float, float, int]
    k_range: tuple[float, float, int]
    jobs: int

    @property
    def params(self) -> qet.ProtocolParams:
        return qet.ProtocolParams(self.h, self.k, self.limit_mode)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--h", type=float, help="field strength h (default 1)")
    common.add_argument("--k", type=float, help="coupling k (default 1)")
    common.add_argument("--grid", help="sample grid NxM for field export (default 9x8)")
    common.add_argument("--stage", help="ground | post-measurement | final")
    common.add_argument("--slice", help="fix Bob's angles, e.g. theta2=0,phi2=0")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--tol", type=float, help="override every hard tolerance")
    common.add_argument("--limit-mode", dest="limit_mode", action="store_const", const=True,
                        help="allow h = 0 or k = 0")
    common.add_argument("--quad-theta", dest="quad_theta", type=int, help="Gauss-Legendre order in cos(theta)")
    common.add_argument("--quad-phi", dest="quad_phi", type=int, help="uniform nodes in phi")
    common.add_argument("--h-range", dest="h_range", help="sweep range start:end:count")
    common.add_argument("--k-range", dest="k_range", help="sweep range start:end:count")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("--config", help="JSON file with the same keys as the flags; flags win")

    parser = argparse.ArgumentParser(prog="qetphase", description="Phase-space quantum energy teleportation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _parse_range(text: str, name: str) -> tuple[float, float, int]:
    try:
        start, end, count = text.split(":")
        start, end, count = float(start), float(end), int(count)
    except ValueError:
        raise UsageError(f"{name} must look like start:end:count, got {text!r}") from None
    if count < 2:
        raise UsageError(f"{name} needs count >= 2")
    if not start < end:
        raise UsageError(f"{name} needs start < end")
    return start, end, count


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        n, m = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--grid must look like NxM, got {text!r}") from None
    if n < 2 or m < 2:
        raise UsageError("--grid sizes must be at least 2")
    return n, m


def _parse_slice(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    vals = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        try:
            vals[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"bad --slice entry {part!r}") from None
    if set(vals) != {"theta2", "phi2"}:
        raise UsageError("--slice needs theta2=..,phi2=..")
    return vals["theta2"], vals["phi2"]


def make_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if merged["stage"] not in STAGES:
        raise UsageError(f"unknown stage {merged['stage']!r}; choose ground, post-measurement or final")
    cfg = RunConfig(
        command=args.command,
        h=float(merged["h"]),
        k=float(merged["k"]),
        grid=_parse_grid(str(merged["grid"])),
        stage=merged["stage"],
        slice=_parse_slice(merged["slice"]),
        out=merged["out"],
        tol=merged["tol"],
        limit_mode=bool(merged["limit_mode"]),
        quad_theta=merged["quad_theta"],
        quad_phi=merged["quad_phi"],
        h_range=_parse_range(str(merged["h_range"]), "--h-range"),
        k_range=_parse_range(str(merged["k_range"]), "--k-range"),
        jobs=int(merged["jobs"]),
    )
    try:
        cfg.params
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.command == "sweep":
        for lo, _, _ in (cfg.h_range, cfg.k_range):
            try:
                qet.ProtocolParams(max(lo, 0.0) if cfg.limit_mode else lo, 1.0, cfg.limit_mode)
            except ValueError as exc:
                raise UsageError(f"sweep range: {exc}") from None
    return cfg


def _emit(cfg: RunConfig, text: str):
    if cfg.out is None:
        sys.stdout.write(text)
        return
    try:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {cfg.out}: {exc.strerror}") from None


def _phase_grid(cfg: RunConfig) -> ps.QuadratureGrid:
    return ps.QuadratureGrid(2, cfg.quad_theta or 3, cfg.quad_phi or 8)


def _entropy_orders(cfg: RunConfig) -> tuple[int, int]:
    return cfg.quad_theta or husimi.ENTROPY_THETA, cfg.quad_phi or husimi.ENTROPY_PHI


# -- commands -----------------------------------------------------------------


def cmd_protocol(cfg: RunConfig) -> int:
    report = qet.run_protocol(cfg.params, _phase_grid(cfg))
    _emit(cfg, jsonfmt.dumps(report.to_dict()) + "\n")
    tol = PROTOCOL_TOL if cfg.tol is None else cfg.tol
    if report.max_residual > tol:
        worst = max(report.residuals.items(), key=lambda kv: kv[1])
        print(f"error: matrix and phase-space paths disagree on {worst[0]} by {worst[1]:.3g}", file=sys.stderr)
        return 1
    return 0


def _sweep_row(args) -> list[float]:
    h, k, limit_mode, orders = args
    p = qet.ProtocolParams(h, k, limit_mode)
    rep = qet.run_protocol(p)
    ent = husimi.entropy_chain(p, *orders)
    return [h, k, rep.E_A.value, rep.E_B.value, rep.negativity["ground"].value,
            rep.negativity["post_feedback"].value, *ent.entropies()]


def _axis(r: tuple[float, float, int]) -> list[float]:
    return [float(x) for x in np.linspace(*r)]


def cmd_sweep(cfg: RunConfig) -> int:
    jobs = [(h, k, cfg.limit_mode, _entropy_orders(cfg)) for h in _axis(cfg.h_range) for k in _axis(cfg.k_range)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([f"{x:.12g}" for x in row])
    _emit(cfg, buf.getvalue())
    return 0


def stage_symbol(p: qet.ProtocolParams, stage: str) -> ps.SymbolExpansion:
    tag = STAGES[stage]
    return next(s.symbol for s in qet.run_stages(p) if s.tag is tag)


def cmd_wigner(cfg: RunConfig) -> int:
    n_theta, n_phi = cfg.grid
    fixed = (cfg.slice,) if cfg.slice is not None else ()
    grid = ps.SampleGrid(2, n_theta, n_phi, fixed)
    field = ps.sample(stage_symbol(cfg.params, cfg.stage), grid)
    _emit(cfg, ps.field_to_csv(field))
    return 0


def cmd_entropy(cfg: RunConfig) -> int:
    orders = _entropy_orders(cfg)
    report = husimi.entropy_chain(cfg.params, *orders)
    _emit(cfg, husimi.entropy_csv([report]))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    report = run_verification(cfg.params, tol=cfg.tol)
    _emit(cfg, jsonfmt.dumps(report.to_dict()) + "\n")
    for c in report.failures:
        print(f"FAIL {c.name}: residual {c.residual:.3e} > tol {c.tol:.3e}", file=sys.stderr)
    summary = report.to_dict()["summary"]
    print(f"{summary['passed']}/{summary['total']} checks passed, {summary['flagged']} flagged diagnostics",
          file=sys.stderr)
    return 0 if report.ok else 1


HANDLERS = {
    "verify": cmd_verify,
    "protocol": cmd_protocol,
    "sweep": cmd_sweep,
    "wigner": cmd_wigner,
    "entropy": cmd_entropy,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
    except UsageError as exc:
        parser.error(str(exc))
    try:
        return HANDLERS[cfg.command](cfg)
    except (ps.InsufficientQuadrature, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
