"""Command-line interface.

Every subcommand reads an IFS from a JSON file (or ``preset:<name>``) and
writes CSV, JSON, SVG or PGM to ``--output`` or standard output. Exit codes:
0 success, 2 input error, 3 budget exceeded, 4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import closed_form, dimensions, empirical, output
from ._kernels import BACKEND
from .errors import BoxLikeError, ConsistencyError, InputError
from .ifs import BoxLikeIFS, check_rosc
from .presets import PRESETS
from .pressure import PressureContext, gamma
from .projection import describe_system, project_ifs, projection_spectra

VALIDATE_TOL = 0.15


@dataclass(frozen=True)
class RunConfig:
    input: str
    command: str
    q_min: float = 0.0
    q_max: float = 4.0
    q_step: float = 0.25
    k: int = 16
    tol: float = 1e-9
    depth: int = 12
    threads: int = 1
    seed: int = 0
    resolution: int = 512
    output: str | None = None
    format: str | None = None

    def __post_init__(self):
        if self.q_min < 0:
            raise InputError("must be >= 0", "--q-min")
        if self.q_step <= 0:
            raise InputError("must be > 0", "--q-step")
        if self.q_max < self.q_min:
            raise InputError("must be >= --q-min", "--q-max")
        if self.threads < 1:
            raise InputError("must be >= 1", "--threads")
        if self.k < 1:
            raise InputError("must be >= 1", "--k")

    def q_grid(self) -> np.ndarray:
        n = int(math.floor((self.q_max - self.q_min) / self.q_step + 1e-9)) + 1
        return np.round(self.q_min + self.q_step * np.arange(n), 12)


def load_ifs(source: str) -> BoxLikeIFS:
    if source.startswith("preset:"):
        name = source.split(":", 1)[1]
        if name not in PRESETS:
            raise InputError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", "input")
        return PRESETS[name]()
    try:
        return BoxLikeIFS.load(source)
    except OSError as exc:
        raise InputError(f"cannot read: {exc.strerror}", source) from None


# ---------------------------------------------------------------------------
# commands; each returns (text-or-bytes, default format)
# ---------------------------------------------------------------------------


def cmd_analyze(ifs: BoxLikeIFS, cfg: RunConfig):
    rosc = check_rosc(ifs)
    tau1, tau2 = projection_spectra(ifs)
    s1, s2 = project_ifs(ifs)
    report = {
        "type": ifs.type_flag,
        "rosc": rosc.ok,
        "rosc_rect": [float(v) for v in rosc.rect],
        "rosc_violations": [list(v) for v in rosc.violations],
        "n_maps": len(ifs),
        "alpha_min": ifs.alpha_min,
        "alpha_max": ifs.alpha_max,
        "p_min": ifs.p_min,
        "p_max": ifs.p_max,
        "projections": (
            {"shared": describe_system(s1)} if s1 is s2
            else {"axis1": describe_system(s1), "axis2": describe_system(s2)}
        ),
        "osc": {"axis1": tau1.osc_status.value, "axis2": tau2.osc_status.value},
        "spectrum_form": tau1.form.value,
        "ifs": ifs.to_dict(),
    }
    return report, "json"


def _ladder_levels(k: int):
    out, j = [], 1
    while j <= k:
        out.append(j)
        j *= 2
    return out


def cmd_spectrum(ifs: BoxLikeIFS, cfg: RunConfig):
    ctx = PressureContext(ifs, workers=cfg.threads)
    qs = cfg.q_grid()
    levels = _ladder_levels(cfg.k)
    closed = closed_form.branch_grid(ifs, qs).results(ifs) if ifs.separated else None
    header = ["q", "tau1", "tau2", "dtau1", "dtau2"] + [f"gamma_{k}" for k in levels]
    header += ["gamma", "uncertainty", "k_used", "regime", "closed_gamma", "branch", "status"]
    rows = []
    for j, q in enumerate(qs):
        t1, t2 = ctx.taus(q)
        d1, d2 = ctx.dtaus(q)
        est = gamma(ctx, q, cfg.tol, cfg.k)
        ladder = dict(est.ladder)
        row = [q, t1, t2, d1, d2] + [ladder.get(k, "") for k in levels]
        row += [est.value, est.uncertainty, est.k_used, est.regime]
        if closed is not None:
            r = closed[j]
            row += [r.value, r.branch, r.status]
        else:
            row += ["", "", ""]
        rows.append(row)
    return (header, rows), "csv"


def cmd_dims(ifs: BoxLikeIFS, cfg: RunConfig):
    return dimensions.dimension_report(ifs, cfg.k, cfg.tol).to_dict(), "json"


def cmd_legendre(ifs: BoxLikeIFS, cfg: RunConfig):
    samples = dimensions.gamma_samples(ifs, cfg.q_grid(), cfg.tol, cfg.k)
    spec = dimensions.legendre_spectrum(samples)
    return (["alpha", "f_upper"], spec), "csv"


def cmd_phase(ifs: BoxLikeIFS, cfg: RunConfig):
    trans = closed_form.find_phase_transitions(ifs, (cfg.q_min, cfg.q_max), cfg.q_step)
    return [t.to_dict() for t in trans], "json"


def cmd_validate(ifs: BoxLikeIFS, cfg: RunConfig):
    ctx = PressureContext(ifs, workers=cfg.threads)
    n_max = cfg.depth
    n_min = max(4, n_max - 6)
    header = ["q", "analytic", "empirical", "r_squared", "abs_diff", "agree"]
    rows = []
    for q in cfg.q_grid():
        g = gamma(ctx, q, cfg.tol, cfg.k).value
        slope, r2 = empirical.estimate_tau(ifs, q, n_min, n_max)
        rows.append([q, g, slope, r2, abs(g - slope), abs(g - slope) <= VALIDATE_TOL])
    return (header, rows), "csv"


def cmd_render(ifs: BoxLikeIFS, cfg: RunConfig):
    img = empirical.render_attractor(ifs, cfg.depth, cfg.resolution)
    return img, "ppm"


COMMANDS = {
    "analyze": (cmd_analyze, "classification, ROSC verdict and projected systems"),
    "spectrum": (cmd_spectrum, "tau1, tau2, the gamma_k ladder, gamma and closed-form branch per q"),
    "dims": (cmd_dims, "box/packing dimension of the attractor and dimension of the measure"),
    "legendre": (cmd_legendre, "increasing part of the Legendre upper spectrum"),
    "phase": (cmd_phase, "phase transitions between closed-form branches (separated only)"),
    "validate": (cmd_validate, "box-counting estimates against the analytic gamma"),
    "render": (cmd_render, "grey-scale image of the measure (binary PGM)"),
}

COMMAND_DEFAULTS = {
    "phase": {"q_max": 10.0, "q_step": 1e-3},
    "legendre": {"q_max": 10.0, "q_step": 0.01},
    "validate": {"q_max": 2.0, "q_step": 0.5},
    "render": {"depth": 8},
}


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def _plot(command, payload):
    if command == "legendre":
        _, rows = payload
        a = [r[0] for r in rows]
        return output.svg_plot([("gamma*", a, [r[1] for r in rows]), ("diagonal", a, a)],
                               "Legendre upper spectrum", "alpha", "f")
    if command in ("spectrum", "validate"):
        header, rows = payload
        q = [r[0] for r in rows]
        names = ["tau1", "tau2", "gamma"] if command == "spectrum" else ["analytic", "empirical"]
        series = [(nm, q, [r[header.index(nm)] for r in rows]) for nm in names]
        return output.svg_plot(series, command, "q", "")
    raise InputError(f"svg is not available for {command}", "--format")


def _json_default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if hasattr(x, "value"):
        return x.value
    raise TypeError(type(x).__name__)


def render_payload(command, payload, kind, fmt) -> bytes:
    fmt = fmt or kind
    if kind == "ppm":
        if fmt != "ppm":
            raise InputError("render only writes ppm", "--format")
        return output.pgm_bytes(payload)
    if fmt == "ppm":
        raise InputError("ppm is only available for render", "--format")
    if fmt == "svg":
        return _plot(command, payload).encode()
    if kind == "csv" and fmt == "json":
        header, rows = payload
        payload = [dict(zip(header, r)) for r in rows]
        kind = "json"
    if kind == "json":
        if fmt == "csv":
            if isinstance(payload, dict):
                flat = _flatten(payload)
                return output.csv_text(["key", "value"], flat.items()).encode()
            if payload and isinstance(payload[0], dict):
                header = list(payload[0])
                return output.csv_text(header, [[d[h] for h in header] for d in payload]).encode()
            return output.csv_text(["empty"], []).encode()
        return (json.dumps(payload, indent=2, default=_json_default, allow_nan=True) + "\n").encode()
    header, rows = payload
    return output.csv_text(header, rows).encode()


def _flatten(d, prefix=""):
    out = {}
    for key, v in d.items():
        name = f"{prefix}{key}"
        if isinstance(v, dict):
            out.update(_flatten(v, name + "."))
        elif isinstance(v, (list, tuple)):
            out[name] = json.dumps(v, default=_json_default)
        else:
            out[name] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxlike", description="L^q-spectra of box-like self-affine measures")
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("input", help="IFS JSON file, or preset:<name> with name in " + ", ".join(sorted(PRESETS)))
        p.add_argument("--q-min", type=float, default=None)
        p.add_argument("--q-max", type=float, default=None)
        p.add_argument("--q-step", type=float, default=None)
        p.add_argument("--k", type=int, default=16, help="largest level of the doubling ladder")
        p.add_argument("--tol", type=float, default=1e-9, help="ladder stopping tolerance")
        p.add_argument("--depth", type=int, default=None,
                       help="render: word length; validate: finest dyadic level")
        p.add_argument("--resolution", type=int, default=512, help="render: image side in pixels")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=0, help="accepted for reproducibility; the core is deterministic")
        p.add_argument("--output", "-o", default=None)
        p.add_argument("--format", choices=("csv", "json", "svg", "ppm"), default=None)
    return parser


def make_config(args) -> RunConfig:
    defaults = {"q_min": 0.0, "q_max": 4.0, "q_step": 0.25, "depth": 12}
    defaults.update(COMMAND_DEFAULTS.get(args.command, {}))
    pick = {k: (getattr(args, k) if getattr(args, k) is not None else v) for k, v in defaults.items()}
    return RunConfig(
        input=args.input, command=args.command, k=args.k, tol=args.tol, threads=args.threads,
        seed=args.seed, resolution=args.resolution, output=args.output, format=args.format, **pick,
    )


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        ifs = load_ifs(cfg.input)
        fn = COMMANDS[cfg.command][0]
        payload, kind = fn(ifs, cfg)
        data = render_payload(cfg.command, payload, kind, cfg.format)
        if cfg.output:
            with open(cfg.output, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        if cfg.command == "validate" and not all(r[-1] for r in payload[1]):
            raise ConsistencyError(f"box-counting estimate differs from gamma by more than {VALIDATE_TOL}")
    except BoxLikeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
