"""Config-driven command line front end.

Config files are flat ``key = value`` text, one entry per line, ``#`` starts a
comment. Lists are comma separated; pairs inside a list use ``:``.

    schema = 1
    interaction.alpha = 0
    state.preset = gaussian
    state.sigma = 1.0
    quad.abs_tol = 1e-9
    grid.r = 2, 5, 10
    grid.t = 1, 5
    fas.R = 10, 20, 40
    resonance.schedule = 10:100, 20:1000, 40:10000

Exit codes: 0 success, 1 configuration or input error, 2 success with
flagged non-convergence (artifacts are still written).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .analysis import (
    CLAIMED_EXPONENT,
    decay_fit,
    divergence_demo,
    fas_sweep,
    singularity_scan,
    write_decay,
)
from .flux import main_term_identity, radial_current, write_reports
from .model import (
    ConeSurface,
    PointInteraction,
    RadialState,
    bound_state,
    make_preset_state,
    norm,
    orthogonal_gaussian,
    w_membership,
)
from .numerics.quadrature import QuadratureSpec
from .propagator import decompose, write_batch_csv
from .spectral import outgoing_state, spectral_field

SCHEMA_VERSION = 1
COMMANDS = ("evolve", "spectral", "fas", "identity", "decay", "resonance", "selftest")
PLOT_KINDS = ("fas_convergence", "decay_loglog", "singularity_scan", "flux_vs_time")
PRESETS = ("gaussian", "exponential_decay", "w_projected_exponential",
           "orthogonal_gaussian", "bound_state")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# --------------------------------------------------------------------------
# config schema


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _int(v: str) -> int:
    return int(v)


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _floats(v: str) -> tuple[float, ...]:
    return tuple(_float(p) for p in v.split(",") if p.strip())


def _pairs(v: str) -> tuple[tuple[float, float], ...]:
    out = []
    for p in v.split(","):
        if not p.strip():
            continue
        a, b = p.split(":")
        out.append((_float(a), _float(b)))
    return tuple(out)


def _words(v: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in v.split(",") if p.strip())


def _positive(x):
    if not x > 0:
        raise ValueError("must be positive")


def _tol(x):
    if not 0 < x < 1:
        raise ValueError("tolerance must lie in (0, 1)")


def _all_positive(xs):
    if not xs or any(x <= 0 for x in xs):
        raise ValueError("needs one or more positive values")


def _increasing(xs):
    _all_positive(xs)
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("must be strictly increasing")


def _preset(s):
    if s not in PRESETS:
        raise ValueError(f"unknown preset, expected one of {', '.join(PRESETS)}")


def _quantities(qs):
    bad = [q for q in qs if q not in CLAIMED_EXPONENT]
    if bad or not qs:
        raise ValueError(f"unknown quantity {bad[0] if bad else '(empty)'}")


def _solid_angle(x):
    if not 0 < x <= 4 * math.pi + 1e-12:
        raise ValueError("must lie in (0, 4 pi]")


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    check: Callable[[Any], None] | None = None


SCHEMA: dict[str, Key] = {
    "schema": Key(_int, SCHEMA_VERSION),
    "interaction.alpha": Key(_float, 0.0),
    "state.preset": Key(str.strip, "gaussian", _preset),
    "state.sigma": Key(_float, 1.0, _positive),
    "quad.abs_tol": Key(_float, 1e-9, _tol),
    "quad.rel_tol": Key(_float, 1e-9, _tol),
    "quad.order": Key(_int, 20),
    "grid.r": Key(_floats, (2.0, 5.0, 10.0, 20.0), _increasing),
    "grid.t": Key(_floats, (1.0, 5.0, 10.0), _increasing),
    "run.free": Key(_bool, False),
    "cone.solid_angle": Key(_float, 4 * math.pi, _solid_angle),
    "fas.R": Key(_floats, (10.0, 20.0, 40.0), _increasing),
    "fas.T": Key(_float, 1.0, _positive),
    "fas.trace_points": Key(_int, 40),
    "identity.points": Key(_pairs, ((10.0, 1.0), (20.0, 1.0), (40.0, 2.0))),
    "decay.quantities": Key(_words, ("R1", "R2", "R3", "P", "b"), _quantities),
    "decay.ray_speed": Key(_float, 1.0, _positive),
    "decay.window": Key(_floats, (10.0, 1000.0), _increasing),
    "decay.points": Key(_int, 12),
    "resonance.schedule": Key(_pairs, ((10.0, 1e2), (20.0, 1e3), (40.0, 1e4))),
    "resonance.T": Key(_float, 1.0, _positive),
    "spectral.k_max": Key(_float, 10.0, _positive),
    "spectral.k_points": Key(_int, 200),
}


def parse_config(text: str) -> dict[str, Any]:
    """Parse and validate config text; every key in SCHEMA is present in the result."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key")
        if key in raw:
            raise ConfigError(key, "duplicate key")
        raw[key] = value
    cfg: dict[str, Any] = {}
    for key, spec in SCHEMA.items():
        if key in raw:
            try:
                val = spec.parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(key, f"cannot parse {raw[key]!r} ({exc})") from None
        else:
            val = spec.default
        if spec.check is not None:
            try:
                spec.check(val)
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
        cfg[key] = val
    if cfg["schema"] != SCHEMA_VERSION:
        raise ConfigError("schema", f"unsupported schema version {cfg['schema']}")
    if cfg["quad.order"] < 4:
        raise ConfigError("quad.order", "must be >= 4")
    if cfg["decay.points"] < 8:
        raise ConfigError("decay.points", "at least 8 points are required")
    if len(cfg["decay.window"]) != 2:
        raise ConfigError("decay.window", "expected two values t_min, t_max")
    sched = cfg["resonance.schedule"]
    if len(sched) < 2 or any(b[0] <= a[0] or b[1] <= a[1] for a, b in zip(sched, sched[1:])):
        raise ConfigError("resonance.schedule", "must be strictly increasing in both R and T_max")
    return cfg


def load_config(path: str | Path | None) -> dict[str, Any]:
    if path is None:
        return parse_config("")
    return parse_config(Path(path).read_text(encoding="utf-8"))


def build_state(cfg: dict[str, Any]) -> RadialState:
    preset = cfg["state.preset"]
    if preset == "gaussian":
        return make_preset_state("gaussian", sigma=cfg["state.sigma"])
    if preset == "orthogonal_gaussian":
        return orthogonal_gaussian(cfg["state.sigma"], PointInteraction(cfg["interaction.alpha"]))
    if preset == "bound_state":
        return bound_state(PointInteraction(cfg["interaction.alpha"]))
    return make_preset_state(preset)


def build_quad(cfg: dict[str, Any]) -> QuadratureSpec:
    return QuadratureSpec(abs_tol=cfg["quad.abs_tol"], rel_tol=cfg["quad.rel_tol"],
                          order=cfg["quad.order"])


# --------------------------------------------------------------------------
# runs


@dataclass
class RunManifest:
    command: str
    config_path: str | None
    output_dir: str
    config: dict[str, Any]
    threads: int = 1
    seedless: bool = True
    versions: dict[str, Any] = field(default_factory=lambda: {
        "tool": __version__, "config_schema": SCHEMA_VERSION})
    artifacts: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        cfg = {k: list(v) if isinstance(v, tuple) else v for k, v in self.config.items()}
        return {
            "command": self.command,
            "config_path": self.config_path,
            "output_dir": self.output_dir,
            "config": cfg,
            "threads": self.threads,
            "seedless": True,
            "versions": self.versions,
            "artifacts": self.artifacts,
            "flags": self.flags,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }


def _stem(name: str, cfg: dict[str, Any]) -> str:
    return f"experiment_{name}_{cfg['interaction.alpha']:g}_{cfg['state.preset']}"


def _fmt(x: float) -> str:
    return f"{x:.12e}"


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _run_evolve(m: RunManifest, out: Path) -> None:
    cfg = m.config
    inter, state, quad = PointInteraction(cfg["interaction.alpha"]), build_state(cfg), build_quad(cfg)
    fields = _map(lambda t: decompose(state, inter, cfg["grid.r"], t, quad, cfg["run.free"]),
                  cfg["grid.t"], m.threads)
    path = out / f"{_stem('evolve', cfg)}.csv"
    write_batch_csv(path, fields)
    m.artifacts.append(path.name)
    for f in fields:
        m.flags.extend(f"t={f.t:g}: {x}" for x in f.flags)
    summary = {"norm_0": norm(state), "points": len(cfg["grid.r"]) * len(cfg["grid.t"]),
               "max_quad_error": max(float(np.max(f.quad_error)) for f in fields)}
    _write_json(out / f"{_stem('evolve', cfg)}.json", summary, m)


def _run_spectral(m: RunManifest, out: Path) -> None:
    cfg = m.config
    inter, state, quad = PointInteraction(cfg["interaction.alpha"]), build_state(cfg), build_quad(cfg)
    prof = outgoing_state(state, inter, quad, cfg["run.free"])
    m.flags.extend(prof.flags)
    r = np.asarray(cfg["grid.r"])

    def one(t):
        return spectral_field(prof, r, t, quad), decompose(state, inter, r, t, quad, cfg["run.free"])

    pairs = _map(one, cfg["grid.t"], m.threads)
    path = out / f"{_stem('spectral', cfg)}.csv"
    worst = 0.0
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["r", "t", "re_a", "im_a", "re_b", "im_b", "re_value", "im_value",
                     "re_propagator", "im_propagator", "rel_diff"])
        for sf, df in pairs:
            m.flags.extend(f"t={sf.t:g}: {x}" for x in sf.flags)
            for i, rr in enumerate(r):
                v, p = sf.value[i], df.value[i]
                rel = abs(v - p) / max(abs(p), 1e-300)
                worst = max(worst, rel)
                wr.writerow([_fmt(x) for x in (rr, sf.t, sf.a[i].real, sf.a[i].imag, sf.b[i].real,
                                               sf.b[i].imag, v.real, v.imag, p.real, p.imag, rel)])
    m.artifacts.append(path.name)
    kpath = out / f"{_stem('momentum', cfg)}.csv"
    ks = np.linspace(cfg["spectral.k_max"] / cfg["spectral.k_points"], cfg["spectral.k_max"],
                     cfg["spectral.k_points"])
    from .spectral import export_profile_csv, parseval_norm

    export_profile_csv(prof, kpath, ks)
    m.artifacts.append(kpath.name)
    _write_json(out / f"{_stem('spectral', cfg)}.json",
                {"max_rel_diff": worst, "parseval_norm": parseval_norm(prof),
                 "singular_at_zero": prof.singular_at_zero,
                 "residue": [prof.residue_estimate.real, prof.residue_estimate.imag]}, m)


def _run_fas(m: RunManifest, out: Path) -> None:
    cfg = m.config
    inter, state, quad = PointInteraction(cfg["interaction.alpha"]), build_state(cfg), build_quad(cfg)
    cone = ConeSurface(cfg["cone.solid_angle"])
    sweep = fas_sweep(inter, state, cfg["fas.R"], cfg["fas.T"], cone, quad,
                      cfg["run.free"], workers=m.threads)
    m.flags.extend(sweep.flags)
    stem = _stem("fas_sweep", cfg)
    write_reports(sweep.reports, out / f"{stem}.csv", out / f"{stem}.json")
    m.artifacts += [f"{stem}.csv", f"{stem}.json"]
    tpath = out / f"{_stem('flux_trace', cfg)}.csv"
    ts = np.geomspace(cfg["fas.T"], 1e3 * cfg["fas.T"], cfg["fas.trace_points"])
    traces = _map(lambda R: radial_current(state, inter, R, ts, quad, cfg["run.free"]),
                  cfg["fas.R"], m.threads)
    with open(tpath, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["R", "t", "flux"])
        for R, j in zip(cfg["fas.R"], traces):
            for t, jj in zip(ts, j):
                wr.writerow([_fmt(R), _fmt(t), _fmt(cone.solid_angle * R**2 * jj)])
    m.artifacts.append(tpath.name)


def _run_identity(m: RunManifest, out: Path) -> None:
    cfg = m.config
    inter, state = PointInteraction(cfg["interaction.alpha"]), build_state(cfg)
    cone = ConeSurface(cfg["cone.solid_angle"])
    rows = _map(lambda p: main_term_identity(state, inter, p[0], p[1], cone, free=cfg["run.free"]),
                cfg["identity.points"], m.threads)
    path = out / f"{_stem('identity', cfg)}.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["R", "T", "lhs_main", "rhs_partial", "rel_error"])
        for (R, T), (lhs, rhs) in zip(cfg["identity.points"], rows):
            rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
            if rel > 1e-5:
                m.flags.append(f"identity at R={R:g}, T={T:g}: relative error {rel:.2e}")
            wr.writerow([_fmt(x) for x in (R, T, lhs, rhs, rel)])
    m.artifacts.append(path.name)


def _run_decay(m: RunManifest, out: Path) -> None:
    cfg = m.config
    inter, state, quad = PointInteraction(cfg["interaction.alpha"]), build_state(cfg), build_quad(cfg)
    qs = [q for q in cfg["decay.quantities"] if not (q.endswith("R3") and inter.alpha == 0)]
    ests = _map(lambda q: decay_fit(q, inter, state, cfg["decay.ray_speed"], cfg["decay.window"],
                                    quad, cfg["decay.points"]), qs, m.threads)
    for e in ests:
        m.flags.extend(f"{e.quantity}: {f}" for f in e.flags)
    stem = _stem("decay", cfg)
    write_decay(ests, out / f"{stem}.csv", out / f"{stem}.json")
    m.artifacts += [f"{stem}.csv", f"{stem}.json"]


def _run_resonance(m: RunManifest, out: Path) -> None:
    cfg = m.config
    inter, state, quad = PointInteraction(cfg["interaction.alpha"]), build_state(cfg), build_quad(cfg)
    demo = divergence_demo(state, inter.alpha, cfg["resonance.schedule"], cfg["resonance.T"],
                           ConeSurface(cfg["cone.solid_angle"]))
    scan = singularity_scan(outgoing_state(state, inter, quad))
    w_value, in_w = w_membership(state, quad)
    m.flags.extend(scan.flags)
    if demo.growth_verdict == "growing":
        m.flags.append("divergence_demo: truncated |A.n| integrals grow without saturating")
    stem = _stem("resonance", cfg)
    with open(out / f"{stem}.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["R", "T_max", "truncated_value"])
        for row, (R, _) in zip(demo.table, demo.schedule):
            for (_, Tm), v in zip(demo.schedule, row):
                wr.writerow([_fmt(R), _fmt(Tm), _fmt(v)])
    spath = out / f"{_stem('singularity', cfg)}.csv"
    with open(spath, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "abs_profile"])
        for k, a in zip(scan.ks, scan.magnitudes):
            wr.writerow([_fmt(k), _fmt(a)])
    m.artifacts += [f"{stem}.csv", spath.name]
    _write_json(out / f"{stem}.json", {
        "growth_verdict": demo.growth_verdict, "joint_schedule_values": demo.truncated_values,
        "demo_flags": demo.flags, "exponent_at_zero": scan.exponent_at_zero,
        "residue": [scan.residue.real, scan.residue.imag], "fit_residual": scan.fit_residual,
        "w_integral": [complex(w_value).real, complex(w_value).imag], "in_W": bool(in_w)}, m)


def selftest() -> list[str]:
    """Trivial invariants of every module; returns the failures."""
    from .numerics.faddeeva import erfc_complex, faddeeva

    fails = []

    def check(name, ok):
        if not ok:
            fails.append(name)

    check("faddeeva(0) = 1", abs(faddeeva(0j) - 1) < 1e-15)
    check("erfc(0) = 1", abs(erfc_complex(0j) - 1) < 1e-15)
    g = make_preset_state("gaussian", sigma=1.0)
    check("gaussian norm", abs(norm(g) - 1) < 1e-10)
    check("scaled norm", abs(norm(g.scaled(2.0)) - 2) < 1e-10)
    check("bound energy", abs(PointInteraction(-1 / (4 * math.pi)).bound_energy + 1) < 1e-14)
    check("alpha = 0 has R3 = 0",
          float(np.max(np.abs(decompose(g, PointInteraction(0.0), [2.0], 1.0).terms["R3"]))) == 0)
    prof = outgoing_state(g, PointInteraction(1.0))
    check("alpha != 0 profile regular", not prof.singular_at_zero)
    check("full cone", abs(ConeSurface().solid_angle - 4 * math.pi) < 1e-15)
    try:
        parse_config("bogus.key = 1")
        check("unknown key rejected", False)
    except ConfigError:
        pass
    return fails


def _write_json(path: Path, payload: dict, m: RunManifest) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    m.artifacts.append(path.name)


RUNNERS = {
    "evolve": _run_evolve,
    "spectral": _run_spectral,
    "fas": _run_fas,
    "identity": _run_identity,
    "decay": _run_decay,
    "resonance": _run_resonance,
}


def run(m: RunManifest) -> int:
    out = Path(m.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if m.command == "selftest":
        fails = selftest()
        m.flags.extend(f"selftest failed: {f}" for f in fails)
        code = 1 if fails else 0
    else:
        RUNNERS[m.command](m, out)
        code = 2 if m.flags else 0
    (out / "manifest.json").write_text(json.dumps(m.to_dict(), indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    return code


# --------------------------------------------------------------------------
# plot data


PLOT_HEADERS = {
    "fas_convergence": ["R", "lhs", "tail", "rhs", "rel_error"],
    "decay_loglog": ["quantity", "t", "log_t", "abs_value", "log_abs_value"],
    "singularity_scan": ["k", "abs_profile"],
    "flux_vs_time": ["R", "t", "flux"],
}


def emit_plot_data(csv_in: str | Path, kind: str, out_dir: str | Path | None = None) -> list[Path]:
    """Whitespace-separated data plus a gnuplot script next to it."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {', '.join(PLOT_KINDS)}")
    csv_in = Path(csv_in)
    out_dir = Path(out_dir) if out_dir is not None else csv_in.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(csv_in, newline="") as fh:
        rows = list(csv.reader(fh))
    expected = PLOT_HEADERS[kind]
    if not rows or rows[0] != expected:
        raise ValueError(f"{csv_in.name}: expected header {','.join(expected)}")
    body = rows[1:]
    stem = out_dir / f"{csv_in.stem}_{kind}"
    dat, gp = stem.with_suffix(".dat"), stem.with_suffix(".gp")
    lines: list[str] = []
    if kind == "fas_convergence":
        lines.append("# R rel_error log10_rel_error")
        for r in body:
            e = float(r[4])
            lines.append(f"{r[0]} {r[4]} {math.log10(e) if e > 0 else -math.inf:.12e}")
        script = (f"set logscale xy\nset xlabel 'R'\nset ylabel 'relative error'\n"
                  f"plot '{dat.name}' using 1:2 with linespoints title 'FAS'\n")
    elif kind == "decay_loglog":
        groups: dict[str, list[tuple[float, float]]] = {}
        for r in body:
            groups.setdefault(r[0], []).append((float(r[2]), float(r[4])))
        plots = []
        for i, (q, pts) in enumerate(groups.items()):
            x, y = np.array(pts).T
            slope, icept = np.polyfit(x, y, 1)
            lines.append(f"# {q}: fit log|F| = {slope:.6f} log t + {icept:.6f}")
            lines.append("# log_t log_abs_value")
            lines += [f"{a:.12e} {b:.12e}" for a, b in pts]
            lines += ["", ""]
            plots.append(f"'{dat.name}' index {i} using 1:2 with points title '{q}'")
        script = "set xlabel 'log t'\nset ylabel 'log |F|'\nplot " + ", ".join(plots) + "\n"
    elif kind == "singularity_scan":
        lines.append("# log_k log_abs_profile")
        lines += [f"{math.log(float(r[0])):.12e} {math.log(float(r[1])):.12e}" for r in body]
        script = (f"set xlabel 'log k'\nset ylabel 'log |psi_out|'\n"
                  f"plot '{dat.name}' using 1:2 with linespoints title 'profile'\n")
    else:
        groups2: dict[str, list[list[str]]] = {}
        for r in body:
            groups2.setdefault(r[0], []).append(r)
        plots = []
        for i, (R, pts) in enumerate(groups2.items()):
            lines.append(f"# R = {R}: t flux")
            lines += [f"{p[1]} {p[2]}" for p in pts]
            lines += ["", ""]
            plots.append(f"'{dat.name}' index {i} using 1:2 with lines title 'R={float(R):g}'")
        script = "set logscale x\nset xlabel 't'\nset ylabel 'flux'\nplot " + ", ".join(plots) + "\n"
    dat.write_text("\n".join(lines).rstrip("\n") + "\n", encoding="utf-8")
    gp.write_text(script, encoding="utf-8")
    return [dat, gp]


# --------------------------------------------------------------------------
# entry point


def _threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("POINTFLUX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("POINTFLUX_THREADS", f"not an integer: {env!r}") from None
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pointflux", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", default=None)
        s.add_argument("--out", default="out")
        s.add_argument("--threads", type=int, default=None)
        s.add_argument("--tol", type=float, default=None, help="overrides quad.abs_tol")
    pl = sub.add_parser("plot", help="turn a CSV artifact into plot-ready data")
    pl.add_argument("kind")
    pl.add_argument("csv")
    pl.add_argument("--out", default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot":
            for path in emit_plot_data(args.csv, args.kind, args.out):
                print(path)
            return 0
        cfg = load_config(args.config)
        if args.tol is not None:
            try:
                _tol(args.tol)
            except ValueError as exc:
                raise ConfigError("quad.abs_tol", f"--tol {args.tol}: {exc}") from None
            cfg["quad.abs_tol"] = args.tol
        m = RunManifest(args.command, args.config, args.out, cfg, threads=_threads(args.threads))
        code = run(m)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for f in m.flags:
        print(f"flag: {f}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
