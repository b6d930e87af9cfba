"""Command-line harness: simulations, sweeps, reproductions, studies.

Configuration precedence is flags > config file > defaults. The config file
is plain text, one `key = value` per line; `#` starts a comment and later
keys override earlier ones. Every command writes its artifacts (CSV / JSON /
SVG) into the output directory, and a given config plus seed always produces
byte-identical CSV and JSON output.

Exit codes: 0 all declared assertions passed, 1 configuration error,
2 flow failure or assertion failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import flow as flowmod
from .curve import RadialCurve, load_curve, save_curve
from .functionals import (
    GeometryReport,
    format_float,
    geometry_report,
    gp_argmax,
    gp_functional,
    nonconvex_margin,
    quad_slack,
    total_curvature_margin,
)
from .generators import CurveSpec, generate, item_seed, sample_convex, sample_nonconvex_star
from .render import pick_overlay_times, save_overlay
from .spaceform import SpaceForm

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILED = 2


class ConfigError(Exception):
    pass


# -- config handling ---------------------------------------------------------------


def parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


class Settings:
    """Typed access to merged CLI and config-file values."""

    def __init__(self, cli: argparse.Namespace) -> None:
        self.cli = vars(cli)
        config = self.cli.get("config")
        self.file = parse_config_file(config) if config else {}

    def _raw(self, key: str):
        cli_val = self.cli.get(key)
        if cli_val is not None:
            return cli_val
        return self.file.get(key)

    def str_(self, key: str, default: str | None = None) -> str | None:
        raw = self._raw(key)
        return default if raw is None else str(raw)

    def int_(self, key: str, default: int | None = None) -> int | None:
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from exc

    def float_(self, key: str, default: float | None = None) -> float | None:
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be a number, got {raw!r}") from exc

    def bool_(self, key: str, default: bool = False) -> bool:
        raw = self._raw(key)
        if raw is None:
            return default
        if isinstance(raw, bool):
            return raw
        word = str(raw).strip().lower()
        if word not in _BOOL_WORDS:
            raise ConfigError(f"{key} must be a boolean, got {raw!r}")
        return _BOOL_WORDS[word]

    def mode_amps(self, key: str) -> tuple[tuple[int, float], ...]:
        """Fourier amplitudes: repeated 'm=value' flags or config keys a<m>/b<m>."""
        pairs: dict[int, float] = {}
        for cfg_key, cfg_val in self.file.items():
            if cfg_key.startswith(key) and cfg_key[len(key):].isdigit():
                pairs[int(cfg_key[len(key):])] = float(cfg_val)
        for entry in self.cli.get(key) or ():
            if "=" not in entry:
                raise ConfigError(f"--{key} expects m=value, got {entry!r}")
            m_str, val_str = entry.split("=", 1)
            try:
                pairs[int(m_str)] = float(val_str)
            except ValueError as exc:
                raise ConfigError(f"--{key} expects m=value, got {entry!r}") from exc
        return tuple(sorted(pairs.items()))

    def int_list(self, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            return tuple(int(part) for part in str(raw).split(",") if part.strip())
        except ValueError as exc:
            raise ConfigError(f"{key} must be a comma-separated integer list") from exc


def spaceform_from(settings: Settings) -> SpaceForm:
    k = settings.int_("K", 0)
    if k not in (-1, 0, 1):
        raise ConfigError(f"K must be -1, 0 or +1, got {k}")
    return SpaceForm(k)


def default_r0(sf: SpaceForm) -> float:
    # Keep random/fourier curves comfortably inside the hemisphere chart.
    return 0.7 if sf.K == 1 else 1.0


def curve_from(settings: Settings, sf: SpaceForm, N: int, order: int) -> RadialCurve:
    path = settings.str_("curve")
    if path:
        return load_curve(path, order)
    spec = CurveSpec(
        kind=settings.str_("kind", "circle"),
        r0=settings.float_("r0", default_r0(sf)),
        cos_amps=settings.mode_amps("a"),
        sin_amps=settings.mode_amps("b"),
        axes=(settings.float_("ea", 2.0), settings.float_("eb", 1.0)),
        seed=settings.int_("seed", 0),
    )
    return generate(spec, sf, N, order)


def law_from(settings: Settings) -> flowmod.SpeedLaw:
    name = settings.str_("law", "constrained-icf")
    for law in flowmod.SpeedLaw:
        if law.value == name:
            return law
    choices = ", ".join(law.value for law in flowmod.SpeedLaw)
    raise ConfigError(f"unknown speed law {name!r} (choose from: {choices})")


def flow_config_from(settings: Settings) -> flowmod.FlowConfig:
    return flowmod.FlowConfig(
        sigma=settings.float_("sigma", 0.1),
        t_end=settings.float_("t_end", 50.0),
        eps_stationary=settings.float_("eps_stationary", 1e-9),
        report_stride=settings.int_("stride", 200),
        refine_on_failure=settings.bool_("refine_on_failure", False),
    )


# -- deterministic writers -----------------------------------------------------------


def to_json(value, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f'{pad}  "{key}": {to_json(val, indent + 1)}' for key, val in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        items = [f"{pad}  {to_json(val, indent + 1)}" for val in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if value is None:
        return "null"
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_text(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def write_json(path: str, value) -> None:
    write_text(path, to_json(value) + "\n")


def report_row(values: list[float]) -> str:
    return ",".join(format_float(v) for v in values)


def write_trace_csv(path: str, trace: flowmod.FlowTrace) -> None:
    names = GeometryReport.field_names()
    lines = ["t," + ",".join(names)]
    for t, rep in zip(trace.times, trace.reports):
        lines.append(report_row([t] + [getattr(rep, name) for name in names]))
    write_text(path, "\n".join(lines) + "\n")


def violations_payload(trace: flowmod.FlowTrace) -> list[dict]:
    return [
        {"monitor": v.monitor, "time": v.time, "excess": v.excess}
        for v in trace.violations
    ]


def summary_payload(trace: flowmod.FlowTrace) -> dict:
    return {
        "status": trace.status.value,
        "t_final": trace.t_final,
        "steps": trace.steps,
        "violations": violations_payload(trace),
        "refined": trace.refined,
    }


def ensure_out(settings: Settings) -> str:
    out = settings.str_("out", "curveflow-out")
    os.makedirs(out, exist_ok=True)
    return out


# -- commands ------------------------------------------------------------------------

FAILURE_STATUSES = (
    flowmod.FlowStatus.CONVEXITY_LOST,
    flowmod.FlowStatus.POLE_HIT,
    flowmod.FlowStatus.STEP_UNDERFLOW,
)


def cmd_simulate(settings: Settings) -> int:
    sf = spaceform_from(settings)
    n = settings.int_("N", 512)
    order = settings.int_("order", 4)
    c0 = curve_from(settings, sf, n, order)
    law = law_from(settings)
    config = flow_config_from(settings)
    out = ensure_out(settings)

    trace = flowmod.run(c0, law, config)

    write_trace_csv(os.path.join(out, "trace.csv"), trace)
    write_json(os.path.join(out, "summary.json"), summary_payload(trace))
    picks = pick_overlay_times(trace.times, count=settings.int_("snapshots", 4))
    for i in picks:
        t = trace.times[i]
        save_curve(trace.snapshots[i], os.path.join(out, f"snapshot_t{t:012.6f}.csv"))
    save_overlay(
        os.path.join(out, "flow.svg"),
        [(f"t = {trace.times[i]:.4g}", trace.snapshots[i]) for i in picks],
    )
    if trace.status in FAILURE_STATUSES:
        print(f"flow failed: {trace.status.value}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_report(settings: Settings) -> int:
    sf = spaceform_from(settings)
    n = settings.int_("N", 512)
    order = settings.int_("order", 4)
    curve = curve_from(settings, sf, n, order)
    out = ensure_out(settings)
    rep = geometry_report(curve)
    write_json(os.path.join(out, "report.json"), rep.as_dict())
    return EXIT_OK


def sweep_margins(curve: RadialCurve, rep: GeometryReport, nonconvex: bool) -> dict[str, float]:
    if nonconvex:
        return {"nonconvex_margin": nonconvex_margin(curve)}
    margins = {"weighted_margin": rep.weighted_margin, "hk_gap": rep.hk_gap}
    if curve.sf.K != 0:
        margins["total_curvature_margin"] = total_curvature_margin(curve)
    return margins


def cmd_sweep(settings: Settings) -> int:
    sf = spaceform_from(settings)
    n_grid = settings.int_("N", 512)
    order = settings.int_("order", 4)
    count = settings.int_("count", 200)
    seed = settings.int_("seed", 0)
    r0 = settings.float_("r0", default_r0(sf))
    nonconvex = settings.bool_("nonconvex", False)
    if nonconvex and sf.K != -1:
        raise ConfigError("non-convex sweeps verify a hyperbolic bound; use K = -1")
    out = ensure_out(settings)

    names = GeometryReport.field_names()
    margin_names = (
        ["nonconvex_margin"]
        if nonconvex
        else ["weighted_margin", "hk_gap"] + (["total_curvature_margin"] if sf.K != 0 else [])
    )
    lines = ["index,seed," + ",".join(names + margin_names)]
    min_margins = {name: math.inf for name in margin_names}
    violation_counts = {name: 0 for name in margin_names}

    for i in range(count):
        child = item_seed(seed, i)
        if nonconvex:
            curve = sample_nonconvex_star(child, sf, n_grid, r0, order)
        else:
            curve = sample_convex(child, sf, n_grid, r0, order)
        rep = geometry_report(curve)
        margins = sweep_margins(curve, rep, nonconvex)
        slack = quad_slack(rep.L)
        for name, value in margins.items():
            min_margins[name] = min(min_margins[name], value)
            if value < -slack:
                violation_counts[name] += 1
        values = [getattr(rep, nm) for nm in names] + [margins[nm] for nm in margin_names]
        lines.append(f"{i},{child}," + report_row(values))

    write_text(os.path.join(out, "sweep.csv"), "\n".join(lines) + "\n")
    total = sum(violation_counts.values())
    payload = {
        "count": count,
        "K": sf.K,
        "N": n_grid,
        "seed": seed,
        "nonconvex": nonconvex,
        "min_margins": {k: (None if math.isinf(v) else v) for k, v in min_margins.items()},
        "violations": violation_counts,
        "total_violations": total,
    }
    write_json(os.path.join(out, "sweep_summary.json"), payload)
    if total > 0:
        print(f"{total} inequality violations beyond quadrature slack", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def counterexample_curve(sf: SpaceForm, r0: float, eps: float, mode: int, n: int, order: int) -> RadialCurve:
    spec = CurveSpec(kind="fourier", r0=r0, cos_amps=((mode, eps / r0),))
    return generate(spec, sf, n, order)


def cmd_counterexample(settings: Settings) -> int:
    sf = SpaceForm(1)
    if settings.int_("K", 1) != 1:
        raise ConfigError("the counterexample lives on the hemisphere; K must be +1")
    n = settings.int_("N", 2048)
    order = settings.int_("order", 4)
    r0 = settings.float_("r0", 0.8)
    eps = settings.float_("eps", 0.05)
    mode = settings.int_("mode", 2)
    refine_tol = settings.float_("refine_tol", 0.01)
    out = ensure_out(settings)

    curve = counterexample_curve(sf, r0, eps, mode, n, order)
    convex, kmin = curve.is_strictly_convex()
    if not convex:
        print(f"perturbed circle is not strictly convex (min kappa = {kmin:.3e})", file=sys.stderr)
        return EXIT_FAILED
    y0 = gp_argmax(curve)
    value = gp_functional(curve, y0)
    L = curve.length()
    bound = 2.0 * math.pi - L * L / (2.0 * math.pi)
    gap = bound - value

    fine = counterexample_curve(sf, r0, eps, mode, 2 * n, order)
    gap_fine = bound_minus_functional(fine)
    refinement_check = abs(gap_fine - gap) / abs(gap) if gap != 0.0 else math.inf

    payload = {
        "r0": r0,
        "eps": eps,
        "mode": mode,
        "N": n,
        "L": L,
        "y0": [float(v) for v in y0],
        "F": value,
        "bound": bound,
        "gap": gap,
        "gap_refined": gap_fine,
        "refinement_check": refinement_check,
    }
    write_json(os.path.join(out, "certificate.json"), payload)
    if not (gap > 0.0 and refinement_check <= refine_tol):
        print(
            f"counterexample assertion failed: gap = {gap:.6e}, "
            f"refinement drift = {refinement_check:.3e}",
            file=sys.stderr,
        )
        return EXIT_FAILED
    return EXIT_OK


def bound_minus_functional(curve: RadialCurve) -> float:
    y0 = gp_argmax(curve)
    L = curve.length()
    return 2.0 * math.pi - L * L / (2.0 * math.pi) - gp_functional(curve, y0)


def cmd_rate_study(settings: Settings) -> int:
    sf = spaceform_from(settings)
    n = settings.int_("N", 256)
    order = settings.int_("order", 4)
    r0 = settings.float_("r0", default_r0(sf))
    mode = settings.int_("mode", 2)
    eps = settings.float_("eps", 1e-3)
    rate_tol = settings.float_("rate_tol", 0.10)
    out = ensure_out(settings)

    spec = CurveSpec(kind="fourier", r0=r0, cos_amps=((mode, eps / r0),))
    c0 = generate(spec, sf, n, order)
    config = flowmod.FlowConfig(
        sigma=settings.float_("sigma", 0.1),
        t_end=settings.float_("t_end", 50.0),
        eps_stationary=settings.float_("eps_stationary", 1e-9),
        report_stride=settings.int_("stride", 50),
    )
    trace = flowmod.run(c0, flowmod.SpeedLaw.CONSTRAINED_ICF, config)
    if trace.status is not flowmod.FlowStatus.CONVERGED:
        print(f"flow did not converge: {trace.status.value}", file=sys.stderr)
        return EXIT_FAILED

    try:
        measured, predicted = flowmod.decay_rate(trace, mode)
        l2_measured, l2_bound = flowmod.l2_decay_rate(trace)
    except ValueError as exc:
        print(f"decay fit failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    relative_error = abs(measured - predicted) / predicted

    amps = flowmod.mode_amplitudes(trace, mode)
    lines = ["t,amplitude"]
    for t, a in zip(trace.times, amps):
        lines.append(report_row([t, a]))
    write_text(os.path.join(out, "mode_amplitude.csv"), "\n".join(lines) + "\n")
    payload = {
        "K": sf.K,
        "mode": mode,
        "eps": eps,
        "N": n,
        "rho_infinity": flowmod.limit_radius(trace),
        "measured": measured,
        "predicted": predicted,
        "relative_error": relative_error,
        "l2_squared_rate_measured": l2_measured,
        "l2_squared_rate_bound": l2_bound,
    }
    write_json(os.path.join(out, "rate.json"), payload)
    if relative_error > rate_tol or l2_measured < l2_bound:
        print(
            f"decay-rate assertion failed: measured {measured:.4f} vs predicted "
            f"{predicted:.4f} (tol {rate_tol}), l2 rate {l2_measured:.4f} vs bound {l2_bound:.4f}",
            file=sys.stderr,
        )
        return EXIT_FAILED
    return EXIT_OK


def study_profile(settings: Settings, name: str, sf: SpaceForm, n: int, order: int) -> RadialCurve:
    theta = np.arange(n) * (2.0 * math.pi / n)
    if name == "ellipse":
        spec = CurveSpec(
            kind="ellipse", axes=(settings.float_("ea", 2.0), settings.float_("eb", 1.0))
        )
        return generate(spec, sf, n, order)
    if name == "circle":
        return generate(CurveSpec(kind="circle", r0=settings.float_("r0", 1.0)), sf, n, order)
    if name == "kinked":
        # Negative control: the derivative jump destroys the stencil order.
        return RadialCurve(sf, 1.0 + 0.3 * np.abs(np.cos(theta)), order)
    raise ConfigError(f"unknown study profile {name!r} (ellipse, circle, kinked)")


def fitted_order(ns: tuple[int, ...], errors: list[float]) -> float | None:
    """Least-squares slope of log error against log N; None at the rounding floor."""
    errs = np.array(errors)
    if np.all(errs <= 1e-11):
        return None
    safe = np.maximum(errs, 1e-300)
    slope = np.polyfit(np.log(np.array(ns, dtype=float)), np.log(safe), 1)[0]
    return -float(slope)


def cmd_convergence_study(settings: Settings) -> int:
    sf = spaceform_from(settings)
    profile = settings.str_("profile", "ellipse")
    grids = settings.int_list("grids", (128, 256, 512, 1024))
    orders = settings.int_list("orders", (2, 4))
    out = ensure_out(settings)

    assertable = profile != "kinked"
    lines = ["profile,order,N,minkowski_residual,gb_residual"]
    results = []
    failed = False
    for order in orders:
        mink: list[float] = []
        gb: list[float] = []
        for n in grids:
            curve = study_profile(settings, profile, sf, n, order)
            rep = geometry_report(curve)
            mink.append(abs(rep.minkowski_residual))
            gb.append(abs(rep.gb_residual))
            lines.append(
                f"{profile},{order},{n}," + report_row([mink[-1], gb[-1]])
            )
        entry = {
            "order": order,
            "N": list(grids),
            "minkowski_residual": mink,
            "gb_residual": gb,
            "observed_order_minkowski": fitted_order(grids, mink),
            "observed_order_gb": fitted_order(grids, gb),
        }
        results.append(entry)
        if assertable:
            for key in ("observed_order_minkowski", "observed_order_gb"):
                observed = entry[key]
                if observed is not None and observed < order - 0.5:
                    failed = True

    write_text(os.path.join(out, "convergence.csv"), "\n".join(lines) + "\n")
    write_json(
        os.path.join(out, "convergence.json"),
        {"profile": profile, "asserted": assertable, "results": results},
    )
    if failed:
        print("observed convergence order fell below stencil order - 0.5", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain-text 'key = value' config file")
    common.add_argument("--seed", type=int, help="64-bit seed for random draws")
    common.add_argument("--out", help="output directory (default curveflow-out)")
    common.add_argument("--K", type=int, choices=(-1, 0, 1), help="curvature label")
    common.add_argument("--N", type=int, help="grid size (even, >= 16)")
    common.add_argument("--order", type=int, choices=(2, 4), help="stencil order")

    shape = argparse.ArgumentParser(add_help=False)
    shape.add_argument("--kind", choices=("circle", "fourier", "ellipse", "random"))
    shape.add_argument("--r0", type=float, help="base radius")
    shape.add_argument("--a", action="append", metavar="M=AMP", help="cosine amplitude of mode M")
    shape.add_argument("--b", action="append", metavar="M=AMP", help="sine amplitude of mode M")
    shape.add_argument("--ea", type=float, help="ellipse semi-axis a")
    shape.add_argument("--eb", type=float, help="ellipse semi-axis b")
    shape.add_argument("--curve", help="load the curve from a CSV file instead")

    parser = argparse.ArgumentParser(
        prog="curveflow",
        description="Curvature-flow engine and inequality harness for 2-D space forms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, shape], help="run one flow")
    p.add_argument("--law", choices=[law.value for law in flowmod.SpeedLaw])
    p.add_argument("--sigma", type=float, help="CFL safety factor in (0, 0.5]")
    p.add_argument("--t-end", dest="t_end", type=float, help="maximum time")
    p.add_argument("--eps-stationary", dest="eps_stationary", type=float)
    p.add_argument("--stride", type=int, help="steps between recorded reports")
    p.add_argument("--refine-on-failure", dest="refine_on_failure", action="store_const", const=True)
    p.add_argument("--snapshots", type=int, help="snapshot files to keep")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[common, shape], help="report on one curve")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", parents=[common], help="randomized inequality sweep")
    p.add_argument("--count", type=int, help="number of sampled curves")
    p.add_argument("--r0", type=float, help="base radius of samples")
    p.add_argument("--nonconvex", action="store_const", const=True,
                   help="sample non-convex star-shaped curves (K = -1 bound)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("counterexample", parents=[common],
                       help="perturbed-circle certificate on the hemisphere")
    p.add_argument("--r0", type=float, help="circle radius (default 0.8)")
    p.add_argument("--eps", type=float, help="perturbation amplitude (default 0.05)")
    p.add_argument("--mode", type=int, help="perturbation mode (default 2)")
    p.add_argument("--refine-tol", dest="refine_tol", type=float)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("rate-study", parents=[common], help="linearized decay rate fit")
    p.add_argument("--r0", type=float)
    p.add_argument("--mode", type=int, help="perturbed Fourier mode (default 2)")
    p.add_argument("--eps", type=float, help="perturbation amplitude (default 1e-3)")
    p.add_argument("--sigma", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--eps-stationary", dest="eps_stationary", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--rate-tol", dest="rate_tol", type=float)
    p.set_defaults(func=cmd_rate_study)

    p = sub.add_parser("convergence-study", parents=[common],
                       help="residual decay against grid refinement")
    p.add_argument("--profile", choices=("ellipse", "circle", "kinked"))
    p.add_argument("--grids", help="comma-separated grid sizes")
    p.add_argument("--orders", help="comma-separated stencil orders")
    p.add_argument("--ea", type=float)
    p.add_argument("--eb", type=float)
    p.add_argument("--r0", type=float)
    p.set_defaults(func=cmd_convergence_study)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args)
        return args.func(settings)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
