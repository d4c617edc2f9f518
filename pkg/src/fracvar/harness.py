"""Command-line front end, sweeps, ray scans, and report emission.

Everything downstream of a solved problem lives here: the mu-sweep with
its computed verdicts, the ray scan probing unboundedness of the energy,
CSV/JSON emission with a gnuplot-friendly companion file, the operator
identity suite behind `fracvar kernel-verify`, and the argv-level entry
point.  Verdicts are always computed from the records, never assumed: a
failed verdict is a red report, not an exception.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conditions as cond
from .energy import eval_phi, eval_psi
from .errors import FracvarError, HypothesisError
from .frac_kernel import (
    Grid,
    GridFunction,
    caputo_left,
    caputo_right,
    euler_gamma,
    rl_left_integral,
    rl_right_integral,
)
from .problem import ProblemSpec
from .solver import SolutionRecord, minimize
from .space import SpectralElement, embedding_constant, unit_mode

__all__ = [
    "SweepReport",
    "RayScanReport",
    "run_sweep",
    "ray_scan",
    "emit_report",
    "kernel_verify",
    "cli_main",
    "main",
]

_SWEEP_SEED_STRIDE = 7919  # distinct per-point streams, reproducible from one seed
_NORM_DECAY_FRACTION = 0.1
_STRICT_TOL = 1e-10

# kernel-verify thresholds; coefficients fixed by the refinement study in
# scripts/kernel_convergence.py, with >2x headroom over the measured
# constants so the suite stays green across seeds.  The composition
# probes (smooth u, u(0) != 0) converge at first order with constant
# 3.06 over n in [256, 2048], hence a C*h threshold.
KV_POWER_TOL = 1e-12
KV_IBP_COEFF = 2.5
KV_COMP_COEFF = 8.0
KV_LIN_TOL = 1e-11
KV_ORDER_MIN = 1.5


@dataclass(frozen=True)
class SweepReport:
    """Solved records over an increasing mu grid plus computed verdicts.

    negativity: every energy is negative.  monotonicity: energies
    strictly decrease as mu grows.  norm_decay: norms shrink toward zero
    as mu does, ending below a fixed fraction of the sublevel scale.
    trivial_datum flags a sweep whose every record is the zero element.
    """

    mu_values: tuple
    records: tuple
    monotonicity_verdict: bool
    negativity_verdict: bool
    norm_decay_verdict: bool
    trivial_datum: bool
    conditions: cond.ConditionReport

    def to_jsonable(self) -> dict:
        return {
            "mu_values": list(self.mu_values),
            "records": [r.to_jsonable() for r in self.records],
            "monotonicity_verdict": self.monotonicity_verdict,
            "negativity_verdict": self.negativity_verdict,
            "norm_decay_verdict": self.norm_decay_verdict,
            "trivial_datum": self.trivial_datum,
            "conditions": self.conditions.to_jsonable(),
        }

    def json_str(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True, indent=2)

    @classmethod
    def from_jsonable(cls, d: dict) -> "SweepReport":
        return cls(
            mu_values=tuple(d["mu_values"]),
            records=tuple(SolutionRecord.from_jsonable(r) for r in d["records"]),
            monotonicity_verdict=d["monotonicity_verdict"],
            negativity_verdict=d["negativity_verdict"],
            norm_decay_verdict=d["norm_decay_verdict"],
            trivial_datum=d["trivial_datum"],
            conditions=cond.ConditionReport.from_jsonable(d["conditions"]),
        )


def run_sweep(
    problem: ProblemSpec, mu_min: float, mu_max: float, count: int
) -> SweepReport:
    """Solve at geometrically spaced mu and compute the sweep verdicts.

    The range must sit strictly inside (0, mu_star); anything else is a
    hypothesis error naming the admissible interval.  Per-point solver
    seeds are derived from the base seed with a fixed stride, so the
    whole sweep is a pure function of (problem, range, count).
    Geometric spacing concentrates points near small mu, where the
    norm-decay behavior lives.
    """
    if count < 4:
        raise ValueError(f"sweep needs count >= 4, got {count}")
    mu_min, mu_max = float(mu_min), float(mu_max)
    if not (0.0 < mu_min < mu_max):
        raise ValueError(f"need 0 < mu_min < mu_max, got [{mu_min}, {mu_max}]")

    report = cond.evaluate_conditions(problem.nonlinearity, problem.alpha, problem.T)
    if not mu_max < report.mu_star:
        raise HypothesisError(
            f"sweep range [{mu_min}, {mu_max}] exits the admissible interval "
            f"(0, {report.mu_star}); shrink mu_max below mu_star"
        )

    model, assembly = problem.build()
    gb = report.gamma_bar
    mus = np.geomspace(mu_min, mu_max, count)
    records = []
    for i, m in enumerate(mus):
        cfg = problem.solver.replace(seed=problem.solver.seed + _SWEEP_SEED_STRIDE * i)
        records.append(
            minimize(
                problem, float(m), cfg, model=model, assembly=assembly, gamma_bar=gb
            )
        )

    energies = [r.energy for r in records]
    norms_a = [r.norm_alpha for r in records]
    negativity = all(e < 0.0 for e in energies)
    monotonic = all(b < a - _STRICT_TOL for a, b in zip(energies, energies[1:]))

    c = embedding_constant(problem.alpha, problem.T)
    decay_cut = _NORM_DECAY_FRACTION * gb * math.sqrt(records[0].r_radius) / c
    shrinking = all(a <= b + _STRICT_TOL for a, b in zip(norms_a, norms_a[1:]))
    norm_decay = shrinking and norms_a[0] < norms_a[-1] and norms_a[0] < decay_cut

    return SweepReport(
        mu_values=tuple(float(m) for m in mus),
        records=tuple(records),
        monotonicity_verdict=monotonic,
        negativity_verdict=negativity,
        norm_decay_verdict=norm_decay,
        trivial_datum=all(r.norm_alpha <= 1e-6 for r in records),
        conditions=report,
    )


@dataclass(frozen=True)
class RayScanReport:
    """Energy along a ray tau -> J(tau u) with a tail growth fit.

    fitted_exponent is the log-log slope of |J| over the last three
    points, None when the fit is impossible (a zero or sign change in
    the tail).  unbounded_verdict records whether the scan is consistent
    with J -> -inf at the catalog's expected rate.
    """

    taus: tuple
    values: tuple
    fitted_exponent: float | None
    expected_exponent: float | None
    tail_negative: bool
    unbounded_verdict: bool

    def to_jsonable(self) -> dict:
        return {
            "taus": list(self.taus),
            "values": list(self.values),
            "fitted_exponent": self.fitted_exponent,
            "expected_exponent": self.expected_exponent,
            "tail_negative": self.tail_negative,
            "unbounded_verdict": self.unbounded_verdict,
        }

    def json_str(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True, indent=2)


_EXPONENT_SLACK = 0.3


def ray_scan(
    problem: ProblemSpec,
    mu: float,
    direction: SpectralElement | None = None,
    tau_values=None,
) -> RayScanReport:
    """Evaluate J_mu along tau * direction and fit the tail exponent.

    Defaults: the first basis mode as direction, 25 points geometric on
    [0.1, 1000].  The expected exponent is s for the two-power datum and
    q for the affine-power one; without a catalog expectation the
    verdict demands strictly superquadratic negative growth.
    """
    mu = float(mu)
    model, assembly = problem.build()
    if direction is None:
        direction = unit_mode(problem.k_max, 1)
    if not any(v != 0.0 for v in direction.coeffs):
        raise ValueError("ray direction must be nonzero")
    if tau_values is None:
        tau_values = np.geomspace(0.1, 1.0e3, 25)
    taus = np.asarray(tau_values, dtype=float)
    if taus.ndim != 1 or len(taus) < 3 or not np.all(taus > 0.0):
        raise ValueError("tau values must be >= 3 positive reals")
    if not np.all(np.diff(taus) > 0.0):
        raise ValueError("tau values must be increasing")

    nl = problem.nonlinearity
    vals = []
    for t in taus:
        u = SpectralElement(tuple(t * v for v in direction.coeffs))
        vals.append(eval_phi(u, assembly) - mu * eval_psi(u, nl, assembly))

    tail = np.array(vals[-3:])
    slope = None
    if np.all(np.abs(tail) > 0.0) and (np.all(tail > 0.0) or np.all(tail < 0.0)):
        slope = float(
            np.polyfit(np.log(taus[-3:]), np.log(np.abs(tail)), 1)[0]
        )
    tail_negative = bool(np.all(tail < 0.0))

    if nl.kind == "power_sum":
        expected = float(nl.params["s"])
    elif nl.kind == "affine_power":
        expected = float(nl.params["q"])
    else:
        expected = None

    floor = (expected - _EXPONENT_SLACK) if expected is not None else 2.0 + _EXPONENT_SLACK
    verdict = tail_negative and slope is not None and slope >= floor

    return RayScanReport(
        taus=tuple(float(t) for t in taus),
        values=tuple(float(v) for v in vals),
        fitted_exponent=slope,
        expected_exponent=expected,
        tail_negative=tail_negative,
        unbounded_verdict=verdict,
    )


def _fmt(x) -> str:
    # repr of a Python float is the shortest round-trip form; bit-stable
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


SWEEP_CSV_COLUMNS = (
    "mu",
    "norm_alpha",
    "norm_inf",
    "phi",
    "psi",
    "energy",
    "residual",
    "converged",
    "restarts_used",
)


def _sweep_csv(report: SweepReport) -> str:
    lines = [",".join(SWEEP_CSV_COLUMNS)]
    for r in report.records:
        lines.append(",".join(_fmt(getattr(r, col)) for col in SWEEP_CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _sweep_plot_data(report: SweepReport) -> str:
    # two gnuplot datasets: mu vs energy, then mu vs norm_alpha
    out = ["# mu energy"]
    for r in report.records:
        out.append(f"{_fmt(r.mu)} {_fmt(r.energy)}")
    out.extend(["", "", "# mu norm_alpha"])
    for r in report.records:
        out.append(f"{_fmt(r.mu)} {_fmt(r.norm_alpha)}")
    return "\n".join(out) + "\n"


def _ray_csv(report: RayScanReport) -> str:
    lines = ["tau,energy"]
    for t, v in zip(report.taus, report.values):
        lines.append(f"{_fmt(t)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def emit_report(report, out_path, format: str = "csv") -> list[str]:
    """Write a report to disk; returns the paths written.

    Sweep reports get the CSV or JSON body at out_path plus a companion
    {stem}.plot.dat with two datasets for external plotting.  Ray scans
    emit a two-column CSV or the JSON body.
    """
    if format not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {format!r}")
    out = Path(out_path)
    written = []
    if isinstance(report, SweepReport):
        body = _sweep_csv(report) if format == "csv" else report.json_str() + "\n"
        out.write_text(body, encoding="utf-8")
        written.append(str(out))
        plot = out.with_suffix(".plot.dat")
        plot.write_text(_sweep_plot_data(report), encoding="utf-8")
        written.append(str(plot))
    elif isinstance(report, RayScanReport):
        body = _ray_csv(report) if format == "csv" else report.json_str() + "\n"
        out.write_text(body, encoding="utf-8")
        written.append(str(out))
    else:
        raise ValueError(f"cannot emit report of type {type(report).__name__}")
    return written


# --- operator identity suite ------------------------------------------------


def _random_smooth(rng: np.random.Generator, grid: Grid, T: float):
    """A smooth probe with its exact derivative: low trig modes + a bump."""
    t = grid.nodes
    a = rng.uniform(-1.0, 1.0, 3)
    b = rng.uniform(-1.0, 1.0)
    c0 = rng.uniform(-1.0, 1.0)
    u = c0 + b * t * (T - t)
    du = b * (T - 2.0 * t)
    for m in (1, 2, 3):
        u = u + a[m - 1] * np.sin(m * math.pi * t / T)
        du = du + a[m - 1] * (m * math.pi / T) * np.cos(m * math.pi * t / T)
    return u, du


@dataclass(frozen=True)
class IdentityRow:
    name: str
    measured: float
    threshold: float
    at_least: bool = False  # measured >= threshold instead of <=

    @property
    def ok(self) -> bool:
        if self.at_least:
            return self.measured >= self.threshold
        return self.measured <= self.threshold


def kernel_verify(alpha: float, T: float, n: int, seed: int = 0) -> list[IdentityRow]:
    """The operator identity suite at one resolution.

    Power rules against closed forms, the integration-by-parts pairing,
    both composition identities, linearity, and an empirical convergence
    order on u = t^2.  Returns the measured rows; all ok means pass.
    """
    grid = Grid(T=T, n=n)
    h = grid.h
    t = grid.nodes
    rng = np.random.default_rng(seed)
    rows = []

    # the piecewise-linear quadrature reproduces u(t) = t exactly
    u_lin = GridFunction(grid, t.copy())
    err = 0.0
    for g in (0.3, 0.5, 0.9):
        got = rl_left_integral(u_lin, g).values[-1]
        exact = T ** (g + 1.0) / euler_gamma(g + 2.0)
        err = max(err, abs(got - exact) / exact)
    rows.append(IdentityRow("left integral power rule", err, KV_POWER_TOL))

    ones = GridFunction(grid, np.ones(n + 1))
    got = caputo_left(ones, alpha).values[-1]
    exact = T ** (1.0 - alpha) / euler_gamma(2.0 - alpha)
    rows.append(
        IdentityRow("caputo power rule", abs(got - exact) / exact, KV_POWER_TOL)
    )

    worst = 0.0
    for _ in range(3):
        u, _ = _random_smooth(rng, grid, T)
        v, _ = _random_smooth(rng, grid, T)
        w = np.full(n + 1, h)
        w[0] = w[-1] = 0.5 * h
        for g in (0.3, 0.5, 0.9):
            lhs = float(w @ (rl_left_integral(GridFunction(grid, u), g).values * v))
            rhs = float(w @ (rl_right_integral(GridFunction(grid, v), g).values * u))
            worst = max(worst, abs(lhs - rhs))
    rows.append(IdentityRow("integration by parts", worst, KV_IBP_COEFF * h))

    comp_tol = KV_COMP_COEFF * h
    worst_l = worst_r = 0.0
    for _ in range(2):
        u, du = _random_smooth(rng, grid, T)
        dgf = GridFunction(grid, du)
        for g in (0.6, 0.75, 0.9):
            left = rl_left_integral(caputo_left(dgf, g), g).values
            worst_l = max(worst_l, float(np.max(np.abs(left - (u - u[0])))))
            right = rl_right_integral(caputo_right(dgf, g), g).values
            worst_r = max(worst_r, float(np.max(np.abs(right - (u - u[-1])))))
    rows.append(IdentityRow("left composition", worst_l, comp_tol))
    rows.append(IdentityRow("right composition", worst_r, comp_tol))

    u, du = _random_smooth(rng, grid, T)
    v, dv = _random_smooth(rng, grid, T)
    a_c, b_c = 1.7, -0.3
    defect = 0.0
    for op, f1, f2 in (
        (lambda x: rl_left_integral(x, 0.5).values, u, v),
        (lambda x: rl_right_integral(x, 0.5).values, u, v),
        (lambda x: caputo_left(x, alpha).values, du, dv),
        (lambda x: caputo_right(x, alpha).values, du, dv),
    ):
        mixed = op(GridFunction(grid, a_c * f1 + b_c * f2))
        split = a_c * op(GridFunction(grid, f1)) + b_c * op(GridFunction(grid, f2))
        defect = max(defect, float(np.max(np.abs(mixed - split))))
    rows.append(IdentityRow("linearity", defect, KV_LIN_TOL))

    errs = []
    sizes = (64, 128, 256, 512)
    for m in sizes:
        gi = Grid(T=T, n=m)
        got = rl_left_integral(GridFunction(gi, gi.nodes**2), 0.5).values[-1]
        exact = 2.0 * T**2.5 / euler_gamma(3.5)
        errs.append(abs(got - exact))
    slope = float(
        np.polyfit(np.log([T / m for m in sizes]), np.log(errs), 1)[0]
    )
    rows.append(IdentityRow("convergence order (t^2)", slope, KV_ORDER_MIN, at_least=True))

    return rows


def _print_identity_table(rows: list[IdentityRow], stream) -> None:
    width = max(len(r.name) for r in rows) + 2
    print(f"{'identity':<{width}}{'measured':>13}  {'threshold':>13}  result", file=stream)
    for r in rows:
        rel = ">=" if r.at_least else "<="
        print(
            f"{r.name:<{width}}{r.measured:>13.4e}  {rel} {r.threshold:>10.4e}  "
            f"{'pass' if r.ok else 'FAIL'}",
            file=stream,
        )


# --- CLI ---------------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); the contract is 1
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _add_seed(p) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the solver seed")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="fracvar",
        description="Variational toolkit for a fractional two-point boundary value problem.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    kv = sub.add_parser("kernel-verify", help="run the operator identity suite")
    kv.add_argument("--alpha", type=float, default=0.75)
    kv.add_argument("--T", type=float, default=1.0)
    kv.add_argument("--n", type=int, default=512)
    kv.add_argument("--seed", type=int, default=0)

    co = sub.add_parser("conditions", help="admissibility report for a problem config")
    co.add_argument("--config", required=True)

    so = sub.add_parser("solve", help="minimize the energy at one mu")
    so.add_argument("--config", required=True)
    so.add_argument("--mu", type=float, required=True)
    so.add_argument("--out", default=None)
    _add_seed(so)

    sw = sub.add_parser("sweep", help="solve over a geometric mu grid")
    sw.add_argument("--config", required=True)
    sw.add_argument("--mu-min", type=float, required=True)
    sw.add_argument("--mu-max", type=float, required=True)
    sw.add_argument("--count", type=int, default=8)
    sw.add_argument("--out", default=None)
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_seed(sw)

    ry = sub.add_parser("ray-scan", help="energy along a ray in the first mode")
    ry.add_argument("--config", required=True)
    ry.add_argument("--mu", type=float, required=True)
    ry.add_argument("--count", type=int, default=25)
    ry.add_argument("--out", default=None)
    ry.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_seed(ry)

    return parser


def _load_problem(args) -> ProblemSpec:
    problem = ProblemSpec.load(args.config)
    if getattr(args, "seed", None) is not None:
        problem = dataclasses.replace(
            problem, solver=problem.solver.replace(seed=args.seed)
        )
    return problem


def _cmd_kernel_verify(args) -> int:
    rows = kernel_verify(args.alpha, args.T, args.n, seed=args.seed)
    _print_identity_table(rows, sys.stdout)
    return 0 if all(r.ok for r in rows) else 1


def _cmd_conditions(args) -> int:
    problem = ProblemSpec.load(args.config)
    report = cond.evaluate_conditions(problem.nonlinearity, problem.alpha, problem.T)
    print(report.json_str())
    print()
    for name in ("sg_holds", "s0_holds", "sinf_holds", "zero_holds"):
        print(f"{name:<12} {getattr(report, name).value}")
    ms = report.mu_star
    print(f"{'mu_star':<12} {'inf' if math.isinf(ms) else repr(ms)}")
    return 0


def _cmd_solve(args) -> int:
    problem = _load_problem(args)
    rec = minimize(problem, args.mu)
    if args.out:
        Path(args.out).write_text(rec.json_str() + "\n", encoding="utf-8")
        print(
            f"mu={_fmt(rec.mu)} energy={_fmt(rec.energy)} "
            f"norm_alpha={_fmt(rec.norm_alpha)} converged={_fmt(rec.converged)} "
            f"-> {args.out}"
        )
    else:
        print(rec.json_str())
    return 0


def _cmd_sweep(args) -> int:
    problem = _load_problem(args)
    report = run_sweep(problem, args.mu_min, args.mu_max, args.count)
    if args.out:
        for p in emit_report(report, args.out, args.format):
            print(f"wrote {p}")
    else:
        body = _sweep_csv(report) if args.format == "csv" else report.json_str() + "\n"
        sys.stdout.write(body)
    return 0


def _cmd_ray_scan(args) -> int:
    problem = _load_problem(args)
    taus = np.geomspace(0.1, 1.0e3, args.count)
    report = ray_scan(problem, args.mu, tau_values=taus)
    if args.out:
        for p in emit_report(report, args.out, args.format):
            print(f"wrote {p}")
    else:
        body = _ray_csv(report) if args.format == "csv" else report.json_str() + "\n"
        sys.stdout.write(body)
    return 0


_COMMANDS = {
    "kernel-verify": _cmd_kernel_verify,
    "conditions": _cmd_conditions,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "ray-scan": _cmd_ray_scan,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except OSError as exc:
        print(f"fracvar: i/o error: {exc}", file=sys.stderr)
        return 2
    except (FracvarError, ValueError) as exc:
        print(f"fracvar: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
