"""Admissibility thresholds for the parametric problem.

Everything here is scalar bookkeeping ahead of any solve: the constant
kappa_alpha, the supremum of gamma^2 / max_{|xi| <= gamma} F(xi) over a
log-spaced probe grid, the induced parameter threshold mu_star and the
admissible interval for nonnegative data, tri-state probes for the limit
conditions at 0+ and at infinity, and the closed forms available for the
two-power catalog datum.

Numerical probes cannot certify limits, so every limit verdict is a
TriState and a supremum attained at the edge of the probe grid is
flagged rather than extrapolated.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .energy import Nonlinearity
from .errors import HypothesisError
from .frac_kernel import FracOrder, euler_gamma

__all__ = [
    "TriState",
    "SupRatio",
    "LambdaInterval",
    "LimitProbes",
    "ExampleForms",
    "ConditionReport",
    "kappa_alpha",
    "sup_ratio",
    "mu_star",
    "lambda_interval",
    "limit_probes",
    "example_closed_forms",
    "phi_r_upper_bound",
    "evaluate_conditions",
]

PROBE_GAMMA_MIN = 1e-6
PROBE_GAMMA_MAX = 1e6
COARSE_POINTS = 2001
DENSE_POINTS = 120001  # 1e4 per decade over 12 decades
DIVERGENCE_THRESHOLD = 1e6
SMALL_PROBE_DEPTH = 14
LARGE_PROBE_DEPTH = 8
_REFINE_REL_TOL = 1e-8
_INVGOLD = (math.sqrt(5.0) - 1.0) / 2.0


class TriState(str, enum.Enum):
    """Verdict of a numerical probe of an analytic condition."""

    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


def kappa_alpha(alpha, T: float) -> float:
    """T^(2 alpha) / (Gamma(alpha)^2 |cos(pi alpha)| (2 alpha - 1))."""
    a = FracOrder.derivative(alpha).value
    if not T > 0.0:
        raise ValueError(f"interval length must be positive, got T={T}")
    g = euler_gamma(a)
    return T ** (2.0 * a) / (g * g * abs(math.cos(math.pi * a)) * (2.0 * a - 1.0))


@dataclass(frozen=True)
class SupRatio:
    """Supremum of gamma^2 / max_{|xi| <= gamma} F over the probe grid.

    value may be +inf (the 1/0 convention when max F vanishes).
    at_boundary marks a supremum attained at the edge of the grid, where
    the true supremum may lie outside the probed range.
    """

    value: float
    gamma_bar: float
    at_boundary: bool = False

    def __iter__(self):
        # unpacks as the (value, gamma_bar) pair
        return iter((self.value, self.gamma_bar))


def _dense_envelope(nl: Nonlinearity):
    """Running max of F over |xi| <= gamma, sampled on the dense log grid.

    F(0) = 0 sits inside every symmetric window, so the envelope is
    floored at zero; a zero envelope therefore means F <= 0 on the whole
    window and the ratio there is +inf by convention.
    """
    xs = np.geomspace(PROBE_GAMMA_MIN, PROBE_GAMMA_MAX, DENSE_POINTS)
    both = np.maximum(
        np.asarray(nl.F(xs), dtype=float), np.asarray(nl.F(-xs), dtype=float)
    )
    return xs, np.maximum(np.maximum.accumulate(both), 0.0)


def _ratio_or_inf(gammas: np.ndarray, env: np.ndarray) -> np.ndarray:
    out = np.full_like(gammas, np.inf)
    pos = env > 0.0
    out[pos] = gammas[pos] ** 2 / env[pos]
    return out


def _golden_max(g: Callable[[float], float], lo: float, hi: float) -> float:
    """Golden-section maximizer of g on log-spaced [lo, hi]."""
    a, b = math.log(lo), math.log(hi)
    x1 = b - _INVGOLD * (b - a)
    x2 = a + _INVGOLD * (b - a)
    g1, g2 = g(math.exp(x1)), g(math.exp(x2))
    while b - a > _REFINE_REL_TOL:
        if g1 < g2:
            a, x1, g1 = x1, x2, g2
            x2 = a + _INVGOLD * (b - a)
            g2 = g(math.exp(x2))
        else:
            b, x2, g2 = x2, x1, g1
            x1 = b - _INVGOLD * (b - a)
            g1 = g(math.exp(x1))
    return math.exp(0.5 * (a + b))


def _grid_sup(gammas: np.ndarray, ratios: np.ndarray, g: Callable[[float], float]):
    """Best probe plus golden-section refinement of its bracket.

    Returns a SupRatio. Infinite ratios short-circuit to the first such
    probe; a best probe at either grid edge is reported as attained at
    the boundary and left unrefined.
    """
    if np.isinf(ratios).any():
        i = int(np.argmax(np.isinf(ratios)))
        return SupRatio(math.inf, float(gammas[i]), i in (0, len(gammas) - 1))
    i = int(np.argmax(ratios))
    if i in (0, len(gammas) - 1):
        return SupRatio(float(ratios[i]), float(gammas[i]), True)
    gbar = _golden_max(g, float(gammas[i - 1]), float(gammas[i + 1]))
    best, arg = float(ratios[i]), float(gammas[i])
    if g(gbar) > best:
        best, arg = g(gbar), gbar
    return SupRatio(best, arg, False)


def _window_max(nl: Nonlinearity, xs: np.ndarray, env: np.ndarray, gammas: np.ndarray):
    """max(F) over [-gamma, gamma]: envelope below gamma plus the endpoint.

    The coarse and dense grids do not share floats, so the envelope alone
    can lag one dense step below gamma; folding in F(+-gamma) makes the
    window value exact at its own endpoint.
    """
    idx = np.clip(np.searchsorted(xs, gammas, side="right") - 1, 0, len(xs) - 1)
    Fp = np.asarray(nl.F(gammas), dtype=float)
    Fm = np.asarray(nl.F(-gammas), dtype=float)
    return np.maximum.reduce([env[idx], Fp, Fm, np.zeros_like(gammas)])


def sup_ratio(nl: Nonlinearity) -> SupRatio:
    """Supremum over gamma > 0 of gamma^2 / max_{|xi| <= gamma} F(xi).

    Coarse pass on a 2001-point log grid; the winning bracket is refined
    by golden section. For a nonnegative datum the inner maximum is
    F(gamma) itself and every evaluation is exact; otherwise the dense
    running-max envelope supplies the window interior and the ratio
    inherits its resolution.
    """
    gammas = np.geomspace(PROBE_GAMMA_MIN, PROBE_GAMMA_MAX, COARSE_POINTS)
    if nl.nonnegative:
        Fg = np.asarray(nl.F(gammas), dtype=float)
        ratios = _ratio_or_inf(gammas, np.maximum(Fg, 0.0))

        def g(gamma: float) -> float:
            val = float(np.asarray(nl.F(np.array([gamma])))[0])
            return gamma * gamma / val if val > 0.0 else math.inf

    else:
        xs, env = _dense_envelope(nl)
        ratios = _ratio_or_inf(gammas, _window_max(nl, xs, env, gammas))

        def g(gamma: float) -> float:
            arr = np.array([gamma])
            e = float(_window_max(nl, xs, env, arr)[0])
            return gamma * gamma / e if e > 0.0 else math.inf

    return _grid_sup(gammas, ratios, g)


def mu_star(nl: Nonlinearity, alpha, T: float) -> float:
    """sup_ratio / kappa_alpha, with +inf passed through."""
    value = sup_ratio(nl).value
    return value / kappa_alpha(alpha, T)


class LambdaInterval(NamedTuple):
    """Open parameter interval (left, right) of guaranteed existence."""

    left: float
    right: float
    right_at_boundary: bool = False


def lambda_interval(nl: Nonlinearity, alpha, T: float) -> LambdaInterval:
    """Admissible interval (0, sup_gamma gamma^2/F(gamma) / kappa_alpha).

    Defined for nonnegative data only, where F is nondecreasing on the
    positive axis and the windowed maximum collapses to F(gamma); the
    right endpoint then coincides with mu_star up to probe resolution.
    """
    if not nl.nonnegative:
        raise HypothesisError(
            f"admissible interval needs a nonnegative datum; {nl.kind!r} is not flagged nonnegative"
        )
    sup = sup_ratio(nl)
    return LambdaInterval(0.0, sup.value / kappa_alpha(alpha, T), sup.at_boundary)


@dataclass(frozen=True)
class LimitProbes:
    """Tri-state verdicts for the three limit conditions."""

    s0: TriState
    sinf: TriState
    zero: TriState


def _scalar(fn, x: float) -> float:
    return float(np.asarray(fn(np.array([x])))[0])


def _trend(values: list[float]) -> tuple[bool, bool]:
    """(no genuine decrease, no genuine increase) under a relative tolerance."""
    no_dec = no_inc = True
    for a, b in zip(values, values[1:]):
        if math.isinf(a) or math.isinf(b):
            if b < a:
                no_dec = False
            if b > a:
                no_inc = False
            continue
        tol = 1e-9 * max(abs(a), abs(b), 1e-300)
        if b - a < -tol:
            no_dec = False
        if b - a > tol:
            no_inc = False
    return no_dec, no_inc


def _divergence_verdict(values: list[float], threshold: float) -> TriState:
    # certifying a limit = +inf needs growth at every probe, not just a big tail
    no_dec, no_inc = _trend(values)
    if no_dec and not no_inc and values[-1] > threshold:
        return TriState.HOLDS
    if no_inc and max(values) < threshold:
        return TriState.FAILS
    return TriState.INCONCLUSIVE


def _threshold_verdict(values: list[float], threshold: float) -> TriState:
    # limsup against a finite threshold: a flat sequence is decided by level
    no_dec, no_inc = _trend(values)
    if no_dec and values[-1] > threshold:
        return TriState.HOLDS
    if no_inc and all(math.isfinite(v) for v in values) and max(values) < threshold:
        return TriState.FAILS
    return TriState.INCONCLUSIVE


def limit_probes(nl: Nonlinearity, kappa: float) -> LimitProbes:
    """Probe the limit conditions on geometric ladders of xi.

    s0 probes f(xi)/xi -> +inf and zero probes F(xi)/xi^2 -> +inf, both
    as xi -> 0+ along xi = 10^-k; sinf probes limsup xi^2/F(xi) > kappa
    as xi -> +inf along xi = 10^k, with a nonpositive F read as ratio
    +inf. holds needs the probe sequence trending the right way past the
    threshold, fails needs it bounded the wrong way, and anything else
    is inconclusive.
    """
    small = [10.0 ** -k for k in range(1, SMALL_PROBE_DEPTH + 1)]
    s0_seq = [_scalar(nl.f, x) / x for x in small]
    zero_seq = [_scalar(nl.F, x) / (x * x) for x in small]

    sinf_seq = []
    for k in range(1, LARGE_PROBE_DEPTH + 1):
        x = 10.0 ** k
        Fx = _scalar(nl.F, x)
        sinf_seq.append(x * x / Fx if Fx > 0.0 else math.inf)

    return LimitProbes(
        s0=_divergence_verdict(s0_seq, DIVERGENCE_THRESHOLD),
        sinf=_threshold_verdict(sinf_seq, kappa),
        zero=_divergence_verdict(zero_seq, DIVERGENCE_THRESHOLD),
    )


class ExampleForms(NamedTuple):
    """Closed forms for the two-power datum f = xi^(r-1) + xi^(s-1)."""

    gamma_bar: float
    mu_bound: Callable[[float, float], float]


def example_closed_forms(r: float, s: float) -> ExampleForms:
    """Maximizing radius and parameter bound for the two-power datum.

    gamma_bar = (s(2-r)/(r(s-2)))^(1/(s-r)) is the stationary point of
    gamma^2/F(gamma); mu_bound(alpha, T) is the ratio there divided by
    kappa_alpha. Must match the generic optimizer on power_sum(r, s).
    """
    if not 1.0 < r < 2.0 < s:
        raise ValueError(f"closed forms need 1 < r < 2 < s, got r={r}, s={s}")
    gbar = (s * (2.0 - r) / (r * (s - 2.0))) ** (1.0 / (s - r))

    def mu_bound(alpha, T: float) -> float:
        return (
            r * s * gbar ** (2.0 - r)
            / (kappa_alpha(alpha, T) * (s + r * gbar ** (s - r)))
        )

    return ExampleForms(gbar, mu_bound)


def phi_r_upper_bound(gamma_bar: float, nl: Nonlinearity, alpha, T: float) -> float:
    """kappa_alpha * max_{|xi| <= gamma_bar} F(xi) / gamma_bar^2.

    A computable upper bound for the sublevel ratio whose strict
    comparison with 1/mu decides admissibility; the exact infimum it
    bounds is out of scope here.
    """
    if not gamma_bar > 0.0:
        raise ValueError(f"gamma_bar must be positive, got {gamma_bar}")
    xs = np.linspace(0.0, gamma_bar, 10001)
    max_F = max(
        float(np.max(np.asarray(nl.F(xs), dtype=float))),
        float(np.max(np.asarray(nl.F(-xs), dtype=float))),
    )
    max_F = max(max_F, 0.0)
    return kappa_alpha(alpha, T) * max_F / (gamma_bar * gamma_bar)


@dataclass(frozen=True)
class ConditionReport:
    """Everything the admissibility analysis produced for one datum.

    probes keeps a thinned (gamma, ratio) trace of the coarse scan with
    the refined argmax appended last, so gamma_bar attains the maximal
    ratio among the retained pairs.
    """

    kappa_alpha: float
    sup_ratio: float
    gamma_bar: float | None
    sup_at_boundary: bool
    mu_star: float
    lambda_right_endpoint: float | None
    sg_holds: TriState
    s0_holds: TriState
    sinf_holds: TriState
    zero_holds: TriState
    probes: tuple = field(repr=False)

    def to_jsonable(self) -> dict:
        def enc(x):
            if x is None:
                return None
            if isinstance(x, float) and math.isinf(x):
                return "inf"
            return x

        return {
            "kappa_alpha": self.kappa_alpha,
            "sup_ratio": enc(self.sup_ratio),
            "gamma_bar": enc(self.gamma_bar),
            "sup_at_boundary": self.sup_at_boundary,
            "mu_star": enc(self.mu_star),
            "lambda_right_endpoint": enc(self.lambda_right_endpoint),
            "sg_holds": self.sg_holds.value,
            "s0_holds": self.s0_holds.value,
            "sinf_holds": self.sinf_holds.value,
            "zero_holds": self.zero_holds.value,
            "probes": [[g, enc(r)] for g, r in self.probes],
        }

    def json_str(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True, indent=2)

    @classmethod
    def from_jsonable(cls, d: dict) -> "ConditionReport":
        def dec(x):
            return math.inf if x == "inf" else x

        return cls(
            kappa_alpha=d["kappa_alpha"],
            sup_ratio=dec(d["sup_ratio"]),
            gamma_bar=dec(d["gamma_bar"]),
            sup_at_boundary=d["sup_at_boundary"],
            mu_star=dec(d["mu_star"]),
            lambda_right_endpoint=dec(d["lambda_right_endpoint"]),
            sg_holds=TriState(d["sg_holds"]),
            s0_holds=TriState(d["s0_holds"]),
            sinf_holds=TriState(d["sinf_holds"]),
            zero_holds=TriState(d["zero_holds"]),
            probes=tuple((g, dec(r)) for g, r in d["probes"]),
        )


def evaluate_conditions(nl: Nonlinearity, alpha, T: float) -> ConditionReport:
    """Assemble the full admissibility report for one datum.

    sg_holds is decided by comparing the probed supremum with
    kappa_alpha: a probe exceeding it certifies the condition (a grid
    supremum only underestimates), while a sub-threshold supremum
    attained at the grid edge stays inconclusive.
    """
    kappa = kappa_alpha(alpha, T)
    sup = sup_ratio(nl)
    mu = sup.value / kappa

    if sup.value > kappa:
        sg = TriState.HOLDS
    elif sup.at_boundary:
        sg = TriState.INCONCLUSIVE
    else:
        sg = TriState.FAILS

    lam = lambda_interval(nl, alpha, T).right if nl.nonnegative else None

    lim = limit_probes(nl, kappa)

    xs, env = _dense_envelope(nl)
    gammas = np.geomspace(PROBE_GAMMA_MIN, PROBE_GAMMA_MAX, COARSE_POINTS)
    ratios = _ratio_or_inf(gammas, env[np.searchsorted(xs, gammas, side="right") - 1])
    trace = [(float(g), float(r)) for g, r in zip(gammas[::40], ratios[::40])]
    trace.append((sup.gamma_bar, sup.value))

    return ConditionReport(
        kappa_alpha=kappa,
        sup_ratio=sup.value,
        gamma_bar=sup.gamma_bar,
        sup_at_boundary=sup.at_boundary,
        mu_star=mu,
        lambda_right_endpoint=lam,
        sg_holds=sg,
        s0_holds=lim.s0,
        sinf_holds=lim.sinf,
        zero_holds=lim.zero,
        probes=tuple(trace),
    )
