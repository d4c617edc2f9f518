"""Energy functionals over the spectral model.

Phi is the quadratic form built from minus the weighted pairing of left
and right Caputo images, Psi integrates a nonlinearity's potential along
the synthesized element, and J(mu) = Phi - mu * Psi is the functional the
solver descends.  The bilinear matrix is cached with its symmetrization
and the Gram matrix of the left images; a randomized lower-bound check at
assembly time guards against under-resolved discretizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ResolutionError
from .space import SpaceModel, SpectralElement, _check_element

__all__ = [
    "Nonlinearity",
    "power_sum",
    "affine_power",
    "sqrt_plus",
    "zero_datum",
    "table_datum",
    "from_tag",
    "NONLINEARITY_TAGS",
    "EnergyAssembly",
    "build_assembly",
    "eval_phi",
    "eval_psi",
    "eval_J",
    "grad_J",
]

_FLAG_PROBE = np.concatenate([np.linspace(-10.0, 10.0, 81), [0.0]])


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """A continuous right-hand side f with its potential F(x) = int_0^x f.

    f and F are vectorized callables.  The two flags are structural
    claims consumed by the admissibility checks; they are probed against
    samples of f at construction so a mislabeled datum fails fast.
    """

    kind: str
    f: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    nonnegative: bool
    vanishes_at_zero: bool
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        samples = np.asarray(self.f(_FLAG_PROBE), dtype=float)
        if samples.shape != _FLAG_PROBE.shape or not np.all(np.isfinite(samples)):
            raise ValueError(f"nonlinearity {self.kind!r}: f must map arrays to finite arrays")
        scale = 1.0 + float(np.max(np.abs(samples)))
        if self.nonnegative and float(samples.min()) < -1e-10 * scale:
            raise ValueError(
                f"nonlinearity {self.kind!r} claims f >= 0 but probes found "
                f"min f = {samples.min():.3e}"
            )
        f0 = float(np.asarray(self.f(np.array([0.0])))[0])
        if self.vanishes_at_zero and abs(f0) > 1e-10:
            raise ValueError(
                f"nonlinearity {self.kind!r} claims f(0) = 0 but f(0) = {f0:.3e}"
            )
        F0 = float(np.asarray(self.F(np.array([0.0])))[0])
        if abs(F0) > 1e-12:
            raise ValueError(f"nonlinearity {self.kind!r}: potential must vanish at 0")


def power_sum(r: float, s: float) -> Nonlinearity:
    """f(x) = x**(r-1) + x**(s-1) for x >= 0, zero otherwise; 1 < r < 2 < s."""
    if not 1.0 < r < 2.0 < s:
        raise ValueError(f"power_sum needs 1 < r < 2 < s, got r={r}, s={s}")

    def f(x):
        xp = np.maximum(np.asarray(x, dtype=float), 0.0)
        return xp ** (r - 1.0) + xp ** (s - 1.0)

    def F(x):
        xp = np.maximum(np.asarray(x, dtype=float), 0.0)
        return xp ** r / r + xp ** s / s

    return Nonlinearity("power_sum", f, F, True, True, {"r": r, "s": s})


def affine_power(q: float) -> Nonlinearity:
    """f(x) = 1 + |x|**(q-2) x with q > 2: nonzero at the origin, superquadratic tail."""
    if not q > 2.0:
        raise ValueError(f"affine_power needs q > 2, got q={q}")

    def f(x):
        x = np.asarray(x, dtype=float)
        return 1.0 + np.abs(x) ** (q - 2.0) * x

    def F(x):
        x = np.asarray(x, dtype=float)
        return x + np.abs(x) ** q / q

    return Nonlinearity("affine_power", f, F, False, False, {"q": q})


def sqrt_plus() -> Nonlinearity:
    """f(x) = sqrt(x) for x >= 0, zero otherwise."""

    def f(x):
        return np.sqrt(np.maximum(np.asarray(x, dtype=float), 0.0))

    def F(x):
        return (2.0 / 3.0) * np.maximum(np.asarray(x, dtype=float), 0.0) ** 1.5

    return Nonlinearity("sqrt_plus", f, F, True, True, {})


def zero_datum() -> Nonlinearity:
    """The trivial right-hand side."""

    def f(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return Nonlinearity("zero", f, f, True, True, {})


def _piecewise_quadratic_potential(xs: np.ndarray, fs: np.ndarray):
    """Exact antiderivative (vanishing at 0) of the interpolant of (xs, fs).

    Per segment the interpolant is linear, so the potential is a
    quadratic.  Each segment's quadratic is expanded about the segment
    point nearest zero and the knot integrals accumulate outward from
    zero, keeping roundoff relative to the value itself; an anchored-at-
    the-far-knot form loses everything below one ulp of the cumulative.
    Outside the knots f continues constant and the potential linearly.
    """
    nseg = len(xs) - 1
    slopes = np.diff(fs) / np.diff(xs)
    panel = 0.5 * (fs[:-1] + fs[1:]) * np.diff(xs)

    knot_int = np.empty(len(xs))
    if 0.0 <= xs[0]:
        knot_int[0] = xs[0] * fs[0]
        knot_int[1:] = knot_int[0] + np.cumsum(panel)
    elif 0.0 >= xs[-1]:
        knot_int[-1] = xs[-1] * fs[-1]
        knot_int[:-1] = knot_int[-1] - np.cumsum(panel[::-1])[::-1]
    else:
        j0 = int(np.searchsorted(xs, 0.0, side="right") - 1)
        f0 = fs[j0] - xs[j0] * slopes[j0]
        knot_int[j0] = 0.5 * xs[j0] * (fs[j0] + f0)
        knot_int[j0 + 1] = 0.5 * xs[j0 + 1] * (f0 + fs[j0 + 1])
        knot_int[j0 + 2 :] = knot_int[j0 + 1] + np.cumsum(panel[j0 + 1 :])
        knot_int[:j0] = knot_int[j0] - np.cumsum(panel[:j0][::-1])[::-1]

    # per-segment expansion point, value of f there, and integral from 0
    anchor = np.where(xs[:-1] >= 0.0, xs[:-1], xs[1:])
    f_anchor = np.where(xs[:-1] >= 0.0, fs[:-1], fs[1:])
    i_anchor = np.where(xs[:-1] >= 0.0, knot_int[:-1], knot_int[1:])
    inside = (xs[:-1] < 0.0) & (xs[1:] > 0.0)
    if inside.any():
        j0 = int(np.argmax(inside))
        anchor[j0] = 0.0
        f_anchor[j0] = fs[j0] - xs[j0] * slopes[j0]
        i_anchor[j0] = 0.0

    def F(x):
        x = np.asarray(x, dtype=float)
        j = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, nseg - 1)
        dx = x - anchor[j]
        out = i_anchor[j] + dx * f_anchor[j] + 0.5 * dx * dx * slopes[j]
        out = np.where(x < xs[0], knot_int[0] + (x - xs[0]) * fs[0], out)
        return np.where(x > xs[-1], knot_int[-1] + (x - xs[-1]) * fs[-1], out)

    return F


def table_datum(xs, fs, nonnegative: bool | None = None) -> Nonlinearity:
    """Nonlinearity from sample pairs, linearly interpolated.

    Outside the knot range f continues with its edge values.  The
    potential is the exact antiderivative of the interpolant, so probes
    of F near 0 see the interpolant's behavior, not integration noise;
    data vanishing at 0 should carry an explicit knot there.  Flags
    default to what the samples show.
    """
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if xs.ndim != 1 or xs.shape != fs.shape or xs.size < 2:
        raise ValueError("table needs matching 1-d arrays with at least two knots")
    if not np.all(np.diff(xs) > 0):
        raise ValueError("table abscissae must be strictly increasing")

    def f(x):
        return np.interp(np.asarray(x, dtype=float), xs, fs)

    F = _piecewise_quadratic_potential(xs, fs)
    if nonnegative is None:
        nonnegative = bool(np.all(fs >= 0.0))
    f0 = float(np.interp(0.0, xs, fs))
    return Nonlinearity(
        "table",
        f,
        F,
        nonnegative,
        abs(f0) <= 1e-10,
        {"xs": xs.tolist(), "fs": fs.tolist()},
    )


NONLINEARITY_TAGS = {
    "power_sum": power_sum,
    "affine_power": affine_power,
    "sqrt_plus": sqrt_plus,
    "zero": zero_datum,
    "table": table_datum,
}


def from_tag(kind: str, **params) -> Nonlinearity:
    """Build a catalog nonlinearity from its tag and parameters."""
    try:
        factory = NONLINEARITY_TAGS[kind]
    except KeyError:
        raise ValueError(
            f"unknown nonlinearity kind {kind!r}; known: {sorted(NONLINEARITY_TAGS)}"
        ) from None
    return factory(**params)


@dataclass(frozen=True, eq=False)
class EnergyAssembly:
    """Cached matrices of the energy form over one space model.

    bilinear[j][k] = -sum_i w_i DL_j(t_i) DR_k(t_i); symmetric is its
    symmetrization, gram the same pairing of DL with itself.  Phi of an
    element is the symmetric quadratic form of its coefficients.
    """

    space: SpaceModel
    bilinear: np.ndarray
    symmetric: np.ndarray
    gram: np.ndarray

    def __post_init__(self) -> None:
        for name in ("bilinear", "symmetric", "gram"):
            getattr(self, name).setflags(write=False)


_ASSEMBLY_CHECK_SEED = 0x5EED


def coercivity_slack(alpha, n: int, k_max: int) -> float:
    """Relative slack for the discrete left/right pairing lower bound.

    The pairing equals |cos(pi alpha)| times the Gram form only up to the
    quadrature error of the derivative images, which for the top mode
    scales like (k_max/n)^(2-alpha); the measured constant stays below 2
    across alpha in [0.6, 0.9], so 4 leaves a factor-two margin while an
    actual sign defect (order one) still trips the check.
    """
    a = float(getattr(alpha, "value", alpha))
    return 4.0 * (k_max / n) ** (2.0 - a)


def build_assembly(model: SpaceModel, check_trials: int = 100) -> EnergyAssembly:
    """Assemble and verify the energy matrices for a model.

    The verification draws check_trials coefficient vectors and requires
    x' M_s x >= |cos(pi alpha)| x' G x up to the resolution slack of
    coercivity_slack plus a 1e-12 roundoff guard; a deeper violation
    means the discretization cannot support the coercivity the continuum
    form guarantees, and raises ResolutionError.
    """
    dl = model.caputo_left_images
    dr = model.caputo_right_images
    w = model.weights
    bilinear = -np.einsum("ji,i,ki->jk", dl, w, dr)
    symmetric = 0.5 * (bilinear + bilinear.T)
    gram = np.einsum("ji,i,ki->jk", dl, w, dl)

    cos_a = abs(math.cos(math.pi * model.alpha))
    slack = coercivity_slack(model.alpha, model.config.n, model.k_max)
    rng = np.random.default_rng(_ASSEMBLY_CHECK_SEED)
    for _ in range(check_trials):
        x = rng.uniform(-1.0, 1.0, model.k_max)
        quad = float(x @ symmetric @ x)
        lower = cos_a * float(x @ gram @ x)
        if quad < lower * (1.0 - slack) - 1e-12 * (1.0 + lower):
            raise ResolutionError(
                f"energy form lost coercivity at alpha={model.alpha}, "
                f"n={model.config.n}, k_max={model.k_max}: "
                f"{quad:.6e} < {lower:.6e} with relative slack {slack:.2e}; "
                "refine the grid or drop modes"
            )
    return EnergyAssembly(model, bilinear, symmetric, gram)


def eval_phi(u: SpectralElement, assembly: EnergyAssembly) -> float:
    """Quadratic part of the energy: coeffs' M_s coeffs."""
    c = _check_element(u, assembly.space)
    return float(c @ assembly.symmetric @ c)


def eval_psi(u: SpectralElement, nl: Nonlinearity, assembly: EnergyAssembly) -> float:
    """Trapezoid integral of the potential along the synthesized element."""
    model = assembly.space
    c = _check_element(u, model)
    synth = c @ model.basis
    return float(model.weights @ np.asarray(nl.F(synth), dtype=float))


def eval_J(
    u: SpectralElement, mu: float, nl: Nonlinearity, assembly: EnergyAssembly
) -> float:
    """Full energy Phi(u) - mu Psi(u)."""
    return eval_phi(u, assembly) - mu * eval_psi(u, nl, assembly)


def grad_J(
    u: SpectralElement, mu: float, nl: Nonlinearity, assembly: EnergyAssembly
) -> np.ndarray:
    """Coefficient-space gradient of J.

    Component k is ((M + M') coeffs)_k - mu * sum_i w_i f(u_i) B_k(t_i);
    the quadrature of the nonlinear term is the exact derivative of the
    discrete Psi, so the whole vector is consistent with eval_J.
    """
    model = assembly.space
    c = _check_element(u, model)
    quad_part = (assembly.bilinear + assembly.bilinear.T) @ c
    synth = c @ model.basis
    f_vals = np.asarray(nl.f(synth), dtype=float)
    return quad_part - mu * (model.basis @ (model.weights * f_vals))
