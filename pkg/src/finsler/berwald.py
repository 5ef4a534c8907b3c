"""Berwald detection and the constructions built on parallel one-forms.

A metric is Berwald when its spray is quadratic in ``y``, equivalently when
the Chern symbols do not depend on the direction.  Both are tested on random
unit directions, which is a sound probabilistic check of a polynomial
identity.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import jets
from .errors import DegenerateMetricError, HypothesisError, NonSmoothError, PositivityError
from .fields import OneForm
from .geometry import ORDER_BERWALD, ORDER_CURVATURE, TangentJets
from .metrics import MetricSpec, conformal, g_plus_beta

BERWALD_TOL = 1e-8
PARALLEL_TOL = 1e-8
STRUCTURE_TOL = 1e-8
LANDSBERG_TOL = 1e-9
DEFAULT_SAMPLES = 40


@dataclass
class BerwaldReport:
    berwald: bool
    max_third_deriv: float
    gamma_spread: float
    samples: int

    def to_json(self) -> dict:
        return asdict(self)


def _unit_directions(spec: MetricSpec, x, count: int, rng):
    """Random unit vectors at ``x`` avoiding non-smooth and degenerate directions."""
    n = spec.dimension
    tries = 0
    while count > 0 and tries < 20 * count + 100:
        tries += 1
        y = rng.standard_normal(n)
        y /= np.linalg.norm(y)
        if spec.nonsmooth(x, y):
            continue
        yield y
        count -= 1


def is_berwald(spec: MetricSpec, x, sample_count: int = DEFAULT_SAMPLES, seed: int = 0) -> BerwaldReport:
    """Check that ``d^3 G / dy^3`` vanishes and ``Gamma`` is direction-free at ``x``."""
    x = np.asarray(x, float)
    rng = np.random.default_rng(seed)
    third = 0.0
    ref = None
    spread = 0.0
    used = 0
    for y in _unit_directions(spec, x, sample_count, rng):
        try:
            tj = TangentJets(spec, x, y, ORDER_BERWALD)
            d3 = tj.dy(tj.dy(tj.dy(tj.G)))
            gamma = np.asarray(tj.Gamma.value)
        except (DegenerateMetricError, NonSmoothError, PositivityError):
            continue
        third = max(third, float(np.max(np.abs(d3.value))))
        if ref is None:
            ref = gamma
        spread = max(spread, float(np.max(np.abs(gamma - ref))))
        used += 1
    if used == 0:
        raise HypothesisError(f"no admissible direction found at x = {x.tolist()}")
    return BerwaldReport(third <= BERWALD_TOL and spread <= BERWALD_TOL, third, spread, used)


def berwald_symbols(spec: MetricSpec, x, y=None) -> np.ndarray:
    """Direction-independent Chern symbols ``Gamma^i_jk(x)``; ``y`` only picks the sample."""
    x = np.asarray(x, float)
    if y is None:
        y = next(_unit_directions(spec, x, 1, np.random.default_rng(0)))
    return np.asarray(TangentJets(spec, x, y, 3).Gamma.value)


def covariant_derivative(spec: MetricSpec, beta, x, y=None) -> np.ndarray:
    """``(D beta)[i, j] = d beta_i / dx^j - Gamma^k_ji beta_k`` with Berwald symbols."""
    beta = OneForm.parse(beta)
    x = np.asarray(x, float)
    n = spec.dimension
    xs = jets.lift_all(x, 1)
    comps = [c if isinstance(c, jets.Jet) else jets.constant(c, n, 1) for c in beta.covector(xs)]
    b = np.array([float(c.value) for c in comps])
    db = np.array([[c.partial(j) for j in range(n)] for c in comps])
    gamma = berwald_symbols(spec, x, y)
    return db - np.einsum("kji,k->ij", gamma, b)


def parallel_one_form_residual(baseF: MetricSpec, beta, x, y=None, sample_count: int = 8) -> float:
    """Max-norm of ``D beta`` for the linear connection of a Berwald base.

    Raises :class:`HypothesisError` if ``baseF`` is not Berwald at ``x``,
    since the linear covariant derivative is then undefined.
    """
    rep = is_berwald(baseF, x, sample_count)
    if not rep.berwald:
        raise HypothesisError(
            f"base metric is not Berwald at x (third derivative {rep.max_third_deriv:.3e}, "
            f"Gamma spread {rep.gamma_spread:.3e})"
        )
    return float(np.max(np.abs(covariant_derivative(baseF, beta, x, y))))


def build_G_plus_beta(baseF: MetricSpec, lapse, beta, check_points=()) -> MetricSpec:
    """``sqrt(F^2/Lam + beta^2) + beta`` with its hypotheses checked at ``check_points``.

    Failed hypotheses do not raise; they are attached to the spec as warnings.
    """
    warnings = []
    scaled = conformal(baseF, lapse)
    points = [np.asarray(p, float) for p in check_points]
    if not points:
        warnings.append("hypotheses not checked: no check points given")
    for p in points:
        rep = is_berwald(scaled, p, 8)
        if not rep.berwald:
            warnings.append(f"F/sqrt(Lam) is not Berwald at {p.tolist()}")
            continue
        res = float(np.max(np.abs(covariant_derivative(scaled, beta, p))))
        if res > PARALLEL_TOL:
            warnings.append(f"beta is not parallel at {p.tolist()} (residual {res:.3e})")
    return g_plus_beta(baseF, lapse, beta, warnings=tuple(warnings))


@dataclass
class StructureReport:
    ok: bool
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    base_berwald: bool = False

    def to_json(self) -> dict:
        return asdict(self)


def static_product_structure_check(spec: MetricSpec, points, tol: float = STRUCTURE_TOL) -> StructureReport:
    """Compare a standard static product with its base at spacetime points ``(x, y)``.

    Checks ``G~^0 = 0``, ``G~^a = G^a``, ``Gamma~^0_jk = 0``,
    ``Gamma~^a_0k = 0``, ``R~ = R`` and, for a Berwald base, ``P~ = 0``.
    """
    if spec.family not in ("standard_static_product", "f_omega_static"):
        raise TypeError(f"{spec.family} is not a standard static product")
    base = spec.base
    maxima = dict.fromkeys(["G0", "G_base", "Gamma0", "Gamma_a0", "ricci", "landsberg"], 0.0)
    berwald_all = True
    for x, y in points:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        berwald_all &= is_berwald(base, x[1:], 8).berwald
        tj = TangentJets(spec, x, y, ORDER_CURVATURE)
        bj = TangentJets(base, x[1:], y[1:], ORDER_CURVATURE)
        G = np.asarray(tj.G.value)
        gamma = np.asarray(tj.Gamma.value)
        maxima["G0"] = max(maxima["G0"], abs(G[0]))
        maxima["G_base"] = max(maxima["G_base"], float(np.max(np.abs(G[1:] - bj.G.value))))
        maxima["Gamma0"] = max(maxima["Gamma0"], float(np.max(np.abs(gamma[0]))))
        mixed = max(np.max(np.abs(gamma[1:, 0, :])), np.max(np.abs(gamma[1:, :, 0])))
        maxima["Gamma_a0"] = max(maxima["Gamma_a0"], float(mixed))
        maxima["ricci"] = max(maxima["ricci"], abs(float(tj.ricci.value) - float(bj.ricci.value)))
        maxima["landsberg"] = max(maxima["landsberg"], float(np.max(np.abs(tj.P.value))))
    tols = {k: tol for k in maxima}
    tols["landsberg"] = LANDSBERG_TOL
    failures = [k for k, v in maxima.items() if v > tols[k] and (k != "landsberg" or berwald_all)]
    checks = {k: {"max": float(v), "tol": tols[k], "pass": k not in failures} for k, v in maxima.items()}
    if not berwald_all:
        checks["landsberg"]["pass"] = None  # only claimed for Berwald bases
    return StructureReport(not failures, checks, failures, bool(berwald_all))
