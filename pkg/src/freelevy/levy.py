"""Generating triples and pairs of freely infinitely divisible laws, their
conversions, Levy-measure pushforwards, the higher-variation triple map,
compound-Poisson triples, cumulant expansion, and the limit-condition checker.

Atom arithmetic goes through plain Python numbers, so triples built from
ints/Fractions convert and round-trip exactly; density parts integrate on
their grids in floating point.

The triple stored here is time-free: the law at time t has triple
(t eta, t a, t rho), and cumulants scale linearly in t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .measures import DensityGrid, GridMeasure

ORIGIN_TOL = 1e-12
INTEGRABILITY_GUARD = 1e12
PUSHFORWARD_CELLS = 4096
SMALL_JUMP_SPLIT = 1e-3  # |x| below this integrates (p(x)-bx) as q(x) x^2


class LevyError(ValueError):
    """Invalid Levy data: atom at the origin, divergent integrals, bad map."""


def _is_zero(x) -> bool:
    return abs(x) <= ORIGIN_TOL


def _min_1_x2(x):
    if hasattr(x, "shape"):
        return np.minimum(1.0, x * x)
    return min(1, x * x)


def _exact(x):
    """Promote ints to Fraction so scalar division stays exact."""
    return Fraction(x) if isinstance(x, int) else x


def _tilt_weight(x):
    """x / (1 + x^2), exact on scalar rationals."""
    if hasattr(x, "shape"):
        return x / (1.0 + x * x)
    x = _exact(x)
    return x / (1 + x * x)


def _truncated_x(x):
    """x on [-1, 1], zero outside."""
    if hasattr(x, "shape"):
        return np.where(np.abs(x) <= 1.0, x, 0.0)
    return x if abs(x) <= 1 else 0


def _tail_x(x):
    """x outside [-1, 1], zero inside."""
    if hasattr(x, "shape"):
        return np.where(np.abs(x) > 1.0, x, 0.0)
    return x if abs(x) > 1 else 0


@dataclass
class LevyMeasure:
    """Atoms plus a sampled density, with the origin excluded.

    The same grid representation as GridMeasure, but the total mass may be
    large and the origin carries none: atoms at 0 are rejected and the grid
    node nearest 0 is zeroed.
    """

    atoms: list = field(default_factory=list)
    grid: DensityGrid | None = None

    def __post_init__(self):
        cleaned = []
        for loc, mass in self.atoms:
            if mass < 0:
                raise LevyError(f"negative mass {mass} at {loc}")
            if _is_zero(loc) and mass != 0:
                raise LevyError("Levy measures carry no atom at the origin")
            if mass != 0:
                cleaned.append((loc, mass))
        cleaned.sort(key=lambda a: float(a[0]))
        self.atoms = cleaned
        if self.grid is not None:
            xs = self.grid.xs()
            inside = np.abs(xs) < self.grid.h / 2.0
            if inside.any():
                vals = self.grid.values.copy()
                vals[inside] = 0.0
                self.grid = DensityGrid(self.grid.lo, self.grid.hi, self.grid.h, vals)
        guard = self.integrate(_min_1_x2)
        if not (float(guard) <= INTEGRABILITY_GUARD):
            raise LevyError(
                f"integral of min(1, x^2) = {guard} exceeds the {INTEGRABILITY_GUARD} guard"
            )

    def integrate(self, f):
        total = sum((m * f(x) for x, m in self.atoms), start=0)
        if self.grid is not None:
            total = total + self.grid.integral(f)
        return total

    def moment(self, k: int):
        return self.integrate(lambda x: x**k)

    def is_trivial(self) -> bool:
        return not self.atoms and (self.grid is None or self.grid.mass() == 0.0)

    def support_bounds(self):
        return GridMeasure(list(self.atoms), self.grid).support_bounds()

    def to_grid_measure(self) -> GridMeasure:
        return GridMeasure(list(self.atoms), self.grid)

    def to_json(self) -> dict:
        return self.to_grid_measure().to_json()

    @classmethod
    def from_json(cls, data: dict) -> "LevyMeasure":
        gm = GridMeasure.from_json(data)
        return cls(gm.atoms, gm.grid)

    @classmethod
    def from_grid_measure(cls, gm: GridMeasure) -> "LevyMeasure":
        return cls(list(gm.atoms), gm.grid)

    @classmethod
    def zero(cls) -> "LevyMeasure":
        return cls([], None)


@dataclass
class GeneratingTriple:
    """Drift, semicircular variance coefficient, and Levy measure."""

    eta: float
    a: float
    rho: LevyMeasure

    def __post_init__(self):
        if self.a < 0:
            raise LevyError(f"semicircular coefficient must be >= 0, got {self.a}")

    def to_json(self) -> dict:
        return {"eta": float(self.eta), "a": float(self.a), "rho": self.rho.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "GeneratingTriple":
        return cls(data["eta"], data["a"], LevyMeasure.from_json(data["rho"]))


@dataclass
class GeneratingPair:
    """Nevanlinna parameters: shift gamma and finite nonnegative measure sigma."""

    gamma: float
    sigma: GridMeasure

    def to_json(self) -> dict:
        return {"gamma": float(self.gamma), "sigma": self.sigma.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "GeneratingPair":
        return cls(data["gamma"], GridMeasure.from_json(data["sigma"]))


@dataclass
class VariationMap:
    """A continuous map p with p(0) = 0, p'(0) = b, p''(0) = 2c.

    b and c are supplied by the caller, never differenced numerically: they
    are analytic facts about p, and the b = 0 fast paths must not be
    corrupted by finite-difference noise. monotone_pieces optionally lists
    intervals on which p is injective, enabling the mass-preserving density
    pushforward; without them a midpoint binning fallback is used.
    """

    p: callable
    b: float
    c: float
    monotone_pieces: list | None = None
    name: str = ""

    def __post_init__(self):
        p0 = self.p(0.0)
        if abs(p0) > ORIGIN_TOL:
            raise LevyError(f"variation maps require p(0) = 0, got p(0) = {p0}")

    @classmethod
    def power(cls, k: int) -> "VariationMap":
        if k < 1:
            raise LevyError(f"power maps need k >= 1, got {k}")
        pieces = None if k % 2 == 1 else [(-math.inf, 0.0), (0.0, math.inf)]

        def p(x):
            return x**k

        # integer b, c keep exact atom arithmetic exact
        return cls(p=p, b=1 if k == 1 else 0, c=1 if k == 2 else 0,
                   monotone_pieces=pieces, name=f"pow:{k}")

    @classmethod
    def polynomial(cls, coeffs) -> "VariationMap":
        """p(x) = coeffs[0] x + coeffs[1] x^2 + ... (no constant term)."""
        coeffs = list(coeffs)
        if not coeffs:
            raise LevyError("polynomial maps need at least one coefficient")

        def p(x):
            acc = 0
            for cj in reversed(coeffs):
                acc = acc * x + cj
            return acc * x

        b = coeffs[0]
        c = coeffs[1] if len(coeffs) > 1 else 0
        return cls(p=p, b=b, c=c, monotone_pieces=None,
                   name="poly:" + ",".join(str(float(cj)) for cj in coeffs))


# -- conversions ---------------------------------------------------------------


def triple_to_pair(t: GeneratingTriple) -> GeneratingPair:
    """(eta, a, rho) -> (gamma, sigma): sigma = a delta_0 + x^2/(1+x^2) rho."""
    atoms = [(0, t.a)] if t.a != 0 else []
    for x, m in t.rho.atoms:
        x = _exact(x)
        atoms.append((x, m * x * x / (1 + x * x)))
    grid = None
    if t.rho.grid is not None:
        xs = t.rho.grid.xs()
        vals = t.rho.grid.values * xs * xs / (1.0 + xs * xs)
        grid = DensityGrid(t.rho.grid.lo, t.rho.grid.hi, t.rho.grid.h, vals)

    def tilt(x):
        if hasattr(x, "shape"):
            inside = np.abs(x) <= 1.0
            return np.where(inside, x**3 / (1.0 + x**2), -x / (1.0 + x**2))
        x = _exact(x)
        if abs(x) <= 1:
            return x**3 / (1 + x * x)
        return -x / (1 + x * x)

    correction = t.rho.integrate(tilt)
    if not np.isfinite(float(correction)):
        raise LevyError("tilt integral diverged; rho is not a Levy measure")
    return GeneratingPair(t.eta - correction, GridMeasure(atoms, grid))


def pair_to_triple(p: GeneratingPair) -> GeneratingTriple:
    """(gamma, sigma) -> (eta, a, rho): a = sigma({0}), rho = (1+x^2)/x^2 sigma."""
    a = 0
    rho_atoms = []
    eta = p.gamma
    for x, m in p.sigma.atoms:
        if _is_zero(x):
            a = a + m
            continue
        x = _exact(x)
        m = _exact(m)
        rho_atoms.append((x, m * (1 + x * x) / (x * x)))
        # integrand x on 0<|x|<=1, -1/x outside
        eta = eta + (m * x if abs(x) <= 1 else -m / x)
    grid = None
    if p.sigma.grid is not None:
        sg = p.sigma.grid
        xs = sg.xs()
        off = np.abs(xs) >= sg.h / 2.0
        factor = np.zeros_like(xs)
        factor[off] = (1.0 + xs[off] ** 2) / xs[off] ** 2
        grid = DensityGrid(sg.lo, sg.hi, sg.h, sg.values * factor)

        def tilt_vec(x):
            t = np.zeros_like(x)
            inner = (np.abs(x) >= sg.h / 2.0) & (np.abs(x) <= 1.0)
            outer = np.abs(x) > 1.0
            t[inner] = x[inner]
            t[outer] = -1.0 / x[outer]
            return t

        eta = eta + sg.integral(tilt_vec)
    return GeneratingTriple(eta, a, LevyMeasure(rho_atoms, grid))


def triple_to_cumulants(t: GeneratingTriple, n: int) -> list:
    """kappa_1 = eta + int_{|x|>1} x, kappa_2 = a + int x^2, kappa_m = int x^m."""
    if n < 1 or n > 12:
        raise LevyError(f"cumulant order must be in 1..12, got {n}")
    out = []
    for m in range(1, n + 1):
        if m == 1:
            out.append(t.eta + t.rho.integrate(_tail_x))
        elif m == 2:
            out.append(t.a + t.rho.moment(2))
        else:
            out.append(t.rho.moment(m))
    return out


def compound_poisson_triple(lam, jump: GridMeasure) -> GeneratingTriple:
    """Triple of the rate-lam compound Poisson law with the given jump law."""
    if lam <= 0:
        raise LevyError(f"rate must be positive, got {lam}")
    if not jump.is_probability(tol=1e-6):
        raise LevyError("jump must be a probability measure")
    atoms = [(x, lam * m) for x, m in jump.atoms if not _is_zero(x)]
    grid = None
    if jump.grid is not None:
        grid = DensityGrid(
            jump.grid.lo, jump.grid.hi, jump.grid.h, lam * jump.grid.values
        )
    eta = lam * jump.integrate(_truncated_x)
    return GeneratingTriple(eta, 0, LevyMeasure(atoms, grid))


# -- pushforward and the variation map -------------------------------------------


def _merge_atom_images(pairs):
    pairs = sorted(pairs, key=lambda p: float(p[0]))
    merged = []
    for loc, mass in pairs:
        if merged and abs(float(loc) - float(merged[-1][0])) <= ORIGIN_TOL * max(
            1.0, abs(float(loc))
        ):
            merged[-1] = (merged[-1][0], merged[-1][1] + mass)
        else:
            merged.append((loc, mass))
    return merged


def pushforward_levy(rho: LevyMeasure, vm: VariationMap) -> LevyMeasure:
    """Image measure of rho under p, with images at 0 dropped.

    Atom images within 1e-12 of each other merge their masses. The density
    part pushes mass-preservingly across declared monotone pieces (each
    source cell's mass spreads over its image interval); without declared
    pieces, each cell's mass is binned at the image of its midpoint, with
    the documented single-cell accuracy loss.
    """
    atom_images = []
    for x, m in rho.atoms:
        y = vm.p(x)
        if _is_zero(y):
            continue
        atom_images.append((y, m))
    atoms = _merge_atom_images(atom_images)

    grid = None
    if rho.grid is not None and rho.grid.mass() > 0:
        xs = rho.grid.xs()
        vals = rho.grid.values
        h = rho.grid.h
        cell_mass = h * (vals[:-1] + vals[1:]) / 2.0
        images = np.array([float(vm.p(x)) for x in xs])
        mids = np.array([float(vm.p(x)) for x in (xs[:-1] + xs[1:]) / 2.0])
        # include the midpoint image so cells straddling a fold of p
        # (e.g. the vertex of an even power) cover their true image range
        los = np.minimum(np.minimum(images[:-1], images[1:]), mids)
        his = np.maximum(np.maximum(images[:-1], images[1:]), mids)
        keep = ~((np.abs(los) <= ORIGIN_TOL) & (np.abs(his) <= ORIGIN_TOL))
        if keep.any():
            lo_t, hi_t = float(los[keep].min()), float(his[keep].max())
            if hi_t - lo_t <= ORIGIN_TOL:
                # the whole density maps to one point: emit it as an atom
                atoms = _merge_atom_images(
                    atoms + [((lo_t + hi_t) / 2.0, float(cell_mass[keep].sum()))]
                )
            else:
                ht = (hi_t - lo_t) / PUSHFORWARD_CELLS
                node_mass = np.zeros(PUSHFORWARD_CELLS + 1)
                use_pieces = vm.monotone_pieces is not None
                for i in np.flatnonzero(keep):
                    if use_pieces:
                        _deposit_interval(
                            node_mass, lo_t, ht, los[i], his[i], cell_mass[i]
                        )
                    else:
                        _deposit_interval(
                            node_mass, lo_t, ht, mids[i], mids[i], cell_mass[i]
                        )
                values = node_mass / ht
                values[0] *= 2.0
                values[-1] *= 2.0
                grid = DensityGrid(lo_t, lo_t + ht * PUSHFORWARD_CELLS, ht, values)

    out = LevyMeasure(atoms, grid)
    check = out.integrate(
        lambda x: np.minimum(1.0, x * x) if hasattr(x, "shape") else min(1, x * x)
    )
    if not np.isfinite(float(check)):
        raise LevyError("pushforward violated the Levy integrability check")
    return out


def _deposit_interval(node_mass, lo, h, a, b, mass):
    """Spread `mass` uniformly over [a, b] onto uniform cells starting at lo."""
    n_cells = len(node_mass) - 1
    if b - a <= 1e-15:
        j = min(max(int((a - lo) / h), 0), n_cells - 1)
        node_mass[j] += mass / 2.0
        node_mass[j + 1] += mass / 2.0
        return
    width = b - a
    j0 = min(max(int((a - lo) / h), 0), n_cells - 1)
    j1 = min(max(int((b - lo) / h), 0), n_cells - 1)
    for j in range(j0, j1 + 1):
        cell_lo = lo + j * h
        overlap = max(0.0, min(b, cell_lo + h) - max(a, cell_lo))
        if overlap > 0:
            share = mass * overlap / width
            node_mass[j] += share / 2.0
            node_mass[j + 1] += share / 2.0


def variation_triple(t: GeneratingTriple, vm: VariationMap) -> GeneratingTriple:
    """Generating triple of the p-variation process.

    (eta, a, rho) maps to
      eta' = b eta + a c + int [ 1{0<|p(x)|<=1} p(x) - 1{0<|x|<=1} b x ] drho
      a'   = a b^2
      rho' = pushforward of rho under p.
    The compensator integrand is evaluated as q(x) x^2 with
    q = (p(x) - b x)/x^2 for |x| below 1e-3, where the direct form cancels.
    """
    b, c = vm.b, vm.c

    def compensator(x):
        x = _exact(x)
        ax = abs(x)
        if ax <= ORIGIN_TOL:
            return 0
        if ax <= SMALL_JUMP_SPLIT:
            q = (vm.p(x) - b * x) / (x * x)
            return q * x * x
        px = vm.p(x)
        term = px if 0 < abs(px) <= 1 else 0
        if ax <= 1:
            term = term - b * x
        return term

    def compensator_vec(xs):
        out = np.zeros_like(xs)
        for i, x in enumerate(xs):
            out[i] = compensator(float(x))
        return out

    integral = t.rho.integrate(
        lambda x: compensator_vec(x) if hasattr(x, "shape") else compensator(x)
    )
    if not np.isfinite(float(integral)):
        raise LevyError("compensator integral diverged")
    eta_p = b * t.eta + t.a * c + integral
    return GeneratingTriple(eta_p, t.a * b * b, pushforward_levy(t.rho, vm))


# -- limit-condition checker -------------------------------------------------------


@dataclass
class BPReport:
    """Per-scale estimates of the limit pair and their extrapolation."""

    ns: list
    gamma_by_n: list
    sigma_by_n: list
    gamma: float
    sigma_mass: float
    sigma_mean: float
    sigma_atoms: list | None
    gamma_residuals: list

    def pair(self) -> GeneratingPair:
        if self.sigma_atoms is not None:
            sigma = GridMeasure(list(self.sigma_atoms))
        else:
            sigma = self.sigma_by_n[-1]
        return GeneratingPair(self.gamma, sigma)


def _extrapolate(values, ns):
    """Richardson-style limit from the last three scales; exact tail wins."""
    vals = [float(v) for v in values]
    if len(vals) == 1:
        return vals[0]
    if abs(vals[-1] - vals[-2]) <= 1e-14 * max(1.0, abs(vals[-1])):
        return vals[-1]
    if len(vals) == 2:
        r = ns[-1] / ns[-2]
        return vals[-1] + (vals[-1] - vals[-2]) / (r - 1.0)
    d1 = vals[-2] - vals[-3]
    d2 = vals[-1] - vals[-2]
    r = ns[-1] / ns[-2]
    if d2 == 0 or d1 == 0 or (d1 / d2) <= 1.0:
        return vals[-1]
    p = math.log(d1 / d2) / math.log(r)
    return vals[-1] + d2 / (r**p - 1.0)


def bp_limit_check(family, ns) -> BPReport:
    """Evaluate the limit-pair conditions gamma_N = N int x/(1+x^2) d mu_N and
    sigma_N = N x^2/(1+x^2) mu_N along a scale list, and extrapolate.

    Divergence shows up as non-convergent estimates in the report; nothing is
    thrown. Atom-level extrapolation of sigma happens when the atom locations
    are stable across scales.
    """
    ns = list(ns)
    gammas, sigmas = [], []
    for n in ns:
        mu = family(n)
        gamma_n = n * mu.integrate(_tilt_weight)
        atoms = [(x, n * m * x * x / (1 + x * x)) for x, m in mu.atoms if m != 0]
        grid = None
        if mu.grid is not None:
            xs = mu.grid.xs()
            grid = DensityGrid(
                mu.grid.lo, mu.grid.hi, mu.grid.h,
                n * mu.grid.values * xs * xs / (1.0 + xs * xs),
            )
        sigmas.append(GridMeasure([(x, m) for x, m in atoms if m != 0], grid))
        gammas.append(gamma_n)

    gamma = _extrapolate(gammas, ns)
    masses = [s.total_mass for s in sigmas]
    means = [s.integrate(lambda x: x) for s in sigmas]
    sigma_mass = _extrapolate(masses, ns)
    sigma_mean = _extrapolate(means, ns)

    sigma_atoms = None
    locsets = [tuple(float(x) for x, _ in s.atoms) for s in sigmas]
    if all(not s.grid for s in sigmas) and len(set(locsets)) == 1 and locsets[0]:
        sigma_atoms = []
        for j, loc in enumerate(locsets[0]):
            mass = _extrapolate([s.atoms[j][1] for s in sigmas], ns)
            exact = sigmas[-1].atoms[j][1]
            # keep the exact value when the sequence is already constant
            if all(
                abs(float(s.atoms[j][1]) - float(exact)) <= 1e-14
                for s in sigmas
            ):
                mass = exact
            sigma_atoms.append((sigmas[-1].atoms[j][0], mass))

    residuals = [abs(float(g) - gamma) for g in gammas]
    return BPReport(
        ns=ns,
        gamma_by_n=gammas,
        sigma_by_n=sigmas,
        gamma=gamma,
        sigma_mass=sigma_mass,
        sigma_mean=sigma_mean,
        sigma_atoms=sigma_atoms,
        gamma_residuals=residuals,
    )


def bernoulli_family(lam):
    """N -> (1 - lam/N) delta_0 + (lam/N) delta_1, exact masses."""

    def family(n):
        frac = Fraction(lam) / n
        return GridMeasure([(0, 1 - frac), (1, frac)])

    return family


def shifted_atom_family(c):
    """N -> delta_(c/N), the pure-drift family."""

    def family(n):
        return GridMeasure([(Fraction(c) / n if isinstance(c, int) else c / n, 1)])

    return family


def symmetric_pm_family():
    """N -> (delta_(-1/sqrt N) + delta_(1/sqrt N)) / 2, the semicircle family."""

    def family(n):
        s = 1.0 / math.sqrt(n)
        return GridMeasure([(-s, 0.5), (s, 0.5)])

    return family


__all__ = [
    "BPReport",
    "GeneratingPair",
    "GeneratingTriple",
    "LevyError",
    "LevyMeasure",
    "VariationMap",
    "bernoulli_family",
    "bp_limit_check",
    "compound_poisson_triple",
    "pair_to_triple",
    "pushforward_levy",
    "shifted_atom_family",
    "symmetric_pm_family",
    "triple_to_cumulants",
    "triple_to_pair",
    "variation_triple",
]
