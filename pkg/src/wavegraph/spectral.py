"""Spectral unfolding, nearest-neighbor spacing statistics, and rigidity.

Levels are unfolded with the smooth Weyl counting term eps = (2*L/c)*nu,
which already has unit mean density for a metric graph of total length L, so
no polynomial fitting enters.  The nearest-neighbor spacing distribution is
compared against Poisson, GOE (Wigner surmise), and the Berry-Robnik
interpolation between them; the mixing parameter rho1 is estimated by
maximum likelihood over the raw spacings, with a bootstrap standard error.

The spectral rigidity Delta3(L) is the window-averaged least-squares
deviation of the counting staircase from the best straight line; each window
integral is evaluated in closed form from the level positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .scattering import SPEED_OF_LIGHT
from .goe_table import delta3_goe

__all__ = [
    "UnfoldedSpectrum",
    "SpacingSample",
    "FitResult",
    "Delta3Point",
    "RigidityCurve",
    "unfold",
    "unfold_wavenumbers",
    "pdf_poisson",
    "pdf_goe",
    "pdf_berry_robnik",
    "cdf_berry_robnik",
    "sample_berry_robnik",
    "nnsd_histogram",
    "fit_rho1",
    "delta3_empirical",
    "delta3_curve",
    "delta3_poisson",
    "delta3_goe",
    "delta3_br",
    "sample_poisson_levels",
    "sample_goe_levels",
    "sample_berry_robnik_levels",
    "delta3_reference_band",
]


@dataclass(frozen=True)
class UnfoldedSpectrum:
    """Dimensionless levels with unit mean spacing, plus provenance."""

    epsilon: np.ndarray
    total_length: float | None = None
    source: str = ""

    def __post_init__(self):
        eps = np.asarray(self.epsilon, dtype=float)
        if np.any(np.diff(eps) < 0):
            raise ValueError("unfolded levels must be ascending")
        object.__setattr__(self, "epsilon", eps)

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.epsilon)

    @property
    def mean_spacing(self) -> float:
        return float(np.mean(self.spacings))


@dataclass(frozen=True)
class SpacingSample:
    """Nearest-neighbor spacings of an unfolded spectrum."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v < 0):
            raise ValueError("spacings must be non-negative")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class FitResult:
    """Berry-Robnik mixing fraction estimate."""

    rho1: float
    stderr: float | None
    log_likelihood: float
    n_spacings: int

    @property
    def rho2(self) -> float:
        return 1.0 - self.rho1


@dataclass(frozen=True)
class Delta3Point:
    window: float
    value: float
    uncertainty: float
    n_windows: int


@dataclass(frozen=True)
class RigidityCurve:
    points: tuple[Delta3Point, ...]

    @property
    def windows(self) -> np.ndarray:
        return np.array([p.window for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def uncertainties(self) -> np.ndarray:
        return np.array([p.uncertainty for p in self.points])


def unfold(frequencies_hz, total_length_m: float, source: str = "") -> UnfoldedSpectrum:
    """Weyl unfolding eps = (2*L/c)*nu from frequencies in Hz."""
    nu = np.asarray(frequencies_hz, dtype=float)
    if np.any(np.diff(nu) < 0):
        raise ValueError("frequencies must be ascending")
    if not total_length_m > 0:
        raise ValueError("total length must be positive")
    eps = (2.0 * total_length_m / SPEED_OF_LIGHT) * nu
    return UnfoldedSpectrum(epsilon=eps, total_length=total_length_m, source=source)


def unfold_wavenumbers(k_values, total_length_m: float, source: str = "") -> UnfoldedSpectrum:
    """Weyl unfolding eps = L*k/pi from wave numbers in rad/m."""
    nu = SPEED_OF_LIGHT * np.asarray(k_values, dtype=float) / (2.0 * np.pi)
    return unfold(nu, total_length_m, source=source)


def _check_s(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacing values must be >= 0")
    return s


def pdf_poisson(s):
    """NNSD of an uncorrelated (regular) spectrum, exp(-s)."""
    s = _check_s(s)
    result = np.exp(-s)
    return float(result) if result.ndim == 0 else result


def pdf_goe(s):
    """Wigner surmise (pi/2) s exp(-pi s^2 / 4) for GOE level repulsion."""
    s = _check_s(s)
    result = 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s * s)
    return float(result) if result.ndim == 0 else result


def _check_rho1(rho1: float) -> tuple[float, float]:
    if not 0.0 <= rho1 <= 1.0:
        raise ValueError(f"rho1 must lie in [0, 1], got {rho1}")
    return float(rho1), 1.0 - float(rho1)


def pdf_berry_robnik(s, rho1: float):
    """Berry-Robnik NNSD for a Poisson fraction rho1 mixed with GOE.

    Reduces to exp(-s) at rho1=1 and to the Wigner surmise at rho1=0; the
    density at s=0 equals rho1*(2-rho1).
    """
    r1, r2 = _check_rho1(rho1)
    s = _check_s(s)
    result = r1 * r1 * np.exp(-r1 * s) * erfc(0.5 * np.sqrt(np.pi) * r2 * s) + (
        2.0 * r1 * r2 + 0.5 * np.pi * r2**3 * s
    ) * np.exp(-r1 * s - 0.25 * np.pi * r2 * r2 * s * s)
    return float(result) if result.ndim == 0 else result


def cdf_berry_robnik(s, rho1: float):
    """Closed-form CDF of the Berry-Robnik NNSD.

    The density is the second derivative of the gap function
    E(s) = exp(-rho1*s) * erfc(sqrt(pi)/2 * rho2 * s), so the CDF is
    1 + E'(s).
    """
    r1, r2 = _check_rho1(rho1)
    s = _check_s(s)
    result = 1.0 - np.exp(-r1 * s) * (
        r1 * erfc(0.5 * np.sqrt(np.pi) * r2 * s) + r2 * np.exp(-0.25 * np.pi * r2 * r2 * s * s)
    )
    return float(result) if result.ndim == 0 else result


def sample_berry_robnik(n: int, rho1: float, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw i.i.d. spacings from the Berry-Robnik NNSD by CDF inversion."""
    _check_rho1(rho1)
    if rng is None:
        rng = np.random.default_rng()
    s_max = 20.0
    while 1.0 - cdf_berry_robnik(s_max, rho1) > 1e-14:
        s_max *= 2.0
    grid = np.linspace(0.0, s_max, 200001)
    cdf = cdf_berry_robnik(grid, rho1)
    u = rng.uniform(0.0, cdf[-1], size=n)
    return np.interp(u, cdf, grid)


def nnsd_histogram(spacings, bin_width: float = 0.25, s_max: float | None = None):
    """Density histogram of normalized spacings (display helper)."""
    s = _check_s(getattr(spacings, "values", spacings))
    s = s / s.mean()
    if s_max is None:
        s_max = float(np.ceil(s.max() / bin_width) * bin_width)
    edges = np.arange(0.0, s_max + bin_width, bin_width)
    density, _ = np.histogram(s, bins=edges, density=True)
    return edges, density


def _golden_max(fun, lo: float, hi: float, tol: float = 1e-6) -> float:
    """Golden-section maximizer on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = fun(c), fun(d)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = fun(d)
    return 0.5 * (lo + hi)


def fit_rho1(
    spacings,
    *,
    n_bootstrap: int = 1000,
    seed: int | None = None,
    tol: float = 1e-6,
) -> FitResult:
    """Maximum-likelihood Berry-Robnik fit of the mixing fraction rho1.

    Spacings are normalized to unit mean internally, so the estimate does not
    depend on the unfolding scale.  The standard error comes from a
    nonparametric bootstrap (``n_bootstrap`` resamples; 0 skips it).
    """
    s = _check_s(getattr(spacings, "values", spacings))
    if len(s) < 100:
        raise ValueError(f"need at least 100 spacings, got {len(s)}")
    if np.ptp(s) == 0.0:
        raise ValueError("degenerate sample: all spacings equal")
    s = s / s.mean()

    def log_likelihood(sample):
        def ll(r1):
            return float(np.sum(np.log(np.maximum(pdf_berry_robnik(sample, r1), 1e-300))))

        return ll

    ll = log_likelihood(s)
    rho1_hat = _golden_max(ll, 0.0, 1.0, tol=tol)

    stderr = None
    if n_bootstrap > 0:
        rng = np.random.default_rng(seed)
        estimates = np.empty(n_bootstrap)
        for i in range(n_bootstrap):
            resample = s[rng.integers(0, len(s), size=len(s))]
            resample = resample / resample.mean()
            estimates[i] = _golden_max(log_likelihood(resample), 0.0, 1.0, tol=tol)
        stderr = float(np.std(estimates, ddof=1))

    return FitResult(
        rho1=float(rho1_hat),
        stderr=stderr,
        log_likelihood=ll(rho1_hat),
        n_spacings=len(s),
    )


def _delta3_window_values(eps: np.ndarray, L: float, step: float) -> np.ndarray:
    """Closed-form per-window rigidity over sliding windows of length L.

    For levels x_i inside a centered window, the best-line residual integral
    reduces to staircase sums: with S1 = sum(L/2 - x_i),
    Sx = sum(L^2/8 - x_i^2/2), and S2 = sum_m (2m-1)(L/2 - x_(m)),
    Delta3 = S2/L - (S1/L)^2 - 12*Sx^2/L^4.
    """
    x = eps - eps.mean()  # recentre to keep prefix sums well conditioned
    starts = np.arange(x[0], x[-1] - L + 1e-12, step)
    if len(starts) == 0:
        raise ValueError(f"window length {L} exceeds the spectrum span {x[-1] - x[0]:.3g}")
    p1 = np.concatenate([[0.0], np.cumsum(x)])
    p2 = np.concatenate([[0.0], np.cumsum(x * x)])
    pg = np.concatenate([[0.0], np.cumsum(np.arange(len(x)) * x)])
    a = np.searchsorted(x, starts, side="left")
    b = np.searchsorted(x, starts + L, side="right")
    n = b - a
    c = starts + L / 2.0
    sum_x = p1[b] - p1[a]
    sum_x2 = p2[b] - p2[a]
    sum_gx = pg[b] - pg[a]
    s1 = n * L / 2.0 - (sum_x - n * c)
    sx = n * L * L / 8.0 - 0.5 * (sum_x2 - 2.0 * c * sum_x + n * c * c)
    sum_mx = sum_gx + (1.0 - a) * sum_x - c * n * (n + 1) / 2.0
    s2 = n * n * L / 2.0 - (2.0 * sum_mx - (sum_x - n * c))
    return s2 / L - (s1 / L) ** 2 - 12.0 * sx * sx / L**4


def delta3_empirical(unfolded, L: float, window_step: float | None = None) -> Delta3Point:
    """Average rigidity at window length L over overlapping windows.

    The default step L/4 overlaps windows for variance reduction; the quoted
    uncertainty is the window scatter scaled by the effective number of
    independent (non-overlapping) windows.
    """
    eps = np.asarray(getattr(unfolded, "epsilon", unfolded), dtype=float)
    if L <= 0:
        raise ValueError("window length must be positive")
    step = L / 4.0 if window_step is None else float(window_step)
    vals = _delta3_window_values(eps, L, step)
    n_eff = max(int((eps[-1] - eps[0]) // L), 1)
    return Delta3Point(
        window=float(L),
        value=float(np.mean(vals)),
        uncertainty=float(np.std(vals, ddof=1) / np.sqrt(n_eff)) if len(vals) > 1 else 0.0,
        n_windows=len(vals),
    )


def delta3_curve(unfolded, L_values, window_step: float | None = None) -> RigidityCurve:
    return RigidityCurve(
        points=tuple(delta3_empirical(unfolded, L, window_step) for L in L_values)
    )


def delta3_poisson(L):
    """Rigidity of an uncorrelated spectrum, L/15 (0 at L=0 by convention)."""
    L = np.asarray(L, dtype=float)
    result = np.maximum(L, 0.0) / 15.0
    return float(result) if result.ndim == 0 else result


def delta3_br(L, rho1: float):
    """Berry-Robnik rigidity: delta3_poisson(rho1*L) + delta3_goe(rho2*L)."""
    r1, r2 = _check_rho1(rho1)
    L = np.asarray(L, dtype=float)
    result = delta3_poisson(r1 * L) + delta3_goe(r2 * L)
    return float(result) if np.ndim(result) == 0 else result


def sample_poisson_levels(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-mean-spacing uncorrelated levels."""
    return np.cumsum(rng.exponential(1.0, size=n))


def sample_goe_levels(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-mean-spacing GOE levels via the tridiagonal beta-ensemble.

    The central half of the semicircle-unfolded spectrum of a matrix about
    twice the requested size is returned, which avoids edge effects.
    """
    size = max(int(2.2 * n) + 20, 40)
    d = rng.normal(0.0, 1.0, size)
    e = np.sqrt(rng.chisquare(np.arange(size - 1, 0, -1))) / np.sqrt(2.0)
    from scipy.linalg import eigvalsh_tridiagonal

    lam = eigvalsh_tridiagonal(d, e)
    radius = np.sqrt(2.0 * size)
    nav = size * (
        0.5
        + lam * np.sqrt(np.maximum(radius**2 - lam**2, 0.0)) / (np.pi * radius**2)
        + np.arcsin(np.clip(lam / radius, -1.0, 1.0)) / np.pi
    )
    central = nav[(nav > 0.25 * size) & (nav < 0.75 * size)]
    return (central - central[0])[:n]


def sample_berry_robnik_levels(n: int, rho1: float, rng: np.random.Generator) -> np.ndarray:
    """Superposition of independent Poisson and GOE sequences.

    The components have mean densities rho1 and 1-rho1, so the merged
    sequence has unit mean spacing and Berry-Robnik statistics.
    """
    r1, r2 = _check_rho1(rho1)
    span = float(n)
    parts = []
    if r1 > 0:
        pois = sample_poisson_levels(int(n * r1 * 1.3) + 20, rng) / r1
        parts.append(pois[pois < span])
    if r2 > 0:
        goe = sample_goe_levels(int(n * r2 * 1.3) + 20, rng) / r2
        parts.append(goe[goe < span])
    levels = np.sort(np.concatenate(parts))
    return levels[:n]


def delta3_reference_band(
    kind: str,
    L_values,
    n_levels: int,
    *,
    rho1: float | None = None,
    n_realizations: int = 200,
    seed: int | None = None,
):
    """Monte-Carlo mean and standard deviation of empirical Delta3.

    Generates ``n_realizations`` synthetic spectra of ``n_levels`` levels
    ('poisson', 'goe', or 'berry_robnik' with the given rho1) and returns
    (mean, std) arrays over the realization scatter at each window length.
    """
    rng = np.random.default_rng(seed)
    L_values = np.asarray(L_values, dtype=float)
    samples = np.empty((n_realizations, len(L_values)))
    for r in range(n_realizations):
        if kind == "poisson":
            levels = sample_poisson_levels(n_levels, rng)
        elif kind == "goe":
            levels = sample_goe_levels(n_levels, rng)
        elif kind == "berry_robnik":
            if rho1 is None:
                raise ValueError("berry_robnik band needs rho1")
            levels = sample_berry_robnik_levels(n_levels, rho1, rng)
        else:
            raise ValueError(f"unknown reference kind {kind!r}")
        samples[r] = [delta3_empirical(levels, L).value for L in L_values]
    return samples.mean(axis=0), samples.std(axis=0, ddof=1)
