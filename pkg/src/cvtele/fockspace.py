"""
Truncated Fock-space states for a single optical mode and for two-mode
states supported on the diagonal |k>|k>.

Quadrature convention (used everywhere in the package):

    x = (a + a^dag) / sqrt(2),    p = (a - a^dag) / (i sqrt(2))

so the vacuum has <x^2> = 1/2 and the Wigner function of the vacuum peaks
at 1/pi with unit phase-space integral.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln, pdtrc

from cvtele.exceptions import TailTooHeavy

#: Vacuum variance of a single quadrature in this package's units.
VACUUM_VARIANCE = 0.5

COHERENT_TAIL = 1e-9
GEOMETRIC_TAIL = 1e-12
NORM_ATOL = 1e-12


def _freeze(arr):
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockVector:
    """Pure single-mode state, amplitudes over photon numbers 0..cutoff.

    Sub-normalized vectors are allowed (conditioned states); anything with
    squared norm above ``1 + 1e-12`` is rejected.
    """

    amps: np.ndarray

    def __post_init__(self):
        amps = _freeze(self.amps)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amps must be a non-empty 1-d array")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amps must be finite")
        if np.sum(np.abs(amps) ** 2) > 1 + NORM_ATOL:
            raise ValueError("squared norm exceeds 1")
        object.__setattr__(self, "amps", amps)

    @property
    def cutoff(self) -> int:
        return self.amps.size - 1

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def padded(self, cutoff: int) -> np.ndarray:
        """Amplitudes zero-padded (never truncated) to ``cutoff``."""
        if cutoff < self.cutoff:
            raise ValueError("cannot pad to a smaller cutoff")
        out = np.zeros(cutoff + 1, dtype=complex)
        out[: self.amps.size] = self.amps
        return out

    def normalized(self) -> "FockVector":
        n2 = self.norm2
        if n2 == 0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.amps / math.sqrt(n2))


@dataclass(frozen=True)
class TwoModeDiagonal:
    """Two-mode state sum_k c_k |k>|k>."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = _freeze(self.coeffs)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d array")
        if np.sum(np.abs(coeffs) ** 2) > 1 + NORM_ATOL:
            raise ValueError("squared norm exceeds 1")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def cutoff(self) -> int:
        return self.coeffs.size - 1

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def marginal_probabilities(self) -> np.ndarray:
        """Photon-number distribution of either reduced mode (it is diagonal)."""
        return np.abs(self.coeffs) ** 2


@dataclass(frozen=True)
class WignerGrid:
    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    np: int
    values: np.ndarray = field(repr=False)
    imag_residue: float = 0.0
    coarse: bool = False

    @property
    def xs(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ps(self):
        return np.linspace(self.p_min, self.p_max, self.np)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.np - 1)

    def integral(self) -> float:
        """Riemann sum of W dx dp."""
        return float(self.values.sum() * self.dx * self.dp)

    def x_marginal(self) -> np.ndarray:
        """Integral of W over p at each grid x."""
        return self.values.sum(axis=1) * self.dp


# -- constructors -----------------------------------------------------------


def default_coherent_cutoff(alpha) -> int:
    """ceil(|alpha|^2 + 10 sqrt(|alpha|^2 + 1))"""
    n = abs(alpha) ** 2
    return int(math.ceil(n + 10 * math.sqrt(n + 1)))


def default_epr_cutoff(chi: float, cap: int = 200) -> int:
    """Smallest cutoff with chi^(2*cutoff) <= 1e-12, capped."""
    if chi == 0:
        return 0
    return min(cap, int(math.ceil(math.log(GEOMETRIC_TAIL) / (2 * math.log(chi)))))


def fock(k: int, cutoff: int | None = None) -> FockVector:
    if k < 0:
        raise ValueError("photon number must be >= 0")
    cutoff = k if cutoff is None else cutoff
    if cutoff < k:
        raise ValueError("cutoff below requested photon number")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[k] = 1.0
    return FockVector(amps)


def vacuum(cutoff: int = 0) -> FockVector:
    return fock(0, cutoff)


def _coherent_raw(alpha, cutoff):
    # running product a_k = a_{k-1} alpha / sqrt(k); no factorials
    amps = np.empty(cutoff + 1, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2)
    for k in range(1, cutoff + 1):
        amps[k] = amps[k - 1] * alpha / math.sqrt(k)
    return amps


def coherent_tail(alpha, cutoff: int) -> float:
    """Poisson mass of |alpha> above ``cutoff``."""
    return float(pdtrc(cutoff, abs(alpha) ** 2))


def coherent(alpha, cutoff: int | None = None) -> FockVector:
    """Coherent state |alpha>, renormalized over the truncated space.

    Raises TailTooHeavy when more than 1e-9 of the Poisson mass sits above
    ``cutoff``.
    """
    if cutoff is None:
        cutoff = default_coherent_cutoff(alpha)
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    tail = coherent_tail(alpha, cutoff)
    if tail > COHERENT_TAIL:
        raise TailTooHeavy(f"coherent tail {tail:.3g} above cutoff {cutoff}")
    amps = _coherent_raw(complex(alpha), cutoff)
    return FockVector(amps / np.linalg.norm(amps))


def cat_even(alpha: float, cutoff: int | None = None) -> FockVector:
    """Even cat (|alpha> + |-alpha>) / sqrt(2 + 2 exp(-2 alpha^2))."""
    if alpha < 0 or not np.isreal(alpha):
        raise ValueError("cat amplitude must be real and >= 0")
    alpha = float(alpha)
    if cutoff is None:
        cutoff = default_coherent_cutoff(alpha)
    tail = coherent_tail(alpha, cutoff)
    if tail > COHERENT_TAIL:
        raise TailTooHeavy(f"coherent tail {tail:.3g} above cutoff {cutoff}")
    amps = _coherent_raw(alpha, cutoff)
    amps[1::2] = 0.0
    return FockVector(amps / np.linalg.norm(amps))


def epr(chi: float, cutoff: int | None = None) -> TwoModeDiagonal:
    """Two-mode squeezed vacuum sqrt(1 - chi^2) sum_k chi^k |k>|k>."""
    if not 0 <= chi < 1:
        raise ValueError("chi must lie in [0, 1)")
    if cutoff is None:
        cutoff = default_epr_cutoff(chi)
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    tail = chi ** (2 * (cutoff + 1))
    if tail >= GEOMETRIC_TAIL:
        raise TailTooHeavy(f"geometric tail {tail:.3g} above cutoff {cutoff}")
    c = math.sqrt(1 - chi**2) * chi ** np.arange(cutoff + 1, dtype=float)
    return TwoModeDiagonal(c / np.linalg.norm(c))


# -- scalar functionals -----------------------------------------------------


def _check_normalized(n2, what="state"):
    if abs(n2 - 1) > 1e-9:
        raise ValueError(f"{what} is not normalized (norm^2 = {n2:.12g})")


def overlap(a: FockVector, b: FockVector) -> complex:
    """<a|b>, zero-padding the shorter vector."""
    cutoff = max(a.cutoff, b.cutoff)
    return complex(np.vdot(a.padded(cutoff), b.padded(cutoff)))


def fidelity(a: FockVector, b: FockVector) -> float:
    """|<a|b>|^2 for normalized pure states."""
    _check_normalized(a.norm2, "a")
    _check_normalized(b.norm2, "b")
    return float(min(1.0, abs(overlap(a, b)) ** 2))


def two_mode_fidelity(a: TwoModeDiagonal, b: TwoModeDiagonal) -> float:
    _check_normalized(a.norm2, "a")
    _check_normalized(b.norm2, "b")
    n = max(a.cutoff, b.cutoff) + 1
    ca = np.zeros(n, dtype=complex)
    cb = np.zeros(n, dtype=complex)
    ca[: a.coeffs.size] = a.coeffs
    cb[: b.coeffs.size] = b.coeffs
    return float(min(1.0, abs(np.vdot(ca, cb)) ** 2))


def mean_photon(state) -> float:
    """sum_k k |c_k|^2 for a FockVector, or for one mode of a TwoModeDiagonal."""
    if isinstance(state, TwoModeDiagonal):
        probs = state.marginal_probabilities()
    else:
        probs = np.abs(state.amps) ** 2
    return float(np.dot(np.arange(probs.size), probs))


def quad_combo_variance(state: TwoModeDiagonal, relative_sign: int) -> float:
    """<(x_A + s x_B)^2> for s = relative_sign on a diagonal two-mode state.

    First moments vanish on diagonal states, so this is also the variance.
    Two uncorrelated vacua give 1.
    """
    if relative_sign not in (1, -1):
        raise ValueError("relative_sign must be +1 or -1")
    c = state.coeffs
    k = np.arange(c.size)
    diag = np.sum(np.abs(c) ** 2 * (2 * k + 1))
    cross = np.sum(np.real(np.conj(c[:-1]) * c[1:]) * (k[:-1] + 1))
    return float(diag + 2 * relative_sign * cross)


def two_mode_squeezing_variance(state: TwoModeDiagonal) -> float:
    """Smaller of the two combination variances."""
    return min(quad_combo_variance(state, 1), quad_combo_variance(state, -1))


def reduced_quadrature_variance(state: TwoModeDiagonal) -> float:
    """Single-mode quadrature variance of either reduced mode, in units where
    the vacuum variance is 1 (i.e. 2 <x^2>)."""
    probs = state.marginal_probabilities()
    k = np.arange(probs.size)
    return float(np.sum(probs * (2 * k + 1)))


def squeezing_variance_from_chi(chi: float) -> float:
    return (1 - chi) / (1 + chi)


def chi_from_squeezing_variance(v_s: float) -> float:
    return (1 - v_s) / (1 + v_s)


# -- Wigner function --------------------------------------------------------


def parse_grid(spec: str):
    """Parse "xmin:xmax:nx,pmin:pmax:np"."""
    try:
        xs, ps = spec.split(",")
        x0, x1, nx = xs.split(":")
        p0, p1, n_p = ps.split(":")
        return float(x0), float(x1), int(nx), float(p0), float(p1), int(n_p)
    except ValueError as exc:
        raise ValueError(f"malformed grid spec {spec!r}") from exc


def wigner(
    state: FockVector,
    x_min: float = -6.0,
    x_max: float = 6.0,
    nx: int = 240,
    p_min: float | None = None,
    p_max: float | None = None,
    n_p: int | None = None,
) -> WignerGrid:
    """Wigner function of a pure state on a rectangular (x, p) grid.

    Uses the Laguerre form of the Wigner transform of |m><n| (m >= n) with
    beta = (x + i p) / sqrt(2):

        W_mn = (-1)^n / pi * sqrt(n!/m!) * (2 conj(beta))^(m-n)
               * exp(-2|beta|^2) * L_n^(m-n)(4|beta|^2)

    The imaginary part of the accumulated sum is kept as ``imag_residue``.
    """
    p_min = x_min if p_min is None else p_min
    p_max = x_max if p_max is None else p_max
    n_p = nx if n_p is None else n_p
    if nx < 2 or n_p < 2:
        raise ValueError("grid needs at least 2 points per axis")
    if not all(np.isfinite([x_min, x_max, p_min, p_max])) or x_max <= x_min or p_max <= p_min:
        raise ValueError("grid bounds must be finite and increasing")
    _check_normalized(state.norm2)

    xs = np.linspace(x_min, x_max, nx)
    ps = np.linspace(p_min, p_max, n_p)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    beta_c = (X - 1j * P) / math.sqrt(2)
    r2 = 2 * (X**2 + P**2)  # 4 |beta|^2
    gauss = np.exp(-r2 / 2) / math.pi

    amps = state.amps
    support = np.flatnonzero(np.abs(amps) > 1e-15)
    total = np.zeros_like(X, dtype=complex)
    for m in support:
        for n in support:
            if n > m:
                continue
            rho_mn = amps[m] * np.conj(amps[n])
            d = m - n
            coef = (-1) ** n * math.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
            w_mn = coef * (2 * beta_c) ** d * gauss * eval_genlaguerre(n, d, r2)
            if m == n:
                total += rho_mn * w_mn
            else:
                total += rho_mn * w_mn + np.conj(rho_mn) * np.conj(w_mn)

    dx = (x_max - x_min) / (nx - 1)
    dp = (p_max - p_min) / (n_p - 1)
    coarse = dx > 0.2 or dp > 0.2
    if coarse:
        warnings.warn("Wigner grid spacing above 0.2; normalization check unreliable", stacklevel=2)
    return WignerGrid(
        x_min=x_min,
        x_max=x_max,
        p_min=p_min,
        p_max=p_max,
        nx=nx,
        np=n_p,
        values=total.real,
        imag_residue=float(np.max(np.abs(total.imag))),
        coarse=coarse,
    )
