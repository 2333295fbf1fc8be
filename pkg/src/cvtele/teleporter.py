"""
Closed-form model of CV teleportation through N parallel single-rail qubit
teleporters sandwiched between two N-splitters.

Each Fock level is attenuated by the filter

    f_k = C(N, k) k! / N^k = prod_{j<k} (1 - j/N),

so a pure input sum_k c_k |k> leaves as (normalized) sum_k c_k f_k |k>.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from cvtele.exceptions import ZeroOutput
from cvtele.fockspace import (
    FockVector,
    TwoModeDiagonal,
    default_coherent_cutoff,
    epr,
    two_mode_fidelity,
    two_mode_squeezing_variance,
)


class BellModel(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    LINEAR_OPTICS = "linear_optics"


@dataclass(frozen=True)
class FilterSpec:
    n_resources: int

    def __post_init__(self):
        if int(self.n_resources) != self.n_resources or self.n_resources < 1:
            raise ValueError("n_resources must be an integer >= 1")

    def coeffs(self, cutoff: int) -> np.ndarray:
        return filter_coeffs(self.n_resources, cutoff)


@dataclass(frozen=True)
class TeleportReport:
    output: FockVector | TwoModeDiagonal
    p_success: float
    fidelity_vs_input: float
    n_resources: int
    bell_model: BellModel = BellModel.DETERMINISTIC
    meta: dict = field(default_factory=dict)


def _check_n(N):
    if int(N) != N or N < 1:
        raise ValueError("N must be an integer >= 1")
    return int(N)


def filter_coeff(N: int, k: int) -> float:
    """f_k = C(N,k) k!/N^k as a running product; 0 for k > N."""
    N = _check_n(N)
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > N:
        return 0.0
    out = 1.0
    for j in range(k):
        out *= 1 - j / N
    return out


def filter_coeffs(N: int, cutoff: int) -> np.ndarray:
    """f_0..f_cutoff."""
    N = _check_n(N)
    j = np.arange(cutoff, dtype=float)
    f = np.concatenate(([1.0], np.cumprod(1 - j / N)))
    f[np.arange(cutoff + 1) > N] = 0.0
    return f


def _log_filter(N, k):
    # log of C(N,k) k!/N^k = log N! - log (N-k)! - k log N, for k <= N
    return gammaln(N + 1) - gammaln(N - k + 1) - k * math.log(N)


def linear_bell_success_factor(N: int) -> float:
    """Two of four Bell states are accessible with linear optics: 2^-N overall."""
    return 0.5 ** _check_n(N)


def _bell_factor(bell_model, N):
    bell_model = BellModel(bell_model)
    return 1.0 if bell_model is BellModel.DETERMINISTIC else linear_bell_success_factor(N)


def teleport_pure(
    state: FockVector, N: int, bell_model=BellModel.DETERMINISTIC
) -> TeleportReport:
    """Teleport a pure single-mode state through N qubit teleporters."""
    N = _check_n(N)
    if abs(state.norm2 - 1) > 1e-9:
        raise ValueError("input state must be normalized")
    c = state.amps
    f = filter_coeffs(N, state.cutoff)
    out = c * f
    p_det = float(np.sum(np.abs(out) ** 2))
    if p_det < 1e-300:
        raise ZeroOutput("input has no support at or below N photons")
    overlap = np.vdot(c, out)
    fid = float(min(1.0, abs(overlap) ** 2 / p_det))
    bell_model = BellModel(bell_model)
    return TeleportReport(
        output=FockVector(out / math.sqrt(p_det)),
        p_success=p_det * _bell_factor(bell_model, N),
        fidelity_vs_input=fid,
        n_resources=N,
        bell_model=bell_model,
        meta={"p_success_deterministic": p_det, "cutoff": state.cutoff},
    )


def coherent_success(alpha, N: int) -> float:
    """e^{-|a|^2} sum_{k<=N} C(N,k)^2 (|a|^2/N^2)^k k!, summed in log space."""
    N = _check_n(N)
    n = abs(alpha) ** 2
    if n == 0:
        return 1.0
    k = np.arange(N + 1)
    log_terms = (
        2 * (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1))
        + k * math.log(n / N**2)
        + gammaln(k + 1)
        - n
    )
    return float(np.sum(np.exp(log_terms)))


def coherent_output_amplitudes(alpha, N: int) -> np.ndarray:
    """Unnormalized-by-success amplitudes e^{-|a|^2/2} C(N,k) (a/N)^k sqrt(k!),
    k = 0..N, i.e. the teleported coherent state times sqrt(P_suc)."""
    N = _check_n(N)
    k = np.arange(N + 1)
    n = abs(alpha) ** 2
    if n == 0:
        out = np.zeros(N + 1, dtype=complex)
        out[0] = 1.0
        return out
    logmag = (
        -n / 2
        + gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)
        + k * math.log(abs(alpha) / N)
        + 0.5 * gammaln(k + 1)
    )
    return np.exp(logmag) * np.exp(1j * k * np.angle(alpha))


# -- EPR (two-mode squeezed) inputs -----------------------------------------


def teleport_epr(
    chi: float,
    N: int,
    bell_model=BellModel.DETERMINISTIC,
    cutoff: int | None = None,
) -> TeleportReport:
    """Teleport one arm of the two-mode squeezed vacuum with parameter chi."""
    N = _check_n(N)
    source = epr(chi, cutoff)
    c = source.coeffs
    out = c * filter_coeffs(N, source.cutoff)
    p_det = float(np.sum(np.abs(out) ** 2))
    output = TwoModeDiagonal(out / math.sqrt(p_det))
    bell_model = BellModel(bell_model)
    return TeleportReport(
        output=output,
        p_success=p_det * _bell_factor(bell_model, N),
        fidelity_vs_input=two_mode_fidelity(source, output),
        n_resources=N,
        bell_model=bell_model,
        meta={"p_success_deterministic": p_det, "cutoff": source.cutoff, "chi": chi},
    )


def _epr_series(chi, N):
    # k = 0..N; f_k vanishes beyond N so these sums are exact
    k = np.arange(N + 1)
    logf = _log_filter(N, k)
    with np.errstate(divide="ignore"):
        logchi = math.log(chi) if chi > 0 else -np.inf
    chi2k = np.exp(2 * k * logchi) if chi > 0 else (k == 0).astype(float)
    return k, np.exp(logf), chi2k


def epr_success(chi: float, N: int) -> float:
    """(1 - chi^2) sum_k chi^{2k} C(N,k)^2 k!^2 / N^{2k}."""
    N = _check_n(N)
    _, f, chi2k = _epr_series(chi, N)
    return float((1 - chi**2) * np.sum(chi2k * f**2))


def epr_fidelity_closed(chi: float, N: int) -> float:
    """((1 - chi^2)/sqrt(P_suc) sum_k chi^{2k} C(N,k) k!/N^k)^2."""
    N = _check_n(N)
    if not 0 <= chi < 1:
        raise ValueError("chi must lie in [0, 1)")
    _, f, chi2k = _epr_series(chi, N)
    p = epr_success(chi, N)
    return float(((1 - chi**2) * np.sum(chi2k * f)) ** 2 / p)


def vt_teleported(chi: float, N: int, cutoff: int | None = None) -> float:
    """Two-mode squeezing variance of the normalized teleported EPR state.

    Taken as the smaller of the two combination variances, since the
    positive-coefficient state squeezes x_A - x_B (and p_A + p_B).
    """
    return two_mode_squeezing_variance(teleport_epr(chi, N, cutoff=cutoff).output)


def _vt_sum(chi, N, cross_sign):
    k, f, chi2k = _epr_series(chi, N)
    diag = np.sum(chi2k * f**2 * (1 + 2 * k))
    # f_{k+1} f_k = C(N,k+1) C(N,k) (k+1)! k! / N^{2k+1}
    cross = np.sum(chi * chi2k[:-1] * f[1:] * f[:-1] * (1 + k[:-1]))
    return diag + 2 * cross_sign * cross


def vt_series(chi: float, N: int) -> float:
    """Series form of the teleported squeezing variance with prefactor
    (1 - chi^2)/P_suc and the squeezed-sign (negative) cross term."""
    N = _check_n(N)
    return float((1 - chi**2) / epr_success(chi, N) * _vt_sum(chi, N, -1))


def vt_series_raw(chi: float, N: int) -> float:
    """Same series with a 1/(1 - chi^2) prefactor and a positive cross term.

    Kept for comparison only: it does not tend to (1-chi)/(1+chi) as N grows.
    """
    N = _check_n(N)
    return float(_vt_sum(chi, N, +1) / (1 - chi**2))


# -- Monte Carlo ensemble check --------------------------------------------


@dataclass(frozen=True)
class EnsembleEstimate:
    chi: float
    n_resources: int
    n_samples: int
    seed: int
    unweighted: float
    unweighted_se: float
    weighted: float
    weighted_se: float
    closed_form: float
    matching: tuple

    def as_dict(self) -> dict:
        return {
            "chi": self.chi,
            "n_resources": self.n_resources,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "unweighted": self.unweighted,
            "unweighted_se": self.unweighted_se,
            "weighted": self.weighted,
            "weighted_se": self.weighted_se,
            "closed_form": self.closed_form,
            "matching": list(self.matching),
        }


def coherent_amplitude_terms(n_mean: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """For coherent inputs with mean photon numbers ``n_mean`` return
    (sqrt(P F), P): the amplitude overlap <b|T|b> = sum_k p_k f_k and the
    deterministic success probability sum_k p_k f_k^2, p_k Poisson(|b|^2).

    Exact: f_k = 0 above N, so only k <= N enters.
    """
    N = _check_n(N)
    n_mean = np.asarray(n_mean, dtype=float)
    kmax = min(N, default_coherent_cutoff(math.sqrt(float(n_mean.max(initial=0.0)))))
    k = np.arange(kmax + 1)
    f = filter_coeffs(N, kmax)
    with np.errstate(divide="ignore", invalid="ignore"):
        logn = np.log(n_mean)[:, None]
        log_p = np.where(k[None, :] == 0, 0.0, k[None, :] * logn)
    p = np.exp(log_p - gammaln(k + 1)[None, :] - n_mean[:, None])
    return p @ f, p @ f**2


def ensemble_sqrtF_average(
    chi: float, N: int, n_samples: int = 100_000, seed: int = 1234
) -> EnsembleEstimate:
    """Monte Carlo test of F_EPR against averages of amplitude fidelities.

    Coherent amplitudes are drawn from the thermal P-function with mean
    photon number chi^2/(1-chi^2). Two estimators are formed:

      unweighted:  (E[sqrt F])^2
      weighted:    (E[sqrt(P) sqrt(F)])^2 / E[P]

    with delta-method standard errors. ``matching`` lists the estimators
    within three standard errors of the closed form.
    """
    N = _check_n(N)
    if not 0 <= chi < 1:
        raise ValueError("chi must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    n_bar = chi**2 / (1 - chi**2)
    beta = math.sqrt(n_bar / 2) * (rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples))
    amp, p = coherent_amplitude_terms(np.abs(beta) ** 2, N)
    sqrt_f = amp / np.sqrt(p)

    m = sqrt_f.mean()
    unweighted = m**2
    unweighted_se = 2 * abs(m) * sqrt_f.std(ddof=1) / math.sqrt(n_samples)

    ma, mp = amp.mean(), p.mean()
    weighted = ma**2 / mp
    grad = np.array([2 * ma / mp, -(ma**2) / mp**2])
    cov = np.cov(np.vstack([amp, p]))
    weighted_se = math.sqrt(max(0.0, grad @ cov @ grad) / n_samples)

    closed = epr_fidelity_closed(chi, N)
    matching = tuple(
        name
        for name, est, se in (
            ("unweighted", unweighted, unweighted_se),
            ("weighted", weighted, weighted_se),
        )
        if abs(est - closed) <= 3 * se or abs(est - closed) < 1e-12
    )
    return EnsembleEstimate(
        chi=chi,
        n_resources=N,
        n_samples=n_samples,
        seed=seed,
        unweighted=float(unweighted),
        unweighted_se=float(unweighted_se),
        weighted=float(weighted),
        weighted_se=float(weighted_se),
        closed_form=closed,
        matching=matching,
    )


# -- standard Gaussian teleportation baselines ------------------------------


def baseline_cv_fidelity(V: float) -> float:
    """Unity-gain coherent-state teleportation fidelity 1/(1+V)."""
    if V <= 0:
        raise ValueError("V must be > 0")
    return 1 / (1 + V)


def baseline_swap_variance(v_in: float, v_resource: float) -> float:
    """Unity-gain Gaussian swap model: the combo picks up 2 v_resource of noise."""
    if v_in <= 0 or v_resource < 0:
        raise ValueError("variances must be positive")
    return v_in + 2 * v_resource


def db_to_variance(db: float) -> float:
    """Squeezing in dB to a variance relative to vacuum (10 dB -> 0.1)."""
    return 10 ** (-db / 10)
