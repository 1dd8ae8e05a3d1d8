"""Exact no-detection propagation and the emission probability budget.

The conditional propagator U(t) = exp(-M t) is evaluated spectrally through
the three-term Lagrange interpolation on the closed-form eigenvalues,

    exp(-M t) = sum_i exp(-lambda_i t) * prod_{j != i} (M - lambda_j) / (lambda_i - lambda_j),

and falls back to a scaling-and-squaring Taylor series when the spectrum is
(near-)degenerate.  On top of it sit the closed forms for the conditional
state grown from |010>, the no-emission probability P0(t), the first-emission
waiting density, and the cavity/spontaneous emission budget.

All time-dependent quantities accept scalar or array times.  Intermediate
arithmetic is complex (the spectral split S may be imaginary in the
overdamped regime); physical outputs are asserted real to 1e-12 and returned
as real floats, and probabilities are clipped to [0, 1] after asserting any
violation is below 1e-10.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import NegativeTimeError
from .model import (
    ConditionalGenerator,
    Parameters,
    StateVector,
    _require_coupling,
    conditional_generator,
    initial_state,
)

# Crossover |S*t| below which sin(S t)/S style factors switch to their series
# to avoid 0/0 at a degenerate split.
_SMALL_PHASE = 1e-4

_IMAG_TOL = 1e-12
_PROB_TOL = 1e-10


def _check_times(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0):
        raise NegativeTimeError("conditional evolution requires t >= 0")
    return arr


def _real_checked(values: np.ndarray) -> np.ndarray:
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    assert residue < _IMAG_TOL, f"imaginary residue {residue} exceeds {_IMAG_TOL}"
    return values.real


def _clipped_probability(p: np.ndarray):
    arr = np.asarray(p, dtype=float)
    if arr.size:
        worst = float(max(np.max(-arr), np.max(arr - 1.0), 0.0))
        assert worst < _PROB_TOL, f"probability out of range by {worst}"
    out = np.clip(arr, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _expm_series(matrix: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """exp(matrix) for a small real matrix via scaling-and-squaring Taylor."""
    norm = np.linalg.norm(matrix, 1)
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
    scaled = matrix / (2.0**squarings)
    dim = matrix.shape[0]
    result = np.eye(dim)
    term = np.eye(dim)
    for k in range(1, 60):
        term = term @ scaled / k
        result = result + term
        if np.linalg.norm(term, 1) <= tol * np.linalg.norm(result, 1):
            break
    for _ in range(squarings):
        result = result @ result
    return result


class Propagator:
    """Evaluates U(t) = exp(-M t) for a fixed conditional generator.

    ``method`` is "spectral" (Lagrange interpolation on the closed-form
    eigenvalues, the default) or "series" (scaling-and-squaring Taylor);
    near-degenerate generators select the series automatically.  Instances
    are immutable after construction and safe to share across threads.
    """

    def __init__(self, generator: ConditionalGenerator, method: str | None = None):
        if method is None:
            method = "series" if generator.near_degenerate else "spectral"
        if method not in ("spectral", "series"):
            raise ValueError(f"unknown propagator method {method!r}")
        self.generator = generator
        self.method = method
        self._covariants = None
        if method == "spectral":
            self._covariants = self._build_covariants()

    @classmethod
    def from_parameters(cls, params: Parameters, method: str | None = None) -> "Propagator":
        return cls(conditional_generator(params), method=method)

    def _build_covariants(self) -> np.ndarray:
        lam = self.generator.eigenvalues
        m = self.generator.matrix.astype(complex)
        eye = np.eye(3, dtype=complex)
        covariants = []
        for i in range(3):
            numerator = eye
            denominator = 1.0 + 0.0j
            for j in range(3):
                if j == i:
                    continue
                numerator = numerator @ (m - lam[j] * eye)
                denominator = denominator * (lam[i] - lam[j])
            covariants.append(numerator / denominator)
        return np.stack(covariants)

    def matrix(self, t) -> np.ndarray:
        """U(t) as a real array of shape t.shape + (3, 3)."""
        times = _check_times(t)
        if self.method == "spectral":
            weights = np.exp(-np.multiply.outer(times, self.generator.eigenvalues))
            u = np.einsum("...i,ijk->...jk", weights, self._covariants)
            return _real_checked(u)
        flat = np.atleast_1d(times)
        stacked = np.stack([_expm_series(-self.generator.matrix * tt) for tt in flat])
        return stacked.reshape(times.shape + (3, 3))

    def apply(self, state, t) -> np.ndarray:
        """Amplitudes of U(t) applied to ``state`` (StateVector or length-3)."""
        if isinstance(state, StateVector):
            psi = state.amplitudes
        else:
            psi = np.asarray(state, dtype=complex)
            if psi.shape != (3,):
                raise ValueError("state must have three amplitudes")
        return self.matrix(t) @ psi

    def survival(self, state, t):
        """Squared norm of the conditionally evolved state (not clipped)."""
        amps = self.apply(state, t)
        out = np.sum(np.abs(amps) ** 2, axis=-1)
        return float(out) if out.ndim == 0 else out


def _split_factors(params: Parameters, times: np.ndarray):
    """Shared spectral factors of the closed forms.

    Returns (e0, cos_factor, sin_factor) with
        e0         = exp(-gamma t)
        cos_factor = exp(-(kappa+gamma) t / 2) cos(S t / 2)
        sin_factor = exp(-(kappa+gamma) t / 2) sin(S t / 2) / S
    evaluated through the decaying eigen-exponentials so the overdamped
    regime (imaginary S, where cos/sin grow as cosh/sinh) never overflows.
    """
    mean_decay = params.kappa + params.gamma
    s = complex(np.sqrt(complex(4.0 * params.coupling_squared - (params.kappa - params.gamma) ** 2)))
    lam_plus = (mean_decay + 1j * s) / 2.0
    lam_minus = (mean_decay - 1j * s) / 2.0

    e_plus = np.exp(-lam_plus * times)
    e_minus = np.exp(-lam_minus * times)
    e0 = np.exp(-params.gamma * times)
    cos_factor = 0.5 * (e_plus + e_minus)

    phase = 0.5 * s * times
    small = np.abs(phase) < _SMALL_PHASE
    envelope = np.exp(-0.5 * mean_decay * times)
    series = envelope * 0.5 * times * (1.0 - phase**2 / 6.0 + phase**4 / 120.0)
    s_safe = s if s != 0.0 else 1.0
    direct = (e_minus - e_plus) / (2j * s_safe)
    sin_factor = np.where(small, series, direct)
    return e0, cos_factor, sin_factor


def conditional_state(params: Parameters, t) -> np.ndarray:
    """Closed-form unnormalized conditional state grown from |010>.

    Splits into the persistent dark component, decaying only at the
    spontaneous rate, plus the two bright components decaying at the mean
    rate (kappa+gamma)/2 while precessing with S/2:

        psi(t) = [ g_b e^{-gamma t} (0, g_b, -g_a)
                   + g_a e^{-(kappa+gamma)t/2} ( cos(St/2) (0, g_a, g_b)
                     + sin(St/2)/S (-2(g_a^2+g_b^2), g_a(kappa-gamma),
                                    g_b(kappa-gamma)) ) ] / (g_a^2+g_b^2)

    Returns real amplitudes of shape t.shape + (3,).
    """
    _require_coupling(params)
    times = _check_times(t)
    g_a, g_b = params.g_a, params.g_b
    omega_sq = params.coupling_squared
    detuning = params.kappa - params.gamma

    e0, cos_factor, sin_factor = _split_factors(params, times)

    dark_vec = np.array([0.0, g_b, -g_a])
    bright_cos = np.array([0.0, g_a, g_b])
    bright_sin = np.array([-2.0 * omega_sq, g_a * detuning, g_b * detuning])

    psi = (
        g_b * np.multiply.outer(e0, dark_vec)
        + g_a
        * (
            np.multiply.outer(cos_factor, bright_cos)
            + np.multiply.outer(sin_factor, bright_sin)
        )
    ) / omega_sq
    return _real_checked(psi)


def no_emission_probability(prop: Propagator, t):
    """P0(t): probability that no photon has been emitted by time t.

    Computed as the squared norm of the conditionally propagated initial
    state |010>.
    """
    return _clipped_probability(prop.survival(initial_state(), t))


def no_emission_probability_asymptotic(params: Parameters, t):
    """Late-time form of P0: the surviving dark weight (g_b^2/Omega^2) e^{-2 gamma t}.

    Valid once the bright components have rung down (t >> 1/(kappa+gamma)).
    """
    _require_coupling(params)
    times = _check_times(t)
    weight = params.g_b**2 / params.coupling_squared
    return _clipped_probability(weight * np.exp(-2.0 * params.gamma * times))


def first_emission_density(prop: Propagator, t) -> float:
    """Waiting-time density w1(t) for the first emission from |010>.

    Sum of the channel rates on the conditional state: 2 kappa |c_100|^2 for
    the cavity port plus 2 gamma (|c_010|^2 + |c_001|^2) for spontaneous
    emission; equals -dP0/dt.
    """
    params = prop.generator.params
    amps = prop.apply(initial_state(), float(t))
    weights = np.abs(amps) ** 2
    return float(
        2.0 * params.kappa * weights[..., 0]
        + 2.0 * params.gamma * (weights[..., 1] + weights[..., 2])
    )


def cavity_emission_saturation(params: Parameters) -> float:
    """Total probability that the excitation ever leaves through the mirrors.

    kappa g_a^2 / ((kappa+gamma)(g_a^2+g_b^2+kappa*gamma)); this is the
    t -> infinity limit of the cavity emission probability.
    """
    _require_coupling(params)
    g_sq = params.coupling_squared
    mean_decay = params.kappa + params.gamma
    return float(
        params.kappa * params.g_a**2 / (mean_decay * (g_sq + params.kappa * params.gamma))
    )


def cavity_emission_probability(params: Parameters, t):
    """P_cav(t): probability of a mirror emission by time t.

    Time integral of the cavity rate 2 kappa |c_100(t')|^2, in closed form.
    Writing a = kappa+gamma, the bracket multiplying the saturation value is

        1 - e^{-a t} [ 1 + a^2 (1-cos(S t))/S^2 + a sin(S t)/S ],

    evaluated through decaying eigen-exponentials (overflow-free when S is
    imaginary) with a series branch at small |S t|.
    """
    _require_coupling(params)
    times = _check_times(t)
    mean_decay = params.kappa + params.gamma
    s = complex(np.sqrt(complex(4.0 * params.coupling_squared - (params.kappa - params.gamma) ** 2)))
    lam_plus = (mean_decay + 1j * s) / 2.0
    lam_minus = (mean_decay - 1j * s) / 2.0

    phase = s * times
    small = np.abs(phase) < _SMALL_PHASE

    # Series route: sinc-style factors, safe only because |S t| is small.
    half = phase / 2.0
    sinc_half = 1.0 - half**2 / 6.0 + half**4 / 120.0
    sinc_full = 1.0 - phase**2 / 6.0 + phase**4 / 120.0
    decay = np.exp(-mean_decay * times)
    bracket_series = decay * (
        1.0
        + mean_decay**2 * times**2 * 0.5 * sinc_half**2
        + mean_decay * times * sinc_full
    )

    # Eigen-exponential route: every factor decays, so nothing overflows.
    s_safe = s if s != 0.0 else 1.0
    e_plus = np.exp(-lam_plus * times)
    e_minus = np.exp(-lam_minus * times)
    delta = e_minus - e_plus  # = 2i e^{-a t/2} sin(S t / 2)
    bracket_direct = (
        decay
        - mean_decay**2 * delta**2 / (2.0 * s_safe**2)
        + mean_decay * (e_minus**2 - e_plus**2) / (2j * s_safe)
    )

    bracket = np.where(small, bracket_series, bracket_direct)
    value = cavity_emission_saturation(params) * (1.0 - bracket)
    return _clipped_probability(_real_checked(value))


def spontaneous_emission_probability_asymptotic(params: Parameters, t):
    """Late-time spontaneous-emission budget: 1 - P0_asymptotic - P_cav(inf)."""
    times = _check_times(t)
    leftover = (
        1.0
        - no_emission_probability_asymptotic(params, times)
        - cavity_emission_saturation(params)
    )
    return _clipped_probability(leftover)


@dataclasses.dataclass(frozen=True)
class ProbabilityTriple:
    """Exclusive event budget: no emission yet, mirror decay, spontaneous decay.

    Fields are scalars or arrays matching the ``t`` passed in; the three
    probabilities sum to one at every time.
    """

    t: object
    p0: object
    p_cav: object
    p_spon: object


def emission_probabilities(params: Parameters, t) -> ProbabilityTriple:
    """The exhaustive probability split (P0, P_cav, P_spon) at time(s) t.

    P_spon is the complement 1 - P0 - P_cav, so the triple sums to one by
    construction.  Accepts a scalar or an array of times.
    """
    times = _check_times(t)
    amps = conditional_state(params, times)
    p0 = _clipped_probability(np.sum(amps**2, axis=-1))
    p_cav = cavity_emission_probability(params, times)
    p_spon = _clipped_probability(1.0 - p0 - p_cav)
    scalar = np.ndim(times) == 0
    return ProbabilityTriple(
        t=float(times) if scalar else times,
        p0=p0,
        p_cav=p_cav,
        p_spon=p_spon,
    )
