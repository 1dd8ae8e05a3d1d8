"""Single-excitation model of two atoms coupled to a leaky cavity mode.

The system carries at most one excitation, shared between a cavity mode and
two two-level atoms (a and b).  The working basis, in this fixed order, is

    |100>   photon in the cavity mode,
    |010>   atom a excited,
    |001>   atom b excited,

with the common ground state |000> tracked separately as a scalar weight.
All rates (couplings g_a, g_b, cavity amplitude decay kappa, atomic amplitude
decay gamma) share one inverse-time unit; intensities decay at twice the
amplitude rates.

Between detection events the unnormalized state evolves as exp(-M t) with the
real, non-normal generator

    M = [[kappa,  g_a,   g_b ],
         [-g_a,   gamma, 0   ],
         [-g_b,   0,     gamma]].

Its spectrum is known in closed form: lambda_0 = gamma belongs to the dark
state (g_a|001> - g_b|010>)/sqrt(g_a^2+g_b^2), which never populates the
cavity and is immune to cavity loss; the two remaining eigenvalues are
(kappa + gamma +/- i S)/2 with S = sqrt(4(g_a^2+g_b^2) - (kappa-gamma)^2).
S is real in the oscillatory regime and purely imaginary when the cavity is
overdamped; it is carried as a complex number throughout so both regimes run
through the same code path.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import DegenerateCouplingError

# Basis indices, in the order documented above.
CAVITY_MODE = 0
ATOM_A = 1
ATOM_B = 2

BASIS_LABELS = ("100", "010", "001")

# Minimum pairwise eigenvalue gap, relative to the total rate scale, below
# which the spectral propagator is considered ill-conditioned.
NEAR_DEGENERATE_GAP = 1e-8


@dataclasses.dataclass(frozen=True)
class Parameters:
    """Physical rates of the two-atom/cavity system.

    Attributes
    ----------
    g_a, g_b : float
        Vacuum Rabi couplings of atoms a and b to the cavity mode (>= 0).
    kappa : float
        Cavity field (amplitude) decay rate (> 0).
    gamma : float
        Atomic spontaneous-emission amplitude decay rate (>= 0).
    eta : float
        Detector efficiency for photons leaving through the cavity mirrors,
        in [0, 1].
    """

    g_a: float
    g_b: float
    kappa: float
    gamma: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        for name in ("g_a", "g_b", "kappa", "gamma", "eta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.g_a < 0 or self.g_b < 0:
            raise ValueError("couplings g_a, g_b must be nonnegative")
        if self.kappa <= 0:
            raise ValueError("cavity decay rate kappa must be positive")
        if self.gamma < 0:
            raise ValueError("spontaneous decay rate gamma must be nonnegative")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("detector efficiency eta must lie in [0, 1]")

    @property
    def coupling_squared(self) -> float:
        """g_a^2 + g_b^2, the squared collective coupling."""
        return self.g_a**2 + self.g_b**2

    @property
    def rate_scale(self) -> float:
        """kappa + gamma + g_a + g_b, the scale used for degeneracy checks."""
        return self.kappa + self.gamma + self.g_a + self.g_b


def _require_coupling(params: Parameters) -> None:
    if params.coupling_squared == 0.0:
        raise DegenerateCouplingError(
            "g_a = g_b = 0: no dark state exists for vanishing coupling"
        )


@dataclasses.dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state in the single-excitation sector plus a ground-state weight.

    ``amplitudes`` holds the complex coefficients on (|100>, |010>, |001>);
    ``ground_weight`` is the accumulated population of |000> when the object
    represents a trajectory state after emission bookkeeping.  The total
    weight never exceeds one.
    """

    amplitudes: np.ndarray
    ground_weight: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (3,):
            raise ValueError("amplitudes must have exactly three components")
        weight = float(self.ground_weight)
        if weight < 0.0:
            raise ValueError("ground_weight must be nonnegative")
        total = float(np.sum(np.abs(amps) ** 2)) + weight
        if total > 1.0 + 1e-12:
            raise ValueError(f"total weight {total} exceeds one")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "ground_weight", weight)

    @property
    def norm_squared(self) -> float:
        """Squared norm of the excited-sector amplitudes."""
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def normalized(self) -> "StateVector":
        """Unit-norm copy of the excited sector (ground weight discarded)."""
        norm = math.sqrt(self.norm_squared)
        if norm == 0.0:
            raise ValueError("cannot normalize a zero state")
        return StateVector(self.amplitudes / norm)


def initial_state() -> StateVector:
    """Preparation used throughout: the excitation starts on atom a, |010>."""
    return StateVector(np.array([0.0, 1.0, 0.0]))


def _phase_fixed(vec: np.ndarray) -> np.ndarray:
    """Fix the global phase so the largest-magnitude component is real > 0."""
    pivot = int(np.argmax(np.abs(vec)))
    phase = vec[pivot] / abs(vec[pivot])
    out = vec / phase
    # The pivot is exactly real by construction; drop the rounding residue.
    out[pivot] = out[pivot].real
    return out


def interaction_hamiltonian(params: Parameters) -> np.ndarray:
    """Real generator of the lossless coupled dynamics.

    Returns the 3x3 real matrix G such that the interaction Hamiltonian is
    H = -i*hbar*G in the working basis; the lossless Schroedinger evolution
    is then psi' = -G psi.  With zero couplings this is the zero matrix.
    """
    g_a, g_b = params.g_a, params.g_b
    return np.array(
        [
            [0.0, g_a, g_b],
            [-g_a, 0.0, 0.0],
            [-g_b, 0.0, 0.0],
        ]
    )


@dataclasses.dataclass(frozen=True, eq=False)
class LosslessEigensystem:
    """Spectrum of the lossless interaction.

    ``frequencies`` are the eigenfrequencies (0, +Omega, -Omega) with
    Omega = sqrt(g_a^2 + g_b^2); column i of ``states`` is the eigenvector
    for frequency i, the dark state first.
    """

    frequencies: np.ndarray
    states: np.ndarray
    dark_state: StateVector


def lossless_eigensystem(params: Parameters) -> LosslessEigensystem:
    """Eigenfrequencies and eigenstates of the lossless interaction.

    The dark state (g_a|001> - g_b|010>)/Omega has no cavity component and
    eigenfrequency zero; the two bright states split by +/- Omega and mix the
    cavity mode with the coupled atomic combination at relative phase i.
    Global phases follow the largest-component-real-positive convention.
    """
    _require_coupling(params)
    g_a, g_b = params.g_a, params.g_b
    omega = math.sqrt(params.coupling_squared)

    dark = _phase_fixed(np.array([0.0, -g_b, g_a], dtype=complex) / omega)
    bright = []
    for sign in (+1.0, -1.0):
        vec = np.array(
            [1.0, sign * 1j * g_a / omega, sign * 1j * g_b / omega], dtype=complex
        ) / math.sqrt(2.0)
        bright.append(_phase_fixed(vec))

    frequencies = np.array([0.0, omega, -omega])
    states = np.column_stack([dark, bright[0], bright[1]])
    return LosslessEigensystem(
        frequencies=frequencies,
        states=states,
        dark_state=StateVector(dark),
    )


@dataclasses.dataclass(frozen=True, eq=False)
class ConditionalGenerator:
    """The no-detection generator M together with its closed-form spectrum.

    Attributes
    ----------
    params : Parameters
        Rates the generator was built from.
    matrix : ndarray
        The real 3x3 generator M (amplitudes evolve as exp(-M t)).
    eigenvalues : ndarray
        (gamma, (kappa+gamma+iS)/2, (kappa+gamma-iS)/2), dark value first.
    s_parameter : complex
        S = sqrt(4(g_a^2+g_b^2) - (kappa-gamma)^2); real in the oscillatory
        regime, purely imaginary when overdamped.
    dark_state : StateVector
        Eigenvector of the dark eigenvalue; independent of kappa and gamma.
    eigenvectors : ndarray
        Columns are unit eigenvectors matching ``eigenvalues``.
    reciprocal_basis : ndarray or None
        Rows r_i with r_i . v_j = delta_ij (plain, unconjugated pairing),
        i.e. the inverse of the eigenvector matrix; None when the spectrum
        is defective (S = 0) and no such basis exists.
    near_degenerate : bool
        True when the smallest pairwise eigenvalue gap falls below
        1e-8 * (kappa + gamma + g_a + g_b); signals propagators to avoid
        the spectral form.
    """

    params: Parameters
    matrix: np.ndarray
    eigenvalues: np.ndarray
    s_parameter: complex
    dark_state: StateVector
    eigenvectors: np.ndarray
    reciprocal_basis: np.ndarray | None
    near_degenerate: bool


def conditional_generator(params: Parameters) -> ConditionalGenerator:
    """Build M and its closed-form eigensystem for the given rates.

    The dark eigenvector equals the lossless one (it decouples from the
    cavity, so loss rates only shift its eigenvalue to gamma), while the two
    bright eigenvalues acquire the mean decay (kappa+gamma)/2 and split by
    +/- iS/2.
    """
    _require_coupling(params)
    g_a, g_b, kappa, gamma = params.g_a, params.g_b, params.kappa, params.gamma
    omega_sq = params.coupling_squared

    matrix = np.array(
        [
            [kappa, g_a, g_b],
            [-g_a, gamma, 0.0],
            [-g_b, 0.0, gamma],
        ]
    )

    s_parameter = complex(np.sqrt(complex(4.0 * omega_sq - (kappa - gamma) ** 2)))
    mean_decay = kappa + gamma
    eigenvalues = np.array(
        [
            gamma,
            (mean_decay + 1j * s_parameter) / 2.0,
            (mean_decay - 1j * s_parameter) / 2.0,
        ],
        dtype=complex,
    )

    gaps = [
        abs(eigenvalues[0] - eigenvalues[1]),
        abs(eigenvalues[0] - eigenvalues[2]),
        abs(eigenvalues[1] - eigenvalues[2]),
    ]
    near_degenerate = min(gaps) < NEAR_DEGENERATE_GAP * params.rate_scale

    dark = _phase_fixed(
        np.array([0.0, -g_b, g_a], dtype=complex) / math.sqrt(omega_sq)
    )
    columns = [dark]
    for ev in eigenvalues[1:]:
        vec = np.array([ev - gamma, -g_a, -g_b], dtype=complex)
        columns.append(_phase_fixed(vec / np.linalg.norm(vec)))
    eigenvectors = np.column_stack(columns)

    try:
        reciprocal = np.linalg.inv(eigenvectors)
    except np.linalg.LinAlgError:
        # Defective spectrum (S = 0): no reciprocal basis exists.
        reciprocal = None

    return ConditionalGenerator(
        params=params,
        matrix=matrix,
        eigenvalues=eigenvalues,
        s_parameter=s_parameter,
        dark_state=StateVector(dark),
        eigenvectors=eigenvectors,
        reciprocal_basis=reciprocal,
        near_degenerate=near_degenerate,
    )
