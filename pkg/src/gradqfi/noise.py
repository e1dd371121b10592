"""Collective phase noise: analytic decay, channel, twirl, and Monte Carlo.

The chain sees a fluctuating global field that couples through J_z with
stationary Gaussian statistics and exponentially decaying correlation
<dE(t) dE(0)> = delta_e^2 exp(-t/tau_c) (an Ornstein-Uhlenbeck process).
The accumulated random phase delta_phi = gamma' * integral dE dt is then
Gaussian with variance gamma'^2 C(t), so averaging over realizations
multiplies each density-matrix element rho_IJ by a coherence factor that
depends only on the excitation difference |k(I) - k(J)|.

Monte Carlo here is an oracle for the analytic channel: trajectories use
the exact joint Gaussian one-step update of (dE, integral dE), so there
is no discretization bias and convergence tests isolate sampling error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ChainConfig,
    PhysParams,
    SparseState,
    SpectralState,
    State,
    _lambda_of,
    evolve,
    spectral_from_support_matrix,
)
from .errors import (
    LengthMismatch,
    NegativeTime,
    OutOfRange,
    SupportTooLarge,
    ZeroTrajectories,
)

# Dense intermediates (channel matrix over the sparse support) cap.
SUPPORT_CAP = 1 << 12

# Monte Carlo trajectories are processed in fixed-size chunks; the chunk
# size is part of the determinism contract (per-chunk partial sums are
# combined in fixed order), so never derive it from worker counts.
MC_CHUNK = 8192

SCHEMES = ("exact-integrated-ou",)


@dataclass(frozen=True)
class NoiseModel:
    """Noise coupling gamma', fluctuation strength delta_e, correlation time tau_c."""

    gamma_prime: float
    delta_e: float
    tau_c: float

    def __post_init__(self):
        for name in ("gamma_prime", "delta_e", "tau_c"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise OutOfRange(f"{name} must be finite, got {value!r}")
        if self.gamma_prime < 0:
            raise OutOfRange(f"gamma_prime must be >= 0, got {self.gamma_prime!r}")
        if self.delta_e < 0:
            raise OutOfRange(f"delta_e must be >= 0, got {self.delta_e!r}")
        if self.tau_c <= 0:
            raise OutOfRange(f"tau_c must be > 0, got {self.tau_c!r}")

    @classmethod
    def from_params(cls, params: PhysParams) -> "NoiseModel":
        return cls(params.gamma_prime, params.delta_e, params.tau_c)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Monte Carlo ensemble settings.

    dt = None uses the default step min(tau_c/100, t/100).  Streams are
    counter-based: trajectory i's draws depend only on (seed, i), so
    results are independent of chunking and execution order.
    """

    n_traj: int
    seed: int = 0
    dt: float | None = None
    scheme: str = "exact-integrated-ou"

    def __post_init__(self):
        if self.n_traj < 1:
            raise ZeroTrajectories(f"n_traj must be >= 1, got {self.n_traj!r}")
        if not 0 <= self.seed < (1 << 64):
            raise OutOfRange(f"seed must fit in 64 bits, got {self.seed!r}")
        if self.dt is not None and not (self.dt > 0 and math.isfinite(self.dt)):
            raise OutOfRange(f"dt must be > 0, got {self.dt!r}")
        if self.scheme not in SCHEMES:
            raise OutOfRange(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


# ----------------------------------------------------------------------
# analytic decay
# ----------------------------------------------------------------------


def correlation_integral(model: NoiseModel, t: float) -> float:
    """Variance of integral dE dtau over [0, t]:

    C(t) = 2 (delta_e tau_c)^2 (e^{-t/tau_c} + t/tau_c - 1).

    Accepts t = inf (C diverges linearly, so the limit is inf).
    """
    if t < 0 or math.isnan(t):
        raise NegativeTime(f"t must be >= 0, got {t!r}")
    if model.delta_e == 0.0 or t == 0.0:
        return 0.0
    s = t / model.tau_c
    scale = model.delta_e * model.tau_c
    return 2.0 * scale * scale * (math.expm1(-s) + s)


def coherence_factor(model: NoiseModel, t: float, weight: int | float) -> float:
    """Decay of a coherence whose J_z eigenvalues differ by `weight`:

    exp[-(1/2) (gamma' * weight)^2 C(t)].

    weight is N for the GHZ coherence, |N - 2m| for the flipped-block
    states, and |k(I) - k(J)| in general; weight 0 (a decoherence-free
    coherence) gives exactly 1 for every t.
    """
    if t < 0 or math.isnan(t):
        raise NegativeTime(f"t must be >= 0, got {t!r}")
    w = model.gamma_prime * float(weight)
    if w == 0.0:
        return 1.0
    c = correlation_integral(model, t)
    if c == 0.0:
        return 1.0
    return math.exp(-0.5 * w * w * c)


# ----------------------------------------------------------------------
# averaged channel and steady-state twirl
# ----------------------------------------------------------------------


def apply_channel(state: SparseState, model: NoiseModel, t: float) -> SpectralState:
    """Average over noise realizations at time t (no gradient encoding).

    Multiplies rho_IJ by coherence_factor(|k_I - k_J|) and returns the
    eigendecomposition.  t = inf gives the steady state (all cross-sector
    coherences gone).
    """
    if not isinstance(state, SparseState):
        raise OutOfRange("apply_channel takes a pure SparseState input")
    if t < 0 or math.isnan(t):
        raise NegativeTime(f"t must be >= 0, got {t!r}")
    support = [bits for bits, _ in state.terms]
    size = len(support)
    if size > SUPPORT_CAP:
        raise SupportTooLarge(
            f"channel support {size} exceeds the dense cap {SUPPORT_CAP}"
        )
    psi = np.array([amp for _, amp in state.terms], dtype=np.complex128)
    k = np.array([bits.count("1") for bits in support], dtype=np.int64)
    n = state.n_qubits
    factors = np.array([coherence_factor(model, t, dk) for dk in range(n + 1)])
    rho = np.outer(psi, psi.conj()) * factors[np.abs(k[:, None] - k[None, :])]
    return spectral_from_support_matrix(rho, support, n)


def steady_twirl(state: State) -> SpectralState:
    """Project onto the excitation sectors (the t -> infinity dephasing limit).

    Removes every coherence between different J_z sectors; the output
    commutes with J_z exactly (each eigenvector lives in one sector).
    Idempotent: twirling a twirled state returns it unchanged.
    """
    n = state.n_qubits
    if isinstance(state, SparseState):
        pairs_in: tuple[tuple[float, SparseState], ...] = ((1.0, state),)
    else:
        pairs_in = state.eigenpairs

    # sector -> list of (outer weight, bits -> amplitude component)
    sectors: dict[int, list[tuple[float, dict[str, complex]]]] = {}
    for weight, vec in pairs_in:
        split: dict[int, dict[str, complex]] = {}
        for bits, amp in vec.terms:
            split.setdefault(bits.count("1"), {})[bits] = amp
        for k, comp in split.items():
            sectors.setdefault(k, []).append((weight, comp))

    out: list[tuple[float, SparseState]] = []
    for k in sorted(sectors):
        comps = sectors[k]
        if len(comps) == 1:
            weight, comp = comps[0]
            mass = weight * sum(abs(a) ** 2 for a in comp.values())
            if mass <= 0.0:
                continue
            scale = 1.0 / math.sqrt(sum(abs(a) ** 2 for a in comp.values()))
            terms = tuple((bits, a * scale) for bits, a in comp.items())
            out.append((mass, SparseState(n, terms)))
            continue
        support = sorted({bits for _, comp in comps for bits in comp})
        if len(support) > SUPPORT_CAP:
            raise SupportTooLarge(
                f"sector support {len(support)} exceeds the dense cap {SUPPORT_CAP}"
            )
        index = {bits: i for i, bits in enumerate(support)}
        block = np.zeros((len(support), len(support)), dtype=np.complex128)
        for weight, comp in comps:
            col = np.zeros(len(support), dtype=np.complex128)
            for bits, amp in comp.items():
                col[index[bits]] = amp
            block += weight * np.outer(col, col.conj())
        w, vecs = np.linalg.eigh(block)
        for i in range(len(w) - 1, -1, -1):
            if w[i] <= 1e-14:
                break
            col = vecs[:, i]
            mask = np.abs(col) > 1e-14
            norm = math.sqrt(float(np.vdot(col[mask], col[mask]).real))
            terms = tuple(
                (support[j], complex(col[j] / norm)) for j in np.flatnonzero(mask)
            )
            out.append((float(w[i]), SparseState(n, terms)))

    total = sum(w for w, _ in out)
    return SpectralState(n, tuple((w / total, vec) for w, vec in out))


# ----------------------------------------------------------------------
# Monte Carlo trajectory oracle
# ----------------------------------------------------------------------


def _box_muller(u: np.ndarray) -> np.ndarray:
    """Standard normals from uniform [0,1) pairs, column-paired."""
    z = np.empty_like(u)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0::2]))
    angle = (2.0 * math.pi) * u[:, 1::2]
    z[:, 0::2] = radius * np.cos(angle)
    z[:, 1::2] = radius * np.sin(angle)
    return z


def _char_function(
    seed: int, n_traj: int, n_steps: int, h: float, model: NoiseModel,
    gamma_prime: float, n_qubits: int,
) -> np.ndarray:
    """E[exp(-i delta_phi * dk)] for dk = 0..n_qubits, over n_traj trajectories.

    delta_phi = gamma' * Y with Y = integral of the OU process; per step
    of size h the pair (X, Y-increment) is jointly Gaussian with the
    exact conditional moments, so the scheme has no discretization bias.
    Trajectory i consumes a fixed block of draws at a fixed counter
    offset, making the result independent of chunking.
    """
    tau = model.tau_c
    sig2 = model.delta_e * model.delta_e
    s = h / tau
    em1 = math.expm1(-s)          # e^{-s} - 1  (negative)
    em2 = math.expm1(-2.0 * s)
    phi = 1.0 + em1
    var_x = -sig2 * em2
    cov_xy = sig2 * tau * em1 * em1
    var_y = sig2 * tau * tau * (2.0 * s + 4.0 * em1 - em2)
    a = math.sqrt(var_x)
    b = cov_xy / a if a > 0.0 else 0.0
    c = math.sqrt(max(var_y - b * b, 0.0))
    drift = -tau * em1            # tau (1 - phi)

    draws = 2 + 2 * n_steps
    blk = draws + (-draws) % 4    # Philox counters advance 4 outputs at a time
    counters_per_row = blk // 4

    acc = np.zeros(n_qubits + 1, dtype=np.complex128)
    for lo in range(0, n_traj, MC_CHUNK):
        hi = min(lo + MC_CHUNK, n_traj)
        bitgen = np.random.Philox(key=seed)
        bitgen.advance(lo * counters_per_row)
        u = np.random.Generator(bitgen).random((hi - lo, blk), dtype=np.float64)
        z = _box_muller(u)
        x = model.delta_e * z[:, 0]          # stationary initial sample
        y = np.zeros(hi - lo, dtype=np.float64)
        for j in range(n_steps):
            zx = z[:, 2 + 2 * j]
            zy = z[:, 3 + 2 * j]
            y += drift * x + b * zx + c * zy
            x = phi * x + a * zx
        base = np.exp(-1j * (gamma_prime * y))
        cur = np.ones(hi - lo, dtype=np.complex128)
        for dk in range(n_qubits + 1):
            acc[dk] += cur.sum()
            if dk < n_qubits:
                cur *= base
    return acc / n_traj


def mc_coherence_magnitude(
    model: NoiseModel, t: float, weight: int, ens: TrajectoryEnsemble
) -> float:
    """Monte Carlo estimate of the coherence factor magnitude at a J_z weight.

    Draws the same trajectory stream as mc_trajectory_average (identical
    seed, step count, and block layout) and returns |E[exp(-i gamma'
    weight * Y)]|, converging to coherence_factor(model, t, weight) at
    ~ 1/sqrt(n_traj).  The estimator is elementwise numpy throughout (no
    BLAS), so its digits are stable across thread counts.
    """
    if not (math.isfinite(t) and t >= 0):
        raise NegativeTime(f"t must be finite and >= 0, got {t!r}")
    if weight < 0:
        raise OutOfRange(f"weight must be >= 0, got {weight!r}")
    if t == 0.0 or weight == 0 or model.delta_e == 0.0 or model.gamma_prime == 0.0:
        return 1.0
    dt = ens.dt if ens.dt is not None else min(model.tau_c / 100.0, t / 100.0)
    n_steps = max(1, math.ceil(t / dt))
    char = _char_function(
        ens.seed, ens.n_traj, n_steps, t / n_steps, model, model.gamma_prime, weight
    )
    return float(abs(char[weight]))


def mc_trajectory_average(
    state: SparseState,
    config: ChainConfig,
    params: PhysParams,
    ens: TrajectoryEnsemble,
) -> SpectralState:
    """Noise-averaged, gradient-encoded state from stochastic trajectories.

    Samples the integrated noise phase per trajectory, applies
    exp(-i delta_phi J_z) together with the deterministic evolution,
    averages the projectors, and re-diagonalizes.  Deterministic for a
    fixed ensemble seed regardless of chunk scheduling; converges to
    evolve + apply_channel at rate ~ 1/sqrt(n_traj).
    """
    if not isinstance(state, SparseState):
        raise OutOfRange("mc_trajectory_average takes a pure SparseState input")
    n = state.n_qubits
    if n != config.n:
        raise LengthMismatch(f"state has {n} qubits but chain has {config.n}")
    support = [bits for bits, _ in state.terms]
    if len(support) > SUPPORT_CAP:
        raise SupportTooLarge(
            f"trajectory support {len(support)} exceeds the dense cap {SUPPORT_CAP}"
        )
    model = NoiseModel.from_params(params)
    t = params.t

    if t == 0.0 or model.delta_e == 0.0 or model.gamma_prime == 0.0:
        # noise-free: the average is the evolved pure state itself
        return SpectralState(n, ((1.0, evolve(state, config, params)),))

    dt = ens.dt if ens.dt is not None else min(model.tau_c / 100.0, t / 100.0)
    n_steps = max(1, math.ceil(t / dt))
    char = _char_function(
        ens.seed, ens.n_traj, n_steps, t / n_steps, model, params.gamma_prime, n
    )

    psi = np.array([amp for _, amp in state.terms], dtype=np.complex128)
    k = np.array([bits.count("1") for bits in support], dtype=np.int64)
    dk = k[None, :] - k[:, None]  # element (I, J) decays with k_J - k_I
    factors = np.where(dk >= 0, char[np.abs(dk)], np.conj(char[np.abs(dk)]))
    rho = np.outer(psi, psi.conj()) * factors

    gbt = params.gamma * params.b0 * params.t
    ggt = params.gamma * params.grad * params.t
    phases = np.array(
        [gbt * (0.5 * n - bits.count("1")) + ggt * _lambda_of(bits, config.f_values)
         for bits in support]
    )
    u = np.exp(-1j * phases)
    rho = (u[:, None] * u.conj()[None, :]) * rho
    rho = 0.5 * (rho + rho.conj().T)
    return spectral_from_support_matrix(rho, support, n)
