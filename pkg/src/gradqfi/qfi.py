"""Quantum Fisher information for gradient estimation.

All values carry the (gamma*t)^2 prefactor, i.e. they are Fisher
information per squared unit of the gradient G, so 1/value is directly
the Cramer-Rao variance bound on an unbiased single-shot estimate.

Two engines plus closed forms:

* qfi_general: the full spectral formula on a density matrix, exact for
  any mixed state but limited to small chains (dense 2^n work).
* qfi_pure: 4 * variance of the generator on a pure state, evaluated on
  the sparse support (works for any chain size the state fits).
* closed forms for the standard probe families (GHZ, product, optimal
  decoherence-free states, Dicke, dephased GHZ, steady-state product),
  each O(n) in the chain size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import noise as _noise
from .core import (
    ORACLE_CAP_QUBITS,
    ChainConfig,
    PhysParams,
    SparseState,
    SpectralState,
    State,
    _lambda_of,
    basis_eigenvalues,
    basis_excitations,
    make_named_state,
)
from .errors import DimensionTooLarge, LengthMismatch, OutOfRange

# Relative spectral-gap cutoff: eigenvalue pairs with combined weight at
# or below this fraction of the largest weight do not contribute.
EIGEN_GAP_EPS = 1e-12


@dataclass(frozen=True)
class FisherReport:
    """Fisher information value plus the path that produced it.

    value is in units of G^-2 (it includes the (gamma*t)^2 prefactor).
    path is "general", "pure-variance", or "closed-form:<name>".
    divergent marks a classical distribution with a vanishing-probability
    outcome that still carries derivative weight (value is +inf there).
    """

    value: float
    path: str
    divergent: bool = False

    def __post_init__(self):
        if not self.divergent and not (self.value >= 0.0):
            raise OutOfRange(f"Fisher information must be >= 0, got {self.value!r}")

    @property
    def crb_variance(self) -> float:
        """Single-shot Cramer-Rao bound 1/value (inf when value is 0)."""
        if self.value == 0.0:
            return math.inf
        if math.isinf(self.value):
            return 0.0
        return 1.0 / self.value


def _as_eigenpairs(state: State) -> tuple[tuple[float, SparseState], ...]:
    if isinstance(state, SparseState):
        return ((1.0, state),)
    return state.eigenpairs


def qfi_general(state: State, config: ChainConfig, params: PhysParams) -> FisherReport:
    """QFI of the gradient-encoded state via the spectral formula.

    Builds the dense density matrix, applies the exact evolution phases,
    diagonalizes, and sums 2|<a|d_G rho|b>|^2/(w_a+w_b) over eigenpairs
    whose combined weight exceeds EIGEN_GAP_EPS * max(w).  Exact for
    mixed states; needs n <= ORACLE_CAP_QUBITS.
    """
    n = state.n_qubits
    if n != config.n:
        raise LengthMismatch(f"state has {n} qubits but chain has {config.n}")
    if n > ORACLE_CAP_QUBITS:
        raise DimensionTooLarge(
            f"general QFI needs n <= {ORACLE_CAP_QUBITS}, got {n}"
        )
    dim = 1 << n
    lam = basis_eigenvalues(config)
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for weight, vec in _as_eigenpairs(state):
        dense = vec.dense_vector()
        rho += weight * np.outer(dense, dense.conj())

    gt = params.gamma * params.t
    # The offset-field phase cancels in rho_G (it only depends on the
    # excitation difference, which commutes with the generator), but we
    # apply the full phases anyway: QFI must come out B0-independent.
    phases = gt * (params.b0 * _jz_diagonal(n) + params.grad * lam)
    u = np.exp(-1j * phases)
    rho_g = (u[:, None] * u.conj()[None, :]) * rho

    # d_G rho_G: each element picks up -i*gamma*t*(lam_I - lam_J)
    deriv = (-1j * gt) * (lam[:, None] - lam[None, :]) * rho_g

    w, v = np.linalg.eigh(rho_g)
    m = v.conj().T @ deriv @ v
    pair_sum = w[:, None] + w[None, :]
    mask = pair_sum > EIGEN_GAP_EPS * float(w.max())
    value = 2.0 * float(np.sum((m.real[mask] ** 2 + m.imag[mask] ** 2) / pair_sum[mask]))
    return FisherReport(max(value, 0.0), "general")


def _jz_diagonal(n: int) -> np.ndarray:
    return 0.5 * n - basis_excitations(n)


def qfi_pure(state: SparseState, config: ChainConfig, params: PhysParams) -> FisherReport:
    """QFI of a pure state: (gamma t)^2 * 4 Var(H_G), over the sparse support."""
    if not isinstance(state, SparseState):
        raise OutOfRange("qfi_pure takes a pure SparseState; use qfi_general for mixtures")
    if state.n_qubits != config.n:
        raise LengthMismatch(f"state has {state.n_qubits} qubits but chain has {config.n}")
    f_values = config.f_values
    mean = 0.0
    mean_sq = 0.0
    for bits, amp in state.terms:
        p = abs(amp) ** 2
        lam = _lambda_of(bits, f_values)
        mean += p * lam
        mean_sq += p * lam * lam
    var = max(mean_sq - mean * mean, 0.0)
    gt = params.gamma * params.t
    return FisherReport(4.0 * gt * gt * var, "pure-variance")


# ----------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------


def _gt2(params: PhysParams) -> float:
    gt = params.gamma * params.t
    return gt * gt


def qfi_max_entangled(
    config: ChainConfig, params: PhysParams
) -> tuple[FisherReport, SparseState]:
    """Best known-offset QFI over all states, with the state achieving it.

    value = (gamma t)^2 (sum_i |f_i|)^2, achieved by the two-block
    superposition that flips the m qubits with f_i <= 0 (a qubit exactly
    at the reference point has f = 0 and contributes nothing, so which
    block it joins is value-irrelevant; we put it in the flipped block).
    """
    f_abs_sum = float(np.abs(config.f_array).sum())
    value = _gt2(params) * f_abs_sum * f_abs_sum
    m = int(np.count_nonzero(config.f_array <= 0.0))
    state = make_named_state("psi-m", config.n, m=m)
    return FisherReport(value, "closed-form:max-entangled"), state


def qfi_max_separable(config: ChainConfig, params: PhysParams) -> FisherReport:
    """Best known-offset QFI over product states: (gamma t)^2 sum_i f_i^2.

    The optimum is |+>^n up to local z-rotations; no state is returned
    because the sparse form grows as 2^n while the value does not need it.
    """
    value = _gt2(params) * float((config.f_array**2).sum())
    return FisherReport(value, "closed-form:max-separable")


def _dfs_pair_sum(config: ChainConfig, k: int) -> float:
    n = config.n
    ell = min(k, n - k)
    f = config.f_values
    return float(sum(f[i] - f[n - 1 - i] for i in range(ell)))


def qfi_dfs_subspace(
    config: ChainConfig, params: PhysParams, k: int
) -> tuple[FisherReport, SparseState]:
    """Best QFI within the k-excitation decoherence-free sector.

    value = (gamma t)^2 [sum_{i=1}^{l} (f_i - f_{N-i+1})]^2 with
    l = min(k, N-k), achieved by the two-branch state that puts the k
    excitations on the leading qubits in one branch and mirrored at the
    trailing end in the other.
    """
    n = config.n
    if not 0 <= k <= n:
        raise OutOfRange(f"k must be in [0, {n}], got {k!r}")
    pair_sum = _dfs_pair_sum(config, k)
    value = _gt2(params) * pair_sum * pair_sum
    state = make_named_state("odf", n, k=k)
    return FisherReport(value, "closed-form:dfs-subspace"), state


def qfi_dfs_max(
    config: ChainConfig, params: PhysParams
) -> tuple[FisherReport, SparseState]:
    """Best decoherence-free QFI over all sectors, reached at k = floor(N/2)."""
    report, state = qfi_dfs_subspace(config, params, config.n // 2)
    return FisherReport(report.value, "closed-form:dfs-max"), state


def qfi_noisy_ghz(config: ChainConfig, params: PhysParams) -> FisherReport:
    """QFI of the GHZ probe under collective dephasing at time params.t.

    value = d(t)^2 (gamma t)^2 (sum_i f_i)^2 with the coherence factor
    d(t) of the full N-qubit coherence.
    """
    model = _noise.NoiseModel.from_params(params)
    d = _noise.coherence_factor(model, params.t, config.n)
    f_sum = float(config.f_array.sum())
    value = d * d * _gt2(params) * f_sum * f_sum
    return FisherReport(value, "closed-form:noisy-ghz")


def qfi_noisy_psim(config: ChainConfig, params: PhysParams, m: int) -> FisherReport:
    """QFI of the flipped-block probe under collective dephasing.

    The two branches differ by N - 2m excitations, so the coherence
    decays with weight |N - 2m|:
    value = d_m(t)^2 (gamma t)^2 (sum_i |f_i|)^2.
    """
    n = config.n
    if not 0 <= m <= n:
        raise OutOfRange(f"m must be in [0, {n}], got {m!r}")
    model = _noise.NoiseModel.from_params(params)
    d_m = _noise.coherence_factor(model, params.t, abs(n - 2 * m))
    f_abs_sum = float(np.abs(config.f_array).sum())
    value = d_m * d_m * _gt2(params) * f_abs_sum * f_abs_sum
    return FisherReport(value, "closed-form:noisy-psim")


def qfi_product_steady(config: ChainConfig, params: PhysParams) -> FisherReport:
    """QFI of the dephasing steady state of the product probe |+>^n.

    The infinite-time twirl keeps only the excitation-sector-diagonal
    blocks; the surviving information is the profile variance:
    value = (gamma t)^2 sum_i (f_i - mean(f))^2, independent of x0 for
    the linear profile.
    """
    f = config.f_array
    centered = f - f.mean()
    value = _gt2(params) * float((centered**2).sum())
    return FisherReport(value, "closed-form:product-steady")


def qfi_dicke(config: ChainConfig, params: PhysParams, k: int) -> FisherReport:
    """QFI of the symmetric Dicke probe with k excitations.

    value = (gamma t)^2 [ sum f^2 - (sum f)^2 (2k-N)^2 / N^2
            + (sum_{i != j} f_i f_j) ((2k-N)^2 - N) / (N (N-1)) ].
    Dicke states live in a decoherence-free sector, so this is also
    their steady-state and noisy value.
    """
    n = config.n
    if not 0 <= k <= n:
        raise OutOfRange(f"k must be in [0, {n}], got {k!r}")
    f = config.f_array
    s1 = float(f.sum())
    s2 = float((f**2).sum())
    r = float((2 * k - n) ** 2)
    if n == 1:
        # single qubit: both sectors are one-dimensional, no phase info
        value = _gt2(params) * (s2 - s1 * s1 * r)
    else:
        cross = s1 * s1 - s2  # sum_{i != j} f_i f_j
        value = _gt2(params) * (
            s2 - s1 * s1 * r / (n * n) + cross * (r - n) / (n * (n - 1))
        )
    return FisherReport(max(value, 0.0), "closed-form:dicke")
