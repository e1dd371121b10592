"""Shared helpers: dense Kronecker-product oracles and random generators.

The oracles rebuild every operator as an explicit dense matrix and take
derivatives by central finite differences, deliberately sharing no code
path with the package internals, so agreement between the two is an
actual check and not a tautology.

Conventions under test: qubit 1 is the leftmost bitstring character and
the most significant dense index; sigma_z |0> = +|0>.
"""

import numpy as np
from hypothesis import HealthCheck, settings
from scipy.linalg import expm

from gradqfi import PhysParams, SparseState, SpectralState, make_chain

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

SZ = np.diag([1.0, -1.0])
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
ID2 = np.eye(2)


def kron_site(n, i, op):
    """`op` acting on qubit i (1-based, leftmost factor first)."""
    out = np.array([[1.0]])
    for j in range(1, n + 1):
        out = np.kron(out, op if j == i else ID2)
    return out


def dense_hg(config):
    """H_G = (1/2) sum_i f_i sigma_z^(i) as a dense 2^n matrix."""
    n = config.n
    out = np.zeros((1 << n, 1 << n))
    for i, fx in enumerate(config.f_values, start=1):
        out = out + 0.5 * fx * kron_site(n, i, SZ)
    return out


def dense_jz(n):
    out = np.zeros((1 << n, 1 << n))
    for i in range(1, n + 1):
        out = out + 0.5 * kron_site(n, i, SZ)
    return out


def dense_parity_x(n):
    out = np.array([[1.0]])
    for _ in range(n):
        out = np.kron(out, SX)
    return out


def dense_unitary(config, params, grad=None):
    """exp(-i t (gamma B0 J_z + gamma G H_G)) via scipy's expm."""
    g = params.grad if grad is None else grad
    h = params.gamma * params.b0 * dense_jz(config.n) + params.gamma * g * dense_hg(config)
    return expm(-1j * params.t * h)


def to_dense(vec):
    out = np.zeros(1 << vec.n_qubits, dtype=np.complex128)
    for bits, amp in vec.terms:
        out[int(bits, 2)] = amp
    return out


def dense_rho(state):
    """Dense density matrix of a SparseState or SpectralState."""
    if isinstance(state, SparseState):
        v = to_dense(state)
        return np.outer(v, v.conj())
    out = np.zeros((1 << state.n_qubits,) * 2, dtype=np.complex128)
    for w, vec in state.eigenpairs:
        v = to_dense(vec)
        out += w * np.outer(v, v.conj())
    return out


def oracle_qfi(state, config, params, delta=1e-6, gap=1e-11):
    """Brute-force QFI: dense evolution, finite-difference d rho / dG.

    Accuracy is limited by the central difference (~delta^2 relative for
    O(1) profile values), so compare at 1e-7..1e-6 relative, not tighter.
    """
    rho0 = dense_rho(state)

    def rho_at(g):
        u = dense_unitary(config, params, grad=g)
        return u @ rho0 @ u.conj().T

    g = params.grad
    drho = (rho_at(g + delta) - rho_at(g - delta)) / (2.0 * delta)
    w, v = np.linalg.eigh(rho_at(g))
    m = v.conj().T @ drho @ v
    wmax = float(w.max())
    total = 0.0
    for a in range(len(w)):
        for b in range(len(w)):
            s = w[a] + w[b]
            if s > gap * wmax:
                total += 2.0 * abs(m[a, b]) ** 2 / s
    return total


def oracle_qfi_pure(state, config, params):
    """4 (gamma t)^2 Var(H_G) from the dense diagonal of the Kronecker H_G."""
    v = to_dense(state)
    lam = np.diag(dense_hg(config)).copy()
    p = np.abs(v) ** 2
    mean = float(p @ lam)
    mean_sq = float(p @ (lam * lam))
    gt = params.gamma * params.t
    return 4.0 * gt * gt * (mean_sq - mean * mean)


def oracle_parity(state, config, params):
    """tr(X^n U rho U^dagger) via dense matrices."""
    u = dense_unitary(config, params)
    rho = u @ dense_rho(state) @ u.conj().T
    return float(np.trace(dense_parity_x(state.n_qubits) @ rho).real)


def random_chain(rng, n, spread=1.0):
    positions = rng.uniform(-spread, spread, size=n)
    x0 = float(rng.uniform(-0.5 * spread, 0.5 * spread))
    return make_chain(positions, x0=x0)


def random_params(rng, **overrides):
    base = dict(
        gamma=float(rng.uniform(0.5, 2.0)),
        b0=float(rng.uniform(-1.0, 1.0)),
        grad=float(rng.uniform(-1.0, 1.0)),
        t=float(rng.uniform(0.5, 2.0)),
        gamma_prime=float(rng.uniform(0.5, 2.0)),
        delta_e=float(rng.uniform(0.5, 1.5)),
        tau_c=float(rng.uniform(0.5, 2.0)),
    )
    base.update(overrides)
    return PhysParams(**base)


def random_sparse(rng, n, size=None):
    dim = 1 << n
    if size is None:
        size = int(rng.integers(1, min(dim, 8) + 1))
    idx = rng.choice(dim, size=size, replace=False)
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    amps = amps / np.linalg.norm(amps)
    terms = tuple(
        (format(int(i), f"0{n}b"), complex(a)) for i, a in zip(idx, amps)
    )
    return SparseState(n, terms)


def random_mixture(rng, n, rank):
    """Random SpectralState: Haar-ish orthonormal vectors, Dirichlet weights."""
    dim = 1 << n
    mat = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    q, _ = np.linalg.qr(mat)
    weights = rng.dirichlet(np.ones(rank))
    weights = weights / weights.sum()
    pairs = []
    for r in range(rank):
        col = q[:, r]
        terms = tuple(
            (format(i, f"0{n}b"), complex(col[i]))
            for i in range(dim)
            if abs(col[i]) > 0.0
        )
        pairs.append((float(weights[r]), SparseState(n, terms)))
    return SpectralState(n, tuple(pairs))


def rel_dev(a, b, floor=1e-300):
    return abs(a - b) / max(abs(a), abs(b), floor)
