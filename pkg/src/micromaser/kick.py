"""Single-atom kick map of the two-photon micromaser.

A three-level ladder atom, reduced to an effective two-level system, crosses
the cavity and exchanges photon *pairs* with the field.  In the rotating
frame each doublet ``{|e,n>, |g,n+2>}`` evolves under a 2x2 block; the field
after the transit is ``Tr_atom[U (|psi><psi| x rho) U^dag]``, which we write
as a two-term Kraus sum ``K_e rho K_e^dag + K_g rho K_g^dag`` with
``K_x = <x|U|psi>``.

Atom basis ordering is (e, g).  Inside a doublet, with
``delta_n = Delta/(2 lambda) + (chi/lambda) n`` and ``c_n = sqrt((n+1)(n+2))``::

    U = [[alpha_n(gamma),       beta_n(gamma) c_n ],
         [beta_n(gamma) c_n,    conj(alpha_n(gamma))]]

so the excited-state Stark detuning of the doublet is carried by ``gamma_n``
for both of its members.  The two ground levels |g,0>, |g,1> have no
partner and only acquire the phase ``conj(alpha_n(epsilon))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConsistencyError, InvalidParameterError
from .fock import TAIL_BAND, DensityMatrix, diagnostics, ensure_headroom

# below this |x*t| sin(x t)/x is evaluated by its Taylor series
_SINC_SERIES = 1e-4
# levels that must be empty above the tail band before a kick
HEADROOM = 2
_GROW_STEP = 8


@dataclass(frozen=True)
class AtomPreparation:
    """Injected atom state ``a|g> + b exp(i phi)|e>``."""

    a: float
    b: float
    phi: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.a, self.b, self.phi)):
            raise InvalidParameterError("atom amplitudes and phase must be finite")
        if self.a < 0 or self.b < 0:
            raise InvalidParameterError("a and b must be non-negative; put signs into phi")
        if abs(self.a**2 + self.b**2 - 1.0) > 1e-12:
            raise InvalidParameterError(f"a^2 + b^2 = {self.a**2 + self.b**2!r}, expected 1")

    @classmethod
    def equal_superposition(cls, phi: float = 0.0) -> "AtomPreparation":
        s = math.sqrt(0.5)
        return cls(s, s, phi)


@dataclass(frozen=True)
class InteractionParams:
    """Dimensionless detuning, Stark shift and transit time (all in units of lambda)."""

    delta_over_lambda: float = 1.0
    chi_over_lambda: float = 1.0
    lambda_t: float = 12.2

    def __post_init__(self):
        vals = (self.delta_over_lambda, self.chi_over_lambda, self.lambda_t)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError("interaction parameters must be finite")
        if self.lambda_t < 0:
            raise InvalidParameterError(f"lambda_t must be non-negative, got {self.lambda_t}")

    def with_time(self, lambda_t: float) -> "InteractionParams":
        return InteractionParams(self.delta_over_lambda, self.chi_over_lambda, lambda_t)


@dataclass(frozen=True)
class RabiCoefficients:
    n: int
    gamma_n: float
    epsilon_n: float
    alpha_gamma: complex
    alpha_epsilon: complex
    beta_gamma: complex
    beta_epsilon: complex


def _sinc_t(x, t):
    """sin(x t) / x, continuous at x = 0."""
    x = np.asarray(x, dtype=float)
    xt = x * t
    small = np.abs(xt) < _SINC_SERIES
    safe = np.where(small, 1.0, x)
    series = t * (1.0 - xt**2 / 6.0 + xt**4 / 120.0)
    return np.where(small, series, np.sin(xt) / safe)


def _coefficients(n, p: InteractionParams):
    """Vectorized coefficient functions for photon numbers ``n``.

    Returns ``(delta, gamma, epsilon, alpha_gamma, alpha_epsilon, sinc_gamma, sinc_epsilon)``.
    """
    n = np.asarray(n, dtype=float)
    t = p.lambda_t
    delta = 0.5 * p.delta_over_lambda + p.chi_over_lambda * n
    gamma = np.sqrt(delta**2 + (n + 1) * (n + 2))
    epsilon = np.sqrt(delta**2 + n * (n - 1))
    sg = _sinc_t(gamma, t)
    se = _sinc_t(epsilon, t)
    ag = np.cos(gamma * t) + 1j * sg * delta
    ae = np.cos(epsilon * t) + 1j * se * delta
    return delta, gamma, epsilon, ag, ae, sg, se


def rabi_coefficients(n: int, p: InteractionParams) -> RabiCoefficients:
    if n < 0:
        raise InvalidParameterError(f"n must be non-negative, got {n}")
    _, g, e, ag, ae, sg, se = _coefficients(n, p)
    return RabiCoefficients(
        n=int(n),
        gamma_n=float(g),
        epsilon_n=float(e),
        alpha_gamma=complex(ag),
        alpha_epsilon=complex(ae),
        beta_gamma=1j * float(sg),
        beta_epsilon=1j * float(se),
    )


def _with_headroom(rho: DensityMatrix) -> DensityMatrix:
    """Grow the basis until the tail band plus headroom is (numerically) empty."""
    band = TAIL_BAND + HEADROOM
    while rho.tail_mass(band) > rho.tail_tol / 10:
        rho = ensure_headroom(rho, _GROW_STEP)
    return rho


def kraus_diagonals(dim: int, atom: AtomPreparation, p: InteractionParams):
    """Band entries of the two Kraus operators on a ``dim``-level field.

    ``K_e`` has a diagonal and the +2 superdiagonal, ``K_g`` a diagonal and
    the -2 subdiagonal.  Returned as ``(e_diag, e_up, g_diag, g_down)`` with
    ``e_up[n] = K_e[n, n+2]`` and ``g_down[m] = K_g[m+2, m]``.
    """
    n = np.arange(dim)
    delta, _, _, ag, ae, sg, _ = _coefficients(n, p)
    ladder = np.sqrt((n + 1.0) * (n + 2.0))
    excited = atom.b * np.exp(1j * atom.phi)

    paired = n + 2 < dim
    # top two excited levels lose their partner to truncation: pure phase
    u_ee = np.where(paired, ag, np.exp(1j * delta * p.lambda_t))
    coupling = (1j * sg * ladder)[: max(dim - 2, 0)]

    u_gg = np.empty(dim, dtype=complex)
    u_gg[:2] = np.conj(ae[:2])
    u_gg[2:] = np.conj(ag[: dim - 2])

    return excited * u_ee, atom.a * coupling, atom.a * u_gg, excited * coupling


@njit(cache=True)
def _kick_kernel(rho, ed, eu, gd, gl):
    """K_e rho K_e^dag + K_g rho K_g^dag for the banded Kraus pair.

    Element (i, j) only reads rho at (i, j), (i+-2, j), (i, j+-2) and
    (i+-2, j+-2).  The result is Hermitian, so only j >= i is computed.
    """
    dim = rho.shape[0]
    out = np.empty_like(rho)
    for i in range(dim):
        for j in range(i, dim):
            ce = np.conj(ed[j])
            x = ed[i] * rho[i, j] * ce
            if j + 2 < dim:
                x += ed[i] * rho[i, j + 2] * np.conj(eu[j])
            if i + 2 < dim:
                x += eu[i] * rho[i + 2, j] * ce
                if j + 2 < dim:
                    x += eu[i] * rho[i + 2, j + 2] * np.conj(eu[j])
            cg = np.conj(gd[j])
            x += gd[i] * rho[i, j] * cg
            if j >= 2:
                x += gd[i] * rho[i, j - 2] * np.conj(gl[j - 2])
            if i >= 2:
                x += gl[i - 2] * rho[i - 2, j] * cg
                if j >= 2:
                    x += gl[i - 2] * rho[i - 2, j - 2] * np.conj(gl[j - 2])
            if i == j:
                x = x.real + 0j
            out[i, j] = x
            out[j, i] = np.conj(x)
    return out


def _check_output(m: np.ndarray, where: str, full: bool):
    tr = np.trace(m).real
    if abs(tr - 1.0) > 1e-10:
        raise ConsistencyError(f"{where}: trace drifted to {tr!r}")
    if full:
        lam = np.linalg.eigvalsh(m)[0]
        if lam < -1e-9:
            raise ConsistencyError(f"{where}: negative eigenvalue {lam:.3e}")


def apply_kick(rho: DensityMatrix, atom: AtomPreparation, p: InteractionParams, *, validate: bool = False) -> DensityMatrix:
    """Field state after one atom transit.

    The basis is extended first if the top levels are occupied.  With
    ``validate=True`` the output is also checked for positivity.
    """
    rho = _with_headroom(rho)
    ed, eu, gd, gl = kraus_diagonals(rho.dim, atom, p)
    out = _kick_kernel(rho.elements, ed, eu, gd, gl)
    _check_output(out, "apply_kick", validate)
    return DensityMatrix._trusted(out, rho.tail_tol)


def apply_kicks(rho: DensityMatrix, atom: AtomPreparation, p: InteractionParams, n_atoms: int) -> DensityMatrix:
    if n_atoms < 0:
        raise InvalidParameterError(f"n_atoms must be non-negative, got {n_atoms}")
    for _ in range(n_atoms):
        rho = apply_kick(rho, atom, p)
    return rho


def joint_evolution(rho: DensityMatrix, atom: AtomPreparation, p: InteractionParams) -> np.ndarray:
    """Joint atom-field density matrix after one transit.

    Index layout is atom-major: ``[e-block | g-block]``, each ``dim`` levels,
    after the same basis extension :func:`apply_kick` performs.  Builds the
    rotating-frame Hamiltonian on the truncated product space,

        E(e, n) = -(Delta/2 + chi n),
        E(g, m) = +(Delta/2 + chi (m - 2))   for m >= 2,
        E(g, m) = +(Delta/2 + chi m)         for m in {0, 1},
        <e, n| H |g, n+2> = -sqrt((n+1)(n+2)),

    (units of lambda) and exponentiates each doublet by diagonalization.
    Intended for small bases: it forms the full 2*dim joint matrix.
    """
    rho = _with_headroom(rho)
    dim = rho.dim
    d, c, t = p.delta_over_lambda, p.chi_over_lambda, p.lambda_t

    # joint index: e-levels 0..dim-1, g-levels dim..2dim-1
    energy = np.empty(2 * dim)
    for k in range(dim):
        energy[k] = -(d / 2 + c * k)
        energy[dim + k] = d / 2 + c * (k - 2 if k >= 2 else k)

    u = np.zeros((2 * dim, 2 * dim), dtype=complex)
    paired = set()
    for k in range(dim - 2):
        i, j = k, dim + k + 2
        block = np.array([[energy[i], -math.sqrt((k + 1) * (k + 2))],
                          [-math.sqrt((k + 1) * (k + 2)), energy[j]]])
        w, v = np.linalg.eigh(block)
        ub = (v * np.exp(-1j * w * t)) @ v.conj().T
        idx = np.array([i, j])
        u[np.ix_(idx, idx)] = ub
        paired.update((i, j))
    for i in range(2 * dim):
        if i not in paired:
            u[i, i] = np.exp(-1j * energy[i] * t)

    psi = np.array([atom.b * np.exp(1j * atom.phi), atom.a])
    joint = np.kron(np.outer(psi, psi.conj()), rho.elements)
    return u @ joint @ u.conj().T


def joint_unitary_oracle(rho: DensityMatrix, atom: AtomPreparation, p: InteractionParams) -> DensityMatrix:
    """Brute-force kick: :func:`joint_evolution` followed by the partial trace over the atom."""
    rho = _with_headroom(rho)
    joint = joint_evolution(rho, atom, p)
    dim = rho.dim
    field = joint[:dim, :dim] + joint[dim:, dim:]
    field = 0.5 * (field + field.conj().T)
    _check_output(field, "joint_unitary_oracle", False)
    return DensityMatrix(field, rho.tail_tol)


def trace_distance(r1: DensityMatrix, r2: DensityMatrix) -> float:
    """Half the trace norm of the difference; bases are zero-padded to match."""
    dim = max(r1.dim, r2.dim)
    a = np.pad(r1.elements, (0, dim - r1.dim))
    b = np.pad(r2.elements, (0, dim - r2.dim))
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def intra_transit_trace(rho: DensityMatrix, atom: AtomPreparation, p: InteractionParams, n_samples: int):
    """Diagnostics along one transit, sampled at ``n_samples`` equally spaced times.

    Returns ``(lambda_tau, zeta, mean_n)`` triples from 0 up to ``p.lambda_t``.
    """
    if n_samples < 2:
        raise InvalidParameterError(f"n_samples must be at least 2, got {n_samples}")
    rows = []
    for k in range(n_samples):
        tau = k * p.lambda_t / (n_samples - 1)
        out = rho if k == 0 else apply_kick(rho, atom, p.with_time(tau))
        dg = diagnostics(out)
        rows.append((tau, dg.purity_deficit, dg.mean_n))
    return rows
