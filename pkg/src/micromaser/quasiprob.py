"""s-parameterized phase-space quasiprobabilities of a Fock-basis state.

    P(beta; s) = (2/pi) sum_k (-1)^k (1+s)^k / (1-s)^(k+1) <beta,k| rho |beta,k>

with displaced number states |beta,k> = D(beta)|k>.  s = 0 gives the Wigner
function, s = -1 the Husimi Q function (only k = 0 survives).

Two evaluation routes are provided.  :func:`quasiprob_value` sums the series
term by term from displaced-number overlaps and is the reference.
:func:`quasiprob_grid` resums the series in closed form: with
q = (s+1)/(s-1) the weights are geometric, so

    P(beta; s) = 2 / (pi (1-s)) Tr[rho G],    G = D(beta) q^N D(beta)^dag,

Normal ordering gives G = e^{(q-1)|b|^2} e^{u a^dag} q^N e^{conj(u) a} with
u = (1-q) beta, so along each diagonal

    <m+a|G|m> = e^{(q-1)|b|^2} sqrt(m!/(m+a)!) u^a q^m L_m^(a)(-|u|^2/q).

q lies in (-inf, 0], so q^m L_m^(a) is a real polynomial in |u|^2 with a
stable upward recurrence in m; it is carried in log-scaled form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConsistencyError, InvalidParameterError
from .fock import DensityMatrix

MAX_GRID_POINTS = 1_000_000
_REAL_TOL = 1e-10


def _check_s(s):
    if not (math.isfinite(s) and -1.0 <= s < 1.0):
        raise InvalidParameterError(f"s must lie in [-1, 1), got {s!r}")


def laguerre(n: int, alpha: float, x: float) -> float:
    """Generalized Laguerre polynomial L_n^(alpha)(x) by upward recurrence."""
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def displaced_number_overlap(m: int, n: int, beta: complex) -> complex:
    """Matrix element <m| D(beta) |n> of the displacement operator.

    Uses the associated-Laguerre closed form with the factorial ratio and
    powers of |beta| combined in log space, so large m, n do not overflow.
    """
    if m < 0 or n < 0:
        raise InvalidParameterError("Fock indices must be non-negative")
    beta = complex(beta)
    r2 = abs(beta) ** 2
    if r2 == 0.0:
        return 1.0 + 0j if m == n else 0j
    lo, hi = min(m, n), max(m, n)
    diff = hi - lo
    log_mag = 0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1)) + diff * 0.5 * math.log(r2) - 0.5 * r2
    # m >= n: beta^(m-n); m < n: (-conj beta)^(n-m)
    unit = beta / abs(beta) if m >= n else -beta.conjugate() / abs(beta)
    lag = laguerre(lo, diff, r2)
    if lag == 0.0:
        return 0j
    val = math.copysign(math.exp(log_mag + math.log(abs(lag))), lag)
    return val * unit**diff


def _series_terms(rho: DensityMatrix, beta: complex, s: float):
    """Yield (k, weight, <beta,k|rho|beta,k>) until the remainder is negligible."""
    dim = rho.dim
    w0 = 2.0 / (math.pi * (1.0 - s))
    q = (s + 1.0) / (s - 1.0)
    # |beta,k> has negligible weight on n < dim once k exceeds this
    k_stop = dim + int(math.ceil((abs(beta) + math.sqrt(dim)) ** 2 + 12 * (abs(beta) + math.sqrt(dim)) + 20))
    for k in range(k_stop):
        w = w0 * q**k
        if w == 0.0:
            return
        col = np.array([displaced_number_overlap(n, k, beta) for n in range(dim)])
        yield k, w, np.vdot(col, rho.elements @ col)


def quasiprob_value(rho: DensityMatrix, beta: complex, s: float) -> float:
    """Quasiprobability at one phase-space point, summed term by term."""
    _check_s(s)
    total = 0j
    for _, w, expect in _series_terms(rho, beta, s):
        total += w * expect
    if abs(total.imag) > _REAL_TOL:
        raise ConsistencyError(f"quasiprobability has imaginary part {total.imag:.3e}")
    return float(total.real)


@njit(cache=True)
def _displaced_weight_kernel(rho, betas, q, out):
    dim = rho.shape[0]
    for p in range(betas.size):
        b = betas[p]
        b2 = b.real * b.real + b.imag * b.imag
        y = (1.0 - q) ** 2 * b2
        log_c = (q - 1.0) * b2
        log_u = math.log((1.0 - q) * math.sqrt(b2)) if b2 > 0.0 else 0.0
        rot = b / math.sqrt(b2) if b2 > 0.0 else 1.0 + 0j
        total = 0j
        phase = 1.0 + 0j
        n_diag = dim if b2 > 0.0 else 1
        for a in range(n_diag):
            # h_m = <m+a|G|m> / (phase * exp(scale)), recurrence in m
            scale = log_c + a * log_u - 0.5 * math.lgamma(a + 1.0)
            h_prev = 0.0
            h = 1.0
            up = 0j
            lo = 0j
            for m in range(dim - a):
                v = h * math.exp(scale)
                up += v * rho[m, m + a]
                if a > 0:
                    lo += v * rho[m + a, m]
                r1 = math.sqrt((m + 1.0) / (m + 1.0 + a))
                c1 = (q * (2 * m + 1 + a) + y) * r1 / (m + 1.0)
                c2 = 0.0
                if m > 0:
                    c2 = q * q * (m + a) * r1 * math.sqrt(m / (m + a)) / (m + 1.0)
                h_prev, h = h, c1 * h - c2 * h_prev
                mag = max(abs(h), abs(h_prev))
                if mag > 1e100 or (0.0 < mag < 1e-100):
                    h /= mag
                    h_prev /= mag
                    scale += math.log(mag)
            total += phase * up + phase.conjugate() * lo
            phase *= rot
        out[p] = total


def _trace_with_displaced_weight(rho: np.ndarray, betas: np.ndarray, s: float) -> np.ndarray:
    """Tr[rho D(beta) q^N D(beta)^dag] for a flat array of points."""
    q = (s + 1.0) / (s - 1.0)
    betas = np.ascontiguousarray(betas, dtype=complex).ravel()
    out = np.empty(betas.size, dtype=complex)
    _displaced_weight_kernel(np.ascontiguousarray(rho, dtype=complex), betas, q, out)
    return out


@dataclass(frozen=True)
class QuasiprobGrid:
    """Rectangular lattice of quasiprobability values.

    ``values[i, j]`` sits at ``re_axis[i] + 1j * im_axis[j]``.
    """

    re_range: tuple[float, float]
    im_range: tuple[float, float]
    n_re: int
    n_im: int
    s: float
    values: np.ndarray = field(repr=False, default=None)

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(*self.re_range, self.n_re)

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(*self.im_range, self.n_im)

    def cell_area(self) -> float:
        dre = (self.re_range[1] - self.re_range[0]) / (self.n_re - 1) if self.n_re > 1 else 1.0
        dim_ = (self.im_range[1] - self.im_range[0]) / (self.n_im - 1) if self.n_im > 1 else 1.0
        return dre * dim_

    def integral(self) -> float:
        """Riemann sum over the lattice; approximates Tr rho for a wide grid."""
        return float(np.sum(self.values) * self.cell_area())

    def rows(self):
        """``(re, im, value)`` triples in row-major order."""
        for i, x in enumerate(self.re_axis):
            for j, y in enumerate(self.im_axis):
                yield float(x), float(y), float(self.values[i, j])


def quasiprob_grid(
    rho: DensityMatrix,
    re_range: tuple[float, float],
    im_range: tuple[float, float],
    n_re: int,
    n_im: int,
    s: float,
    *,
    max_points: int = MAX_GRID_POINTS,
    chunk: int = 4096,
) -> QuasiprobGrid:
    _check_s(s)
    bounds = (*re_range, *im_range)
    if not all(math.isfinite(v) for v in bounds):
        raise InvalidParameterError("grid bounds must be finite")
    if n_re < 1 or n_im < 1:
        raise InvalidParameterError("grid needs at least one point per axis")
    if n_re * n_im > max_points:
        raise InvalidParameterError(f"grid of {n_re * n_im} points exceeds the limit {max_points}")
    shape = QuasiprobGrid(tuple(map(float, re_range)), tuple(map(float, im_range)), n_re, n_im, float(s))
    pts = (shape.re_axis[:, None] + 1j * shape.im_axis[None, :]).ravel()
    vals = np.empty(pts.size, dtype=complex)
    for start in range(0, pts.size, chunk):
        sl = slice(start, start + chunk)
        vals[sl] = _trace_with_displaced_weight(rho.elements, pts[sl], s)
    vals *= 2.0 / (math.pi * (1.0 - s))
    worst = np.max(np.abs(vals.imag)) if vals.size else 0.0
    if worst > _REAL_TOL:
        raise ConsistencyError(f"quasiprobability grid has imaginary part {worst:.3e}")
    return QuasiprobGrid(shape.re_range, shape.im_range, n_re, n_im, shape.s, vals.real.reshape(n_re, n_im))


def strict_local_maxima(values: np.ndarray) -> list[tuple[int, int]]:
    """Interior lattice points strictly greater than all eight neighbours."""
    v = np.asarray(values)
    core = v[1:-1, 1:-1]
    mask = np.ones_like(core, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = v[1 + di : v.shape[0] - 1 + di, 1 + dj : v.shape[1] - 1 + dj]
            mask &= core > nb
    return [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(mask))]
