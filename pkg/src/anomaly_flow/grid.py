"""Periodic-lattice complex calculus.

Fields live on a flat torus with 1 or 2 active complex coordinates
(z_j = x_j + i y_j, each real axis carrying N points of period L) and are
constant along the remaining directions of the 3-fold.  Differentiation is
spectral; nonlinear products are dealiased with the two-thirds rule, so the
structural identities being monitored (closedness of i del delbar, of
Tr(R ^ R), balanced preservation) hold at spectral accuracy and any drift is
attributable to time discretization.

Array layout: a field of T-valued data has shape grid.shape + T.shape with
the grid axes ordered (x1, y1[, x2, y2]).  Herm3 fields store omega_{jbar k}
at [..., j, k]; Psi22 fields store Psi^{j kbar} at [..., j, k]; curvature
fields store R_{kbar j}^p_q at [..., k, j, p, q].
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from . import exterior
from .errors import InactiveAxisError, PositivityError
from .pointwise import adjugate3, det3

TWO_PI = 2.0 * np.pi


_WORKER_CAP: int | None = None


def _workers(nbytes: int = 1 << 30) -> int:
    """Worker count for FFT calls; threading only pays off on large arrays."""
    global _WORKER_CAP
    if _WORKER_CAP is None:
        env = os.environ.get("ANOMALY_THREADS")
        _WORKER_CAP = max(1, int(env)) if env else (os.cpu_count() or 1)
    if nbytes < (1 << 21):
        return 1
    return _WORKER_CAP


@dataclass(frozen=True)
class PeriodicGrid:
    complex_dims: int
    points_per_dim: int
    period: float = TWO_PI

    def __post_init__(self):
        c, n = self.complex_dims, self.points_per_dim
        if c not in (1, 2):
            raise ValueError(f"complex_dims must be 1 or 2, got {c}")
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"points_per_dim must be a power of two >= 8, got {n}")
        if not self.period > 0:
            raise ValueError("period must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * (2 * self.complex_dims)

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(2 * self.complex_dims))

    @property
    def spacing(self) -> float:
        return self.period / self.points_per_dim

    @property
    def dealias_kmax(self) -> int:
        return self.points_per_dim // 3

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, ordered (x1, y1[, x2, y2])."""
        n, naxes = self.points_per_dim, 2 * self.complex_dims
        x = np.arange(n) * self.spacing
        return [
            x.reshape((1,) * i + (n,) + (1,) * (naxes - i - 1)) for i in range(naxes)
        ]


def _axis_k(grid: PeriodicGrid, axis: int) -> np.ndarray:
    n, naxes = grid.points_per_dim, 2 * grid.complex_dims
    k = TWO_PI / grid.period * np.fft.fftfreq(n, d=1.0 / n)
    return k.reshape((1,) * axis + (n,) + (1,) * (naxes - axis - 1))


@lru_cache(maxsize=None)
def _symbols(grid: PeriodicGrid):
    """(dz, dzbar) multiplier arrays per active complex coordinate."""
    dz_syms, dzb_syms = [], []
    for j in range(grid.complex_dims):
        kx = _axis_k(grid, 2 * j)
        ky = _axis_k(grid, 2 * j + 1)
        dz_syms.append((1j * kx + ky) / 2.0)
        dzb_syms.append((1j * kx - ky) / 2.0)
    return dz_syms, dzb_syms


@lru_cache(maxsize=None)
def _dealias_mask(grid: PeriodicGrid) -> np.ndarray:
    n, naxes = grid.points_per_dim, 2 * grid.complex_dims
    kint = np.fft.fftfreq(n, d=1.0 / n)
    keep = np.abs(kint) <= grid.dealias_kmax
    mask = np.ones((), dtype=bool)
    for i in range(naxes):
        mask = mask & keep.reshape((1,) * i + (n,) + (1,) * (naxes - i - 1))
    return mask


def _bcast(sym: np.ndarray, f_ndim: int, grid: PeriodicGrid) -> np.ndarray:
    """Pad a grid-shaped multiplier with trailing tensor axes."""
    extra = f_ndim - 2 * grid.complex_dims
    return sym.reshape(sym.shape + (1,) * extra)


def forward(grid: PeriodicGrid, f: np.ndarray, overwrite: bool = False) -> np.ndarray:
    return sfft.fftn(f, axes=grid.axes, workers=_workers(f.nbytes), overwrite_x=overwrite)


def inverse(grid: PeriodicGrid, fhat: np.ndarray, overwrite: bool = False) -> np.ndarray:
    """Inverse transform; overwrite=True may consume fhat (pass only scratch)."""
    return sfft.ifftn(
        fhat, axes=grid.axes, workers=_workers(fhat.nbytes), overwrite_x=overwrite
    )


def diff(grid: PeriodicGrid, f: np.ndarray, j: int, conjugate: bool = False) -> np.ndarray:
    """Spectral del_j (or del_jbar with conjugate=True), 1-based active j."""
    if not 1 <= j <= grid.complex_dims:
        raise InactiveAxisError(
            f"coordinate {j} is inactive on a grid with {grid.complex_dims} active dims"
        )
    dz_syms, dzb_syms = _symbols(grid)
    sym = dzb_syms[j - 1] if conjugate else dz_syms[j - 1]
    axes = (2 * (j - 1), 2 * (j - 1) + 1)
    fhat = sfft.fftn(f, axes=axes, workers=_workers(f.nbytes))
    return sfft.ifftn(fhat * _bcast(sym, f.ndim, grid), axes=axes, workers=_workers(f.nbytes))


def dealias(grid: PeriodicGrid, f: np.ndarray) -> np.ndarray:
    """Two-thirds rule: zero all modes with any |k_int| > N//3."""
    fhat = forward(grid, f)
    fhat *= _bcast(_dealias_mask(grid), f.ndim, grid)
    out = inverse(grid, fhat)
    return out.real if np.isrealobj(f) else out


def grid_mean(grid: PeriodicGrid, f: np.ndarray):
    return f.mean(axis=grid.axes)


def l2_norm(grid: PeriodicGrid, field: np.ndarray) -> float:
    """sqrt of the grid average of the summed squared tensor components."""
    naxes = 2 * grid.complex_dims
    comp_axes = tuple(range(naxes, field.ndim))
    return float(np.sqrt(np.mean(np.sum(np.abs(field) ** 2, axis=comp_axes))))


def min_eig_herm3(field: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(field)[..., 0].min())


def assert_positive_field(field: np.ndarray, name="field"):
    eigs = np.linalg.eigvalsh(field)
    tr = np.real(np.trace(field, axis1=-2, axis2=-1))
    if np.any(eigs[..., 0] <= 1e-12 * np.abs(tr)):
        raise PositivityError(
            f"{name} lost pointwise positivity (min eig {float(eigs[..., 0].min()):.3e})"
        )


@lru_cache(maxsize=None)
def _iddbar_gemm_table():
    """w[l, m] reshaped so that flat(d2) @ table[l, m] sums d2[.., k, j] w[l, m, j, k, a, b]."""
    w = exterior.wedge22_table()
    table = np.empty((3, 3, 9, 9), dtype=complex)
    for l in range(3):
        for m in range(3):
            table[l, m] = np.transpose(w[l, m], (1, 0, 2, 3)).reshape(9, 9)
    return table


@lru_cache(maxsize=None)
def _iddbar_symbols(grid: PeriodicGrid):
    """Broadcast-ready del_l del_mbar multipliers for Herm3 fields."""
    dz_syms, dzb_syms = _symbols(grid)
    c = grid.complex_dims
    return {
        (l, m): _bcast(dz_syms[l] * dzb_syms[m], 2 * c + 2, grid)
        for l in range(c)
        for m in range(c)
    }


def i_ddbar_11(grid: PeriodicGrid, omega_field: np.ndarray, fhat=None) -> np.ndarray:
    """i del delbar of a Herm3 field, assembled as a Psi22 field.

    Linear in the input, hence exactly d-closed at the discrete level.  A
    precomputed full-grid transform may be passed to share work.
    """
    table = _iddbar_gemm_table()
    syms = _iddbar_symbols(grid)
    if fhat is None:
        fhat = forward(grid, omega_field)
    npts = int(np.prod(grid.shape))
    out_flat = None
    for (l, m), sym in syms.items():
        d2 = inverse(grid, fhat * sym, overwrite=True)
        term = d2.reshape(npts, 9) @ table[l, m]
        out_flat = term if out_flat is None else out_flat + term
    return out_flat.reshape(grid.shape + (3, 3))


def chern_curvature(
    grid: PeriodicGrid, omega_field: np.ndarray, fhat=None, gate: bool = True
) -> np.ndarray:
    """Chern curvature R_{kbar j}^p_q = -del_kbar((omega^{-1} del_j omega)^p_q).

    Requires pointwise positivity (checked unless the caller gates it);
    inactive-direction components are zero.
    """
    if gate:
        assert_positive_field(omega_field, "metric field")
    dz_syms, dzb_syms = _symbols(grid)
    pinv = adjugate3(omega_field) / det3(omega_field)[..., None, None]
    if fhat is None:
        fhat = forward(grid, omega_field)
    ndim = fhat.ndim
    c = grid.complex_dims
    mask = _bcast(_dealias_mask(grid), ndim, grid)
    r = np.zeros(grid.shape + (3, 3, 3, 3), dtype=complex)
    for j in range(c):
        dm = inverse(grid, fhat * _bcast(dz_syms[j], ndim, grid), overwrite=True)
        ahat = forward(grid, pinv @ dm, overwrite=True)
        ahat *= mask
        for k in range(c):
            r[..., k, j, :, :] = -inverse(
                grid, ahat * _bcast(dzb_syms[k], ndim, grid), overwrite=True
            )
    return r


def tr_r_wedge_r(grid: PeriodicGrid, r_field: np.ndarray) -> np.ndarray:
    """Pointwise Tr(R ^ R) as a Psi22 field (dealiased product)."""
    c = grid.complex_dims
    w = exterior.wedge22_table()[:c, :c, :c, :c]
    ra = r_field[..., :c, :c, :, :]
    g = np.einsum("...kjps,...mlsp->...jklm", ra, ra, optimize=True)
    naxes = 2 * grid.complex_dims
    out = np.tensordot(g, w, axes=([naxes, naxes + 1, naxes + 2, naxes + 3], [0, 1, 2, 3]))
    return dealias(grid, out)


@lru_cache(maxsize=None)
def _d22_tables():
    """Assembly data for d of a (2,2)-form built from the oracle.

    Returns (conv, hol, ah):
      conv[a, b]   integer coefficient of Q[a, b] on its canonical monomial;
      hol[a][b]    (component index, sign) for dz^{a+1} ^ (monomial of a, b);
      ah[a][b]     (component index, sign) for dzbar^{b+1} ^ (monomial of a, b).
    Components are indexed by the 6 possible 5-form keys.
    """
    basis = exterior.form22_basis()
    conv = np.zeros((3, 3), dtype=float)
    keys5: dict[tuple, int] = {}
    hol = [[None] * 3 for _ in range(3)]
    ah = [[None] * 3 for _ in range(3)]

    def comp_index(key):
        return keys5.setdefault(key, len(keys5))

    for (a, b), (key, coeff) in basis.items():
        conv[a, b] = coeff
        k5, s = exterior._merge((a,), key)
        hol[a][b] = (comp_index(k5), s)
        k5, s = exterior._merge((b + 3,), key)
        ah[a][b] = (comp_index(k5), s)
    return conv, hol, ah


def d_residual_22(grid: PeriodicGrid, psi_field: np.ndarray) -> float:
    """Relative L2 size of d(Psi) for a Psi22 field.

    All coefficients of the 5-form d(Psi) are assembled with oracle-pinned
    signs; the result is normalized by the L2 norm of Psi's own monomial
    coefficients.  Zero field returns 0.
    """
    conv, hol, ah = _d22_tables()
    dz_syms, dzb_syms = _symbols(grid)
    c = grid.complex_dims
    comps = np.zeros((6,) + grid.shape, dtype=complex)
    for j in range(c):
        # row j (del_j hits the omitted-dz^j entries) and column j (del_jbar)
        # share one stacked transform
        stacked = np.concatenate(
            [psi_field[..., j, :], psi_field[..., :, j]], axis=-1
        )
        shat = forward(grid, stacked, overwrite=True)
        shat[..., :3] *= _bcast(dz_syms[j], shat.ndim, grid)
        shat[..., 3:] *= _bcast(dzb_syms[j], shat.ndim, grid)
        d = inverse(grid, shat, overwrite=True)
        for b in range(3):
            idx, s = hol[j][b]
            comps[idx] += conv[j, b] * s * d[..., b]
        for a in range(3):
            idx, s = ah[a][j]
            comps[idx] += conv[a, j] * s * d[..., 3 + a]
    num = np.sqrt(np.mean(np.sum(np.abs(comps) ** 2, axis=0)))
    den = 2.0 * l2_norm(grid, psi_field)
    if den == 0.0:
        return 0.0
    return float(num / den)


def random_bandlimited_scalar(
    grid: PeriodicGrid, rng, kmax: int, amplitude: float = 1.0, n_modes: int = 4
) -> np.ndarray:
    """Real band-limited field: a sum of random cosine modes with |k| <= kmax."""
    kmax = min(kmax, grid.dealias_kmax)
    xs = grid.coords()
    out = np.zeros(grid.shape)
    for _ in range(n_modes):
        k = rng.integers(-kmax, kmax + 1, size=len(xs))
        if not np.any(k):
            k[0] = 1
        phase = rng.uniform(0, TWO_PI)
        arg = sum(TWO_PI / grid.period * ki * x for ki, x in zip(k, xs))
        out = out + np.cos(arg + phase)
    out *= amplitude / max(n_modes, 1)
    return out


def random_bandlimited_herm3(
    grid: PeriodicGrid, rng, kmax: int, amplitude: float = 1.0, n_modes: int = 3
) -> np.ndarray:
    """Hermitian-matrix-valued band-limited field (mean zero)."""
    kmax = min(kmax, grid.dealias_kmax)
    xs = grid.coords()
    out = np.zeros(grid.shape + (3, 3), dtype=complex)
    for _ in range(n_modes):
        k = rng.integers(-kmax, kmax + 1, size=len(xs))
        if not np.any(k):
            k[0] = 1
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        arg = sum(TWO_PI / grid.period * ki * x for ki, x in zip(k, xs))
        e = np.exp(1j * arg)
        out = out + e[..., None, None] * a + np.conj(e)[..., None, None] * a.conj().T
    out *= amplitude / max(n_modes, 1)
    return out
