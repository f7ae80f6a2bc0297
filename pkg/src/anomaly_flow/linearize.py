"""Principal symbol of the flow's linearization and its ellipticity.

The linearized flow acts on Hermitian (2,2)-forms through

    sigma(xi): dPsi -> i xi ^ xibar ^ (tilde_star dPsi - 2 a' Rm(tilde_star dPsi))

and short-time solvability requires the eigenvalues of this map, restricted
to the kernel of the symbol of d, to have strictly positive real parts.  The
kernel is the 4-real-dimensional space of Hermitian dPsi with
xi_j dPsi^{j kbar} = 0; the restriction is represented as a real 4x4 matrix
in a Frobenius-orthonormal basis and eigenvalues are those of that matrix
(complex pairs allowed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exterior
from .errors import DegenerateInputError, PositivityError, ProjectionResidualError
from .pointwise import (
    assert_positive,
    hodge_star22,
    inner11,
    inv3,
    norm_omega,
    tilde_star,
)
from .sampling import unit_covectors

KERNEL_TOL = 1e-10


@dataclass
class SymbolReport:
    eigenvalues: np.ndarray
    min_real_part: float
    elliptic: bool
    kernel_dim: int = 4
    xi: np.ndarray | None = field(default=None, repr=False)


def xi_norm_sq(xi, omega) -> float:
    """|xi|^2 with respect to omega: omega^{j kbar} xi_j conj(xi_k)."""
    p = inv3(omega)
    return float(np.real(np.einsum("jk,j,k->", p, xi, np.conj(xi))))


def _check_xi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (3,) or np.linalg.norm(xi) < 1e-14:
        raise DegenerateInputError("covector must be a nonzero complex 3-vector")
    return xi


def rm_apply(r, domega, omega):
    """Curvature acting on (1,1)-forms: Rm(dw)_{kbar j} = R_{kbar j}^{p qbar} dw_{qbar p}.

    The index is raised with omega: R_{kbar j}^{p qbar} = R_{kbar j}^p_s omega^{s qbar}.
    """
    p = inv3(omega)
    return np.einsum("kjps,sq,qp->kj", r, p, domega)


def hermitian_basis(dim: int) -> list[np.ndarray]:
    """Frobenius-orthonormal real basis of Hermitian dim x dim matrices."""
    basis = []
    for a in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[a, a] = 1.0
        basis.append(e)
    for a in range(dim):
        for b in range(a + 1, dim):
            s = np.zeros((dim, dim), dtype=complex)
            s[a, b] = s[b, a] = 1.0 / np.sqrt(2.0)
            basis.append(s)
            k = np.zeros((dim, dim), dtype=complex)
            k[a, b] = 1j / np.sqrt(2.0)
            k[b, a] = -1j / np.sqrt(2.0)
            basis.append(k)
    return basis


def d_symbol_kernel(xi) -> list[np.ndarray]:
    """Frobenius-orthonormal real basis of {Hermitian dPsi : xi_j dPsi^{j kbar} = 0}.

    The constraint is dPsi @ conj(xi) = 0, so the kernel is carried by the
    2x2 Hermitian block on the orthogonal complement of conj(xi); its real
    dimension is 4 for every xi != 0.
    """
    xi = _check_xi(xi)
    v = np.conj(xi)
    v = v / np.linalg.norm(v)
    # deterministic Gram-Schmidt completion of v to a unitary frame
    cols = [v]
    for e in np.eye(3, dtype=complex):
        w = e - sum(c * np.vdot(c, e) for c in cols)
        nw = np.linalg.norm(w)
        if nw > 1e-7:
            cols.append(w / nw)
        if len(cols) == 3:
            break
    u1 = np.stack(cols[1:], axis=1)  # 3x2, orthogonal complement of v
    return [u1 @ b @ u1.conj().T for b in hermitian_basis(2)]


def wedge_xi_extract(xi, phi) -> np.ndarray:
    """Components of i xi ^ xibar ^ phi for a (1,1)-form phi (oracle-pinned)."""
    xi = np.asarray(xi, dtype=complex)
    w = exterior.wedge22_table()
    return np.einsum("j,k,ml,jklmab->ab", xi, np.conj(xi), np.asarray(phi, dtype=complex), w)


def delta_tilde_symbol(xi, omega, abs_omega, r, alpha_p, dpsi) -> np.ndarray:
    """sigma(xi) dPsi = i xi ^ xibar ^ (tilde_star dPsi - 2 a' Rm(tilde_star dPsi))."""
    xi = _check_xi(xi)
    ts = tilde_star(dpsi, omega, abs_omega)
    arg = ts if alpha_p == 0 else ts - 2.0 * alpha_p * rm_apply(r, ts, omega)
    return wedge_xi_extract(xi, arg)


def _project_onto(basis, x, scale, tol, what):
    """Real Frobenius coordinates of x in `basis`; error if x leaves their span."""
    coords = np.array([float(np.real(np.trace(x @ b))) for b in basis])
    recon = sum(c * b for c, b in zip(coords, basis))
    res = np.abs(x - recon).max()
    if res > tol * scale:
        raise ProjectionResidualError(
            f"{what} leaves the d-symbol kernel (residual {res:.3e}, scale {scale:.3e})"
        )
    return coords


def restricted_symbol(xi, omega, abs_omega, r, alpha_p, kernel_tol=KERNEL_TOL) -> SymbolReport:
    """Eigenvalues of the symbol restricted to the kernel of the d-symbol.

    Builds the real 4x4 matrix of dPsi -> delta_tilde_symbol in the
    d_symbol_kernel basis after verifying that every image lies in the
    kernel (to `kernel_tol`, relative).  Verdict: all eigenvalue real parts
    strictly positive.
    """
    xi = _check_xi(xi)
    assert_positive(omega, "omega")
    basis = d_symbol_kernel(xi)
    scale = xi_norm_sq(xi, omega) / (2.0 * float(norm_omega(omega, abs_omega)))
    mat = np.empty((4, 4))
    for j, w in enumerate(basis):
        img = delta_tilde_symbol(xi, omega, abs_omega, r, alpha_p, w)
        img_scale = max(float(np.abs(img).max()), scale)
        mat[:, j] = _project_onto(basis, img, img_scale, kernel_tol, "symbol image")
    eigs = np.linalg.eigvals(mat)
    min_re = float(eigs.real.min())
    return SymbolReport(
        eigenvalues=eigs, min_real_part=min_re, elliptic=bool(min_re > 0.0), xi=xi
    )


def ellipticity_check(omega, abs_omega, r, alpha_p, n_dirs: int, seed: int) -> SymbolReport:
    """Worst-case restricted symbol over seeded unit covector directions."""
    if n_dirs < 1:
        raise DegenerateInputError("n_dirs must be >= 1")
    worst = None
    for xi in unit_covectors(n_dirs, seed):
        rep = restricted_symbol(xi, omega, abs_omega, r, alpha_p)
        if worst is None or rep.min_real_part < worst.min_real_part:
            worst = rep
    return worst


def proposition_norm(xi, omega, abs_omega, r, alpha_p) -> float:
    """Operator norm of the curvature perturbation on the d-symbol kernel.

    The operator is dPsi -> -i xi ^ xibar ^ 2 a' Rm(<star dPsi, w> w - star dPsi),
    measured in the Frobenius-induced norm; a value < |xi|^2 guarantees the
    elliptic verdict of restricted_symbol.
    """
    xi = _check_xi(xi)
    assert_positive(omega, "omega")
    if alpha_p == 0:
        return 0.0
    basis = d_symbol_kernel(xi)
    cols = []
    for w in basis:
        star = hodge_star22(w, omega)
        arg = np.real(inner11(star, omega, omega)) * omega - star
        img = -2.0 * alpha_p * wedge_xi_extract(xi, rm_apply(r, arg, omega))
        cols.append(np.concatenate([img.real.ravel(), img.imag.ravel()]))
    m = np.stack(cols, axis=1)
    return float(np.linalg.svd(m, compute_uv=False)[0])


def coupled_symbol(xi, omega, abs_omega, r, alpha_p, f, h, dpsi, dh):
    """Symbol of the coupled (metric, bundle-metric) system at (dPsi, dH).

    Returns the pair
        (delta_tilde_symbol(dPsi) + 2 a' * i xi ^ xibar ^ Tr(F H^-1 dH),
         |xi|^2 dH).
    The second component never sees dPsi: the block structure is triangular.
    """
    xi = _check_xi(xi)
    assert_positive(h, "H")
    tr_form = np.einsum("kjab,bc,ca->kj", f, np.linalg.inv(h), dh)
    first = delta_tilde_symbol(xi, omega, abs_omega, r, alpha_p, dpsi)
    first = first + 2.0 * alpha_p * wedge_xi_extract(xi, tr_form)
    second = xi_norm_sq(xi, omega) * np.asarray(dh, dtype=complex)
    return first, second


def coupled_symbol_matrix(xi, omega, abs_omega, r, alpha_p, f, h, kernel_tol=KERNEL_TOL):
    """Real matrix of the coupled symbol on (d-symbol kernel) + Hermitian(r).

    Basis: the 4 kernel elements followed by the r^2 Hermitian bundle
    directions.  The lower-left block is verified to vanish identically.
    """
    xi = _check_xi(xi)
    rank = h.shape[0]
    kern = d_symbol_kernel(xi)
    hbasis = hermitian_basis(rank)
    dim = 4 + rank * rank
    mat = np.zeros((dim, dim))
    scale = xi_norm_sq(xi, omega) / (2.0 * float(norm_omega(omega, abs_omega)))
    zero_h = np.zeros((rank, rank), dtype=complex)
    zero_psi = np.zeros((3, 3), dtype=complex)
    for j, w in enumerate(kern):
        first, second = coupled_symbol(xi, omega, abs_omega, r, alpha_p, f, h, w, zero_h)
        if np.abs(second).max() > 0.0:
            raise ProjectionResidualError("coupled symbol is not block triangular")
        img_scale = max(float(np.abs(first).max()), scale)
        mat[:4, j] = _project_onto(kern, first, img_scale, kernel_tol, "coupled symbol image")
    for j, b in enumerate(hbasis):
        first, second = coupled_symbol(xi, omega, abs_omega, r, alpha_p, f, h, zero_psi, b)
        img_scale = max(float(np.abs(first).max()), scale)
        mat[:4, 4 + j] = _project_onto(kern, first, img_scale, kernel_tol, "coupled mixing block")
        mat[4:, 4 + j] = [float(np.real(np.trace(second @ c))) for c in hbasis]
    return mat
