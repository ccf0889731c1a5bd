"""Pointwise linear algebra of the standard symplectic space (R^{2n}, omega).

Fixes the canonical basis E = (e_1..e_n, f_1..f_n) with omega represented by
the block matrix [[0, -Id], [Id, 0]], and implements the correspondence
between coupling pairs (R, I), compatible tamings J and Siegel upper space
points tau, together with the Sp(2n, R) fractional action tying them all
together.

Sign convention: a Siegel point tau corresponds to couplings via
tau = R + i*I.  The alternate convention -R + i*I (which also occurs in the
supergravity literature) is exposed as ``alt_period``; only the R + i*I
convention is equivariant for the fractional action used here, see
``tests/test_symplectic.py``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Tolerances for exact-algebra identities in double precision.  The looser
# value covers identities that pass through a matrix inversion.
TOL_ALG = 1e-10
TOL_ALG_INV = 1e-8


class DimensionError(ValueError):
    """Matrix has the wrong shape for the requested symplectic operation."""


class DomainError(ValueError):
    """Input fails the invariants of its declared domain type."""


class PoleError(ArithmeticError):
    """Fractional transformation hit a non-invertible denominator."""


def omega(n: int) -> np.ndarray:
    """Matrix of the standard symplectic form on R^{2n}: [[0, -Id], [Id, 0]]."""
    if n < 1:
        raise DimensionError(f"need n >= 1, got {n}")
    idn = np.eye(n)
    return np.block([[np.zeros((n, n)), -idn], [idn, np.zeros((n, n))]])


def blocks(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a 2n x 2n matrix into the n x n blocks (a, b, c, d)."""
    m = np.asarray(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise DimensionError(f"expected square even-dimensional matrix, got {m.shape}")
    n = m.shape[0] // 2
    return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]


def sp_check(a: np.ndarray, tol: float = TOL_ALG) -> tuple[bool, float]:
    """Test membership in Sp(2n, R).

    Returns (ok, violation) where violation is the max-norm of A^T Omega A - Omega.
    """
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected square matrix, got {m.shape}")
    if m.shape[0] % 2:
        raise DimensionError(f"expected even dimension, got {m.shape[0]}")
    om = omega(m.shape[0] // 2)
    viol = float(np.max(np.abs(m.T @ om @ m - om)))
    return viol <= tol, viol


def sp_basis(n: int) -> list[np.ndarray]:
    """Basis of the Lie algebra sp(2n, R) = {X : X^T Omega + Omega X = 0}.

    Elements have block form [[A, B], [C, -A^T]] with B, C symmetric, so the
    dimension is n^2 + n(n+1) = n(2n+1).
    """
    if n < 1:
        raise DimensionError(f"need n >= 1, got {n}")
    out = []
    for i in range(n):
        for j in range(n):
            x = np.zeros((2 * n, 2 * n))
            x[i, j] = 1.0
            x[n + j, n + i] = -1.0
            out.append(x)
    for i in range(n):
        for j in range(i, n):
            x = np.zeros((2 * n, 2 * n))
            x[i, n + j] = 1.0
            x[j, n + i] = 1.0
            out.append(x)
    for i in range(n):
        for j in range(i, n):
            x = np.zeros((2 * n, 2 * n))
            x[n + i, j] = 1.0
            x[n + j, i] = 1.0
            out.append(x)
    return out


def in_sp_algebra(x: np.ndarray, tol: float = TOL_ALG) -> bool:
    x = np.asarray(x, dtype=float)
    om = omega(x.shape[0] // 2)
    return float(np.max(np.abs(x.T @ om + om @ x))) <= tol


def _is_symmetric(m: np.ndarray, tol: float) -> bool:
    return float(np.max(np.abs(m - m.T))) <= tol * max(1.0, float(np.max(np.abs(m))))


def min_eig_ratio(s: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix, relative to its spectral scale."""
    w = np.linalg.eigvalsh((s + s.T) / 2)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    return float(w[0]) / scale


def is_positive_definite(s: np.ndarray, rel_tol: float = 1e-12) -> bool:
    """Scale-invariant positive definiteness test via the eigenvalue bound."""
    return min_eig_ratio(s) > rel_tol


@dataclass(frozen=True)
class ElectromagneticPair:
    """Coupling pair (R, I): both symmetric n x n, I positive definite."""

    R: np.ndarray
    I: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.R, dtype=float)
        i = np.asarray(self.I, dtype=float)
        object.__setattr__(self, "R", r)
        object.__setattr__(self, "I", i)
        if r.shape != i.shape or r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise DimensionError(f"R, I must be square and matching, got {r.shape}, {i.shape}")
        if not _is_symmetric(r, TOL_ALG) or not _is_symmetric(i, TOL_ALG):
            raise DomainError("R and I must be symmetric")
        if not is_positive_definite(i):
            raise DomainError("I must be positive definite")

    @property
    def n(self) -> int:
        return self.R.shape[0]

    def siegel(self) -> "SiegelPoint":
        """Siegel point R + i*I (the equivariant sign convention)."""
        return SiegelPoint(self.R + 1j * self.I)

    def alt_period(self) -> np.ndarray:
        """The alternate sign convention -R + i*I, returned as a plain matrix."""
        return -self.R + 1j * self.I


@dataclass(frozen=True)
class Taming:
    """Complex structure J compatibly taming omega: J^2 = -Id, J^T Omega J = Omega,
    and the Gram matrix Omega @ J symmetric positive definite."""

    J: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.J, dtype=float)
        object.__setattr__(self, "J", j)
        if j.ndim != 2 or j.shape[0] != j.shape[1] or j.shape[0] % 2:
            raise DimensionError(f"taming must be square even-dimensional, got {j.shape}")
        n = j.shape[0] // 2
        om = omega(n)
        scale = max(1.0, float(np.max(np.abs(j))))
        if float(np.max(np.abs(j @ j + np.eye(2 * n)))) > TOL_ALG * scale ** 2:
            raise DomainError("J^2 != -Id")
        if float(np.max(np.abs(j.T @ om @ j - om))) > TOL_ALG * scale ** 2:
            raise DomainError("J does not preserve omega")
        gram = om @ j
        if not _is_symmetric(gram, TOL_ALG) or not is_positive_definite(gram):
            raise DomainError("omega(., J.) is not symmetric positive definite")

    @property
    def n(self) -> int:
        return self.J.shape[0] // 2

    def gram(self) -> np.ndarray:
        """Positive-definite Gram matrix Q with Q(s, t) = omega(s, J t)."""
        return omega(self.n) @ self.J


@dataclass(frozen=True)
class SiegelPoint:
    """Complex symmetric n x n matrix with positive definite imaginary part."""

    tau: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tau, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise DimensionError(f"expected square matrix, got {t.shape}")
        if not _is_symmetric(t.real, TOL_ALG) or not _is_symmetric(t.imag, TOL_ALG):
            raise DomainError("tau must be symmetric")
        # store bit-exactly symmetric so group laws hold to the last float bit
        object.__setattr__(self, "tau", (t + t.T) / 2)
        if not is_positive_definite(self.tau.imag):
            raise DomainError("Im(tau) must be positive definite")

    @property
    def n(self) -> int:
        return self.tau.shape[0]

    def couplings(self) -> ElectromagneticPair:
        return ElectromagneticPair(self.tau.real.copy(), self.tau.imag.copy())


def gamma(em: ElectromagneticPair) -> Taming:
    """Taming associated to the couplings: [[-I^-1 R, I^-1], [-I - R I^-1 R, R I^-1]]."""
    r, i = em.R, em.I
    iinv = np.linalg.inv(i)
    j = np.block([[-iinv @ r, iinv], [-i - r @ iinv @ r, r @ iinv]])
    return Taming(j)


def gamma_inv(j: Taming) -> ElectromagneticPair:
    """Recover the couplings from a taming.

    Solves e_a = sum_b N_ab f_b in the complex structure J (J acting as
    multiplication by i) and returns (R, I) = (-Re N, Im N).
    """
    n = j.n
    fvecs = np.vstack([np.zeros((n, n)), np.eye(n)])  # columns f_b
    jf = j.J @ fvecs
    evecs = np.vstack([np.eye(n), np.zeros((n, n))])  # columns e_a
    m = np.hstack([fvecs, jf])  # 2n x 2n, columns (f_b, J f_b)
    try:
        x = np.linalg.solve(m, evecs)  # column a holds (alpha_a, beta_a)
    except np.linalg.LinAlgError as err:  # cannot occur for a valid taming
        raise DomainError(f"degenerate taming: {err}") from err
    alpha = x[:n, :].T  # N_ab = alpha_ab + i beta_ab
    beta = x[n:, :].T
    return ElectromagneticPair(R=-alpha, I=beta)


def mu(j: Taming) -> SiegelPoint:
    """Siegel point of a taming: R + i*I with (R, I) = gamma_inv(J)."""
    return gamma_inv(j).siegel()


def mu_inv(tau: SiegelPoint) -> Taming:
    """Taming of a Siegel point, identifying R = Re(tau) and I = Im(tau)."""
    return gamma(tau.couplings())


def fractional_action(a: np.ndarray, tau: SiegelPoint | np.ndarray,
                      check: bool = True) -> SiegelPoint:
    """Left action of Sp(2n, R) on Siegel space: A . tau = (c + d tau)(a + b tau)^-1.

    Blocks follow the layout A = [[a, b], [c, d]].  Raises PoleError when
    a + b tau is singular.
    """
    t = tau.tau if isinstance(tau, SiegelPoint) else np.asarray(tau, dtype=complex)
    ab, bb, cb, db = blocks(np.asarray(a, dtype=float))
    den = ab + bb @ t
    num = cb + db @ t
    # Guard against a genuinely singular denominator before solving.
    sv = np.linalg.svd(den, compute_uv=False)
    if sv[-1] <= 1e-13 * max(sv[0], 1.0):
        raise PoleError("a + b tau is singular at this point")
    out = np.linalg.solve(den.T, num.T).T  # num @ den^-1
    if not check:
        return SiegelPoint(out) if isinstance(tau, SiegelPoint) else out
    return SiegelPoint((out + out.T) / 2)


def infinitesimal_fractional_action(x: np.ndarray, tau: SiegelPoint | np.ndarray) -> np.ndarray:
    """Derivative at the identity of the fractional action along X in sp(2n, R).

    Equals (X_c + X_d tau) - tau (X_a + X_b tau); symmetric whenever X lies
    in sp(2n, R) and tau is symmetric.
    """
    x = np.asarray(x, dtype=float)
    if not in_sp_algebra(x, TOL_ALG * max(1.0, float(np.max(np.abs(x))))):
        raise DomainError("X is not in sp(2n, R)")
    t = tau.tau if isinstance(tau, SiegelPoint) else np.asarray(tau, dtype=complex)
    xa, xb, xc, xd = blocks(x)
    return (xc + xd @ t) - t @ (xa + xb @ t)


def mobius_differential(a: np.ndarray, tau: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Differential of tau -> A . tau at tau applied to a tangent matrix h.

    d(A.tau)[h] = (d - (A.tau) b) h (a + b tau)^-1 for A = [[a, b], [c, d]].
    """
    t = np.asarray(tau, dtype=complex)
    ab, bb, cb, db = blocks(np.asarray(a, dtype=float))
    den = ab + bb @ t
    deninv = np.linalg.inv(den)
    atau = (cb + db @ t) @ deninv
    return (db - atau @ bb) @ np.asarray(h, dtype=complex) @ deninv


def conjugate_taming(a: np.ndarray, j: Taming) -> Taming:
    """Pointwise duality action on tamings: J -> A J A^-1 for A in Sp(2n, R)."""
    m = np.asarray(a, dtype=float)
    ok, viol = sp_check(m, TOL_ALG_INV * max(1.0, float(np.max(np.abs(m))) ** 2))
    if not ok:
        raise DomainError(f"A is not symplectic (violation {viol:.3e})")
    return Taming(m @ j.J @ np.linalg.inv(m))


def random_couplings(n: int, rng: np.random.Generator, eps: float = 0.1) -> ElectromagneticPair:
    """Random valid couplings: R symmetric Gaussian, I = M^T M + eps*Id."""
    r = rng.standard_normal((n, n))
    r = (r + r.T) / 2
    m = rng.standard_normal((n, n))
    i = m.T @ m + eps * np.eye(n)
    return ElectromagneticPair(r, i)


def random_taming(n: int, rng: np.random.Generator) -> Taming:
    """Random valid taming, generated as gamma of random couplings."""
    return gamma(random_couplings(n, rng))


def random_sp(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random element of Sp(2n, R) as the exponential of a random sp element."""
    basis = sp_basis(n)
    coeff = rng.standard_normal(len(basis)) * scale
    x = sum(c * b for c, b in zip(coeff, basis))
    return scipy.linalg.expm(x)


def random_sp_algebra(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random element of the Lie algebra sp(2n, R)."""
    basis = sp_basis(n)
    coeff = rng.standard_normal(len(basis)) * scale
    return sum(c * b for c, b in zip(coeff, basis))
