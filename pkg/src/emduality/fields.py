"""Pointwise Lorentzian exterior algebra for symplectic-vector-valued two-forms.

Conventions, fixed once and used everywhere:
  * coordinates (x^0..x^3) = (t, x, y, z), metric signature (-, +, +, +);
  * Levi-Civita symbol eps_{0123} = +1;
  * a two-form is stored as its antisymmetric component matrix w_{mu nu}
    (so dt^dx has w_{01} = 1 = -w_{10});
  * the Hodge dual on two-forms is
    (*w)_{mu nu} = (1/2) sqrt(-det g) eps_{mu nu rho sigma} w^{rho sigma},
    which satisfies ** = -1 in Lorentzian signature;
  * the induced inner product of two-forms is (a, b)_g = (1/2) a_{mu nu} b^{mu nu}.

With these choices the solutions of the algebraic constraint *V = -J(V)
(equivalently, lower block = R F - I * F) span the +1 eigenspace of the
twisted star operator; ``project_sd`` labels its outputs by that computed
eigenvalue.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .symplectic import ElectromagneticPair, Taming, omega


def _levi_civita_4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    from itertools import permutations

    def sign(p):
        s = 1
        p = list(p)
        for i in range(len(p)):
            for j in range(i + 1, len(p)):
                if p[i] > p[j]:
                    s = -s
        return s

    for p in permutations(range(4)):
        eps[p] = sign(p)
    return eps


EPS4 = _levi_civita_4()
ETA = np.diag([-1.0, 1.0, 1.0, 1.0])


class SingularMetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricPoint:
    """Lorentzian metric value at a point, signature (-, +, +, +)."""

    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "g", (g + g.T) / 2)
        if g.shape != (4, 4):
            raise SingularMetricError(f"metric must be 4x4, got {g.shape}")
        w = np.linalg.eigvalsh(self.g)
        if not (w[0] < 0 and w[1] > 0):
            raise SingularMetricError("metric must have signature (-, +, +, +)")

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.g))


def _as_metric(g) -> np.ndarray:
    return g.g if isinstance(g, MetricPoint) else np.asarray(g, dtype=float)


def _as_taming(j) -> np.ndarray:
    return j.J if isinstance(j, Taming) else np.asarray(j, dtype=float)


def hodge2(g, w: np.ndarray) -> np.ndarray:
    """Hodge dual of two-form component matrices; broadcasts over leading axes.

    g may be a single 4x4 metric or a stack broadcastable against w's leading
    shape.  Satisfies hodge2(g, hodge2(g, w)) = -w.
    """
    gm = _as_metric(g)
    w = np.asarray(w, dtype=w.dtype if np.iscomplexobj(w) else float)
    det = np.linalg.det(gm)
    if np.any(np.abs(det) < 1e-300):
        raise SingularMetricError("metric is degenerate")
    if np.any(det >= 0):
        raise SingularMetricError("metric must have Lorentzian (negative) determinant")
    ginv = np.linalg.inv(gm)
    dual = 0.5 * np.einsum("mnrs,...ra,...sb,...ab->...mn", EPS4, ginv, ginv, w)
    return np.sqrt(-det)[..., None, None] * dual if det.ndim else np.sqrt(-det) * dual


def form_inner(g, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a, b)_g = (1/2) a_{mu nu} b^{mu nu}; broadcasts over leading axes."""
    gm = _as_metric(g)
    ginv = np.linalg.inv(gm)
    return 0.5 * np.einsum("...ab,...ra,...sb,...rs->...", a, ginv, ginv, b)


def twisted_star(g, j, v: np.ndarray) -> np.ndarray:
    """Hodge dual on the form index combined with the taming on the fiber index.

    v has shape (..., 2n, 4, 4); squares to +Id on two-forms.
    """
    jm = _as_taming(j)
    gm = _as_metric(g)
    if gm.ndim > 2:
        gm = gm[..., None, :, :]  # broadcast one metric across the fiber index
    starred = hodge2(gm, v)
    return np.einsum("AB,...Bmn->...Amn", jm, starred) if jm.ndim == 2 else \
        np.einsum("...AB,...Bmn->...Amn", jm, starred)


def project_sd(g, j, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenprojections of the twisted star: returns (v_plus, v_minus).

    v_plus is fixed by the twisted star and v_minus is negated; solutions of
    *V = -J(V) have v_minus = 0 (they carry twisted-star eigenvalue +1).
    """
    sv = twisted_star(g, j, v)
    return (v + sv) / 2, (v - sv) / 2


def assemble_V(f: np.ndarray, em: ElectromagneticPair, g) -> np.ndarray:
    """Stack (F, R F - I * F) into a twisted self-dual symplectic block.

    f has shape (n, 4, 4); the output (2n, 4, 4) satisfies *V = -gamma(em)(V)
    up to roundoff.
    """
    f = np.asarray(f, dtype=float)
    sf = hodge2(g, f)
    lower = np.einsum("LS,Smn->Lmn", em.R, f) - np.einsum("LS,Smn->Lmn", em.I, sf)
    return np.concatenate([f, lower], axis=0)


def selfduality_violation(g, j, v: np.ndarray) -> float:
    """Max-norm of *V + J(V); zero exactly on twisted self-dual blocks."""
    jm = _as_taming(j)
    sv = hodge2(g, v)
    jv = np.einsum("AB,...Bmn->...Amn", jm, v)
    return float(np.max(np.abs(sv + jv)))


def complexify_plus(v: np.ndarray, g) -> np.ndarray:
    """Self-dual complexification V+ = (V - i *V) / 2, with *V+ = +i V+."""
    return (v - 1j * hodge2(g, v)) / 2


def complexify_minus(v: np.ndarray, g) -> np.ndarray:
    return (v + 1j * hodge2(g, v)) / 2


def twisted_pairing(g, j, a: np.ndarray, b: np.ndarray) -> float:
    """Twisted exterior pairing of fiber-valued two-forms:
    sum_{A,B} (a^A, b^B)_g Q_{AB} with Q = omega(., J.)."""
    jm = _as_taming(j)
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"rank mismatch: {a.shape} vs {b.shape}")
    q = omega(jm.shape[0] // 2) @ jm
    inner = form_inner(g, a[:, None, :, :], b[None, :, :, :])  # (A, B)
    return float(np.einsum("AB,AB->", q, inner))


def oslash_g(g, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Inner g-contraction of two-forms: (r1 oslash r2)_{ab} = r1_{ac} r2_b{}^c."""
    gm = _as_metric(g)
    ginv = np.linalg.inv(gm)
    return np.einsum("...ac,...cd,...bd->...ab", r1, ginv, r2)


def oslash_Q(g, j, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Twisted inner contraction sum_{A,B} Q_{AB} (v^A oslash_g w^B).

    For twisted self-dual v = w this is exactly the gauge stress tensor."""
    jm = _as_taming(j)
    q = omega(jm.shape[0] // 2) @ jm
    contracted = oslash_g(g, v[:, None, :, :], w[None, :, :, :])  # (A, B, a, b)
    return np.einsum("AB,ABab->ab", q, contracted)


def stress_gauge(g, j, v: np.ndarray, check: bool = True) -> np.ndarray:
    """Gauge stress tensor omega(V_{ac}, J V_b{}^c), symmetrised.

    Warns when v is not twisted self-dual for (g, j), since the formula
    represents the physical stress only on that subspace.
    """
    jm = _as_taming(j)
    if check:
        viol = selfduality_violation(g, jm, v)
        if viol > 1e-8 * max(1.0, float(np.max(np.abs(v)))):
            warnings.warn(f"stress_gauge input is not twisted self-dual "
                          f"(violation {viol:.2e})", stacklevel=2)
    t = oslash_Q(g, jm, v, v)
    return (t + t.T) / 2


def stress_gauge_couplings(g, em: ElectromagneticPair, f: np.ndarray) -> np.ndarray:
    """Gauge stress in coupling form: 2 I F_{ac} F_b{}^c - (1/2) g_ab I F.F."""
    gm = _as_metric(g)
    ginv = np.linalg.inv(gm)
    fup = np.einsum("Lab,ca,db->Lcd", f, ginv, ginv)
    t = 2.0 * np.einsum("LS,Lac,Sbd,cd->ab", em.I, f, f, ginv)
    trace_part = np.einsum("LS,Lab,Sab->", em.I, f, fup)
    return t - 0.5 * gm * trace_part


def stress_scalar(g, chart_metric: np.ndarray, dphi: np.ndarray) -> np.ndarray:
    """Scalar stress G_ij dphi^i dphi^j - (1/2) g G_ij dphi^i . dphi^j.

    dphi has shape (4, n_s): dphi[a, i] = d_a phi^i.
    """
    gm = _as_metric(g)
    ginv = np.linalg.inv(gm)
    cm = np.asarray(chart_metric, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    t = np.einsum("ij,ai,bj->ab", cm, dphi, dphi)
    trace = np.einsum("ij,ai,bj,ab->", cm, dphi, dphi, ginv)
    return t - 0.5 * gm * trace


# ------------------------------------------------------------ random helpers

def random_lorentz_metric(rng: np.random.Generator, scale: float = 0.3) -> np.ndarray:
    """Random metric of signature (-, +, +, +): e^T eta e for e near Id."""
    e = np.eye(4) + scale * rng.standard_normal((4, 4))
    while abs(np.linalg.det(e)) < 0.1:
        e = np.eye(4) + scale * rng.standard_normal((4, 4))
    if np.linalg.det(e) < 0:
        e[0] = -e[0]
    return e.T @ ETA @ e


def random_two_forms(n: int, rng: np.random.Generator) -> np.ndarray:
    """n random antisymmetric 4x4 matrices, shape (n, 4, 4)."""
    a = rng.standard_normal((n, 4, 4))
    return a - np.swapaxes(a, -1, -2)
