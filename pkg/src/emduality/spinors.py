"""Real Clifford algebra of Lorentzian 4-space, spin connections from
orthonormal frames, real Killing spinor transport and verification, the
lightlike/spacelike one-form system built from spinor bilinears, and the
pointwise chiral endomorphism algebra.

Conventions (fixed once, validated in the tests):
  * signature (-, +, +, +), frame metric eta = diag(-1, 1, 1, 1);
  * real Majorana generators (with eps = [[0,1],[-1,0]], s1 = [[0,1],[1,0]],
    s3 = [[1,0],[0,-1]]):
        gamma_0 = eps (x) 1,   gamma_1 = s1 (x) 1,
        gamma_2 = s3 (x) s1,   gamma_3 = s3 (x) s3;
  * gamma5 = gamma_0 gamma_1 gamma_2 gamma_3, gamma5^2 = -Id;
  * spinor derivative D_mu = d_mu + (1/4) w_{mu a b} gamma^a gamma^b and
    Killing operator D_mu - (lam/2) gamma_mu; with the connection produced
    here this operator is flat on the constant-curvature z > 0 patch, which
    the path-independence tests witness.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fields import ETA
from .grids import GridPatch, christoffel, partials


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class CliffordRep:
    gamma: np.ndarray  # (4, 4, 4), gamma[a] real
    eta: np.ndarray

    @property
    def gamma5(self) -> np.ndarray:
        g = self.gamma
        return g[0] @ g[1] @ g[2] @ g[3]

    def gamma_upper(self) -> np.ndarray:
        return np.einsum("ab,bij->aij", np.linalg.inv(self.eta), self.gamma)


def clifford_rep() -> CliffordRep:
    """The fixed real Majorana representation of the (3,1) Clifford relations."""
    eps = np.array([[0.0, 1.0], [-1.0, 0.0]])
    s1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    s3 = np.array([[1.0, 0.0], [0.0, -1.0]])
    one = np.eye(2)
    gamma = np.stack([np.kron(eps, one), np.kron(s1, one),
                      np.kron(s3, s1), np.kron(s3, s3)])
    return CliffordRep(gamma=gamma, eta=ETA.copy())


# ------------------------------------------------------------------- frames

@dataclass
class FramePatch:
    """Grid-sampled vierbein e^a_mu (frame index first), with optional
    analytic evaluators for the vierbein and spin connection (the built-in
    frames provide them; path integration needs them at off-node points)."""

    grid: GridPatch
    e: np.ndarray                    # grid + (a, mu)
    name: str = "custom"
    frame_fn: object = None          # x (..., 4) -> e (..., a, mu)
    conn_fn: object = None           # x (..., 4) -> w (..., mu, a, b)

    def __post_init__(self):
        if self.e.shape != self.grid.shape + (4, 4):
            raise FrameError(f"vierbein shape {self.e.shape} does not match grid")
        if np.min(np.abs(np.linalg.det(self.e))) < 1e-12:
            raise FrameError("singular frame")

    def metric(self) -> np.ndarray:
        """g_{mu nu} = e^a_mu eta_ab e^b_nu per node."""
        return np.einsum("...am,ab,...bn->...mn", self.e, ETA, self.e)

    def inverse(self) -> np.ndarray:
        """e^mu_a, shape grid + (mu, a)."""
        return np.linalg.inv(self.e)


def conformal_connection(dln_omega) -> object:
    """Analytic spin connection of a conformal frame e^a_mu = Omega delta^a_mu:
    w_{mu a b} = eta_{a mu} d_b ln(Omega) - eta_{b mu} d_a ln(Omega).

    dln_omega(x) must return the coordinate gradient of ln(Omega), shape
    (..., 4)."""

    def conn(pts):
        pts = np.asarray(pts, dtype=float)
        d = np.asarray(dln_omega(pts))
        t1 = np.einsum("am,...b->...mab", ETA, d)
        return t1 - np.swapaxes(t1, -1, -2)

    return conn


def builtin_frame(name: str, grid: GridPatch, lam: float = 1.0) -> FramePatch:
    """'minkowski', or 'ads4-poincare': conformal factor 1/(lam z) with z the
    fourth coordinate; the grid must keep z > 0."""
    x = grid.coords()
    if name == "minkowski":
        def frame_fn(pts):
            pts = np.asarray(pts, dtype=float)
            return np.broadcast_to(np.eye(4), pts.shape[:-1] + (4, 4)).copy()

        def dln(pts):
            pts = np.asarray(pts, dtype=float)
            return np.zeros(pts.shape[:-1] + (4,))

        return FramePatch(grid, frame_fn(x), name="minkowski",
                          frame_fn=frame_fn, conn_fn=conformal_connection(dln))
    if name == "ads4-poincare":
        if lam <= 0:
            raise FrameError("lam must be positive")
        if np.min(x[..., 3]) <= 0:
            raise FrameError("ads4-poincare frame needs z > 0 on the whole grid")

        def frame_fn(pts):
            pts = np.asarray(pts, dtype=float)
            scale = 1.0 / (lam * pts[..., 3])
            return np.einsum("...,am->...am", scale, np.eye(4))

        def dln(pts):
            # ln(Omega) = -ln(lam z)
            pts = np.asarray(pts, dtype=float)
            out = np.zeros(pts.shape[:-1] + (4,))
            out[..., 3] = -1.0 / pts[..., 3]
            return out

        return FramePatch(grid, frame_fn(x), name="ads4-poincare",
                          frame_fn=frame_fn, conn_fn=conformal_connection(dln))
    raise FrameError(f"unknown builtin frame {name!r}")


def spin_connection(fr: FramePatch) -> np.ndarray:
    """Torsion-free metric spin connection w_{mu a b} from the sampled frame.

    Finite differences of the frame (margin-1 interior); the output is
    antisymmetrised in (a, b) so that property holds to the last bit.
    """
    e = fr.e
    einv = fr.inverse()
    e_low = np.einsum("ab,...bm->...am", ETA, e)          # e_{a mu}
    de = partials(e_low, fr.grid)                         # (..., a, m, n) = d_n e_{a m}
    c = np.einsum("...anm->...amn", de) - de              # C[a, m, n] = d_m e_{a n} - d_n e_{a m}
    t1 = np.einsum("...na,...bmn->...mab", einv, c)       # e^n_a C[b, m, n]
    t2 = np.einsum("...nb,...amn->...mab", einv, c)
    t3 = np.einsum("...ra,...sb,...crs,...cm->...mab", einv, einv, c, e)
    w = 0.5 * (t1 - t2 - t3)
    return (w - np.swapaxes(w, -1, -2)) / 2


def metric_compatibility_residual(fr: FramePatch, w: np.ndarray) -> float:
    """Max norm over the margin-2 interior of
    d_mu e^a_nu + w_mu^a_b e^b_nu - Gam^l_{mu nu} e^a_l  (second order)."""
    g = fr.metric()
    gam = christoffel(g, fr.grid)
    de = np.moveaxis(partials(fr.e, fr.grid), -1, -3)     # (..., mu, a, nu)
    wu = np.einsum("ac,...mcb->...mab", np.linalg.inv(ETA), w)
    term = (de + np.einsum("...mab,...bn->...man", wu, fr.e)
            - np.einsum("...lmn,...al->...man", gam, fr.e))
    return float(np.max(np.abs(term[fr.grid.interior()])))


# ---------------------------------------------------------- killing spinors

def _transport_generator(rep: CliffordRep, w_mab: np.ndarray, e_am: np.ndarray,
                         lam: float) -> np.ndarray:
    """M_mu = -(1/4) w_{mu a b} gamma^a gamma^b + (lam/2) gamma_mu, batched."""
    gup = rep.gamma_upper()
    quarter = 0.25 * np.einsum("...mab,aij,bjk->...mik", w_mab, gup, gup)
    gamma_mu = np.einsum("...am,aij->...mij", e_am, rep.gamma)
    return -quarter + 0.5 * lam * gamma_mu


def killing_residual(fr: FramePatch, eps: np.ndarray, lam: float,
                     rep: CliffordRep | None = None) -> np.ndarray:
    """d_mu eps + (1/4) w_{mu a b} gamma^a gamma^b eps - (lam/2) gamma_mu eps
    per node and direction, shape grid + (mu, component).

    Uses the finite-difference spin connection, so it is an independent check
    on spinor fields produced by ``integrate_killing`` (which integrates the
    analytic connection).  Valid on the margin-2 interior.
    """
    rep = rep or clifford_rep()
    w = spin_connection(fr)
    deps = np.moveaxis(partials(eps, fr.grid), -1, -2)    # (..., mu, comp)
    m = _transport_generator(rep, w, fr.e, lam)
    return deps - np.einsum("...mij,...j->...mi", m, eps)


def killing_residual_max(fr: FramePatch, eps: np.ndarray, lam: float) -> float:
    return float(np.max(np.abs(killing_residual(fr, eps, lam)[fr.grid.interior()])))


def _rk4_step(m_of_s, y0: np.ndarray, h: float) -> np.ndarray:
    def apply(m, y):
        return np.einsum("...ij,...j->...i", m, y)

    m0 = m_of_s(0.0)
    m_half = m_of_s(h / 2)  # shared by the two middle stages
    m1 = m_of_s(h)
    k1 = apply(m0, y0)
    k2 = apply(m_half, y0 + h / 2 * k1)
    k3 = apply(m_half, y0 + h / 2 * k2)
    k4 = apply(m1, y0 + h * k3)
    return y0 + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_killing(fr: FramePatch, lam: float, eps0: np.ndarray,
                      rep: CliffordRep | None = None,
                      axis_order: tuple[int, ...] = (0, 1, 2, 3)) -> np.ndarray:
    """Fill the grid with the Killing transport of eps0 from the origin corner,
    sweeping one axis at a time in the given order (RK4 per edge).

    Needs the analytic frame/connection evaluators of a built-in frame: RK4
    samples them between nodes.
    """
    rep = rep or clifford_rep()
    if fr.conn_fn is None or fr.frame_fn is None:
        raise FrameError("integrate_killing needs a frame with analytic "
                         "evaluators (use builtin_frame)")
    grid = fr.grid
    h = grid.h
    shape = grid.shape
    coords = grid.coords()
    eps = np.zeros(shape + (4,))
    eps[(0,) * 4] = np.asarray(eps0, dtype=float)

    def m_axis(pts, axis):
        w = np.asarray(fr.conn_fn(pts))
        m = _transport_generator(rep, w, fr.frame_fn(pts), lam)
        return m[..., axis, :, :]

    for pos, axis in enumerate(axis_order):
        idx = [slice(0, 1)] * 4
        for done in axis_order[:pos]:
            idx[done] = slice(None)
        for k in range(shape[axis] - 1):
            cur, nxt = list(idx), list(idx)
            cur[axis] = slice(k, k + 1)
            nxt[axis] = slice(k + 1, k + 2)
            pts = coords[tuple(cur)]

            def m_of_s(s, axis=axis, pts=pts):
                q = pts.copy()
                q[..., axis] += s
                return m_axis(q, axis)

            eps[tuple(nxt)] = _rk4_step(m_of_s, eps[tuple(cur)], float(h[axis]))
    return eps


def path_defect(fr: FramePatch, lam: float, eps0: np.ndarray,
                rep: CliffordRep | None = None) -> float:
    """Far-corner disagreement between two axis sweep orders: an integrability
    measure of the Killing transport (zero for a flat connection up to the
    integrator error)."""
    e1 = integrate_killing(fr, lam, eps0, rep, axis_order=(0, 1, 2, 3))
    e2 = integrate_killing(fr, lam, eps0, rep, axis_order=(3, 2, 1, 0))
    corner = tuple(n - 1 for n in fr.grid.shape)
    return float(np.max(np.abs(e1[corner] - e2[corner])))


# -------------------------------------------------------- bilinear one-forms

def invariant_bilinears(rep: CliffordRep | None = None) -> dict[int, list[np.ndarray]]:
    """Bases of the spaces {C : gamma_a^T C = sigma C gamma_a for all a},
    keyed by sigma in {+1, -1}; computed by brute-force null space."""
    rep = rep or clifford_rep()
    out = {}
    for sigma in (1, -1):
        rows = []
        for a in range(4):
            ga = rep.gamma[a]
            # row-major vec: vec(G^T C - sigma C G) = (G^T kron I - sigma I kron G^T) vec C
            rows.append(np.kron(ga.T, np.eye(4)) - sigma * np.kron(np.eye(4), ga.T))
        import scipy.linalg
        null = scipy.linalg.null_space(np.vstack(rows), rcond=1e-12)
        out[sigma] = [null[:, k].reshape(4, 4) for k in range(null.shape[1])]
    return out


def killing_bilinears(fr: FramePatch, eps: np.ndarray,
                      rep: CliffordRep | None = None):
    """One-forms (u, l) built from a real spinor field: for Killing spinors,
    u is lightlike and l unit spacelike with g(u, l) = 0.

    Construction found by searching the finite set of invariant-bilinear
    choices (the gamma5-inserted vector bilinear vanishes identically in this
    representation, so the spacelike partner comes from the tensor bilinear):

        u_mu   = eps^T C gamma_mu eps            (null current),
        om_ab  = eps^T C gamma_{[a} gamma_{b]} eps / 2,
        l      = -(componentwise least-squares u-contraction of om),

    where C is the sigma = -1 invariant pairing.  om decomposes as u ^ l, so
    the contraction recovers l up to a shift along u, which the first-order
    system absorbs into its free one-form; l is normalised per node (the
    search found the normalisation to be exactly 1 already).
    """
    rep = rep or clifford_rep()
    c = _PAIRING(rep)
    gam = rep.gamma
    u_frame = np.einsum("...i,ij,ajk,...k->...a", eps, c, gam, eps)
    gab = 0.5 * (np.einsum("aij,bjk->abik", gam, gam)
                 - np.einsum("bij,ajk->abik", gam, gam))
    om_frame = np.einsum("...i,ij,abjk,...k->...ab", eps, c, gab, eps)
    u = np.einsum("...am,...a->...m", fr.e, u_frame)
    om = np.einsum("...am,...bn,...ab->...mn", fr.e, fr.e, om_frame)
    uu = np.maximum(np.einsum("...m,...m->...", u, u), 1e-300)
    l_raw = -np.einsum("...m,...mn->...n", u, om) / uu[..., None]
    g = fr.metric()
    ginv = np.linalg.inv(g)
    norm_sq = np.einsum("...mn,...m,...n->...", ginv, l_raw, l_raw)
    if np.min(norm_sq) <= 0:
        warnings.warn("spacelike bilinear is not spacelike everywhere", stacklevel=2)
    l = l_raw / np.sqrt(np.abs(norm_sq))[..., None]
    return u, l


def _PAIRING(rep: CliffordRep) -> np.ndarray:
    """Majorana pairing used by ``killing_bilinears``: the sigma = -1
    invariant bilinear (gamma_a^T C = -C gamma_a), for which C gamma_a is
    symmetric and the vector bilinear is a nonzero quadratic form."""
    mats = invariant_bilinears(rep)[-1]
    if len(mats) != 1:
        raise RuntimeError(f"expected one sigma=-1 invariant bilinear, got {len(mats)}")
    m = mats[0]
    return m / np.max(np.abs(m))


# ------------------------------------------------- first-order system check

@dataclass
class FirstOrderReport:
    du_residual: float
    dl_residual: float
    u_norm_violation: float        # max |g(u, u)|
    l_norm_violation: float        # max |g(l, l) - 1|
    orthogonality_violation: float
    u_killing_residual: float      # max |sym grad of u-flat|
    dkappa_max: float              # reported, not asserted
    nontrivial: bool

    @property
    def max_residual(self) -> float:
        return max(self.du_residual, self.dl_residual, self.u_norm_violation,
                   self.l_norm_violation, self.orthogonality_violation)


def extract_kappa(u: np.ndarray, l: np.ndarray, lam: float, g: np.ndarray,
                  grid: GridPatch) -> np.ndarray:
    """Least-squares one-form kappa with grad l = kappa (x) u + lam (l (x) l - g).

    Componentwise least squares per node; meaningful wherever u is nonzero.
    """
    gam = christoffel(g, grid)
    dl = np.moveaxis(partials(l, grid), -1, -2)            # (..., m, n) = d_m l_n
    grad_l = dl - np.einsum("...lmn,...l->...mn", gam, l)
    w = grad_l - lam * (np.einsum("...m,...n->...mn", l, l) - g)
    denom = np.maximum(np.einsum("...n,...n->...", u, u), 1e-300)
    return np.einsum("...mn,...n->...m", w, u) / denom[..., None]


def verify_thm53(u: np.ndarray, l: np.ndarray, kappa: np.ndarray, lam: float,
                 g: np.ndarray, grid: GridPatch) -> FirstOrderReport:
    """Residuals of the first-order system for the lightlike/spacelike pair:

        grad u = lam u ^ l,    grad l = kappa (x) u + lam (l (x) l - g),

    plus the algebraic constraints g(u,u) = 0, g(l,l) = 1, g(u,l) = 0, the
    Killing check for the vector dual to u, and the (reported, not asserted)
    size of d kappa.
    """
    inner = grid.interior()
    gam = christoffel(g, grid)
    ginv = np.linalg.inv(g)

    du = np.moveaxis(partials(u, grid), -1, -2)
    grad_u = du - np.einsum("...lmn,...l->...mn", gam, u)
    wedge = np.einsum("...m,...n->...mn", u, l) - np.einsum("...m,...n->...mn", l, u)
    res_u = grad_u - lam * wedge

    dl = np.moveaxis(partials(l, grid), -1, -2)
    grad_l = dl - np.einsum("...lmn,...l->...mn", gam, l)
    res_l = grad_l - np.einsum("...m,...n->...mn", kappa, u) \
        - lam * (np.einsum("...m,...n->...mn", l, l) - g)

    uu = np.einsum("...mn,...m,...n->...", ginv, u, u)
    ll = np.einsum("...mn,...m,...n->...", ginv, l, l)
    ul = np.einsum("...mn,...m,...n->...", ginv, u, l)

    killing = grad_u + np.swapaxes(grad_u, -1, -2)

    dkappa = np.moveaxis(partials(kappa, grid), -1, -2)
    dkappa = dkappa - np.swapaxes(dkappa, -1, -2)

    nontrivial = bool(np.max(np.abs(u[inner])) > 1e-10)
    return FirstOrderReport(
        du_residual=float(np.max(np.abs(res_u[inner]))),
        dl_residual=float(np.max(np.abs(res_l[inner]))),
        u_norm_violation=float(np.max(np.abs(uu[inner]))),
        l_norm_violation=float(np.max(np.abs(ll[inner] - 1.0))),
        orthogonality_violation=float(np.max(np.abs(ul[inner]))),
        u_killing_residual=float(np.max(np.abs(killing[inner]))),
        dkappa_max=float(np.max(np.abs(dkappa[inner]))),
        nontrivial=nontrivial)


# ----------------------------------------------------------- chiral algebra

def chiral_projectors(rep: CliffordRep | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the eigenspaces of the complex volume element i gamma5."""
    rep = rep or clifford_rep()
    nu_c = 1j * rep.gamma5
    ident = np.eye(4, dtype=complex)
    return (ident + nu_c) / 2, (ident - nu_c) / 2


def t_w(rep: CliffordRep, w: complex, eps: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Chiral Killing endomorphism: T_w(eps)(v) = gamma(v)(w P+ eps + conj(w) P- eps)
    for a frame vector v (components in the orthonormal frame)."""
    p_plus, p_minus = chiral_projectors(rep)
    gv = np.einsum("a,aij->ij", np.asarray(v, dtype=float), rep.gamma)
    return gv @ (w * (p_plus @ eps) + np.conj(w) * (p_minus @ eps))


def chiral_operator_check(w: complex, eps1: np.ndarray, eps2: np.ndarray,
                          rep: CliffordRep | None = None,
                          rng: np.random.Generator | None = None) -> dict[str, float]:
    """Pointwise verification of the chiral endomorphism algebra.

    eps1, eps2 are the claimed chiral halves (projected with a warning if they
    are not).  Returns residuals: linearity of T_w, compatibility with the
    real structure (componentwise conjugation), and the reduction to the real
    Killing endomorphism with lam = 2w for real w.
    """
    rep = rep or clifford_rep()
    rng = rng or np.random.default_rng(0)
    p_plus, p_minus = chiral_projectors(rep)
    eps1 = np.asarray(eps1, dtype=complex)
    eps2 = np.asarray(eps2, dtype=complex)
    if np.max(np.abs(p_minus @ eps1)) > 1e-10 * max(1.0, np.max(np.abs(eps1))):
        warnings.warn("eps1 is not chiral; projecting", stacklevel=2)
        eps1 = p_plus @ eps1
    if np.max(np.abs(p_plus @ eps2)) > 1e-10 * max(1.0, np.max(np.abs(eps2))):
        warnings.warn("eps2 is not chiral; projecting", stacklevel=2)
        eps2 = p_minus @ eps2
    eps = eps1 + eps2

    out = {}
    vs = rng.standard_normal((8, 4))
    lin = 0.0
    conj_comp = 0.0
    for v in vs:
        t_val = t_w(rep, w, eps, v)
        lin = max(lin, float(np.max(np.abs(t_w(rep, w, 2.5 * eps, v) - 2.5 * t_val))))
        # real structure: conjugation swaps the chiral halves and w <-> conj w
        conj_comp = max(conj_comp, float(np.max(np.abs(
            np.conj(t_val) - t_w(rep, w, np.conj(eps), v)))))
    out["linearity"] = lin
    out["real_structure"] = conj_comp
    if abs(w.imag) < 1e-14:
        red = 0.0
        for v in vs:
            real_eps = eps + np.conj(eps)  # a c-real spinor
            red = max(red, float(np.max(np.abs(
                t_w(rep, w, real_eps, v)
                - w.real * np.einsum("a,aij,j->i", v, rep.gamma, real_eps)))))
        out["real_w_reduction"] = red
    return out
