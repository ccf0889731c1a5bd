"""Period-map models: scalar charts, isometries, the model file format and the
built-in registry (constant couplings, the identity map on the upper half
plane, the two-field axio-dilaton matrix and the cubic two-field model)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import expressions as ex
from .symplectic import DomainError, SiegelPoint, fractional_action, mobius_differential


class ModelError(ValueError):
    pass


class ModelInvalidError(ModelError):
    """A model evaluated outside Siegel space."""


class PoleError(ArithmeticError):
    pass


# ------------------------------------------------------------------ charts

@dataclass(frozen=True)
class ScalarChart:
    """Coordinate chart on the scalar manifold.

    kind "poincare": upper half plane, coordinates (x, y) with y > 0 and
    metric (dx^2 + dy^2) / y^2.  kind "flat": R^dim with the Euclidean metric.
    The box is the compact sampling domain used for rank decisions.
    """

    kind: str
    dim: int
    box: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("flat", "poincare"):
            raise ModelError(f"unsupported chart kind {self.kind!r}")
        if self.kind == "poincare" and self.dim != 2:
            raise ModelError("poincare chart requires dim 2")
        if not self.box:
            if self.kind == "poincare":
                object.__setattr__(self, "box", ((-1.0, 1.0), (0.5, 2.0)))
            else:
                object.__setattr__(self, "box", tuple((-1.0, 1.0) for _ in range(self.dim)))
        if self.kind == "poincare" and self.box[1][0] <= 0:
            raise ModelError("poincare sampling box must have y > 0")

    def symbols(self) -> set[str]:
        if self.kind == "poincare":
            return {"tau"}
        return {f"x{i + 1}" for i in range(self.dim)}

    def env(self, p: np.ndarray) -> dict[str, complex]:
        p = np.asarray(p, dtype=float)
        if self.kind == "poincare":
            return {"tau": complex(p[0], p[1]), "ctau": complex(p[0], -p[1])}
        return {f"x{i + 1}": complex(p[i]) for i in range(self.dim)}

    def denv(self, v: np.ndarray) -> dict[str, complex]:
        v = np.asarray(v, dtype=float)
        if self.kind == "poincare":
            return {"tau": complex(v[0], v[1]), "ctau": complex(v[0], -v[1])}
        return {f"x{i + 1}": complex(v[i]) for i in range(self.dim)}

    def in_domain(self, p: np.ndarray) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            return False
        if self.kind == "poincare":
            return bool(p[1] > 0)
        return True

    def metric(self, p: np.ndarray) -> np.ndarray:
        if self.kind == "poincare":
            y = float(p[1])
            return np.eye(2) / y ** 2
        return np.eye(self.dim)

    def metric_deriv(self, p: np.ndarray) -> np.ndarray:
        """d1G[k, i, j] = d G_ij / d x^k."""
        out = np.zeros((self.dim, self.dim, self.dim))
        if self.kind == "poincare":
            y = float(p[1])
            out[1] = -2.0 / y ** 3 * np.eye(2)
        return out

    def christoffels(self, p: np.ndarray) -> np.ndarray:
        """Gamma[k, i, j] of the chart metric."""
        out = np.zeros((self.dim, self.dim, self.dim))
        if self.kind == "poincare":
            y = float(p[1])
            out[0, 0, 1] = out[0, 1, 0] = -1.0 / y
            out[1, 0, 0] = 1.0 / y
            out[1, 1, 1] = -1.0 / y
        return out

    def sample_points(self, count: int) -> np.ndarray:
        """Deterministic quasi-random points in the sampling box (Halton)."""
        sampler = qmc.Halton(d=self.dim, scramble=False)
        sampler.fast_forward(1)  # skip the degenerate first point
        unit = sampler.random(count)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return lo + unit * (hi - lo)


# --------------------------------------------------------------- isometries

@dataclass(frozen=True)
class MobiusIsometry:
    """Orientation-preserving isometry of the Poincare half plane,
    tau -> (a tau + b) / (c tau + d) for a real matrix with det = 1."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (2, 2):
            raise ModelError("Mobius isometry needs a 2x2 real matrix")
        det = float(np.linalg.det(m))
        if det <= 0:
            raise ModelError("Mobius isometry must have positive determinant")
        object.__setattr__(self, "m", m / np.sqrt(det))

    def apply(self, p: np.ndarray) -> np.ndarray:
        (a, b), (c, d) = self.m
        tau = complex(p[0], p[1])
        w = (a * tau + b) / (c * tau + d)
        return np.array([w.real, w.imag])

    def inverse(self) -> "MobiusIsometry":
        (a, b), (c, d) = self.m
        return MobiusIsometry(np.array([[d, -b], [-c, a]]))

    def jacobian(self, p: np.ndarray) -> np.ndarray:
        (a, b), (c, d) = self.m
        tau = complex(p[0], p[1])
        fp = 1.0 / (c * tau + d) ** 2
        return np.array([[fp.real, -fp.imag], [fp.imag, fp.real]])

    @property
    def is_affine(self) -> bool:
        return abs(self.m[1, 0]) < 1e-15


@dataclass(frozen=True)
class FlatIsometry:
    """Euclidean isometry p -> Q p + shift of a flat chart."""

    q: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        s = np.asarray(self.shift, dtype=float)
        if q.shape != (s.shape[0], s.shape[0]):
            raise ModelError("shape mismatch in flat isometry")
        if np.max(np.abs(q.T @ q - np.eye(q.shape[0]))) > 1e-10:
            raise ModelError("flat isometry matrix must be orthogonal")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "shift", s)

    def apply(self, p: np.ndarray) -> np.ndarray:
        return self.q @ np.asarray(p, dtype=float) + self.shift

    def inverse(self) -> "FlatIsometry":
        return FlatIsometry(self.q.T, -self.q.T @ self.shift)

    def jacobian(self, p: np.ndarray) -> np.ndarray:
        return self.q.copy()

    @property
    def is_affine(self) -> bool:
        return True


def identity_isometry(chart: ScalarChart):
    if chart.kind == "poincare":
        return MobiusIsometry(np.eye(2))
    return FlatIsometry(np.eye(chart.dim), np.zeros(chart.dim))


def parse_isometry(spec: str, chart: ScalarChart):
    """Isometry from a CLI spec: 'id', 'translate:s[,t]', 'scale:l', 'mobius:a,b,c,d'."""
    spec = spec.strip()
    if spec == "id":
        return identity_isometry(chart)
    if ":" not in spec:
        raise ModelError(f"bad isometry spec {spec!r}")
    kind, _, rest = spec.partition(":")
    vals = [float(s) for s in rest.split(",") if s.strip()]
    if chart.kind == "poincare":
        if kind == "translate" and len(vals) == 1:
            return MobiusIsometry(np.array([[1.0, vals[0]], [0.0, 1.0]]))
        if kind == "scale" and len(vals) == 1 and vals[0] > 0:
            return MobiusIsometry(np.array([[np.sqrt(vals[0]), 0.0], [0.0, 1.0 / np.sqrt(vals[0])]]))
        if kind == "mobius" and len(vals) == 4:
            return MobiusIsometry(np.array(vals).reshape(2, 2))
    else:
        if kind == "translate" and len(vals) == chart.dim:
            return FlatIsometry(np.eye(chart.dim), np.array(vals))
    raise ModelError(f"bad isometry spec {spec!r} for chart {chart.kind}")


# ------------------------------------------------------------------- models

@dataclass(frozen=True)
class Model:
    """Siegel-space-valued map on a scalar chart, entries given as expressions.

    Only the upper triangle (i <= j) is stored; the matrix is symmetric by
    construction.
    """

    name: str
    n_v: int
    chart: ScalarChart
    entries: dict[tuple[int, int], ex.Expr] = field(default_factory=dict)

    def entry(self, i: int, j: int) -> ex.Expr:
        key = (i, j) if i <= j else (j, i)
        return self.entries.get(key, ex.Num(0j))

    def _matrix(self, env: dict[str, complex]) -> np.ndarray:
        out = np.zeros((self.n_v, self.n_v), dtype=complex)
        for (i, j), e in self.entries.items():
            try:
                val = ex.evaluate(e, env)
            except ex.ExprPoleError as err:
                raise PoleError(f"model {self.name!r}: {err}") from err
            out[i, j] = val
            out[j, i] = val
        return out

    def period(self, p: np.ndarray) -> SiegelPoint:
        """Evaluate the map; checks Siegel membership at the point."""
        try:
            return SiegelPoint(self.period_matrix(p))
        except DomainError as err:
            raise ModelInvalidError(f"model {self.name!r} leaves Siegel space at {p}: {err}")

    def period_matrix(self, p: np.ndarray) -> np.ndarray:
        """Raw matrix value without the Siegel membership check (callers doing
        bulk evaluation validate in one vectorized pass)."""
        if not self.chart.in_domain(p):
            raise ModelError(f"point {p} outside chart domain")
        return self._matrix(self.chart.env(p))

    def period_directional(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Directional derivative of the matrix map at p along the chart vector v."""
        env = self.chart.env(p)
        denv = self.chart.denv(v)
        out = np.zeros((self.n_v, self.n_v), dtype=complex)
        for (i, j), e in self.entries.items():
            try:
                val = ex.derivative(e, env, denv)
            except ex.ExprPoleError as err:
                raise PoleError(f"model {self.name!r}: {err}") from err
            out[i, j] = val
            out[j, i] = val
        return out


class TransformedModel:
    """Image of a model under a duality pair: p -> A . N(f^-1(p)).

    Provides the same evaluation protocol as Model.  Derivatives chain the
    inverse isometry Jacobian with the differential of the fractional action,
    so they are exact (no finite differencing).
    """

    def __init__(self, base, f, a: np.ndarray):
        self.base = base
        self.f = f
        self.f_inv = f.inverse()
        self.a = np.asarray(a, dtype=float)
        self.name = f"{base.name}|transformed"
        self.n_v = base.n_v
        self.chart = base.chart

    def period(self, p: np.ndarray) -> SiegelPoint:
        q = self.f_inv.apply(p)
        return fractional_action(self.a, self.base.period(q))

    def period_matrix(self, p: np.ndarray) -> np.ndarray:
        q = self.f_inv.apply(p)
        return fractional_action(self.a, self.base.period_matrix(q), check=False)

    def period_directional(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        q = self.f_inv.apply(p)
        w = self.f_inv.jacobian(p) @ np.asarray(v, dtype=float)
        dn = self.base.period_directional(q, w)
        return mobius_differential(self.a, self.base.period_matrix(q), dn)


# --------------------------------------------------------------- file format

def parse_model(text: str) -> Model:
    """Parse the plain-text model format.

    Header lines ``name=``, ``nv=``, ``chart=poincare|flat``, ``dim=`` followed
    by entry lines ``N[i,j] = <expr>``.  ``#`` starts a comment.
    """
    header: dict[str, str] = {}
    entry_lines: list[tuple[int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("N[") or line.startswith("N ["):
            lhs, _, rhs = line.partition("=")
            if not rhs.strip():
                raise ex.ExprSyntaxError("entry line needs '= <expr>'", lineno, len(line))
            entry_lines.append((lineno, lhs.strip(), rhs.strip()))
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ex.ExprSyntaxError(f"cannot parse line {raw!r}", lineno, 1)
        header[key.strip().lower()] = val.strip()

    name = header.get("name", "unnamed")
    try:
        n_v = int(header.get("nv", "0"))
    except ValueError:
        raise ModelError(f"bad nv value {header.get('nv')!r}")
    if n_v < 1:
        raise ModelError("model needs nv >= 1")
    kind = header.get("chart", "poincare")
    dim = int(header.get("dim", "2" if kind == "poincare" else "1"))
    chart = ScalarChart(kind, dim)

    entries: dict[tuple[int, int], ex.Expr] = {}
    for lineno, lhs, rhs in entry_lines:
        body = lhs[lhs.index("[") + 1:]
        if "]" not in body:
            raise ex.ExprSyntaxError("missing ']' in entry index", lineno, len(lhs))
        idx = body[: body.index("]")]
        parts = idx.split(",")
        if len(parts) != 2:
            raise ex.ExprSyntaxError("entry index must be N[i,j]", lineno, 1)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ex.ExprSyntaxError(f"bad entry index {idx!r}", lineno, 1)
        if not (1 <= i <= n_v and 1 <= j <= n_v):
            raise ModelError(f"entry N[{i},{j}] outside declared nv={n_v} (line {lineno})")
        if i > j:
            raise ModelError(f"store only the upper triangle: N[{i},{j}] (line {lineno})")
        entries[(i - 1, j - 1)] = ex.parse(rhs, chart.symbols(), line_offset=lineno)
    return Model(name, n_v, chart, entries)


def print_model(model: Model) -> str:
    lines = [f"name = {model.name}", f"nv = {model.n_v}",
             f"chart = {model.chart.kind}", f"dim = {model.chart.dim}"]
    for (i, j) in sorted(model.entries):
        lines.append(f"N[{i + 1},{j + 1}] = {ex.to_text(model.entries[(i, j)])}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- builtins

_T3_TEXT = """
name = t3
nv = 2
chart = poincare
N[1,1] = (tau^2 / 2) * (tau + 3*conj(tau))
N[1,2] = -(3/2) * tau * (tau + conj(tau))
N[2,2] = 3*(tau + conj(tau)) + (3/2)*(tau - conj(tau))
"""

_AXIO_TEXT = """
name = axio-dilaton
nv = 2
chart = poincare
N[1,1] = tau
N[1,2] = 0
N[2,2] = -1/tau
"""

_IDENTITY_TEXT = """
name = identity-tau
nv = 1
chart = poincare
N[1,1] = tau
"""


def _constant_i(n_v: int) -> Model:
    chart = ScalarChart("poincare", 2)
    entries = {(k, k): ex.Num(1j) for k in range(n_v)}
    return Model(f"constant-i:{n_v}" if n_v != 1 else "constant-i", n_v, chart, entries)


BUILTIN_NAMES = ("constant-i", "identity-tau", "axio-dilaton", "t3")


def builtin(name: str) -> Model:
    """Look up a built-in model; 'constant-i:k' selects k gauge fields."""
    if name == "constant-i":
        return _constant_i(1)
    if name.startswith("constant-i:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError:
            raise ModelError(f"bad constant-i spec {name!r}")
        if k < 1:
            raise ModelError("constant-i needs at least one gauge field")
        return _constant_i(k)
    texts = {"identity-tau": _IDENTITY_TEXT, "axio-dilaton": _AXIO_TEXT, "t3": _T3_TEXT}
    if name not in texts:
        raise ModelError(f"unknown model {name!r}; built-ins: {', '.join(BUILTIN_NAMES)}")
    return parse_model(texts[name])


def load_model(name_or_path: str) -> Model:
    """Built-in name, or path to a model file."""
    try:
        return builtin(name_or_path)
    except ModelError:
        pass
    try:
        with open(name_or_path, "r", encoding="utf-8") as fh:
            return parse_model(fh.read())
    except FileNotFoundError:
        raise ModelError(f"{name_or_path!r} is neither a built-in model nor a readable file")


def check_siegel_on_grid(model: Model, per_axis: int = 32) -> float:
    """Smallest relative eigenvalue of Im N over a grid of the sampling box."""
    from .symplectic import min_eig_ratio

    axes = [np.linspace(lo, hi, per_axis) for lo, hi in model.chart.box]
    worst = np.inf
    for p in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, model.chart.dim):
        tau = model.period(p)
        worst = min(worst, min_eig_ratio(tau.tau.imag))
    return float(worst)
