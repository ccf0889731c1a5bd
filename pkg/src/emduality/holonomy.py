"""Flat symplectic vector bundles presented by holonomy matrices.

A presentation is a list of Sp(2n, R) generator matrices together with group
relation words.  The based automorphism algebras are computed as matrix
centralizers; conjugation invariants are trace vectors of reduced words.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .symplectic import Taming, sp_basis, sp_check

MAX_WORD_LEN = 6
RELATION_TOL = 1e-10


class PresentationError(ValueError):
    pass


@dataclass
class BundlePresentation:
    """Holonomy data: images of fundamental-group generators plus relations.

    Relation words are lists of signed 1-based generator indices; -k means the
    inverse of generator k.
    """

    n_v: int
    generators: list[np.ndarray] = field(default_factory=list)
    relations: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        self.generators = [np.asarray(g, dtype=float) for g in self.generators]
        for g in self.generators:
            if g.shape != (2 * self.n_v, 2 * self.n_v):
                raise PresentationError(
                    f"generator shape {g.shape} does not match n_v={self.n_v}")
        for word in self.relations:
            for idx in word:
                if idx == 0 or abs(idx) > len(self.generators):
                    raise PresentationError(f"relation index {idx} out of range")

    def word_matrix(self, word: list[int]) -> np.ndarray:
        out = np.eye(2 * self.n_v)
        for idx in word:
            g = self.generators[abs(idx) - 1]
            out = out @ (g if idx > 0 else np.linalg.inv(g))
        return out


@dataclass
class PresentationDiagnostics:
    generator_violations: list[float]
    relation_violations: list[float]
    ok: bool


def presentation_check(p: BundlePresentation, tol: float = RELATION_TOL) -> PresentationDiagnostics:
    """Per-generator symplectic violation and per-relation deviation from Id."""
    gen_viol = [sp_check(g, tol)[1] for g in p.generators]
    rel_viol = [float(np.max(np.abs(p.word_matrix(w) - np.eye(2 * p.n_v))))
                for w in p.relations]
    ok = all(v <= tol for v in gen_viol) and all(v <= tol for v in rel_viol)
    return PresentationDiagnostics(gen_viol, rel_viol, ok)


def _commutant_rows(mats: list[np.ndarray], basis: list[np.ndarray]) -> np.ndarray:
    """Rows of the conditions X H = H X over the given sp basis coordinates."""
    rows = []
    for h in mats:
        cols = [(b @ h - h @ b).ravel() for b in basis]
        rows.append(np.stack(cols, axis=1))
    if not rows:
        return np.zeros((0, len(basis)))
    return np.vstack(rows)


def _nullspace(a: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    tol = rtol * (s[0] if s.size and s[0] > 0 else 1.0)
    rank = int(np.sum(s > tol))
    return vh[rank:].T


def centralizer_algebra(p: BundlePresentation) -> tuple[list[np.ndarray], int]:
    """Basis and dimension of {X in sp(2n, R) : X H_i = H_i X for all generators}.

    With no generators this is all of sp(2n, R); the dimension can never
    exceed n(2n+1).
    """
    basis = sp_basis(p.n_v)
    null = _nullspace(_commutant_rows(p.generators, basis))
    mats = [sum(c * b for c, b in zip(col, basis)) for col in null.T]
    return mats, null.shape[1]


def autb_theta_algebra(p: BundlePresentation, j0: Taming) -> tuple[list[np.ndarray], int]:
    """Centralizer elements additionally commuting with the fiber taming J0."""
    if j0.n != p.n_v:
        raise PresentationError("taming rank does not match the presentation")
    basis = sp_basis(p.n_v)
    rows = np.vstack([
        _commutant_rows(p.generators, basis),
        _commutant_rows([j0.J], basis),
    ])
    null = _nullspace(rows)
    mats = [sum(c * b for c, b in zip(col, basis)) for col in null.T]
    return mats, null.shape[1]


def _reduced_words(n_gen: int, max_len: int):
    """Freely reduced words over generators and inverses, lengths 1..max_len."""
    letters = [k for k in range(1, n_gen + 1)] + [-k for k in range(1, n_gen + 1)]
    frontier = [[l] for l in letters]
    for w in frontier:
        yield w
    for _ in range(max_len - 1):
        new = []
        for w in frontier:
            for l in letters:
                if l != -w[-1]:
                    new.append(w + [l])
        for w in new:
            yield w
        frontier = new


def conjugacy_invariants(p: BundlePresentation, max_word_len: int) -> np.ndarray:
    """Sorted trace vector of all reduced holonomy words up to the given length.

    Invariant under simultaneous conjugation of the generators, so equal
    vectors mean the presentations are not distinguished by these invariants
    (the converse is not decided).
    """
    if max_word_len < 1:
        raise PresentationError("max_word_len must be >= 1")
    if max_word_len > MAX_WORD_LEN:
        raise PresentationError(f"max_word_len capped at {MAX_WORD_LEN} "
                                "(word count grows exponentially)")
    if not p.generators:
        # only the empty word: trace of Id repeated once per requested length
        return np.array([2.0 * p.n_v])
    traces = [float(np.trace(p.word_matrix(w)))
              for w in _reduced_words(len(p.generators), max_word_len)]
    return np.sort(np.array(traces))


# ---------------------------------------------------------------- file format

def parse_bundle(text: str) -> BundlePresentation:
    """Bundle presentation file: 'nv = k', 'generator = <4k^2 row-major floats>'
    lines and 'relation = i j -i -j' lines; '#' comments."""
    n_v = None
    gens: list[np.ndarray] = []
    rels: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise PresentationError(f"cannot parse line {lineno}: {raw!r}")
        key = key.strip().lower()
        val = val.strip()
        if key == "nv":
            n_v = int(val)
        elif key == "generator":
            if n_v is None:
                raise PresentationError("nv must come before generators")
            vals = [float(s) for s in val.replace(",", " ").split()]
            d = 2 * n_v
            if len(vals) != d * d:
                raise PresentationError(
                    f"generator on line {lineno} needs {d * d} entries, got {len(vals)}")
            gens.append(np.array(vals).reshape(d, d))
        elif key == "relation":
            rels.append([int(s) for s in val.replace(",", " ").split()])
        else:
            raise PresentationError(f"unknown key {key!r} on line {lineno}")
    if n_v is None:
        raise PresentationError("file must set nv")
    return BundlePresentation(n_v, gens, rels)


def print_bundle(p: BundlePresentation) -> str:
    lines = [f"nv = {p.n_v}"]
    for g in p.generators:
        lines.append("generator = " + " ".join(repr(float(v)) for v in g.ravel()))
    for w in p.relations:
        lines.append("relation = " + " ".join(str(i) for i in w))
    return "\n".join(lines) + "\n"
