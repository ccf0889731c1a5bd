"""Batch command-line front end: model inspection, duality-algebra
computations, bundle centralizers, grid residual evaluation and the spinor
verification suites, each emitting a deterministic structured-text report.

Exit codes: 0 all checks passed, 1 tolerance failure (report still emitted),
2 usage errors, 3 unreadable or malformed input files.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time

import numpy as np

from . import duality as du
from . import grids as gr
from . import holonomy as ho
from . import models as md
from . import spinors as sn
from . import symplectic as sp

SCHEMA = "emduality-report/1"


class Report:
    """Accumulates named checks; renders to a deterministic text block."""

    def __init__(self, command: str, seed: int, meta: dict | None = None):
        self.command = command
        self.seed = seed
        self.meta = dict(meta or {})
        self.checks: list[tuple[str, str, str, bool]] = []

    @staticmethod
    def _fmt(value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return format(float(value), ".12g")
        return str(value)

    def add(self, name: str, value, tol: float | None = None,
            passed: bool | None = None):
        if passed is None:
            passed = True if tol is None else bool(abs(float(value)) <= tol)
        tol_s = "-" if tol is None else format(float(tol), ".6g")
        self.checks.append((name, self._fmt(value), tol_s, passed))

    def info(self, key: str, value):
        self.meta[key] = self._fmt(value)

    @property
    def all_passed(self) -> bool:
        return all(p for _, _, _, p in self.checks)

    def text(self) -> str:
        lines = [f"schema = {SCHEMA}", f"command = {self.command}",
                 f"seed = {self.seed}"]
        for key in self.meta:
            lines.append(f"{key} = {self.meta[key]}")
        for name, value, tol, passed in self.checks:
            status = "pass" if passed else "FAIL"
            lines.append(f"check {name} = {value} tol {tol} {status}")
        lines.append(f"result = {'pass' if self.all_passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


class FileInputError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise FileInputError(f"cannot read {path!r}: {err}") from err


def _read_matrix(path: str, dim: int | None = None) -> np.ndarray:
    vals = np.array([float(s) for s in _read_text(path).split()])
    n = int(round(np.sqrt(vals.size)))
    if n * n != vals.size:
        raise FileInputError(f"{path!r} does not contain a square matrix")
    if dim is not None and n != dim:
        raise FileInputError(f"{path!r}: expected {dim}x{dim}, got {n}x{n}")
    return vals.reshape(n, n)


def _load_model_cli(name: str):
    try:
        return md.load_model(name)
    except md.ModelError as err:
        raise FileInputError(str(err)) from err


def _seed() -> int:
    return int(os.environ.get("EMDUALITY_SEED", "0"))


def _digest(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode("utf-8"))
    return h.hexdigest()[:12]


# ------------------------------------------------------------- subcommands

def cmd_models(args) -> tuple[int, Report]:
    rep = Report("models", _seed())
    if args.action == "list":
        for name in md.BUILTIN_NAMES:
            m = md.builtin(name)
            rep.info(f"model {name}", f"nv={m.n_v} chart={m.chart.kind}")
        rep.add("builtins", len(md.BUILTIN_NAMES))
        return 0, rep
    try:
        m = md.builtin(args.name)
    except md.ModelError:
        rep.info("error", f"unknown model {args.name!r}")
        return 2, rep
    rep.info("model", m.name)
    rep.info("input_digest", _digest(md.print_model(m)))
    rep.info("nv", m.n_v)
    rep.info("chart", m.chart.kind)
    for (i, j) in sorted(m.entries):
        from . import expressions as ex
        rep.info(f"N[{i + 1},{j + 1}]", ex.to_text(m.entries[(i, j)]))
    # sample value serialised as (re, im) row-major pairs
    p0 = np.array([0.0, 1.0]) if m.chart.kind == "poincare" else \
        np.zeros(m.chart.dim)
    tau = m.period(p0).tau
    rep.info("N(sample) re", " ".join(format(v, ".12g") for v in tau.real.ravel()))
    rep.info("N(sample) im", " ".join(format(v, ".12g") for v in tau.imag.ravel()))
    min_eig = md.check_siegel_on_grid(m, per_axis=8)
    rep.add("siegel_min_eig", min_eig, tol=None, passed=min_eig > 0)
    return 0 if rep.all_passed else 1, rep


def cmd_stabilizer(args) -> tuple[int, Report]:
    model = _load_model_cli(args.model)
    rep = Report("stabilizer", _seed(), {"model": model.name,
                                         "input_digest": _digest(md.print_model(model))})
    samples = model.chart.sample_points(args.samples)
    out = du.stab_sp_algebra(model, samples)
    rep.add("dim_stab_sp", out.dim_stab_sp)
    rep.add("residual", out.residual, tol=args.tol)
    rep.add("minus_id_fixes_period", out.minus_id_fixes_period,
            passed=out.minus_id_fixes_period)
    rep.info("samples", out.samples_used)
    rep.info("notes", out.notes)
    for k, x in enumerate(out.basis):
        rep.info(f"basis[{k}]", " ".join(format(v, ".12g") for v in x.ravel()))
    return 0 if rep.all_passed else 1, rep


def cmd_uduality(args) -> tuple[int, Report]:
    model = _load_model_cli(args.model)
    rep = Report("uduality", _seed(), {"model": model.name})
    out = du.uduality_algebra(model)
    rep.add("dim_u", out.dim_u)
    rep.add("dim_stab_sp", out.dim_stab_sp)
    rep.add("dim_iso_pr", out.dim_iso_pr)
    rep.add("exactness_gap", out.exactness_gap, tol=0.5)
    rep.info("notes", out.notes)
    for name, x, res in out.lift_table:
        rep.add(f"lift[{name}] residual", res, tol=du.TOL_LIFT,
                passed=x is not None)
    return 0 if rep.all_passed else 1, rep


KILLING_ALIASES = {"dx": 0, "scale": 1, "special": 2}


def cmd_lift(args) -> tuple[int, Report]:
    model = _load_model_cli(args.model)
    rep = Report("lift", _seed(), {"model": model.name})
    fields = du.killing_basis(model.chart)
    key = args.killing
    idx = KILLING_ALIASES.get(key)
    if idx is None:
        try:
            idx = int(key)
        except ValueError:
            rep.info("error", f"unknown killing spec {key!r}")
            return 2, rep
    if not 0 <= idx < len(fields):
        rep.info("error", f"killing index {idx} out of range")
        return 2, rep
    xi = fields[idx]
    rep.info("killing", xi.name)
    x, res = du.lift_killing_field(model, xi)
    rep.add("lift_residual", res, tol=du.TOL_LIFT, passed=x is not None)
    if x is not None:
        rep.info("lift", " ".join(format(v, ".12g") for v in x.ravel()))
    else:
        rep.info("lift", "no lift")
    return 0 if rep.all_passed else 1, rep


def cmd_pair_check(args) -> tuple[int, Report]:
    model = _load_model_cli(args.model)
    rep = Report("pair-check", _seed(), {"model": model.name, "f": args.f})
    try:
        f = md.parse_isometry(args.f, model.chart)
    except md.ModelError as err:
        rep.info("error", str(err))
        return 2, rep
    a = _read_matrix(args.A, 2 * model.n_v)
    ok, viol = sp.sp_check(a, 1e-8)
    rep.add("A_symplectic_violation", viol, tol=1e-8, passed=ok)
    res = du.check_uduality_pair(f, a, model)
    rep.add("pair_residual", res, tol=args.tol)
    return 0 if rep.all_passed else 1, rep


def cmd_centralizer(args) -> tuple[int, Report]:
    text = _read_text(args.bundle)
    pres = ho.parse_bundle(text)
    rep = Report("centralizer", _seed(), {"bundle": args.bundle,
                                          "input_digest": _digest(text),
                                          "nv": pres.n_v})
    diag = ho.presentation_check(pres)
    rep.add("presentation_ok", diag.ok, passed=diag.ok)
    for k, v in enumerate(diag.generator_violations):
        rep.add(f"generator[{k}] sp_violation", v, tol=ho.RELATION_TOL)
    for k, v in enumerate(diag.relation_violations):
        rep.add(f"relation[{k}] violation", v, tol=ho.RELATION_TOL)
    mats, dim = ho.centralizer_algebra(pres)
    rep.add("dim_centralizer", dim)
    if args.taming:
        j0 = sp.Taming(_read_matrix(args.taming, 2 * pres.n_v))
        _, tdim = ho.autb_theta_algebra(pres, j0)
        rep.add("dim_autb_theta", tdim, passed=tdim <= dim)
    return 0 if rep.all_passed else 1, rep


def cmd_invariants(args) -> tuple[int, Report]:
    text = _read_text(args.bundle)
    pres = ho.parse_bundle(text)
    rep = Report("invariants", _seed(), {"bundle": args.bundle,
                                         "input_digest": _digest(text)})
    try:
        vec = ho.conjugacy_invariants(pres, args.maxlen)
    except ho.PresentationError as err:
        rep.info("error", str(err))
        return 2, rep
    rep.info("count", len(vec))
    rep.info("traces", " ".join(format(v, ".12g") for v in vec))
    rep.add("computed", True, passed=True)
    return 0, rep


def cmd_selfdual(args) -> tuple[int, Report]:
    text = _read_text(args.config)
    cfg = gr.parse_grid_config(text)
    rep = Report("selfdual", _seed(), {"config": args.config,
                                       "input_digest": _digest(text),
                                       "model": cfg.model.name})
    rep.add("selfdual_violation", cfg.selfduality_violation(), tol=args.tol)
    return 0 if rep.all_passed else 1, rep


def cmd_residuals(args) -> tuple[int, Report]:
    text = _read_text(args.config)
    cfg = gr.parse_grid_config(text)
    rep = Report("residuals", _seed(), {"config": args.config,
                                        "input_digest": _digest(text),
                                        "model": cfg.model.name,
                                        "grid": "x".join(map(str, cfg.grid.shape))})
    out = gr.residual_report(cfg)
    for name, value in out.rows():
        rep.info(name, value)
    # consistency of the two scalar assemblies is the pass/fail content
    inner = cfg.grid.interior()
    loc = gr.scalar_residual(cfg, "local")[inner]
    glo = gr.scalar_residual(cfg, "global")[inner]
    rep.add("scalar_assembly_gap", float(np.max(np.abs(loc - glo))), tol=1e-9)
    rep.add("selfdual_violation", out.selfdual_violation, tol=1e-8)
    if args.refine > 0:
        # convergence table: residual maxima on successive spacing halvings
        grid = cfg.grid
        for k in range(args.refine):
            grid = grid.refine()
            fine = gr.residual_report(gr.parse_grid_config(text, grid.resolution))
            rep.info(f"refine[{k + 1}] grid", "x".join(map(str, grid.shape)))
            for name, value in fine.rows():
                if name.endswith("_max"):
                    rep.info(f"refine[{k + 1}] {name}", value)
    return 0 if rep.all_passed else 1, rep


def cmd_transport(args) -> tuple[int, Report]:
    text = _read_text(args.config)
    cfg = gr.parse_grid_config(text)
    rep = Report("transport", _seed(), {"config": args.config,
                                        "input_digest": _digest(text),
                                        "f": args.f})
    try:
        f = md.parse_isometry(args.f, cfg.model.chart)
    except md.ModelError as err:
        rep.info("error", str(err))
        return 2, rep
    a = _read_matrix(args.A, 2 * cfg.model.n_v)
    out = gr.equivariance_harness(cfg, f, a)
    rep.add("einstein_discrepancy", out.einstein_discrepancy, tol=args.tol)
    rep.add("scalar_discrepancy", out.scalar_discrepancy, tol=args.tol)
    rep.add("maxwell_discrepancy", out.maxwell_discrepancy, tol=args.tol)
    rep.info("einstein_max_before", out.before.einstein_max)
    rep.info("einstein_max_after", out.after.einstein_max)
    return 0 if rep.all_passed else 1, rep


def _spinor_frames(name: str, lam: float, sizes=(9, 13)):
    frames = []
    for n in sizes:
        if name == "minkowski":
            grid = gr.GridPatch(((-0.4, 0.4),) * 4, (n,) * 4)
        else:
            grid = gr.GridPatch(((-0.4, 0.4), (-0.4, 0.4), (-0.4, 0.4),
                                 (0.8, 1.6)), (n,) * 4)
        frames.append(sn.builtin_frame(name, grid, lam=lam if lam > 0 else 1.0))
    return frames


def cmd_spinor_check(args) -> tuple[int, Report]:
    rep = Report("spinor-check", _seed(), {"frame": args.frame,
                                           "lambda": args.lam})
    eps0 = np.array([0.9, -0.4, 0.3, 1.1])
    if args.frame == "minkowski":
        if args.lam != 0.0:
            rep.info("note", "minkowski check runs the parallel case lambda=0")
        (fr,) = _spinor_frames("minkowski", 0.0, sizes=(9,))
        eps = sn.integrate_killing(fr, 0.0, eps0)
        rep.add("parallel_residual", sn.killing_residual_max(fr, eps, 0.0),
                tol=1e-14)
        rep.add("path_defect", sn.path_defect(fr, 0.0, eps0), tol=1e-14)
        return 0 if rep.all_passed else 1, rep
    if args.frame != "ads4-poincare":
        rep.info("error", f"unknown frame {args.frame!r}")
        return 2, rep
    fr9, fr13 = _spinor_frames(args.frame, args.lam)
    res, defects = [], []
    for fr in (fr9, fr13):
        eps = sn.integrate_killing(fr, args.lam, eps0)
        res.append(sn.killing_residual_max(fr, eps, args.lam))
        defects.append(sn.path_defect(fr, args.lam, eps0))
    order = float(np.log(res[0] / res[1]) / np.log(13 / 9))
    rep.add("residual_coarse", res[0], tol=None, passed=res[0] < 1.0)
    rep.add("residual_order", order, tol=None, passed=1.5 <= order <= 2.5)
    rep.add("path_defect_shrinks", defects[1] / defects[0], tol=None,
            passed=defects[1] < defects[0])
    return 0 if rep.all_passed else 1, rep


def cmd_thm53(args) -> tuple[int, Report]:
    rep = Report("thm53", _seed(), {"frame": args.frame, "lambda": args.lam})
    if args.frame != "ads4-poincare":
        rep.info("error", "thm53 verification runs on the ads4-poincare frame")
        return 2, rep
    eps0 = np.array([0.9, -0.4, 0.3, 1.1])
    fr9, fr13 = _spinor_frames(args.frame, args.lam)
    maxima = []
    for fr in (fr9, fr13):
        eps = sn.integrate_killing(fr, args.lam, eps0)
        u, l = sn.killing_bilinears(fr, eps)
        g = fr.metric()
        kappa = sn.extract_kappa(u, l, args.lam, g, fr.grid)
        out = sn.verify_thm53(u, l, kappa, args.lam, g, fr.grid)
        maxima.append(out)
    fine = maxima[1]
    rep.add("nontrivial", fine.nontrivial, passed=fine.nontrivial)
    rep.add("u_norm_violation", fine.u_norm_violation, tol=1e-8)
    rep.add("l_norm_violation", fine.l_norm_violation, tol=1e-8)
    rep.add("orthogonality_violation", fine.orthogonality_violation, tol=1e-8)
    rep.add("du_residual_shrinks", fine.du_residual / maxima[0].du_residual,
            tol=None, passed=fine.du_residual < maxima[0].du_residual)
    rep.add("dl_residual_shrinks", fine.dl_residual / maxima[0].dl_residual,
            tol=None, passed=fine.dl_residual < maxima[0].dl_residual)
    rep.info("u_killing_residual", fine.u_killing_residual)
    rep.info("dkappa_max", fine.dkappa_max)
    return 0 if rep.all_passed else 1, rep


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emduality",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    mp = sub.add_parser("models", help="list or show built-in models")
    mp.add_argument("action", choices=["list", "show"])
    mp.add_argument("name", nargs="?", default="")
    mp.set_defaults(func=cmd_models)

    stp = sub.add_parser("stabilizer", help="stabilizer algebra of a model")
    stp.add_argument("--model", required=True)
    stp.add_argument("--samples", type=int, default=16)
    stp.add_argument("--tol", type=float, default=1e-8)
    stp.set_defaults(func=cmd_stabilizer)

    up = sub.add_parser("uduality", help="duality algebra dimensions")
    up.add_argument("--model", required=True)
    up.set_defaults(func=cmd_uduality)

    lp = sub.add_parser("lift", help="lift a Killing field to sp(2n, R)")
    lp.add_argument("--model", required=True)
    lp.add_argument("--killing", required=True,
                    help="index or alias dx|scale|special")
    lp.set_defaults(func=cmd_lift)

    pp = sub.add_parser("pair-check", help="test a finite duality pair (f, A)")
    pp.add_argument("--model", required=True)
    pp.add_argument("--f", required=True)
    pp.add_argument("--A", required=True)
    pp.add_argument("--tol", type=float, default=1e-10)
    pp.set_defaults(func=cmd_pair_check)

    cp = sub.add_parser("centralizer", help="holonomy centralizer algebra")
    cp.add_argument("--bundle", required=True)
    cp.add_argument("--taming", default="")
    cp.set_defaults(func=cmd_centralizer)

    ip = sub.add_parser("invariants", help="conjugacy trace invariants")
    ip.add_argument("--bundle", required=True)
    ip.add_argument("--maxlen", type=int, required=True)
    ip.set_defaults(func=cmd_invariants)

    sdp = sub.add_parser("selfdual", help="twisted self-duality of a configuration")
    sdp.add_argument("--config", required=True)
    sdp.add_argument("--tol", type=float, default=1e-10)
    sdp.set_defaults(func=cmd_selfdual)

    rp = sub.add_parser("residuals", help="equation-of-motion residual report")
    rp.add_argument("--config", required=True)
    rp.add_argument("--refine", type=int, default=0,
                    help="emit a convergence table over this many halvings")
    rp.set_defaults(func=cmd_residuals)

    tp = sub.add_parser("transport", help="duality transport equivariance")
    tp.add_argument("--config", required=True)
    tp.add_argument("--f", required=True)
    tp.add_argument("--A", required=True)
    tp.add_argument("--tol", type=float, default=1e-9)
    tp.set_defaults(func=cmd_transport)

    scp = sub.add_parser("spinor-check", help="Killing spinor transport checks")
    scp.add_argument("--frame", required=True)
    scp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    scp.set_defaults(func=cmd_spinor_check)

    t53 = sub.add_parser("thm53", help="first-order one-form system checks")
    t53.add_argument("--frame", required=True)
    t53.add_argument("--lambda", dest="lam", type=float, default=1.0)
    t53.set_defaults(func=cmd_thm53)
    return p


def run(argv: list[str]) -> tuple[int, str]:
    """Entry point used by tests: returns (exit code, report text)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0), ""
    t0 = time.time()
    try:
        code, rep = args.func(args)
    except FileInputError as err:
        rep = Report(args.command, _seed())
        rep.info("error", str(err))
        return 3, rep.text()
    except (ho.PresentationError, gr.GridError, md.ModelError) as err:
        rep = Report(args.command, _seed())
        rep.info("error", str(err))
        return 3, rep.text()
    print(f"[emduality] {args.command} finished in {time.time() - t0:.2f}s",
          file=sys.stderr)
    return code, rep.text()


def main() -> int:
    code, text = run(sys.argv[1:])
    if text:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
