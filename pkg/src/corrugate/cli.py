"""Command-line front end.

    corrugate run --config run.cfg [--out basename]
    corrugate verify
    corrugate export --config run.cfg --stage q --mesh out.obj

`run` executes the configured multi-stage construction and writes the CSV +
JSON reports.  `verify` replays the core algebraic identities in-process
(no test framework needed) and exits nonzero on any failure.  `export`
re-runs the configured stages deterministically and writes the stage-q
output immersion as an OBJ mesh.
"""

import argparse
import math
import os
from fractions import Fraction
from pathlib import Path

import numpy as np

from .basis import build_basis, decompose_L, phi, psi, sym_pack
from .corrugation import C_BAR, GAMMA1, GAMMA2, GAMMA4
from .decompose import kaellen_decay_bound, kaellen_decompose
from .driver import (
    alpha_limit,
    beta_exponent,
    export_mesh,
    export_report,
    read_config,
    run,
)
from .errors import CorrugateError
from .fields import Field, GridDomain, grid_coordinates, induced_metric
from .ibp import identity_residual, identity_tolerance, integrate_by_parts
from .step import (
    flat_closed_form_residual,
    frame,
    perturb,
    predicted_metric_rhs,
    step_identity_tolerance,
)

__all__ = ["main"]


# ---------------------------------------------------------------------------
# verify: the identity suite, self-contained and fast
# ---------------------------------------------------------------------------

def _check_basis_roundtrip():
    worst = 0.0
    for n in (2, 3):
        b = build_basis(n)
        rng = np.random.default_rng(7 + n)
        bump = rng.standard_normal((n, n))
        m = b.h0 + 0.05 * (bump + bump.T)
        coeffs = decompose_L(b, m)
        recon = b.reconstruct(coeffs)
        worst = max(worst, float(np.abs(recon - sym_pack(m)).max()))
        nu = b.directions[1]
        coords = psi(b, m, nu)
        back = phi(b, coords, nu)
        worst = max(worst, float(np.abs(back - m).max()))
    return worst, 1e-12, "reconstruction + phi(psi) on random symmetric input"


def _check_slope_identity():
    t = np.linspace(0.0, 2.0 * math.pi, 4001)
    g1p = GAMMA1.derivative()(t)
    g2p = GAMMA2.derivative()(t)
    worst = float(np.abs(2.0 * g1p + g2p**2 - 1.0).max())
    return worst, 1e-12, "2 g1' + (g2')^2 = 1 on a dense period"


def _check_antiderivative_chain():
    t = np.linspace(0.0, 2.0 * math.pi, 2001)
    worst = 0.0
    for g in (GAMMA2, GAMMA4):
        roundtrip = g.antiderivative().derivative()
        worst = max(worst, float(np.abs(roundtrip(t) - g(t)).max()))
    second = GAMMA2.antiderivative().antiderivative()
    worst = max(worst, abs(second.derivative().derivative()(0.5) - GAMMA2(0.5)))
    return worst, 1e-12, "antiderivative() inverts derivative() for g2, g4"


def _check_profile_means():
    worst = max(abs(GAMMA4.mean()), abs(GAMMA1.mean()))
    worst = max(worst, abs((GAMMA2 * GAMMA2).mean() - C_BAR))
    return worst, 1e-12, "oscillatory profiles are mean-free, cbar fixed"


def _check_flat_closed_form():
    resid = flat_closed_form_residual(1.0, (1.0, 0.0), 16.0, 0.01, npts=129)
    return resid, 1e-10, "constant-amplitude flat-base closed form"


def _check_ibp_identity():
    basis = build_basis(2)
    dom = GridDomain.square(2, 129)
    x = grid_coordinates(dom)
    channel = sym_pack(np.array([[0.0, 0.5], [0.5, 0.0]]))
    m_vals = np.sin(2.0 * math.pi * x[..., 0])[..., None] * channel
    M = Field(dom, m_vals, 2.0 * math.pi)
    res = integrate_by_parts(M, GAMMA2, (1.0, 0.0), 24.0, 2.0 * math.pi, 2, basis)
    measured = identity_residual(M, GAMMA2, res)
    return measured, identity_tolerance(res), "depth-2 cancellation at lambda=24"


def _check_kaellen():
    basis = build_basis(2)
    dom = GridDomain.square(2, 129)
    x = grid_coordinates(dom)
    e11 = sym_pack(np.outer([1.0, 0.0], [1.0, 0.0]))
    h_vals = basis.h0_packed + 0.03 * np.sin(2.0 * math.pi * x[..., 0])[..., None] * e11
    H = Field(dom, h_vals, 2.0 * math.pi)
    out = kaellen_decompose(H, (20.0, 40.0), sweeps=2, basis=basis)
    bound = kaellen_decay_bound(out.freq_scale, 20.0)
    hist = out.residual_history
    ratios = [b / a for a, b in zip(hist, hist[1:]) if a > 0]
    worst = max(ratios) if ratios else 0.0
    return worst, bound, "per-sweep contraction of the split residual"


def _check_step_identity():
    basis = build_basis(2)
    dom = GridDomain.square(2, 257)
    x = grid_coordinates(dom)
    vals = np.zeros(dom.npts + (3,))
    vals[..., :2] = x
    u = Field(dom, vals, 0.0)
    a = Field(dom, 1.0 + 0.1 * np.sin(2.0 * math.pi * x[..., 0]), 2.0 * math.pi)
    fr = frame(u)
    lam, delta = 16.0, 0.01
    v = perturb(u, fr, a, (1.0, 0.0), lam, delta)
    measured = induced_metric(v).values - induced_metric(u).values
    rhs = predicted_metric_rhs(u, a, (1.0, 0.0), lam, delta, None, fr, basis)
    resid = float(np.abs(measured - rhs.values).max())
    bound = step_identity_tolerance(u, v, lam, 2.0 * math.pi)
    return resid, bound, "term-by-term metric expansion at lambda=16"


def _check_exponents():
    ok = (
        beta_exponent(2, 10) == Fraction(10, 38)
        and beta_exponent(3, 6) == Fraction(1, 9)
        and beta_exponent(2, 10) < alpha_limit(2)
        and beta_exponent(3, 6) < alpha_limit(3)
        and alpha_limit(2) == Fraction(1, 3)
    )
    return (0.0 if ok else 1.0), 0.5, "exact rational exponent arithmetic"


_CHECKS = (
    ("basis roundtrips", _check_basis_roundtrip),
    ("corrugation slope identity", _check_slope_identity),
    ("antiderivative chains", _check_antiderivative_chain),
    ("profile means", _check_profile_means),
    ("flat closed form", _check_flat_closed_form),
    ("ibp cancellation", _check_ibp_identity),
    ("kaellen contraction", _check_kaellen),
    ("step metric expansion", _check_step_identity),
    ("exponent arithmetic", _check_exponents),
)


def _cmd_verify(_args):
    failures = 0
    for name, fn in _CHECKS:
        try:
            measured, bound, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            print("FAIL %-28s raised %s: %s" % (name, type(exc).__name__, exc))
            failures += 1
            continue
        ok = measured <= bound
        print(
            "%s %-28s %.3e <= %.3e  (%s)"
            % ("PASS" if ok else "FAIL", name, measured, bound, detail)
        )
        failures += 0 if ok else 1
    total = len(_CHECKS)
    print("%d/%d checks passed" % (total - failures, total))
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# run / export
# ---------------------------------------------------------------------------

def _cmd_run(args):
    try:
        config = read_config(args.config)
        report = run(config)
    except CorrugateError as exc:
        print("error: %s" % exc)
        return 1
    for setting, rep in zip(report.stage_settings, report.stage_reports):
        print(
            "stage %d: deficit %.6g -> %.6g  (continuation %s, ladder top %.4g)"
            % (
                setting["q"],
                rep.total_deficit_before,
                rep.total_deficit_after,
                "ok" if rep.meets_continuation else "MISSED",
                rep.frequencies_used[-1],
            )
        )
    if report.failed_stage is not None:
        print("aborted at %s" % report.error)
    if report.alpha_hat is not None:
        print("estimated holder exponent: %.2g" % report.alpha_hat)
    out_base = args.out
    if out_base is None:
        os.makedirs(config.out_dir or ".", exist_ok=True)
        out_base = os.path.join(config.out_dir or ".", "report")
    csv_path, json_path = export_report(report, out_base)
    print("wrote %s and %s" % (csv_path, json_path))
    return 0 if report.failed_stage is None else 1


def _cmd_export(args):
    if args.stage < 0:
        print("error: --stage must be >= 0")
        return 2
    try:
        config = read_config(args.config)
        config.stages = args.stage + 1
        report = run(config)
        if report.failed_stage is not None and report.failed_stage <= args.stage:
            print("error: %s" % report.error)
            return 1
        Path(args.mesh).parent.mkdir(parents=True, exist_ok=True)
        export_mesh(report.u_final, args.mesh)
    except CorrugateError as exc:
        print("error: %s" % exc)
        return 1
    nx, ny = report.u_final.domain.npts
    print(
        "wrote %s: %d vertices, %d triangles (stage %d output)"
        % (args.mesh, nx * ny, 2 * (nx - 1) * (ny - 1), args.stage)
    )
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="corrugate",
        description="corrugated C^{1,alpha} immersions by stagewise convex integration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured multi-stage construction")
    p_run.add_argument("--config", required=True, help="flat key = value config file")
    p_run.add_argument("--out", default=None, help="report basename (default <out_dir>/report)")
    p_run.set_defaults(fn=_cmd_run)

    p_verify = sub.add_parser("verify", help="replay the core identities in-process")
    p_verify.set_defaults(fn=_cmd_verify)

    p_export = sub.add_parser("export", help="re-run deterministically and export a stage mesh")
    p_export.add_argument("--config", required=True)
    p_export.add_argument("--stage", type=int, required=True, help="stage index whose output to export")
    p_export.add_argument("--mesh", required=True, help="output OBJ path")
    p_export.set_defaults(fn=_cmd_export)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
