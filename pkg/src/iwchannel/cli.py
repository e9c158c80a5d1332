"""Command-line driver: config-driven runs with deterministic artifacts.

Subcommands: solve | sweep | evolve | dynamics | endmodes | verify.
All outputs are UTF-8 CSV with header rows, JSON reports with sorted keys,
and binary PPM heatmaps; none embed timestamps, so identical config and
seed give byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .config import SCHEMA_VERSION, ConfigError, RunConfig, load_config
from .geometry import ChannelSpec, c_slope, subcriticality_margin
from .chebyshev import TensorGrid, cheb_nodes
from .solver import (ScalingProfile, gaussian_forcing, lap_sweep,
                     solve_stationary)
from . import fields

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_SUBCRITICAL = 3


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _fail(code, kind, message, extra=None):
    payload = {"error": {"type": kind, "message": message}}
    if extra:
        payload["error"].update(extra)
    print(json.dumps(payload, sort_keys=True))
    return code


def _require_subcritical(chan: ChannelSpec, lam: float):
    margin = subcriticality_margin(chan, lam)
    if margin <= 0:
        raise SubcriticalityError(lam, margin)


class SubcriticalityError(RuntimeError):
    def __init__(self, lam, margin):
        self.lam = lam
        self.margin = margin
        super().__init__(
            f"channel is not subcritical at lambda={lam}: "
            f"max|G'| exceeds c_lambda by margin {margin:.6g}")


def _profile(cfg: RunConfig) -> ScalingProfile:
    return ScalingProfile(kind=cfg.solver["profile_kind"],
                          center=cfg.solver["profile_center"],
                          steepness=cfg.solver["profile_steepness"])


def _forcing_array(cfg: RunConfig, tg: TensorGrid):
    return gaussian_forcing(tg, cfg.solver["L"], _profile(cfg),
                            cfg.solver["tau"],
                            center=cfg.forcing["center"],
                            width=cfg.forcing["width"],
                            amplitude=cfg.forcing["amplitude"],
                            wavenumbers=cfg.forcing["carriers"])


def _forcing_callable(cfg: RunConfig, chan: ChannelSpec):
    """The same forcing as _forcing_array, as a function of physical x."""
    L = cfg.solver["L"]
    c1, c2 = cfg.forcing["center"]
    w = cfg.forcing["width"]
    amp = cfg.forcing["amplitude"]
    carriers = cfg.forcing["carriers"]

    def f(x1, x2):
        y1 = np.asarray(x1, dtype=float) / L
        y2 = 1.0 + 2.0 * np.asarray(x2, dtype=float) / (
            np.pi - np.real(chan.G(x1)))
        env = amp * np.exp(-((y1 - c1) ** 2 + (y2 - c2) ** 2) / w ** 2)
        if not carriers:
            return env.astype(complex)
        osc = sum(np.exp(1j * k * np.asarray(x1)) for k in carriers)
        return env * osc
    return f


def _forcing_support_radius(cfg: RunConfig, eta: float = 1e-8) -> float:
    L = cfg.solver["L"]
    c1 = abs(cfg.forcing["center"][0])
    return L * (c1 + cfg.forcing["width"] * float(np.sqrt(np.log(1.0 / eta))))


def _solve(cfg: RunConfig):
    chan = cfg.channel_spec()
    _require_subcritical(chan, cfg.solver["lambda"])
    tg = TensorGrid(cheb_nodes(cfg.solver["n1"]), cheb_nodes(cfg.solver["n2"]))
    forcing = _forcing_array(cfg, tg)
    return chan, solve_stationary(chan, cfg.omega, cfg.solver["L"],
                                  n1=cfg.solver["n1"], n2=cfg.solver["n2"],
                                  profile=_profile(cfg),
                                  tau=cfg.solver["tau"], forcing=forcing)


def _trusted_halfwidth(sol) -> float:
    mask = sol.trusted_mask()
    return float(sol.L * np.max(np.abs(sol.grid.g1.nodes[mask])))


def _field_grid(sol, nx=481, ny=121):
    half = _trusted_halfwidth(sol)
    x1 = np.linspace(-half, half, nx)
    x2 = np.linspace(-np.pi, 0.0, ny)
    U = sol.resample_grid(x1, x2)
    return x1, x2, U


def cmd_solve(cfg: RunConfig, out: str, quiet: bool):
    chan, sol = _solve(cfg)
    x1, x2, U = _field_grid(sol)
    rows = [(float(a), float(b), float(np.real(U[i, j])),
             float(np.imag(U[i, j])))
            for i, a in enumerate(x1) for j, b in enumerate(x2)]
    _write_csv(os.path.join(out, "field.csv"),
               ["x1", "x2", "re_u", "im_u"], rows)
    fields.write_ppm(os.path.join(out, "field.ppm"), np.real(U).T[::-1])
    dx1 = x1[1] - x1[0]
    dx2 = x2[1] - x2[0]
    try:
        slope = fields.beam_slope(np.real(U), dx1, dx2)
    except ValueError:
        slope = None
    report = {
        **cfg.echo_dict(),
        "residual": sol.residual,
        "condition_estimate": sol.cond,
        "trusted_halfwidth": _trusted_halfwidth(sol),
        "beam_slope": slope,
        "c_lambda": float(c_slope(cfg.solver["lambda"])),
        "subcriticality_margin": float(
            subcriticality_margin(chan, cfg.solver["lambda"])),
        "weighted_norm": float(sol.weighted_norm()),
    }
    _write_json(os.path.join(out, "report.json"), report)
    if not quiet:
        print(f"solved {cfg.solver['n1']}x{cfg.solver['n2']}: "
              f"residual {sol.residual:.3e}, beam slope {slope}")
    return EXIT_OK


def cmd_endmodes(cfg: RunConfig, out: str, quiet: bool):
    from .endmodes import classify_io, fit_end_modes
    _, sol = _solve(cfg)
    K = cfg.analysis["K"] or None
    fit_l = fit_end_modes(sol, "left", K=K)
    fit_r = fit_end_modes(sol, "right", K=K)
    io = classify_io(fit_l, fit_r, threshold=cfg.analysis["io_threshold"])
    report = {
        **cfg.echo_dict(),
        "verdict": io.verdict,
        "ratio": io.ratio,
        "outgoing_energy": io.outgoing_energy,
        "incoming_energy": io.incoming_energy,
        "threshold": io.threshold,
        "left": {"fit_residual": fit_l.fit_residual,
                 "alpha_plus": np.abs(fit_l.alpha_plus).tolist(),
                 "alpha_minus": np.abs(fit_l.alpha_minus).tolist()},
        "right": {"fit_residual": fit_r.fit_residual,
                  "alpha_plus": np.abs(fit_r.alpha_plus).tolist(),
                  "alpha_minus": np.abs(fit_r.alpha_minus).tolist()},
    }
    _write_json(os.path.join(out, "endmodes.json"), report)
    if not quiet:
        print(f"end-mode verdict: {io.verdict} (ratio {io.ratio:.3e})")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: str, quiet: bool):
    from .layerpot import (boundary_equation_residual, kernel_spectral_mass,
                           reconstruction_residual)
    chan, sol = _solve(cfg)
    f = _forcing_callable(cfg, chan)
    box = cfg.analysis["support_box"]
    cut = cfg.analysis["cutoff_L"]
    recon = reconstruction_residual(sol, cut, f, box,
                                    n_probe=cfg.analysis["n_probe"],
                                    seed=cfg.seed)
    bdr = boundary_equation_residual(sol, cut, f, box)
    spectral = {}
    for case in (2, 4):
        for sign in (+1, -1):
            frac, side = kernel_spectral_mass(chan, cfg.omega, case, sign)
            spectral[f"case{case}_sign{'+' if sign > 0 else '-'}"] = {
                "fraction": frac, "side": side}
    report = {
        **cfg.echo_dict(),
        "reconstruction": {"max_rel_error": recon["max_rel_error"],
                           "mean_rel_error": recon["mean_rel_error"],
                           "n_probe": cfg.analysis["n_probe"]},
        "boundary_equation": {"residual": bdr["residual"]},
        "kernel_spectral_mass": spectral,
    }
    _write_json(os.path.join(out, "verify.json"), report)
    if not quiet:
        print(f"reconstruction {recon['max_rel_error']:.3e}, "
              f"boundary {bdr['residual']:.3e}")
    return EXIT_OK


def cmd_dynamics(cfg: RunConfig, out: str, quiet: bool):
    from .dynamics import (BoundaryPoint, billiard_map, black_box_scales,
                           verify_scales)
    chan = cfg.channel_spec()
    lam = cfg.solver["lambda"]
    _require_subcritical(chan, lam)
    scales = black_box_scales(chan, _forcing_support_radius(cfg), (lam, lam))
    checks = verify_scales(scales, chan)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for start in rng.uniform(-2.0, 2.0, 8):
        p = BoundaryPoint("up", float(start))
        for n in range(16):
            rows.append((float(start), n, p.theta))
            p = billiard_map(p, chan, lam, 1)
    _write_csv(os.path.join(out, "orbits.csv"),
               ["theta0", "iterate", "theta"], rows)
    report = {
        **cfg.echo_dict(),
        "scales": {"M": scales.M, "N": scales.N, "L": scales.L},
        "checks": checks,
        "subcriticality_margin": float(subcriticality_margin(chan, lam)),
    }
    _write_json(os.path.join(out, "dynamics.json"), report)
    if not quiet:
        print(f"scales M={scales.M} N={scales.N} L={scales.L:.2f}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: str, quiet: bool):
    if not cfg.sweep:
        raise ConfigError("sweep", "sweep subcommand needs a sweep section")
    chan = cfg.channel_spec()
    lam = cfg.solver["lambda"]
    _require_subcritical(chan, lam)
    kind = cfg.sweep["kind"]
    values = cfg.sweep["values"]
    prof = _profile(cfg)
    L = cfg.solver["L"]
    rows = []
    verdict = {}
    if kind == "eps":
        tg = TensorGrid(cheb_nodes(cfg.solver["n1"]),
                        cheb_nodes(cfg.solver["n2"]))
        sols, diffs, pdu = lap_sweep(chan, lam, values, L,
                                     n1=cfg.solver["n1"],
                                     n2=cfg.solver["n2"], profile=prof,
                                     tau=cfg.solver["tau"],
                                     forcing=_forcing_array(cfg, tg))
        eps_sorted = sorted(values, reverse=True)
        for i, eps in enumerate(eps_sorted):
            rows.append((eps, diffs[i - 1] if i else "", pdu[i]))
        verdict = {"monotone": all(b < a for a, b in zip(diffs, diffs[1:]))
                   if len(diffs) > 1 else True,
                   "diffs": list(map(float, diffs))}
        header = ["eps", "diff_to_previous", "pdu_residual"]
    else:
        sols = []
        for v in values:
            if kind == "tau":
                tau, n1, n2 = float(v), cfg.solver["n1"], cfg.solver["n2"]
            else:
                tau, n1 = cfg.solver["tau"], int(v)
                n2 = max(8, int(round(n1 * cfg.solver["n2"]
                                      / cfg.solver["n1"])))
            tg = TensorGrid(cheb_nodes(n1), cheb_nodes(n2))
            sols.append(solve_stationary(chan, cfg.omega, L, n1=n1, n2=n2,
                                         profile=prof, tau=tau,
                                         forcing=_forcing_array(cfg, tg)))
        half = min(_trusted_halfwidth(s) for s in sols)
        x1 = np.linspace(-half, half, 301)
        x2 = np.linspace(-np.pi + 1e-9, -1e-9, 81)
        grids = [s.resample_grid(x1, x2) for s in sols]
        ref = max(float(np.sqrt(np.mean(np.abs(g) ** 2))) for g in grids)
        diffs = [float(np.sqrt(np.mean(np.abs(a - b) ** 2))) / ref
                 for a, b in zip(grids, grids[1:])]
        for i, v in enumerate(values):
            rows.append((v, diffs[i - 1] if i else ""))
        verdict = {"diffs": diffs,
                   "max_diff": max(diffs) if diffs else 0.0}
        header = [kind, "diff_to_previous"]
    _write_csv(os.path.join(out, "sweep.csv"), header, rows)
    _write_json(os.path.join(out, "sweep.json"),
                {**cfg.echo_dict(), "kind": kind, "verdict": verdict})
    if not quiet:
        print(f"sweep {kind}: {verdict}")
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, out: str, quiet: bool):
    from .evolution import discretize_P, evolve_profile, leading_profile_error
    chan = cfg.channel_spec()
    lam = cfg.solver["lambda"]
    _require_subcritical(chan, lam)
    f_cplx = _forcing_callable(cfg, chan)

    def f_real(x1, x2):
        return np.real(f_cplx(x1, x2))

    # stationary outgoing profile with the same (real) forcing
    tg = TensorGrid(cheb_nodes(cfg.solver["n1"]), cheb_nodes(cfg.solver["n2"]))
    y1 = tg.g1.nodes
    y2 = tg.g2.nodes
    L = cfg.solver["L"]
    X1 = (L * y1)[:, None] + 0.0 * y2[None, :]
    H = np.pi - np.real(chan.G(L * y1))
    X2 = ((y2[None, :] - 1.0) / 2.0) * H[:, None]
    sol = solve_stationary(chan, cfg.omega, L, n1=cfg.solver["n1"],
                           n2=cfg.solver["n2"], profile=_profile(cfg),
                           tau=cfg.solver["tau"],
                           forcing=f_real(X1, X2).astype(complex))
    modal = discretize_P(chan, cfg.evolution["L_e"], K=cfg.evolution["K"],
                         M=cfg.evolution["M"])
    times = np.linspace(0.0, cfg.evolution["t_max"], cfg.evolution["n_times"])
    prof = evolve_profile(modal, lam, f_real, times)
    rep = leading_profile_error(prof, sol, beta=cfg.analysis["beta"])
    rows = [(float(t), float(rep["error"][i]), float(rep["far_energy"][i]),
             float(prof.end_fraction[i]), int(t > prof.T_max))
            for i, t in enumerate(times)]
    _write_csv(os.path.join(out, "evolution.csv"),
               ["t", "error", "far_energy", "end_fraction", "beyond_T_max"],
               rows)
    i_quarter = int(np.argmin(np.abs(times - prof.T_max / 4)))
    i_end = int(np.argmin(np.abs(times - min(prof.T_max, times[-1]))))
    report = {
        **cfg.echo_dict(),
        "T_max": prof.T_max,
        "n_modes": modal.size,
        "n_near_resonant": rep["n_near"],
        "error_trend": {"quarter": float(rep["error"][i_quarter]),
                        "end": float(rep["error"][i_end]),
                        "decreasing": bool(rep["error"][i_end]
                                           < rep["error"][i_quarter])},
    }
    _write_json(os.path.join(out, "evolution.json"), report)
    if not quiet:
        print(f"T_max {prof.T_max}, error trend "
              f"{report['error_trend']['decreasing']}")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "evolve": cmd_evolve,
    "dynamics": cmd_dynamics,
    "endmodes": cmd_endmodes,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="iwchannel",
        description="Linear internal waves in 2D subcritical channels")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML config path")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="BLAS thread cap (best effort)")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "schema", exc.message, {"path": exc.path})
    except OSError as exc:
        return _fail(EXIT_CONFIG, "io", str(exc))
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.echo["seed"] = args.seed

    os.makedirs(args.out, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, args.out, args.quiet)
    except SubcriticalityError as exc:
        return _fail(EXIT_SUBCRITICAL, "subcriticality", str(exc),
                     {"lambda": exc.lam, "margin": exc.margin})
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "schema", exc.message, {"path": exc.path})
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        return _fail(EXIT_RUNTIME, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
