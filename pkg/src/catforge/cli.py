"""Command-line front end: config-driven pipelines with plot-ready outputs.

Subcommands
-----------
generate
    Run the subtraction pipeline and write the conditional state, its
    photon-number distribution and a scalar summary.
wigner
    Evaluate the Wigner function of a generated or stored state on a grid.
sweep
    Repeat the pipeline along an axis (eps_minus grid, eta grid, or rows of
    a user-supplied delta table) and emit one CSV row per point.
tomo
    Sample homodyne quadratures from a truth state (or load an external
    record), reconstruct by maximum likelihood, and report the closed-loop
    fidelity.

Configuration is an INI file with one section per concern; see README.md.
All outputs are CSV (header row, '.' decimals, newline-terminated) plus a
machine-readable ``*_summary.json`` per run.  Every command is
deterministic given its config: rerunning produces byte-identical files.
Validation completes before any computation starts and files are written
only after the computation succeeds, so a failed run leaves no partial
outputs.  Exit codes: 0 success, 2 config/validation error, 3 numeric
failure (cutoff too small, zero conditional state).

The sweep command evaluates points concurrently; the CATFORGE_THREADS
environment variable caps the worker count.  Rows are written in input
order regardless of completion order.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import analysis, fock, generate, tomography
from .errors import ConfigError, CutoffTooSmallError, InvalidArgumentError, ZeroStateError

DEFAULT_ZETA0 = 2.0 * math.pi * 4.5e6  # rad/s
_Artifacts = List[Tuple[str, Callable[[Path], None]]]

__all__ = ["main"]


# ---------------------------------------------------------------------------
# Config helpers
# ---------------------------------------------------------------------------

def _read_config(path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}")
    return cp


def _require(cp: configparser.ConfigParser, section: str, key: str) -> str:
    if not cp.has_section(section):
        raise ConfigError(f"missing section [{section}]")
    if not cp.has_option(section, key):
        raise ConfigError(f"missing key '{key}' in section [{section}]")
    return cp.get(section, key)


def _get_float(cp, section, key, default=None) -> Optional[float]:
    if not cp.has_option(section, key):
        if default is None and not isinstance(default, float):
            return default
        return default
    raw = cp.get(section, key)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key '{key}' in [{section}] is not a number: {raw!r}")


def _get_int(cp, section, key, default=None) -> Optional[int]:
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key '{key}' in [{section}] is not an integer: {raw!r}")


def _float_list(raw: str, section: str, key: str) -> List[float]:
    vals = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            vals.append(float(part))
        except ValueError:
            raise ConfigError(f"key '{key}' in [{section}]: bad number {part!r}")
    if not vals:
        raise ConfigError(f"key '{key}' in [{section}] lists no values")
    return vals


def _scheme_params(cp, args) -> generate.SchemeParams:
    eps_plus = _require(cp, "scheme", "eps_plus")
    eps_minus = _require(cp, "scheme", "eps_minus")
    try:
        eps_plus, eps_minus = float(eps_plus), float(eps_minus)
    except ValueError as exc:
        raise ConfigError(f"[scheme] squeezing values must be numbers: {exc}")
    eta = _get_float(cp, "scheme", "eta", 1.0)
    cutoff = _get_int(cp, "scheme", "cutoff", 20)
    if args.cutoff is not None:
        cutoff = args.cutoff
    try:
        return generate.SchemeParams(eps_plus=eps_plus, eps_minus=eps_minus,
                                     eta=eta, cutoff=cutoff)
    except InvalidArgumentError as exc:
        raise ConfigError(f"invalid [scheme] parameters: {exc}")


def _json_writer(payload) -> Callable[[Path], None]:
    def write(path: Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")
    return write


def _alpha_grid(alpha_max: float) -> np.ndarray:
    return np.arange(0.0, alpha_max + 1e-12, 0.02)


def _threads() -> int:
    env = os.environ.get("CATFORGE_THREADS", "").strip()
    default = min(4, os.cpu_count() or 1)
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"CATFORGE_THREADS must be an integer, got {env!r}")
        if cap < 1:
            raise ConfigError("CATFORGE_THREADS must be >= 1")
        return cap
    return default


# ---------------------------------------------------------------------------
# Commands: each validates, computes, and returns deferred artifact writers
# ---------------------------------------------------------------------------

def _cmd_generate(cp, args) -> _Artifacts:
    params = _scheme_params(cp, args)
    result = generate.lossy_state(params)
    probs = analysis.photon_distribution(result.rho_plus)
    summary = {
        "eps_plus": params.eps_plus,
        "eps_minus": params.eps_minus,
        "eta": params.eta,
        "cutoff": params.cutoff,
        "success_weight": result.success_weight,
        "c0": result.c0,
        "purity": analysis.purity(result.rho_plus),
        "mean_photon": analysis.mean_photon(result.rho_plus),
    }
    doc = {
        "rho_plus": fock.to_document(result.rho_plus),
        "success_weight": result.success_weight,
        "c0": result.c0,
    }

    def write_probs(path: Path) -> None:
        analysis.photon_distribution_to_csv(probs, path)

    return [
        ("generation_result.json", _json_writer(doc)),
        ("summary.json", _json_writer(summary)),
        ("photon_distribution.csv", write_probs),
    ]


def _load_state_for_wigner(path: str) -> fock.DensityMatrix:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"state file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"state file {path} is not valid JSON: {exc}")
    if "rho_plus" in doc:  # a generation_result.json document
        doc = doc["rho_plus"]
    state = fock.from_document(doc)
    if isinstance(state, fock.PureState):
        state = state.to_density()
    return state


def _cmd_wigner(cp, args) -> _Artifacts:
    x_min = _get_float(cp, "wigner", "x_min", -6.0)
    x_max = _get_float(cp, "wigner", "x_max", 6.0)
    p_min = _get_float(cp, "wigner", "p_min", -6.0)
    p_max = _get_float(cp, "wigner", "p_max", 6.0)
    step = _get_float(cp, "wigner", "step", 0.05)
    if step is None or step <= 0:
        raise ConfigError(f"[wigner] step must be > 0, got {step}")
    if x_max <= x_min or p_max <= p_min:
        raise ConfigError("[wigner] grid bounds must satisfy min < max")
    state_path = cp.get("wigner", "state_path", fallback=None)
    if state_path is not None:
        rho = _load_state_for_wigner(state_path)
    else:
        params = _scheme_params(cp, args)
        rho = generate.lossy_state(params).rho_plus

    x_axis = np.arange(x_min, x_max + step / 2, step)
    p_axis = np.arange(p_min, p_max + step / 2, step)
    grid = analysis.wigner(rho, x_axis, p_axis)
    wx, wp, wval = analysis.min_wigner(grid)
    w00 = analysis.wigner(rho, np.array([0.0]), np.array([0.0])).values[0, 0]
    summary = {
        "min_w": wval,
        "min_w_x": wx,
        "min_w_p": wp,
        "w_origin": float(w00),
        "integral": grid.integral(),
        "x_points": int(x_axis.size),
        "p_points": int(p_axis.size),
    }

    def write_grid(path: Path) -> None:
        analysis.wigner_to_csv(grid, path)

    return [
        ("wigner.csv", write_grid),
        ("wigner_summary.json", _json_writer(summary)),
    ]


_SWEEP_HEADER = ("index,axis,delta_ns,zeta0_delta,eps_plus,eps_minus,eta,"
                 "success_weight,c0,n_plus,n_minus,purity,alpha_star_sq,"
                 "fidelity_star,min_w")


def _sweep_point(point: dict, alpha_max: float, w_span: float, w_step: float) -> dict:
    params = generate.SchemeParams(eps_plus=point["eps_plus"],
                                   eps_minus=point["eps_minus"],
                                   eta=point["eta"], cutoff=point["cutoff"])
    two_mode, weight = generate.ancilla_subtract_exact(params)
    rho_p = generate.reduce_to_main(two_mode)
    rho_m = fock.partial_trace(two_mode.to_density(), keep="minus")
    if params.eps_plus != 0.0:
        c0 = generate.mixture_weight_c0(rho_p, generate.approx_phi(params))
    else:
        c0 = 1.0
    rho_p = fock.apply_loss(rho_p, params.eta)
    rho_m = fock.apply_loss(rho_m, params.eta)
    fit = analysis.best_cat_fit(rho_p, "even", _alpha_grid(alpha_max))
    axis_vals = np.arange(-w_span, w_span + w_step / 2, w_step)
    _, _, min_w = analysis.min_wigner(analysis.wigner(rho_p, axis_vals, axis_vals))
    return {
        **point,
        "success_weight": weight,
        "c0": c0,
        "n_plus": analysis.mean_photon(rho_p),
        "n_minus": analysis.mean_photon(rho_m),
        "purity": analysis.purity(rho_p),
        "alpha_star_sq": fit.size,
        "fidelity_star": fit.fidelity_star,
        "min_w": min_w,
    }


def _cmd_sweep(cp, args) -> _Artifacts:
    axis = _require(cp, "sweep", "axis")
    if axis not in ("eps_minus", "eta", "table"):
        raise ConfigError(f"[sweep] axis must be eps_minus, eta or table, got {axis!r}")
    base = _scheme_params(cp, args)
    zeta0 = _get_float(cp, "sweep", "zeta0", DEFAULT_ZETA0)
    if zeta0 <= 0:
        raise ConfigError("[sweep] zeta0 must be > 0")
    alpha_max = _get_float(cp, "sweep", "alpha_max", 2.2)
    w_span = _get_float(cp, "sweep", "wigner_span", 5.0)
    w_step = _get_float(cp, "sweep", "wigner_step", 0.1)
    if w_step <= 0 or w_span <= 0 or alpha_max <= 0:
        raise ConfigError("[sweep] alpha_max, wigner_span and wigner_step must be > 0")

    points = []
    if axis == "table":
        table_path = cp.get("scheme", "delta_table_path", fallback=None) or \
            cp.get("sweep", "delta_table_path", fallback=None)
        if table_path is None:
            raise ConfigError("table sweep needs key 'delta_table_path' in [scheme] or [sweep]")
        try:
            rows = generate.load_delta_table(table_path)
        except FileNotFoundError:
            raise ConfigError(f"delta table not found: {table_path}")
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc))
        for row in rows:
            points.append({
                "eps_plus": row.eps_plus, "eps_minus": row.eps_minus,
                "eta": base.eta, "cutoff": base.cutoff,
                "delta_ns": row.delta_ns,
                "zeta0_delta": zeta0 * row.delta_ns * 1e-9,
            })
    else:
        values = _float_list(_require(cp, "sweep", "values"), "sweep", "values")
        for v in values:
            point = {"eps_plus": base.eps_plus, "eps_minus": base.eps_minus,
                     "eta": base.eta, "cutoff": base.cutoff,
                     "delta_ns": None, "zeta0_delta": None}
            point[axis] = v
            points.append(point)
    for point in points:  # full validation before any computation
        try:
            generate.SchemeParams(eps_plus=point["eps_plus"],
                                  eps_minus=point["eps_minus"],
                                  eta=point["eta"], cutoff=point["cutoff"])
        except InvalidArgumentError as exc:
            raise ConfigError(f"invalid sweep point {point}: {exc}")

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        futures = [pool.submit(_sweep_point, pt, alpha_max, w_span, w_step)
                   for pt in points]
        results = [f.result() for f in futures]  # input order

    def fmt(v) -> str:
        return "" if v is None else repr(float(v))

    lines = [_SWEEP_HEADER]
    for i, row in enumerate(results):
        lines.append(",".join([
            str(i), axis, fmt(row["delta_ns"]), fmt(row["zeta0_delta"]),
            fmt(row["eps_plus"]), fmt(row["eps_minus"]), fmt(row["eta"]),
            fmt(row["success_weight"]), fmt(row["c0"]), fmt(row["n_plus"]),
            fmt(row["n_minus"]), fmt(row["purity"]), fmt(row["alpha_star_sq"]),
            fmt(row["fidelity_star"]), fmt(row["min_w"]),
        ]))
    csv_text = "\n".join(lines) + "\n"
    summary = {"axis": axis, "points": len(results), "zeta0": zeta0}

    def write_csv(path: Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(csv_text)

    return [
        ("sweep.csv", write_csv),
        ("sweep_summary.json", _json_writer(summary)),
    ]


def _cmd_tomo(cp, args) -> _Artifacts:
    n_samples = _get_int(cp, "tomo", "n_samples", 22000)
    if n_samples < 1:
        raise ConfigError("[tomo] n_samples must be >= 1")
    mle_cutoff = _get_int(cp, "tomo", "mle_cutoff", 12)
    max_iters = _get_int(cp, "tomo", "max_iters", 2000)
    stop_tol = _get_float(cp, "tomo", "stop_tol", 1e-7)
    seed = args.seed if args.seed is not None else _get_int(cp, "tomo", "seed", 0)
    phases_raw = cp.get("tomo", "phases", fallback="uniform_random").strip()
    if phases_raw == "uniform_random":
        phase_scheme = "uniform_random"
    else:
        phase_scheme = _float_list(phases_raw, "tomo", "phases")
    try:
        config = tomography.MleConfig(cutoff=mle_cutoff, max_iters=max_iters,
                                      stop_tol=stop_tol)
    except InvalidArgumentError as exc:
        raise ConfigError(f"invalid [tomo] settings: {exc}")

    record_path = cp.get("tomo", "record_path", fallback=None)
    truth = None
    simulated = False
    if record_path is not None:
        try:
            record = tomography.record_from_csv(record_path)
        except FileNotFoundError:
            raise ConfigError(f"record file not found: {record_path}")
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc))
    else:
        truth_kind = cp.get("tomo", "truth", fallback="scheme").strip()
        if truth_kind == "vacuum":
            cutoff = args.cutoff if args.cutoff is not None else \
                _get_int(cp, "scheme", "cutoff", 20)
            truth = fock.vacuum(cutoff).to_density()
        elif truth_kind == "scheme":
            truth = generate.lossy_state(_scheme_params(cp, args)).rho_plus
        else:
            raise ConfigError(f"[tomo] truth must be 'scheme' or 'vacuum', got {truth_kind!r}")
        record = tomography.sample_quadratures(truth, n_samples, phase_scheme,
                                               seed=seed, source="simulated")
        simulated = True

    rho_hat, diag = tomography.mle_reconstruct(record, config)

    fid = None
    if truth is not None:
        block = truth.entries[: mle_cutoff + 1, : mle_cutoff + 1]
        block = block / np.trace(block).real
        fid = analysis.fidelity_mixed(fock.DensityMatrix(block, mle_cutoff), rho_hat)
    summary = {
        "n_samples": len(record),
        "seed": record.seed,
        "mle_cutoff": mle_cutoff,
        "iterations": diag.iterations,
        "converged": diag.converged,
        "excluded_samples": diag.excluded_samples,
        "final_loglikelihood": diag.log_likelihoods[-1] if diag.log_likelihoods else None,
        "closed_loop_fidelity": fid,
    }
    ll_lines = ["iteration,loglikelihood"]
    ll_lines += [f"{i},{ll!r}" for i, ll in enumerate(diag.log_likelihoods)]
    ll_text = "\n".join(ll_lines) + "\n"

    artifacts: _Artifacts = []
    if simulated:
        def write_samples(path: Path) -> None:
            tomography.record_to_csv(record, path)
        artifacts.append(("samples.csv", write_samples))

    def write_rho(path: Path) -> None:
        fock.save_state(rho_hat, path)

    def write_ll(path: Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(ll_text)

    artifacts += [
        ("rho_hat.json", write_rho),
        ("likelihood.csv", write_ll),
        ("tomo_summary.json", _json_writer(summary)),
    ]
    return artifacts


_COMMANDS = {
    "generate": _cmd_generate,
    "wigner": _cmd_wigner,
    "sweep": _cmd_sweep,
    "tomo": _cmd_tomo,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catforge",
        description="Photon-subtracted cat-state pipelines: generation, "
                    "Wigner maps, parameter sweeps, homodyne tomography.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="INI config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the sampling seed")
    parser.add_argument("--cutoff", type=int, default=None,
                        help="override the scheme Fock cutoff")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        out_dir = Path(args.out)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out_dir}: {exc}")
        if not os.access(out_dir, os.W_OK):
            raise ConfigError(f"output directory {out_dir} is not writable")
        cp = _read_config(args.config)
        artifacts = _COMMANDS[args.command](cp, args)
        for name, writer in artifacts:
            writer(out_dir / name)
        for name, _ in artifacts:
            print(f"wrote {out_dir / name}")
        return 0
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CutoffTooSmallError, ZeroStateError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
