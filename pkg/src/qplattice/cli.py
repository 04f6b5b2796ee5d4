"""Batch front end: config-driven sweeps with CSV/JSON artifacts.

Every command reads a JSON config file holding the operator description
(the schema consumed by ``operator_from_config``) plus per-command grid
blocks, runs the sweep, and writes one artifact into the output
directory.  Grids are embarrassingly parallel; ``--jobs N`` fans the
grid points over a process pool and the rows come back keyed by grid
index, so serial and parallel runs emit identical bytes.

Exit codes: 0 success, 1 config error, 2 numerical non-convergence on
some grid point, 3 invariant failure.  Failed grid points are kept in
the CSV as ``nan`` rows with the message in a trailing ``error`` column.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import is_dataclass, asdict, replace

import numpy as np

from . import __version__
from .linalg import (
    ArgumentError,
    ConvergenceError,
    InvariantError,
    nearest_eigenpair,
)
from .operators import (
    config_digest,
    dual_operator,
    fold_to_strip,
    operator_from_config,
)
from .cocycle import (
    DEFAULT_SAMPLES,
    companion_cocycle,
    lyapunov_spectrum,
    transfer_cocycle,
    upper_lyapunov_sum,
)
from .splitting import DEFAULT_WINDOW, detect_splitting, vertical_angle
from .weyl import spectral_bound
from .measures import DEFAULT_TRUNCATION, ids, thouless_residual
from .longrange import subordinacy_probe, duality_transform
from .corpus import cosine_root_state, run_corpus

DEFAULT_RADII = (256, 512, 1024, 2048, 4096)
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOCONV = 2
EXIT_INVARIANT = 3


# ── config plumbing ──────────────────────────────────────────────────────────


def _load_config(path):
    if path is None:
        raise ArgumentError("a config file is required (--config PATH)")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ArgumentError("cannot read config: %s" % (exc,)) from exc
    except json.JSONDecodeError as exc:
        raise ArgumentError("config is not valid JSON: %s" % (exc,)) from exc
    if not isinstance(cfg, dict):
        raise ArgumentError("config root must be a JSON object")
    return cfg


def _parse_grid(block, what="grid"):
    """Grid block: either {"values": [...]} or {start, stop, count[, scale]}."""
    if not isinstance(block, dict):
        raise ArgumentError("missing or malformed %s block" % what)
    try:
        if "values" in block:
            values = np.asarray(block["values"], dtype=float)
        else:
            count = int(block["count"])
            if count <= 0:
                raise ArgumentError("empty %s" % what)
            space = np.geomspace if block.get("scale") == "log" else np.linspace
            values = space(float(block["start"]), float(block["stop"]), count)
    except (KeyError, TypeError, ValueError) as exc:
        raise ArgumentError("bad %s block: %s" % (what, exc)) from exc
    if values.ndim != 1 or values.size == 0:
        raise ArgumentError("empty %s" % what)
    return values


def _line_from(cfg):
    if "operator" not in cfg:
        raise ArgumentError("config needs an \"operator\" block")
    return operator_from_config(cfg["operator"])


def _strip_from(cfg):
    return fold_to_strip(_line_from(cfg))


def _out_path(args, filename):
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise ArgumentError("output directory not writable: %s" % (exc,)) from exc
    return os.path.join(args.out, filename)


# ── artifact emission ────────────────────────────────────────────────────────


def _fmt(value):
    value = float(value)
    return "nan" if np.isnan(value) else format(value, ".17g")


def _footer(cfg, args):
    return "# config=%s version=%s seed=%d" % (
        config_digest(cfg), __version__, args.seed,
    )


def _write_csv(path, header, rows, errors, cfg, args):
    """RFC-4180 CSV: header row, one row per grid point, provenance footer.

    Rows shorter than the header are padded with nan (failed points); the
    ``error`` column appears only when some point actually failed.
    """
    has_errors = any(errors)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header + ["error"] if has_errors else header)
        for row, err in zip(rows, errors):
            padded = list(row) + [np.nan] * (len(header) - len(row))
            out = [_fmt(v) for v in padded]
            if has_errors:
                out.append(err)
            writer.writerow(out)
        writer.writerow([_footer(cfg, args)])
    return path


def _jsonable(obj):
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _write_json(path, payload, cfg, args):
    payload = dict(_jsonable(payload))
    payload["provenance"] = {
        "config": config_digest(cfg),
        "version": __version__,
        "seed": args.seed,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _run_grid(worker, tasks, jobs):
    """Map a picklable worker over the tasks, keyed by grid index."""
    if jobs <= 1:
        return [worker(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


def _merge(results):
    rows = [r for r, _, _ in results]
    errors = [e for _, e, _ in results]
    code = max((c for _, _, c in results), default=EXIT_OK)
    return rows, errors, code


# ── grid-point workers (module level: they must survive pickling) ────────────


def _lyapunov_point(task):
    cfg, energy = task
    try:
        strip = _strip_from(cfg)
        cocycle = transfer_cocycle(strip, energy)
        est = lyapunov_spectrum(
            cocycle,
            int(cfg.get("steps", 10000)),
            samples=int(cfg.get("samples", DEFAULT_SAMPLES)),
        )
        row = [energy] + [float(x) for x in est.exponents] + [est.spread]
        return row, "", EXIT_OK
    except (ConvergenceError, np.linalg.LinAlgError) as exc:
        return [energy], str(exc), EXIT_NOCONV
    except InvariantError as exc:
        return [energy], str(exc), EXIT_INVARIANT


def _splitting_point(task):
    cfg, energy = task
    try:
        strip = _strip_from(cfg)
        cocycle = transfer_cocycle(strip, energy)
        split = detect_splitting(
            cocycle,
            float(cfg.get("theta", 0.0)),
            int(cfg.get("window", DEFAULT_WINDOW)),
        )
        gap = min(split.certificates) if split.certificates else np.nan
        row = [
            energy,
            split.dims[0],
            split.dims[1],
            split.dims[2],
            gap,
            vertical_angle(split.stable),
            vertical_angle(split.center),
        ]
        return row, "", EXIT_OK
    except (ConvergenceError, np.linalg.LinAlgError) as exc:
        return [energy], str(exc), EXIT_NOCONV
    except InvariantError as exc:
        return [energy], str(exc), EXIT_INVARIANT


def _thouless_point(task):
    cfg, table, energy = task
    try:
        op = _line_from(cfg)
        cocycle = companion_cocycle(op, energy)
        lyap = upper_lyapunov_sum(
            cocycle,
            op.hopping.range,
            int(cfg.get("steps", 10000)),
            samples=int(cfg.get("samples", DEFAULT_SAMPLES)),
        )[0]
        residual = thouless_residual(op, energy, table, lyap)
        return [energy, lyap, residual], "", EXIT_OK
    except (ArgumentError, ConvergenceError, np.linalg.LinAlgError) as exc:
        return [energy], str(exc), EXIT_NOCONV
    except InvariantError as exc:
        return [energy], str(exc), EXIT_INVARIANT


# ── commands ─────────────────────────────────────────────────────────────────


def _cmd_lyapunov(cfg, args):
    strip = _strip_from(cfg)  # validate once before forking
    energies = _parse_grid(cfg.get("grid"))
    results = _run_grid(_lyapunov_point, [(cfg, e) for e in energies], args.jobs)
    rows, errors, code = _merge(results)
    header = (["E"]
              + ["L%d" % j for j in range(1, 2 * strip.width + 1)]
              + ["spread"])
    path = _write_csv(_out_path(args, "lyapunov.csv"), header, rows, errors,
                      cfg, args)
    print("wrote %s (%d rows)" % (path, len(rows)))
    return code


def _cmd_ids(cfg, args):
    op = _line_from(cfg)
    energies = _parse_grid(cfg.get("grid"))
    table = ids(
        op,
        energies,
        n_sites=int(cfg.get("truncation", DEFAULT_TRUNCATION)),
        samples=int(cfg.get("samples", 32)),
    )
    rows = [[e, v] for e, v in zip(table.energies, table.values)]
    path = _write_csv(_out_path(args, "ids.csv"), ["E", "N"], rows,
                      [""] * len(rows), cfg, args)
    print("wrote %s (%d rows)" % (path, len(rows)))
    return EXIT_OK


def _cmd_weyl(cfg, args):
    strip = _strip_from(cfg)
    if "energy" not in cfg:
        raise ArgumentError("weyl needs an \"energy\" key")
    eps_grid = None
    if "eps_grid" in cfg:
        eps_grid = tuple(_parse_grid(cfg["eps_grid"], "eps_grid"))
    report = spectral_bound(
        strip,
        float(cfg["energy"]),
        eps_grid=eps_grid,
        theta=float(cfg.get("theta", 0.0)),
        dims=tuple(cfg["dims"]) if "dims" in cfg else None,
        n_window=int(cfg.get("window", DEFAULT_WINDOW)),
    )
    header = ["eps", "trace_im", "mu_bound", "growth_bound",
              "criterion_lhs", "criterion_rhs"]
    rows = [
        [eps, report.trace_im[i], report.mu_bound[i], report.jl_rhs[i],
         report.criterion_lhs[i], report.criterion_rhs[i]]
        for i, eps in enumerate(report.eps_grid)
    ]
    path = _write_csv(_out_path(args, "weyl.csv"), header, rows,
                      [""] * len(rows), cfg, args)
    print("wrote %s (%d rows; growth constant %.6g, criterion constant %.6g)"
          % (path, len(rows), report.jl_constant, report.criterion_constant))
    return EXIT_OK


def _cmd_splitting(cfg, args):
    _strip_from(cfg)
    energies = _parse_grid(cfg.get("grid"))
    results = _run_grid(_splitting_point, [(cfg, e) for e in energies], args.jobs)
    rows, errors, code = _merge(results)
    header = ["E", "dim_unstable", "dim_center", "dim_stable", "gap",
              "angle_stable", "angle_center"]
    path = _write_csv(_out_path(args, "splitting.csv"), header, rows, errors,
                      cfg, args)
    print("wrote %s (%d rows)" % (path, len(rows)))
    return code


def _cmd_thouless(cfg, args):
    op = _line_from(cfg)
    energies = _parse_grid(cfg.get("grid"))
    ids_block = cfg.get("ids", {})
    if "values" in ids_block or "count" in ids_block:
        table_grid = _parse_grid(ids_block, "ids grid")
    else:
        bound = 1.05 * op.norm_bound()
        table_grid = np.linspace(-bound, bound, 257)
    table = ids(
        op,
        table_grid,
        n_sites=int(ids_block.get("truncation", DEFAULT_TRUNCATION)),
        samples=int(ids_block.get("samples", 32)),
    )
    results = _run_grid(_thouless_point, [(cfg, table, e) for e in energies],
                        args.jobs)
    rows, errors, code = _merge(results)
    header = ["E", "exponent_sum", "residual"]
    path = _write_csv(_out_path(args, "thouless.csv"), header, rows, errors,
                      cfg, args)
    print("wrote %s (%d rows)" % (path, len(rows)))
    return code


def _cmd_subordinacy(cfg, args):
    op = _line_from(cfg)
    if "energy" not in cfg:
        raise ArgumentError("subordinacy needs an \"energy\" key")
    radii = tuple(int(r) for r in cfg.get("radii", DEFAULT_RADII))
    if not radii:
        raise ArgumentError("empty radii grid")
    solution = cfg.get("solution", {"type": "cosine_root"})
    kind = solution.get("type")
    if kind == "cosine_root":
        n_max = 2 * max(radii) + op.hopping.range + 8
        u, _root = cosine_root_state(op, n_max)
        first = -n_max
    elif kind == "values":
        try:
            u = np.asarray(solution["values"], dtype=float)
            first = int(solution["first_site"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ArgumentError("bad solution block: %s" % (exc,)) from exc
    else:
        raise ArgumentError("solution type must be cosine_root or values")
    report = subordinacy_probe(
        op,
        float(cfg["energy"]),
        u,
        r_grid=radii,
        alpha=float(cfg.get("alpha_exponent", 1.0)),
        first_site=first,
    )
    path = _write_json(_out_path(args, "subordinacy.json"),
                       asdict(report), cfg, args)
    print("wrote %s (trend: %s)" % (path, report.trend))
    return EXIT_OK if report.ok else EXIT_INVARIANT


def _cmd_duality(cfg, args):
    op = _line_from(cfg)
    if "energy" not in cfg:
        raise ArgumentError("duality needs an \"energy\" key")
    energy = float(cfg["energy"])
    x = float(cfg.get("x", 0.0))
    truncation = int(cfg.get("truncation", 2001))
    window = int(cfg.get("window", 512))
    if truncation < 2 * window + 1:
        raise ArgumentError("truncation must cover the output window")
    dual = replace(dual_operator(op), theta=x)
    value, vector = nearest_eigenpair(dual.assemble_banded(truncation), energy)
    first_index = -(truncation // 2)
    sites = np.arange(-window, window + 1)
    u = duality_transform(vector, first_index, x, op.theta, op.alpha, sites)
    scale = float(np.max(np.abs(u)))
    if scale <= 0:
        raise ConvergenceError("duality transform produced the zero sequence")
    u = u / scale
    hu = op.apply(u, first_site=-window)
    k = op.hopping.range
    residual = float(np.max(np.abs(hu - value * u)[k : u.size - k]))
    # Concentration is measured around the eigenvector's own peak: a
    # localized dual state can sit anywhere in the truncation box.
    weights = np.abs(vector)
    peak = int(np.argmax(weights))
    inner = np.abs(np.arange(truncation) - peak) <= window // 2
    tail = float(weights[~inner].sum() / weights.sum())
    payload = {
        "target_energy": energy,
        "dual_energy": value,
        "bloch_phase": x,
        "residual": residual,
        "dual_peak_site": peak + first_index,
        "dual_tail_mass": tail,
        "truncation": truncation,
        "window": window,
    }
    path = _write_json(_out_path(args, "duality.json"), payload, cfg, args)
    print("wrote %s (dual energy %.12g, residual %.3e)" % (path, value, residual))
    return EXIT_OK


def _cmd_verify(cfg, args):
    manifest = run_corpus(cfg.get("filter"))
    path = _write_json(_out_path(args, "verify.json"), manifest, cfg, args)
    for entry in manifest["entries"]:
        print("%-20s %s" % (entry["name"], "ok" if entry["ok"] else "FAIL"))
        if not entry["ok"]:
            for check in entry["checks"]:
                if not check["ok"]:
                    print("    %-28s value %.6g limit %.6g"
                          % (check["label"], check["value"], check["limit"]))
    print("wrote %s" % path)
    return EXIT_OK if manifest["ok"] else EXIT_INVARIANT


COMMANDS = {
    "lyapunov": _cmd_lyapunov,
    "ids": _cmd_ids,
    "weyl": _cmd_weyl,
    "splitting": _cmd_splitting,
    "thouless": _cmd_thouless,
    "subordinacy": _cmd_subordinacy,
    "duality": _cmd_duality,
    "verify": _cmd_verify,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qplattice",
        description="Quasi-periodic lattice-operator sweeps: Lyapunov spectra, "
                    "state densities, boundary matrices, splittings, and the "
                    "reference verification battery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("lyapunov", "Lyapunov spectrum over an energy grid -> CSV"),
        ("ids", "integrated density of states over an energy grid -> CSV"),
        ("weyl", "boundary-matrix traces and bounds over imaginary offsets -> CSV"),
        ("splitting", "splitting dimensions, gaps, and angles over energies -> CSV"),
        ("thouless", "exponent-sum / state-density residuals -> CSV"),
        ("subordinacy", "boundary-pairing probe at one energy -> JSON"),
        ("duality", "dual eigenvector transform residual -> JSON"),
        ("verify", "run the reference battery; nonzero exit on failure"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None,
                       help="JSON config file (optional only for verify)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--jobs", type=int, default=1,
                       help="process-pool width for grid sweeps")
        p.add_argument("--seed", type=int, default=0,
                       help="recorded in artifact provenance; sweeps are "
                            "deterministic")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config) if (args.config or args.command != "verify") else {}
        return COMMANDS[args.command](cfg, args)
    except ArgumentError as exc:
        print("config error: %s" % (exc,), file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print("did not converge: %s" % (exc,), file=sys.stderr)
        return EXIT_NOCONV
    except InvariantError as exc:
        print("invariant violated: %s" % (exc,), file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
