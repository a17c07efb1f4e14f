"""Command-line runner: ``qwalk run|verify|dispersion|presets``."""
import argparse
import json
import os
import sys
import time
import warnings

import numpy as np

from . import _accel, spectral
from .config import PRESET_NOTES, ExperimentConfig, decode_complex, preset, preset_names
from .evolution import FieldState, evolve_spectral, evolve_truncated, step_position
from .observables import (
    SeamWarning,
    circular_centre,
    kinematic_operators,
    marginal,
    mean_position,
    mean_position_decomposition,
    newton_wigner_mean,
    position_spread,
    probability_distribution,
)
from .output import fmt, write_csv, write_dump, write_marginal
from .states import (
    ParticleStateSpec,
    default_centre,
    eigenbasis_state,
    gaussian_particle_state,
    localized_state,
    superposition_state,
)
from .walks import (
    WalkModel,
    dispersion,
    eigenvectors,
    group_velocity,
    reconstruct,
    sin_omega,
    transition_matrices,
    unitarity_residuals,
    walk_matrix,
    weyl_terms,
    DEGENERACY_TOL,
)

NORM_TOL = 1e-9


def build_model(cfg):
    return WalkModel(cfg.model.family, int(cfg.model.dimension), float(cfg.model.mass))


def _particle_spec(cfg, model, branch=None):
    st = cfg.state
    if st.k0 is None or st.sigma is None:
        raise ValueError(f"state kind {st.kind!r} needs k0 and sigma")
    if branch is None:
        branch = model.branch_labels[0]
    return ParticleStateSpec(model, tuple(cfg.grid), tuple(st.k0), tuple(st.sigma), branch, st.centre)


def build_state(cfg, model):
    st = cfg.state
    grid = model.grid(*cfg.grid)
    if st.kind == "localized":
        x0 = default_centre(grid) if st.x0 is None else st.x0
        spinor = decode_complex(st.spinor) if st.spinor is not None else np.eye(model.coin_dim)[0]
        return localized_state(model, grid, x0, spinor), None
    if st.kind == "random":
        rng = np.random.default_rng(cfg.seed)
        shape = grid.shape + (model.coin_dim,)
        amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return FieldState(amps / np.linalg.norm(amps), grid, model), None
    if st.kind == "gaussian":
        branch = None
        if st.branch is not None:
            branch = tuple(st.branch) if model.coin_dim == 4 else int(st.branch[0])
        spec = _particle_spec(cfg, model, branch)
        return gaussian_particle_state(spec), spec
    spec = _particle_spec(cfg, model)
    if st.kind == "superposition":
        cp = decode_complex([st.c_plus])[0]
        cm = decode_complex([st.c_minus])[0]
        return superposition_state(spec, cp, cm, st.p), spec
    return eigenbasis_state(spec, decode_complex(st.weights)), spec


def sample_times(cfg):
    T = int(cfg.steps)
    times = set(range(0, T + 1, int(cfg.stride))) | {T} | {int(t) for t in cfg.snapshots if 0 <= int(t) <= T}
    return sorted(times)


def run(cfg, out_dir):
    """Evolve the configured state and write the output files; returns the run summary."""
    cfg.validate()
    os.makedirs(out_dir, exist_ok=True)
    start = time.perf_counter()
    model = build_model(cfg)
    state0, spec = build_state(cfg, model)
    grid = state0.grid
    d = model.dimension
    centre = circular_centre(probability_distribution(state0), grid)
    mom0 = state0.to_momentum()
    engine = cfg.engine
    order = int(engine.split("-")[1]) if engine.startswith("truncated") else None

    series_rows, extra_rows = [], []
    seam_hits = 0
    current = state0
    norms = []
    for t in sample_times(cfg):
        if engine == "position":
            current = step_position(current, t - current.time)
        elif engine == "spectral":
            current = evolve_spectral(mom0, t).to_position()
        else:
            current = evolve_truncated(mom0, spec.k0, order, t).to_position()
        norms.append(current.norm())
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", SeamWarning)
            xm = mean_position(current, centre)
        seam_hits += sum(issubclass(w.category, SeamWarning) for w in caught)
        on_stride = t % int(cfg.stride) == 0 or t == int(cfg.steps)
        if on_stride:
            row = [t] + list(xm)
            if "decomposition" in cfg.observables:
                dec = mean_position_decomposition(state0, t, centre)
                row += list(dec.x_plus) + list(dec.x_minus) + list(dec.x_int)
            series_rows.append(row)
            extra = [t]
            if "newton_wigner" in cfg.observables:
                extra += list(newton_wigner_mean(state0, t, spec=spec))
            if "spread" in cfg.observables:
                extra.append(position_spread(current, centre))
            if len(extra) > 1:
                extra_rows.append(extra)
        if t in cfg.snapshots:
            if cfg.marginal_axes is not None:
                table = marginal(probability_distribution(current), grid, cfg.marginal_axes)
                write_marginal(os.path.join(out_dir, f"dist_t{t}.csv"), table, None)
            if cfg.dumps:
                write_dump(os.path.join(out_dir, f"state_t{t}.qwlk"), current.amplitudes)

    header = ["t"] + [f"x_mean_{i + 1}" for i in range(d)]
    if "decomposition" in cfg.observables:
        for part in ("xplus", "xminus", "xint"):
            header += [f"{part}_{i + 1}" for i in range(d)]
    write_csv(os.path.join(out_dir, "series.csv"), header, series_rows)
    if extra_rows:
        extra_header = ["t"]
        if "newton_wigner" in cfg.observables:
            extra_header += [f"x_nw_{i + 1}" for i in range(d)]
        if "spread" in cfg.observables:
            extra_header.append("spread")
        write_csv(os.path.join(out_dir, "series_extra.csv"), extra_header, extra_rows)

    final_norm = norms[-1]
    summary = {
        "config": cfg.to_dict(),
        "final_norm": fmt(final_norm),
        "max_norm_error": fmt(max(abs(n - 1.0) for n in norms)),
        "degraded": bool(abs(final_norm - 1.0) >= NORM_TOL),
        "seam_warnings": seam_hits,
        "centre": [fmt(c) for c in centre],
        "backend": _accel.backend(),
        "elapsed_seconds": time.perf_counter() - start,
    }
    with open(os.path.join(out_dir, "run.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


# --------------------------------------------------------------------------
# invariant suite


VERIFY_MODELS = [
    WalkModel.weyl(1),
    WalkModel.weyl(2),
    WalkModel.weyl(3),
    WalkModel.dirac(1, 0.15),
    WalkModel.dirac(2, 0.3),
    WalkModel.dirac(3, 0.02),
    WalkModel.dirac(3, 0.3),
]


def _label(model):
    return f"{model.family}-d{model.dimension}-m{model.mass:g}"


def verify(cfg=None, inject_fault=False, seed=0):
    """Run the invariant suite; returns a list of ``(name, residual, tolerance)``."""
    rng = np.random.default_rng(seed)
    results = []
    models = list(VERIFY_MODELS)
    if cfg is not None:
        models.append(build_model(cfg))
    for model in models:
        k = rng.uniform(-np.pi, np.pi, (100, model.dimension))
        U = walk_matrix(k, model)
        eye = np.eye(model.coin_dim)
        results.append((f"unitarity {_label(model)}", np.abs(np.conj(np.swapaxes(U, -1, -2)) @ U - eye).max(), 1e-12))
        vecs, _ = eigenvectors(k, model)
        signs = np.array([b[0] if isinstance(b, tuple) else b for b in model.branch_labels])
        lam = np.exp(-1j * np.outer(dispersion(k, model), signs))
        results.append((f"eigenphases {_label(model)}", np.abs(U @ vecs - vecs * lam[:, None, :]).max(), 1e-10))
        tset = transition_matrices(model)
        if inject_fault and model is models[0]:
            h = next(iter(tset))
            tset[h] = tset[h] + 1e-3
        res = unitarity_residuals(tset)
        results.append((f"transition unitarity {_label(model)}", max(res.values()), 1e-12))
        results.append((f"transition reconstruction {_label(model)}", np.abs(reconstruct(tset, k) - U).max(), 1e-12))

    engine_cases = [(WalkModel.dirac(1, 0.15), (32,), 10), (WalkModel.weyl(2), (16, 16), 5), (WalkModel.dirac(3, 0.3), (4, 4, 4), 4)]
    if cfg is not None:
        engine_cases.append((build_model(cfg), tuple(min(int(n), 16) for n in cfg.grid), 4))
    for model, sizes, t in engine_cases:
        grid = model.grid(*sizes)
        shape = grid.shape + (model.coin_dim,)
        amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        st = FieldState(amps / np.linalg.norm(amps), grid, model)
        diff = np.abs(step_position(st, t).amplitudes - evolve_spectral(st, t).amplitudes).max()
        results.append((f"engine equivalence {_label(model)} {sizes} t={t}", diff, 1e-10))

    for model, sizes in [(WalkModel.weyl(2), (6, 5)), (WalkModel.dirac(3, 0.3), (2, 2, 2)), (WalkModel.dirac(3, 0.3), (3, 2, 4))]:
        grid = model.grid(*sizes)
        shape = grid.shape + (model.coin_dim,)
        f = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        fh = spectral.forward(f, grid)
        results.append((f"transform round trip {grid.kind} {sizes}", np.abs(spectral.inverse(fh, grid) - f).max(), 1e-12))
        results.append((f"transform vs direct sum {grid.kind} {sizes}", np.abs(fh - spectral.direct_transform(f, grid)).max(), 1e-12))

    for model in [m for m in models if m.family == "dirac" and m.mass > 0]:
        k = rng.uniform(-np.pi, np.pi, (100, model.dimension))
        k = k[sin_omega(k, model) > 1e-6]
        ops = kinematic_operators(k, model)
        Hx = ops.H[:, None]
        results.append((f"anticommutator H,A {_label(model)}", np.abs(Hx @ ops.A + ops.A @ Hx).max(), 1e-12))
        _, nt, _, _ = weyl_terms(k, model.dimension)
        f = ops.f
        ident = nt[:, None, 2] * f[..., 0, 1] - nt[:, None, 1] * f[..., 0, 2] + nt[:, None, 0] * f[..., 1, 2]
        results.append((f"f identity {_label(model)}", np.abs(ident).max(), 1e-12))
    return results


def _print_report(results, stream=None):
    stream = sys.stdout if stream is None else stream
    failures = 0
    for name, residual, tol in results:
        ok = bool(residual < tol)
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: residual {residual:.3e} (tol {tol:.0e})", file=stream)
    print(f"{len(results) - failures}/{len(results)} checks passed", file=stream)
    return failures


# --------------------------------------------------------------------------
# dispersion table


def dispersion_table(model, resolution):
    """Rows ``k_1..k_d, omega, v_1..v_d, u`` on a regular ``resolution^d`` grid over [-pi, pi)^d."""
    d = model.dimension
    axis = -np.pi + 2 * np.pi * np.arange(resolution) / resolution
    k = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), -1).reshape(-1, d)
    omega = dispersion(k, model)
    sw = sin_omega(k, model)
    safe = np.where(sw[:, None] < DEGENERACY_TOL, np.nan, 1.0)
    u, _, du, _ = weyl_terms(k, d)
    v = -model.n * du / np.where(sw < DEGENERACY_TOL, 1.0, sw)[:, None] * safe
    header = [f"k_{i + 1}" for i in range(d)] + ["omega"] + [f"v_{i + 1}" for i in range(d)] + ["u"]
    return header, np.column_stack([k, omega, v, u])


# --------------------------------------------------------------------------
# argument parsing


def _resolve_config(args):
    if args.config and args.preset:
        raise ValueError("give either --config or --preset, not both")
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        return None
    if getattr(args, "steps", None) is not None:
        cfg.steps = int(args.steps)
        cfg.snapshots = [t for t in cfg.snapshots if t <= cfg.steps]
    if getattr(args, "stride", None) is not None:
        cfg.stride = int(args.stride)
    return cfg.validate()


def _out_dir(args, name):
    if args.out:
        return args.out
    return os.path.join(os.environ.get("QWALK_OUT_DIR", "qwalk_out"), name)


def build_parser():
    parser = argparse.ArgumentParser(prog="qwalk", description="Weyl and Dirac quantum walk simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment JSON file")
        p.add_argument("--preset", help="built-in experiment name")
        p.add_argument("--threads", type=int, help="cap FFT worker threads")

    p_run = sub.add_parser("run", help="run an experiment and write CSV/JSON outputs")
    common(p_run)
    p_run.add_argument("--out", help="output directory (default $QWALK_OUT_DIR/<name>)")
    p_run.add_argument("--steps", type=int, help="override total steps")
    p_run.add_argument("--stride", type=int, help="override output stride")

    p_ver = sub.add_parser("verify", help="run the invariant suite")
    common(p_ver)
    p_ver.add_argument("--inject-fault", action="store_true", help="corrupt one transition matrix (self-test)")

    p_disp = sub.add_parser("dispersion", help="tabulate the dispersion relation")
    p_disp.add_argument("--family", choices=["weyl", "dirac"], default="dirac")
    p_disp.add_argument("--dimension", type=int, default=1)
    p_disp.add_argument("--mass", type=float, default=0.0)
    p_disp.add_argument("--resolution", type=int, default=64)
    p_disp.add_argument("--out", help="CSV path (default stdout)")

    p_pre = sub.add_parser("presets", help="list presets or print one as JSON")
    p_pre.add_argument("name", nargs="?")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "threads", None):
            spectral.set_workers(args.threads)
        if args.command == "run":
            cfg = _resolve_config(args)
            if cfg is None:
                raise ValueError("run needs --config or --preset")
            out = _out_dir(args, cfg.name)
            summary = run(cfg, out)
            print(f"wrote {out}  final norm {summary['final_norm']}" + ("  [degraded]" if summary["degraded"] else ""))
            return 1 if summary["degraded"] else 0
        if args.command == "verify":
            cfg = _resolve_config(args)
            failures = _print_report(verify(cfg, inject_fault=args.inject_fault))
            return 1 if failures else 0
        if args.command == "dispersion":
            model = WalkModel(args.family, args.dimension, args.mass)
            header, table = dispersion_table(model, args.resolution)
            if args.out:
                write_csv(args.out, header, table)
            else:
                print(",".join(header))
                for row in table:
                    print(",".join(fmt(v) for v in row))
            return 0
        if args.name:
            print(preset(args.name).to_json())
        else:
            for name in preset_names():
                print(f"{name}  {PRESET_NOTES.get(name, '')}")
        return 0
    except (ValueError, KeyError, OSError) as exc:
        print(f"qwalk: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
