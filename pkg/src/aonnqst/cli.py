"""Command-line front end.

Every command resolves its parameters as flags > ``--config`` JSON file >
built-in defaults and writes the resolved set to ``<command>.config.json``
next to its outputs.  Exit codes: 0 success, 1 runtime failure, 2 bad
arguments.  The output directory defaults to ``$AONNQST_OUTPUT`` or
``./aonnqst-out``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import aonn, holography, polarization, qst
from .nn import TrainConfig, load_network, save_network, write_loss_trace
from .paulis import ShotModel, enumerate_paulis, sample_pauli_set, uda_set

OUTPUT_ENV = "AONNQST_OUTPUT"


class UsageError(Exception):
    pass


def default_outdir() -> str:
    return os.environ.get(OUTPUT_ENV, "aonnqst-out")


DEFAULTS = {
    "gen-data": {"kind": "qst", "n": 2, "set": "uda", "m": None, "set_seed": 0, "count": 20000,
                 "seed": 0, "shots": None, "source": "optics"},
    "figure2": {"n": 1, "m": None, "sets": None, "train_count": None, "test_count": None,
                "epochs": 300, "lr": 1e-3, "batch": 256, "seed": 0, "paper_scale": False, "jobs": 1,
                "shots": None},
    "train-qst": {"n": 2, "set": "uda", "m": None, "set_seed": 0, "train_count": None,
                  "test_count": None, "epochs": 300, "lr": 1e-3, "batch": 256, "seed": 0, "shots": None},
    "aonn-train": {"source": "optics", "train": 23, "test": 32, "seed": 0, "iterations": 10000,
                   "lr": 0.002, "shots": None},
    "aonn-predict": {"model": None, "x": None, "y": None, "z": None, "data": None},
    "gsw": {"targets": None, "grid": "4x5", "size": 64, "a": 0.7, "iters": 100, "tol": 1e-3,
            "seed": 0, "camera": "ideal", "gain_spread": 0.1, "camera_seed": 1,
            "fix_phase_iteration": 30},
    "prepare-pol": {"points": 91, "extinction": 0.0},
}


def _resolve(command, args):
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            with open(args.config) as fh:
                filecfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        section = filecfg.get(command, filecfg)
        cfg.update({k.replace("-", "_"): v for k, v in section.items() if k.replace("-", "_") in cfg})
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _write_config(outdir, command, cfg):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, f"{command}.config.json")
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
    return path


def _pauli_set(cfg):
    n, kind = cfg["n"], cfg["set"]
    if kind == "uda":
        return uda_set(n)
    if kind == "full":
        return enumerate_paulis(n)
    if kind == "random":
        if cfg["m"] is None:
            raise UsageError("--set random needs --m")
        return sample_pauli_set(n, cfg["m"], cfg["set_seed"])
    raise UsageError(f"unknown Pauli set {kind!r}")


def _train_cfg(cfg):
    return TrainConfig(learning_rate=cfg["lr"], iterations=cfg["epochs"], batch_size=cfg["batch"],
                       seed=cfg["seed"])


def cmd_gen_data(args):
    cfg = _resolve("gen-data", args)
    if cfg["count"] < 1:
        raise UsageError("--count must be >= 1")
    out = args.out
    os.makedirs(out, exist_ok=True)
    if cfg["kind"] == "phase":
        samples = aonn.make_phase_dataset(cfg["count"], cfg["seed"], cfg["source"], cfg["shots"])
        path = os.path.join(out, f"phase_{cfg['source']}.csv")
        aonn.write_phase_csv(samples, path)
    else:
        ps = _pauli_set(cfg)
        data = qst.generate_dataset(cfg["n"], ps, cfg["count"], cfg["seed"], ShotModel(cfg["shots"]))
        path = os.path.join(out, f"qst_n{cfg['n']}_{cfg['set']}.csv")
        data.to_csv(path)
        cfg["paulis"] = ps.labels
    _write_config(out, "gen-data", cfg)
    print(path)


def cmd_figure2(args):
    cfg = _resolve("figure2", args)
    fcfg = qst.Figure2Config(
        n=cfg["n"], m_values=tuple(cfg["m"]) if cfg["m"] else None, sets=cfg["sets"],
        train_count=cfg["train_count"], test_count=cfg["test_count"], seed=cfg["seed"],
        paper_scale=cfg["paper_scale"], train=_train_cfg(cfg), shots=cfg["shots"], jobs=cfg["jobs"],
    )
    try:
        fcfg = fcfg.resolved()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    results = qst.figure2_experiment(fcfg)
    paths = qst.write_figure2(results, args.out, fcfg)
    _write_config(args.out, "figure2", cfg)
    for row in qst.aggregate(results):
        print(f"n={row['n']} m={row['m']:>2} {row['kind']:<6} mean fidelity {row['mean_fidelity']:.5f}"
              f" +- {row['std_over_sets']:.5f}")
    print(paths["results"])


def cmd_train_qst(args):
    cfg = _resolve("train-qst", args)
    ps = _pauli_set(cfg)
    count = cfg["train_count"] or qst.DEFAULT_TRAIN_COUNT[cfg["n"]]
    qcfg = qst.QstConfig(count, cfg["test_count"], cfg["seed"], _train_cfg(cfg), cfg["shots"])
    net, res = qst.train_qst(cfg["n"], ps, qcfg, cfg["set"], cfg["set_seed"] if cfg["set"] == "random" else None)
    os.makedirs(args.out, exist_ok=True)
    save_network(net, os.path.join(args.out, "qst_model.json"))
    write_loss_trace(res.loss_trace, os.path.join(args.out, "qst_loss.csv"))
    with open(os.path.join(args.out, "qst_result.csv"), "w") as fh:
        fh.write(qst.results_csv([res]))
    cfg["paulis"] = ps.labels
    _write_config(args.out, "train-qst", cfg)
    print(f"mean fidelity {res.mean_fidelity:.5f} (std {res.std_fidelity:.5f}) over {len(res.fidelities)} test states")


def cmd_aonn_train(args):
    cfg = _resolve("aonn-train", args)
    if cfg["train"] < 1 or cfg["test"] < 1:
        raise UsageError("--train and --test must be >= 1")
    train_set = aonn.make_phase_dataset(cfg["train"], cfg["seed"], cfg["source"], cfg["shots"])
    test_set = aonn.make_phase_dataset(cfg["test"], cfg["seed"] + qst.TEST_SEED_OFFSET, cfg["source"], cfg["shots"])
    tcfg = TrainConfig(learning_rate=cfg["lr"], iterations=cfg["iterations"], batch_size=None, seed=cfg["seed"])
    model = aonn.train_aonn(train_set, tcfg)
    pred = aonn.predict_theta(model, np.array([s.c for s in test_set]))
    err = np.abs(pred - np.array([s.theta for s in test_set]))
    out = args.out
    os.makedirs(out, exist_ok=True)
    save_network(model.network, os.path.join(out, "aonn_model.json"))
    write_loss_trace(model.loss_trace, os.path.join(out, "aonn_loss.csv"))
    aonn.write_phase_csv(train_set, os.path.join(out, "aonn_train.csv"))
    aonn.write_phase_csv(test_set, os.path.join(out, "aonn_test.csv"))
    aonn.write_prediction_csv(test_set, pred, os.path.join(out, "aonn_predictions.csv"))
    report = {"max_abs_error": float(err.max()), "mean_abs_error": float(err.mean()),
              "final_train_mse": float(model.loss_trace[-1])}
    with open(os.path.join(out, "aonn_report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    _write_config(out, "aonn-train", cfg)
    print(f"test max |error| {report['max_abs_error']:.4f} rad, mean {report['mean_abs_error']:.4f} rad")


def cmd_aonn_predict(args):
    cfg = _resolve("aonn-predict", args)
    model_path = cfg["model"] or os.path.join(args.out, "aonn_model.json")
    if not os.path.exists(model_path):
        raise FileNotFoundError(f"model file {model_path} not found; run `aonn train` first")
    model = aonn.AonnModel(load_network(model_path), [])
    if cfg["data"]:
        samples = aonn.read_phase_csv(cfg["data"])
        c = np.array([s.c for s in samples])
    else:
        if None in (cfg["x"], cfg["y"], cfg["z"]):
            raise UsageError("give --x --y --z or --data")
        c = np.array([[cfg["x"], cfg["y"], cfg["z"]]])
    if np.any(np.abs(c) > 1):
        raise UsageError("expectation values must lie in [-1, 1]")
    pred = aonn.predict_theta(model, c)
    if cfg["data"]:
        path = os.path.join(args.out, "aonn_predictions.csv")
        aonn.write_prediction_csv(samples, pred, path)
        print(path)
    else:
        print(f"{float(pred[0]):.6f}")


def _grid(text):
    try:
        rows, cols = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--grid expects RxC, got {text!r}") from None
    return holography.spot_grid(rows, cols)


def cmd_gsw(args):
    cfg = _resolve("gsw", args)
    if cfg["targets"]:
        try:
            targets = holography.SpotTargets.from_csv(cfg["targets"])
        except (OSError, KeyError, ValueError) as exc:
            raise FileNotFoundError(f"cannot read targets {cfg['targets']}: {exc}") from None
    else:
        targets = _grid(cfg["grid"])
    if not 0 < cfg["a"] <= 1:
        raise UsageError("--a must be in (0, 1]")
    dims = (cfg["size"], cfg["size"])
    if cfg["camera"] == "gain-field":
        camera = holography.GainFieldCamera.random(dims, cfg["gain_spread"], cfg["camera_seed"])
    elif cfg["camera"] == "ideal":
        camera = holography.ideal_camera
    else:
        raise UsageError(f"unknown camera {cfg['camera']!r}")
    gcfg = holography.GswConfig(a=cfg["a"], max_iters=cfg["iters"], tolerance=cfg["tol"], seed=cfg["seed"],
                                fix_phase_iteration=cfg["fix_phase_iteration"])
    mask, state = holography.gsw_optimize(targets, gcfg, camera, dims)
    out = args.out
    os.makedirs(out, exist_ok=True)
    mask.save_pgm(os.path.join(out, "mask.pgm"))
    mask.save_csv(os.path.join(out, "mask.csv"))
    holography.spot_report(targets, state, os.path.join(out, "spots.csv"))
    _write_config(out, "gsw", cfg)
    flag = "converged" if state.converged else "not converged"
    print(f"{flag} after {state.iteration} iterations, spread {state.uniformity:.5f}, efficiency {state.efficiency:.3f}")


def cmd_prepare_pol(args):
    cfg = _resolve("prepare-pol", args)
    if cfg["points"] < 2:
        raise UsageError("--points must be >= 2")
    out = args.out
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "polarization.csv")
    with open(path, "w") as fh:
        fh.write("theta,hwp1_angle,s1,s2,s3,x,y,z\n")
        for theta in np.linspace(0, np.pi / 2, cfg["points"]):
            s = polarization.prepare_state(theta)
            st = polarization.stokes(s)
            xyz = polarization.measure_xyz(s, cfg["extinction"])
            vals = [theta, polarization.hwp1_sphere_angle(theta) / 2, st.s1, st.s2, st.s3, *xyz]
            fh.write(",".join(repr(float(v)) for v in vals) + "\n")
    _write_config(out, "prepare-pol", cfg)
    print(path)


def _positive_int(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None


def _shots(text):
    return None if text.lower() == "exact" else _positive_int(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="aonnqst", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters (flat or per-command sections)")
    common.add_argument("--out", default=None, help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[common], help="generate a tomography or phase dataset")
    p.add_argument("--kind", choices=["qst", "phase"])
    p.add_argument("--n", type=int)
    p.add_argument("--set", choices=["uda", "full", "random"])
    p.add_argument("--m", type=int)
    p.add_argument("--set-seed", type=int)
    p.add_argument("--count", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=_shots)
    p.add_argument("--source", choices=list(aonn.SOURCES))
    p.set_defaults(func=cmd_gen_data)

    def train_flags(p):
        p.add_argument("--n", type=int)
        p.add_argument("--train-count", type=_positive_int)
        p.add_argument("--test-count", type=_positive_int)
        p.add_argument("--epochs", type=_positive_int)
        p.add_argument("--lr", type=float)
        p.add_argument("--batch", type=_positive_int)
        p.add_argument("--seed", type=int)
        p.add_argument("--shots", type=_shots)

    p = sub.add_parser("figure2", parents=[common], help="fidelity versus number of measured Paulis")
    train_flags(p)
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--sets", type=_positive_int)
    p.add_argument("--paper-scale", action="store_true", default=None)
    p.add_argument("--jobs", type=_positive_int)
    p.set_defaults(func=cmd_figure2)

    p = sub.add_parser("train-qst", parents=[common], help="train and score one tomography network")
    train_flags(p)
    p.add_argument("--set", choices=["uda", "full", "random"])
    p.add_argument("--m", type=int)
    p.add_argument("--set-seed", type=int)
    p.set_defaults(func=cmd_train_qst)

    p = sub.add_parser("aonn", help="optical network phase tomography")
    asub = p.add_subparsers(dest="action", required=True)
    t = asub.add_parser("train", parents=[common])
    t.add_argument("--source", choices=list(aonn.SOURCES))
    t.add_argument("--train", type=int)
    t.add_argument("--test", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--iterations", type=_positive_int)
    t.add_argument("--lr", type=float)
    t.add_argument("--shots", type=_shots)
    t.set_defaults(func=cmd_aonn_train, command="aonn-train")
    pr = asub.add_parser("predict", parents=[common])
    pr.add_argument("--model")
    pr.add_argument("--x", type=float)
    pr.add_argument("--y", type=float)
    pr.add_argument("--z", type=float)
    pr.add_argument("--data", help="phase dataset CSV (theta,x,y,z,source)")
    pr.set_defaults(func=cmd_aonn_predict, command="aonn-predict")

    p = sub.add_parser("gsw", parents=[common], help="weighted Gerchberg-Saxton spot-array mask")
    p.add_argument("--targets", help="CSV with columns u,v,weight")
    p.add_argument("--grid", help="equal-weight RxC spot grid when no targets file is given")
    p.add_argument("--size", type=_positive_int)
    p.add_argument("--a", type=float)
    p.add_argument("--iters", type=_positive_int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--camera", choices=["ideal", "gain-field"])
    p.add_argument("--gain-spread", type=float)
    p.add_argument("--camera-seed", type=int)
    p.add_argument("--fix-phase-iteration", type=_positive_int)
    p.set_defaults(func=cmd_gsw)

    p = sub.add_parser("prepare-pol", parents=[common], help="Stokes and X/Y/Z table over a theta grid")
    p.add_argument("--points", type=int)
    p.add_argument("--extinction", type=float)
    p.set_defaults(func=cmd_prepare_pol)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.out is None:
        args.out = default_outdir()
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"aonnqst: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level reporting
        print(f"aonnqst: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
