"""Command-line surface: gen / greedy / train / eval / min-actuators.

All outputs are data files (JSON datasets, JSON checkpoints, CSV reports).
Every command is a pure function of its flags: reruns produce byte-identical
files (cmd_greedy's wall-clock column can be blanked with --no-timing).
Output paths resolve against $ACTUPLACE_OUT_DIR unless absolute; files are
written to a .partial path and renamed into place only when complete.

Column layouts are documented in docs/formats.md.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from .env import EpisodeConfig
from .errors import ActuplaceError, ConfigError, TrainingDivergedError
from .generate import GenSpec, generate_dataset, load_dataset, save_dataset
from .model import max_gap, rms_gap
from .nets import load_checkpoint, save_checkpoint
from .selection import exhaustive_select, greedy_select
from .training import (
    EVAL_MODES,
    TrainConfig,
    evaluate_policy,
    train_d3qn,
    train_rees,
)

OUT_DIR_ENV = "ACTUPLACE_OUT_DIR"


def _resolve(path):
    if path is None or os.path.isabs(path):
        return path
    base = os.environ.get(OUT_DIR_ENV)
    return os.path.join(base, path) if base else path


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return "" if x is None else str(x)


def _write_csv(path, header, rows):
    """Atomic CSV write: header, data rows, trailing #agg rows."""
    tmp = path + ".partial"
    os.makedirs(os.path.dirname(os.path.abspath(tmp)), exist_ok=True)
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    os.replace(tmp, path)


def _load_config_file(path):
    if path is None:
        return {}
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config file is not valid JSON: %s" % exc)
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _pick(args, cfg, key, default):
    """Flag wins over config file; config wins over the default."""
    v = getattr(args, key.replace("-", "_"), None)
    if v is not None:
        return v
    if key in cfg:
        return cfg[key]
    return default


def _sel_str(selected):
    return "|".join(str(int(e)) for e in selected)


# ---------------------------------------------------------------- gen

def cmd_gen(args):
    cfg = _load_config_file(args.config)
    seed = int(_pick(args, cfg, "seed", 0))
    spec = GenSpec(
        n=int(_pick(args, cfg, "n", 40)),
        m=int(_pick(args, cfg, "m", 12)),
        force_bound=float(_pick(args, cfg, "force-bound", 5.0)),
        smoothness=int(_pick(args, cfg, "smoothness", 6)),
        noise_level=float(_pick(args, cfg, "noise-level", 0.05)),
        deviation_scale=float(_pick(args, cfg, "deviation-scale", 1.0)),
        seed=seed,
    )
    n_train = int(_pick(args, cfg, "train", 20))
    n_test = int(_pick(args, cfg, "test", 10))
    prefix = _resolve(str(_pick(args, cfg, "out", "dataset")))
    d = os.path.dirname(os.path.abspath(prefix))
    os.makedirs(d, exist_ok=True)

    # the test file draws from an independent stream: seed + 1
    train_insts = generate_dataset(spec, n_train)
    test_spec = replace(spec, seed=seed + 1)
    test_insts = generate_dataset(test_spec, n_test)

    save_dataset(prefix + ".train", train_insts, spec)
    save_dataset(prefix + ".test", test_insts, test_spec)
    for name, insts in (("train", train_insts), ("test", test_insts)):
        mean_mg = (float(np.mean([max_gap(i.psi) for i in insts]))
                   if insts else float("nan"))
        print("%s: %d instances, mean max_gap(psi) = %s"
              % (prefix + "." + name, len(insts), repr(mean_mg)))
    return 0


# ---------------------------------------------------------------- greedy

def _require(cfg_value, flag):
    if cfg_value is None:
        raise ConfigError("%s is required" % flag)
    return cfg_value


def cmd_greedy(args):
    cfg = _load_config_file(args.config)
    data = _resolve(str(_require(_pick(args, cfg, "data", None), "--data")))
    out = _resolve(str(_pick(args, cfg, "out", "greedy.csv")))
    budget = int(_pick(args, cfg, "budget", 1))
    timing = not bool(_pick(args, cfg, "no-timing", False))
    instances, _ = load_dataset(data)

    rows = []
    mgs, rmsgs, exs, rts = [], [], [], []
    for idx, inst in enumerate(instances):
        t0 = time.perf_counter()
        st = greedy_select(inst, budget)
        runtime_ms = (time.perf_counter() - t0) * 1e3
        exh = ""
        if math.comb(inst.m, budget) <= 100_000:
            exh = exhaustive_select(inst, budget).solution.d
            exs.append(exh)
        mg = st.solution.d
        rmsg = rms_gap(st.solution.delta)
        mgs.append(mg)
        rmsgs.append(rmsg)
        rts.append(runtime_ms)
        rows.append([idx, _sel_str(st.selected), mg, rmsg, exh,
                     runtime_ms if timing else None])
    rows.append(["#agg", "",
                 float(np.mean(mgs)) if mgs else "",
                 float(np.mean(rmsgs)) if rmsgs else "",
                 float(np.mean(exs)) if exs else "",
                 float(np.mean(rts)) if (rts and timing) else None])
    _write_csv(out, ["instance_id", "selected_sequence", "mg", "rmsg",
                     "exhaustive_mg", "runtime_ms"], rows)
    print("wrote %s (%d instances)" % (out, len(instances)))
    return 0


# ---------------------------------------------------------------- train

def _train_config(args, cfg, budget):
    return TrainConfig(
        total_steps=int(_pick(args, cfg, "steps", 0)),
        budget=budget,
        seed=int(_pick(args, cfg, "seed", 0)),
        epsilon=float(_pick(args, cfg, "epsilon", 0.1)),
        gamma=float(_pick(args, cfg, "gamma", 1.0)),
        replay_capacity=int(_pick(args, cfg, "replay-capacity", 20_000)),
        batch_size=int(_pick(args, cfg, "batch-size", 64)),
        target_sync_period=int(_pick(args, cfg, "target-sync", 500)),
        warmup=int(_pick(args, cfg, "warmup", 500)),
        lr=float(_pick(args, cfg, "lr", 1e-3)),
        optimizer=str(_pick(args, cfg, "optimizer", "adam")),
    )


def _write_train_log(path, logs):
    rows = [[lg.episode, lg.steps, lg.terminal_mg, lg.terminal_rmsg,
             lg.mean_loss, lg.epsilon] for lg in logs]
    if logs:
        fin = [lg.mean_loss for lg in logs if np.isfinite(lg.mean_loss)]
        rows.append(["#agg", len(logs),
                     float(np.mean([lg.terminal_mg for lg in logs])),
                     float(np.mean([lg.terminal_rmsg for lg in logs])),
                     float(np.mean(fin)) if fin else float("nan"),
                     logs[0].epsilon])
    else:
        rows.append(["#agg", 0, "", "", "", ""])
    _write_csv(path, ["episode", "steps", "terminal_mg", "terminal_rmsg",
                      "mean_loss", "epsilon"], rows)


def cmd_train(args):
    cfg = _load_config_file(args.config)
    data = _resolve(str(_require(_pick(args, cfg, "data", None), "--data")))
    mode = str(_pick(args, cfg, "mode", "d3qn"))
    budget = int(_pick(args, cfg, "budget", 1))
    prefix = _resolve(str(_pick(args, cfg, "out-prefix", "run")))
    if mode not in ("d3qn", "rees"):
        raise ConfigError("--mode must be d3qn or rees")
    instances, _ = load_dataset(data)
    tc = _train_config(args, cfg, budget)
    d = os.path.dirname(os.path.abspath(prefix))
    os.makedirs(d, exist_ok=True)

    trainer = train_d3qn if mode == "d3qn" else train_rees
    try:
        params, logs = trainer(instances, tc)
    except TrainingDivergedError as exc:
        if exc.last_params is not None:
            save_checkpoint(prefix + ".ckpt.json", exc.last_params, mode,
                            extra={"n": instances[0].n, "diverged": True})
        raise
    save_checkpoint(prefix + ".ckpt.json", params, mode,
                    extra={"n": instances[0].n, "budget": budget,
                           "seed": tc.seed, "steps": tc.total_steps})
    _write_train_log(prefix + ".log.csv", logs)

    rep = evaluate_policy(params, instances,
                          EpisodeConfig.for_budget(budget), mode)
    print("checkpoint: %s" % (prefix + ".ckpt.json"))
    print("train-set mean MG = %s, mean RMSG = %s"
          % (repr(rep.mean_mg), repr(rep.mean_rmsg)))
    return 0


# ---------------------------------------------------------------- eval

def _parse_limits(val):
    if val is None:
        return None
    if isinstance(val, (list, tuple)):
        return [float(x) for x in val]
    return [float(x) for x in str(val).split(",") if x != ""]


def _load_policy(args, cfg, mode, instances):
    if mode in ("greedy-oracle", "random"):
        return None
    ckpt = _pick(args, cfg, "ckpt", None)
    if ckpt is None:
        raise ConfigError("--ckpt is required for mode %r" % mode)
    params, kind, _ = load_checkpoint(_resolve(str(ckpt)))
    if kind != mode:
        raise ConfigError("checkpoint kind %r does not match mode %r"
                          % (kind, mode))
    if params.input_width != 2 * instances[0].n:
        raise ConfigError(
            "checkpoint expects input width %d but dataset needs %d"
            % (params.input_width, 2 * instances[0].n))
    return params


def cmd_eval(args):
    cfg = _load_config_file(args.config)
    data = _resolve(str(_require(_pick(args, cfg, "data", None), "--data")))
    mode = str(_pick(args, cfg, "mode", "greedy-oracle"))
    out = _resolve(str(_pick(args, cfg, "out", "eval.csv")))
    seed = int(_pick(args, cfg, "seed", 0))
    budget = _pick(args, cfg, "budget", None)
    limit = _pick(args, cfg, "limit", None)
    limits = _parse_limits(_pick(args, cfg, "limits", None))
    if mode not in EVAL_MODES:
        raise ConfigError("--mode must be one of %s" % (EVAL_MODES,))
    instances, _ = load_dataset(data)
    params = _load_policy(args, cfg, mode, instances)

    if limits:
        header = ["limit", "instance_id", "selected_sequence", "mg", "rmsg",
                  "count"]
        rows = []
        aggs = []
        for lim in limits:
            rep = evaluate_policy(params, instances,
                                  EpisodeConfig.for_spec_limit(lim), mode,
                                  seed=seed)
            for r in rep.rows:
                rows.append([lim, r.instance_id, _sel_str(r.selected),
                             r.mg, r.rmsg, r.count])
            aggs.append(["#agg", lim, "", rep.mean_mg, rep.mean_rmsg,
                         rep.mean_count])
        _write_csv(out, header, rows + aggs)
        print("wrote %s (%d limits x %d instances)"
              % (out, len(limits), len(instances)))
        return 0

    if (budget is None) == (limit is None):
        raise ConfigError("give exactly one of --budget / --limit / --limits")
    if budget is not None:
        econf = EpisodeConfig.for_budget(int(budget))
    else:
        econf = EpisodeConfig.for_spec_limit(float(limit))
    rep = evaluate_policy(params, instances, econf, mode, seed=seed)
    rows = [[r.instance_id, _sel_str(r.selected), r.mg, r.rmsg, r.count]
            for r in rep.rows]
    rows.append(["#agg", "", rep.mean_mg, rep.mean_rmsg, rep.mean_count])
    _write_csv(out, ["instance_id", "selected_sequence", "mg", "rmsg",
                     "count"], rows)
    print("wrote %s: mean MG = %s, mean RMSG = %s, mean count = %s"
          % (out, repr(rep.mean_mg), repr(rep.mean_rmsg),
             repr(rep.mean_count)))
    return 0


# ------------------------------------------------------- min-actuators

def quartiles(counts):
    """(min, q1, median, q3, max) by linear interpolation on sorted data."""
    arr = np.asarray(counts, dtype=np.float64)
    q = np.percentile(arr, [0, 25, 50, 75, 100], method="linear")
    return tuple(float(x) for x in q)


def cmd_min_actuators(args):
    cfg = _load_config_file(args.config)
    data = _resolve(str(_require(_pick(args, cfg, "data", None), "--data")))
    mode = str(_pick(args, cfg, "mode", "greedy-oracle"))
    out = _resolve(str(_pick(args, cfg, "out", "min_actuators.csv")))
    seed = int(_pick(args, cfg, "seed", 0))
    limits = _parse_limits(_pick(args, cfg, "limits", None))
    if not limits:
        raise ConfigError("--limits is required")
    if mode not in EVAL_MODES:
        raise ConfigError("--mode must be one of %s" % (EVAL_MODES,))
    instances, _ = load_dataset(data)
    params = _load_policy(args, cfg, mode, instances)

    rows = []
    aggs = []
    for lim in limits:
        rep = evaluate_policy(params, instances,
                              EpisodeConfig.for_spec_limit(lim), mode,
                              seed=seed)
        counts = [r.count for r in rep.rows]
        for r in rep.rows:
            rows.append([lim, r.instance_id, r.count])
        mn, q1, med, q3, mx = quartiles(counts)
        aggs.append(["#agg", lim, mn, q1, med, q3, mx])
    _write_csv(out, ["limit", "instance_id", "count"], rows + aggs)
    print("wrote %s (%d limits)" % (out, len(limits)))
    return 0


# ---------------------------------------------------------------- main

def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags take precedence")
    p.add_argument("--seed", type=int)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="actuplace",
        description="Sequential actuator placement for shape control")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate synthetic train/test datasets")
    g.add_argument("--out", help="dataset path prefix (default 'dataset')")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--train", type=int)
    g.add_argument("--test", type=int)
    g.add_argument("--force-bound", type=float)
    g.add_argument("--smoothness", type=int)
    g.add_argument("--noise-level", type=float)
    g.add_argument("--deviation-scale", type=float)
    _add_common(g)
    g.set_defaults(func=cmd_gen)

    gr = sub.add_parser("greedy", help="greedy (and exhaustive) selection")
    gr.add_argument("--data", help="dataset file")
    gr.add_argument("--budget", type=int)
    gr.add_argument("--out", help="output CSV path")
    gr.add_argument("--no-timing", action="store_const", const=True,
                    help="blank the runtime_ms column for reproducible files")
    _add_common(gr)
    gr.set_defaults(func=cmd_greedy)

    t = sub.add_parser("train", help="train a placement policy")
    t.add_argument("--data")
    t.add_argument("--mode", choices=["d3qn", "rees"])
    t.add_argument("--steps", type=int)
    t.add_argument("--budget", type=int)
    t.add_argument("--out-prefix")
    t.add_argument("--epsilon", type=float)
    t.add_argument("--gamma", type=float)
    t.add_argument("--lr", type=float)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--replay-capacity", type=int)
    t.add_argument("--target-sync", type=int)
    t.add_argument("--warmup", type=int)
    t.add_argument("--optimizer", choices=["adam", "sgd"])
    _add_common(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a policy on a dataset")
    e.add_argument("--data")
    e.add_argument("--mode", choices=list(EVAL_MODES))
    e.add_argument("--ckpt")
    e.add_argument("--budget", type=int)
    e.add_argument("--limit", type=float)
    e.add_argument("--limits", help="comma-separated spec limits (sweep)")
    e.add_argument("--out")
    _add_common(e)
    e.set_defaults(func=cmd_eval)

    ma = sub.add_parser("min-actuators",
                        help="actuator counts needed to reach spec limits")
    ma.add_argument("--data")
    ma.add_argument("--mode", choices=list(EVAL_MODES))
    ma.add_argument("--ckpt")
    ma.add_argument("--limits", help="comma-separated spec limits")
    ma.add_argument("--out")
    _add_common(ma)
    ma.set_defaults(func=cmd_min_actuators)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ActuplaceError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
