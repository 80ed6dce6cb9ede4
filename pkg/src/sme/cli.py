"""Command-line entry point.

Subcommands: gen (write an environment manifest), rollout (run episodes to a
CSV), eval (shell-partitioned policy report), dataset (behavior-policy
transitions), verify (statistical battery), serve (line-delimited JSON IPC
for external bindings).

Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 verification
check failed.  Every file-writing subcommand also writes <out>.runlog.json
capturing flags and versions; runs carry no timestamps, so identical flags
reproduce every output byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
from typing import Any, Callable, Optional

import numpy as np

from . import __version__, _svg
from ._serial import atomic_write_bytes, canonical_json_bytes
from . import rng
from .config import DEFAULTS, FORMAT_VERSION, ConfigError, validate_config
from .environment import (Environment, create_environment, load_manifest,
                          reset, rollout, save_manifest, step)
from .errors import (DatasetFormatError, EpisodeError, ManifestError,
                     ShellSamplingError)
from .evaluation import (DEFAULT_EXPANSIONS, ShellPartition, evaluate_policy,
                         report_csv_bytes, report_json_doc)
from .offline import DatasetWriter, behavior_action, behavior_policy, collect_dataset
from .policy import optimal_action, optimal_actions
from .verification import (VerificationBudget, check_report_doc,
                           format_check_table, verify_environment)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_CHECK_FAILED = 3


class CliError(ValueError):
    """Bad flags or flag values; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # default argparse behavior exits with code 2
        raise CliError(message)


def _json_line(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _load_env(path: str) -> Environment:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except ValueError as exc:
            raise ManifestError(f"{path} is not valid JSON: {exc}") from exc
    return load_manifest(doc)


def _write_runlog(out_path: str, command: str, args: argparse.Namespace,
                  master_seed: Optional[int] = None) -> None:
    flags = {name: value for name, value in vars(args).items()
             if name not in ("handler", "command")}
    doc: dict[str, Any] = {
        "command": command,
        "flags": flags,
        "versions": {
            "package": __version__,
            "config_format": FORMAT_VERSION,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    if master_seed is not None:
        doc["seeds"] = {"master_seed": master_seed}
    atomic_write_bytes(out_path + ".runlog.json", canonical_json_bytes(doc))


def _policy_callbacks(name: str, env: Environment
                      ) -> tuple[Callable, Callable, bool]:
    """(per-observation fn, batched fn, stateful) for a --policy value.

    The batched form carries supports_batch so the evaluator can call it once
    per category; noise policies draw from a shared stream and are stateful,
    which pins evaluation to a single thread.
    """
    n_state = env.config.n_state
    n_action = env.config.n_action
    if name == "optimal":
        def fn(obs):
            return optimal_action(env.policy, np.asarray(obs)[:n_state])

        def batch(observations):
            states = np.asarray(observations)[:, :n_state]
            return optimal_actions(env.policy, states)
        stateful = False
    elif name == "center":
        def fn(obs):
            return np.full(n_action, 0.5)

        def batch(observations):
            return np.full((len(observations), n_action), 0.5)
        stateful = False
    elif name.startswith("noise:"):
        try:
            nu = float(name[len("noise:"):])
        except ValueError:
            raise CliError(f"bad noise level in policy {name!r}") from None
        try:
            bp = behavior_policy(env, nu)
        except ValueError as exc:
            raise CliError(str(exc)) from exc

        def fn(obs):
            return behavior_action(bp, np.asarray(obs)[:n_state])

        def batch(observations):
            states = np.asarray(observations)[:, :n_state]
            a_star = optimal_actions(bp.optimal, states)
            a_noise = optimal_actions(bp.noise, states)
            alpha = bp.max_noise * bp.alpha_stream.uniforms(len(states))
            return (1.0 - alpha)[:, None] * a_star + alpha[:, None] * a_noise
        stateful = True
    else:
        raise CliError(
            f"unknown policy {name!r} (use optimal, center, or noise:NU)")
    batch.supports_batch = True
    return fn, batch, stateful


def _cmd_gen(args: argparse.Namespace) -> int:
    cfg = validate_config({
        "n_state": args.n_state,
        "n_action": args.n_action,
        "reward_interval": args.k,
        "min_reward": args.r_min,
        "survival_difficulty": args.difficulty,
        "policy_complexity": args.complexity,
        "horizon": args.horizon,
        "master_seed": args.seed,
    })
    env = create_environment(cfg)
    doc = save_manifest(env, embed_weights=args.embed_weights)
    atomic_write_bytes(args.out, canonical_json_bytes(doc))
    _write_runlog(args.out, "gen", args, cfg.master_seed)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_rollout(args: argparse.Namespace) -> int:
    if args.episodes < 1:
        raise CliError("episodes must be ≥ 1")
    env = _load_env(args.env)
    fn, _, _ = _policy_callbacks(args.policy, env)
    log_lines: list[str] = []
    observer = None
    if args.step_log is not None:
        def observer(episode, t, s, payout):
            log_lines.append(_json_line(
                {"episode": episode, "t": t, "s": s.tolist(), "R": payout}))
    summary = rollout(env, fn, args.episodes, observer=observer)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["episode", "return", "length", "mean_tilde_r"])
    for stats in summary.episodes:
        writer.writerow([stats.episode, repr(stats.episode_return),
                         stats.length, repr(stats.mean_tilde_r)])
    atomic_write_bytes(args.out, buf.getvalue().encode("utf-8"))
    if args.step_log is not None:
        atomic_write_bytes(args.step_log,
                           ("\n".join(log_lines) + "\n").encode("utf-8"))
    if args.svg is not None:
        chart = _svg.line_chart([s.episode_return for s in summary.episodes],
                                f"episode returns ({args.policy})")
        atomic_write_bytes(args.svg, chart.encode("utf-8"))
    _write_runlog(args.out, "rollout", args, env.config.master_seed)
    print(f"episodes={args.episodes} mean_return={summary.mean_return:.3f} "
          f"mean_tilde_r={summary.mean_tilde_r:.3f}")
    return EXIT_OK


def _parse_shells(text: str) -> ShellPartition:
    try:
        values = tuple(float(token) for token in text.split(","))
    except ValueError:
        raise CliError(f"bad shell list {text!r}") from None
    try:
        return ShellPartition(values)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _cmd_eval(args: argparse.Namespace) -> int:
    if args.n_per_shell < 1:
        raise CliError("n-per-shell must be ≥ 1")
    env = _load_env(args.env)
    _, batch, stateful = _policy_callbacks(args.policy, env)
    partition = _parse_shells(args.shells)
    stream = rng.derive_stream(env.config.master_seed, rng.STREAM_EVAL)
    report = evaluate_policy(batch, env, partition, args.n_per_shell, stream,
                             threads=1 if stateful else None)
    atomic_write_bytes(args.out, report_csv_bytes(report))
    atomic_write_bytes(args.out + ".json",
                       canonical_json_bytes(report_json_doc(report)))
    if args.svg is not None:
        chart = _svg.bar_chart(
            [c.category_label for c in report.categories],
            [c.mean_tilde_r for c in report.categories],
            f"mean tilde_r by region ({args.policy})")
        atomic_write_bytes(args.svg, chart.encode("utf-8"))
    _write_runlog(args.out, "eval", args, env.config.master_seed)
    for c in report.categories:
        print(f"{c.category_label:<16} mean_tilde_r={c.mean_tilde_r:.4f} "
              f"mean_regret={c.mean_regret:.4f}")
    return EXIT_OK


def _cmd_dataset(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise CliError("n must be ≥ 1")
    env = _load_env(args.env)
    try:
        bp = behavior_policy(env, args.nu)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    summary = collect_dataset(env, bp, args.n, sink=DatasetWriter(args.out))
    _write_runlog(args.out, "dataset", args, env.config.master_seed)
    print(f"transitions={summary.n_transitions} "
          f"episodes={summary.n_episodes} nu={summary.nu} "
          f"mean_tilde_r={summary.mean_tilde_r:.3f}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    env = _load_env(args.env)
    budget = VerificationBudget(
        uniformity_n=args.n_uniformity,
        action_mass_n=args.n_mass,
        lipschitz_pairs=args.n_lipschitz,
        policy_ks_n=args.n_policy,
        collapse_n=args.n_collapse,
    )
    activation = None
    if args.corrupt_activation:
        def activation(x):
            return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))
    results = verify_environment(
        env.config, budget, corrupt_kernel_row=args.corrupt_kernel_row,
        activation_override=activation)
    print(format_check_table(results))
    out = args.out if args.out is not None else args.env + ".verify.json"
    atomic_write_bytes(out, canonical_json_bytes(check_report_doc(results)))
    _write_runlog(out, "verify", args, env.config.master_seed)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def _cmd_serve(args: argparse.Namespace) -> int:
    """Line-delimited JSON loop: {"op": "reset"|"step"|"optimal"|"close"}."""
    env = _load_env(args.env)
    n_state = env.config.n_state
    current_obs: Optional[np.ndarray] = None

    def respond(doc: dict) -> None:
        sys.stdout.write(_json_line(doc) + "\n")
        sys.stdout.flush()

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except ValueError:
            respond({"error": "invalid JSON"})
            continue
        op = msg.get("op")
        try:
            if op == "reset":
                obs = reset(env, episode_seed=msg.get("episode_seed"))
                current_obs = obs
                respond({"observation": obs.tolist()})
            elif op == "optimal":
                # the optimal action for the state the env is sitting in
                if current_obs is None:
                    respond({"error": "optimal requested before reset()"})
                    continue
                a_star = optimal_action(env.policy, current_obs[:n_state])
                respond({"a_star": a_star.tolist()})
            elif op == "step":
                obs, payout, terminated, truncated, info = step(
                    env, np.asarray(msg["action"], dtype=np.float64))
                current_obs = obs
                respond({
                    "observation": obs.tolist(),
                    "reward": payout,
                    "terminated": terminated,
                    "truncated": truncated,
                    "info": {
                        "a_star": info["a_star"].tolist(),
                        "tilde_r": info["tilde_r"],
                        "hat_r": info["hat_r"],
                        "r": info["r"],
                        "regret": list(info["regret"]),
                        "clip_fraction": info["clip_fraction"],
                    },
                })
            elif op == "close":
                respond({"ok": True})
                return EXIT_OK
            else:
                respond({"error": f"unknown op {op!r}"})
        except Exception as exc:
            respond({"error": str(exc)})
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="sme", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    gen = sub.add_parser("gen", help="generate an environment manifest",
                         parents=[])
    gen.add_argument("--seed", type=int, default=DEFAULTS["master_seed"])
    gen.add_argument("--n-state", type=int, default=DEFAULTS["n_state"])
    gen.add_argument("--n-action", type=int, default=DEFAULTS["n_action"])
    gen.add_argument("--k", type=int, default=DEFAULTS["reward_interval"],
                     help="reward payout interval")
    gen.add_argument("--r-min", type=float, default=DEFAULTS["min_reward"])
    gen.add_argument("--difficulty", type=float,
                     default=DEFAULTS["survival_difficulty"])
    gen.add_argument("--complexity", type=int,
                     default=DEFAULTS["policy_complexity"])
    gen.add_argument("--horizon", type=int, default=DEFAULTS["horizon"])
    gen.add_argument("--out", required=True)
    gen.add_argument("--embed-weights", action="store_true")
    gen.set_defaults(handler=_cmd_gen)

    ro = sub.add_parser("rollout", help="run episodes, write per-episode CSV")
    ro.add_argument("--env", required=True)
    ro.add_argument("--policy", default="optimal",
                    help="optimal | center | noise:NU")
    ro.add_argument("--episodes", type=int, default=5)
    ro.add_argument("--out", required=True)
    ro.add_argument("--step-log", default=None,
                    help="also write a per-step JSONL trajectory log")
    ro.add_argument("--svg", default=None)
    ro.set_defaults(handler=_cmd_rollout)

    ev = sub.add_parser("eval", help="score a policy across WD/OOD shells")
    ev.add_argument("--env", required=True)
    ev.add_argument("--policy", default="optimal")
    ev.add_argument("--shells",
                    default=",".join(repr(e) for e in DEFAULT_EXPANSIONS))
    # about 50,000 states over the default six regions
    ev.add_argument("--n-per-shell", type=int, default=8333)
    ev.add_argument("--out", required=True)
    ev.add_argument("--svg", default=None)
    ev.set_defaults(handler=_cmd_eval)

    ds = sub.add_parser("dataset", help="collect behavior-policy transitions")
    ds.add_argument("--env", required=True)
    ds.add_argument("--nu", type=float, required=True,
                    help="behavior noise level in [0,1]")
    ds.add_argument("--n", type=int, default=50_000)
    ds.add_argument("--out", required=True,
                    help="output prefix for the .bin/.json pair")
    ds.set_defaults(handler=_cmd_dataset)

    ve = sub.add_parser("verify", help="run the statistical check battery")
    ve.add_argument("--env", required=True)
    ve.add_argument("--n-uniformity", type=int, default=100_000)
    ve.add_argument("--n-mass", type=int, default=10_000)
    ve.add_argument("--n-lipschitz", type=int, default=100_000)
    ve.add_argument("--n-policy", type=int, default=100_000)
    ve.add_argument("--n-collapse", type=int, default=10_000)
    ve.add_argument("--out", default=None, help="JSON report path")
    ve.add_argument("--corrupt-kernel-row", action="store_true",
                    help=argparse.SUPPRESS)
    ve.add_argument("--corrupt-activation", action="store_true",
                    help=argparse.SUPPRESS)
    ve.set_defaults(handler=_cmd_verify)

    se = sub.add_parser("serve", help="JSON-per-line reset/step loop on "
                                      "stdin/stdout")
    se.add_argument("--env", required=True)
    se.set_defaults(handler=_cmd_serve)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "handler"):
            parser.print_usage(sys.stderr)
            return EXIT_VALIDATION
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, ManifestError, DatasetFormatError, ShellSamplingError,
            EpisodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
