"""Command line entry point: ``driftconform run|sweep|check``."""

from __future__ import annotations

import argparse
import json
import sys

from . import harness


def _load(args) -> harness.ExperimentConfig:
    raw = harness.load_config(args.config)
    if args.seed is not None:
        raw["master_seed"] = args.seed
        raw.setdefault("stream", {})["seed"] = args.seed
    if args.reps is not None:
        raw["replications"] = args.reps
    if args.threads is not None:
        raw["threads"] = args.threads
    if getattr(args, "out", None):
        raw["out"] = args.out
    return harness.config_from_dict(raw), raw


def _sweep_policies(cfg, raw) -> list:
    if "policies" not in raw:
        return harness.default_sweep_policies(cfg)
    pols = []
    for i, p in enumerate(raw["policies"]):
        p = {"name": p} if isinstance(p, str) else dict(p)
        try:
            pol = harness.PolicyConfig(**p)
        except TypeError as exc:
            raise harness.ConfigError(f"policies[{i}]", str(exc)) from None
        if pol.model is None:
            pol.model = cfg.policy.model
        pols.append(pol)
    return pols


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftconform", description="Drift-aware online conformal prediction experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run one policy and write traces, summary and meta"),
        ("sweep", "run several policies on shared replications"),
        ("check", "validate a config and print it with defaults resolved"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON experiment configuration")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
        p.add_argument("--reps", type=int, default=None, help="number of replications")
        p.add_argument("--threads", type=int, default=None, help="worker processes (env DRIFTCONFORM_THREADS wins)")
        if name != "check":
            p.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, raw = _load(args)
        if args.command == "check":
            out = cfg.to_json()
            if "policies" in raw:
                out["policies"] = [p.__dict__ for p in _sweep_policies(cfg, raw)]
            json.dump(out, sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
            return 0
        if args.command == "run":
            traces = harness.run_experiment(cfg)
            failed = [r for r, v in traces.items() if isinstance(v, str)]
        else:
            results = harness.run_sweep(cfg, _sweep_policies(cfg, raw))
            failed = [r for v in results.values() for r, tr in v.items() if isinstance(tr, str)]
    except (harness.ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {cfg.out} ({cfg.replications} replications, {len(failed)} failed)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
