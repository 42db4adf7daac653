"""Command-line entry point: gen-dataset, train, eval, compare."""

import argparse
import os
import sys

from .harness import (ExperimentConfig, compare, format_comparison,
                      gen_dataset, load_dataset, run_eval, run_training_cli,
                      write_run_metadata)


def _load_config(args):
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "setting", None) is not None:
        overrides["setting"] = args.setting
    if getattr(args, "scheduler", None):
        overrides["scheduler"] = args.scheduler
    if args.config:
        return ExperimentConfig.from_file(args.config, overrides)
    return ExperimentConfig.from_dict({}, overrides)


def _add_common(sub):
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--seed", type=int, help="override master_seed")
    sub.add_argument("--setting", type=int, choices=(1, 2, 3, 4),
                     help="network-depth preset")


def _cmd_gen_dataset(args):
    config = _load_config(args)
    episodes = args.episodes or config.test_episodes
    path = gen_dataset(config, episodes, args.out)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    write_run_metadata(out_dir, config, dataset_path=path, episodes=episodes)
    print(f"wrote {episodes} episode manifests to {path}")


def _cmd_train(args):
    config = _load_config(args)
    rows = run_training_cli(config, args.out)
    last = rows[-1]
    print(f"trained {len(rows)} episodes; final mean reward {last[1]:.4f}")
    print(f"outputs in {args.out}")


def _cmd_eval(args):
    config = _load_config(args)
    manifests = load_dataset(args.dataset)
    rows, csv_path = run_eval(config, manifests, config.scheduler,
                              checkpoint=args.checkpoint, out_dir=args.out,
                              dataset_path=args.dataset)
    mean = sum(r[1] for r in rows) / len(rows)
    print(f"{config.scheduler}: {len(rows)} episodes, "
          f"dataset mean reward {mean:.4f}")
    print(f"wrote {csv_path}")


def _cmd_compare(args):
    rows = compare(args.csvs, reference=args.ref)
    reference = args.ref or rows[0][0]
    table = format_comparison(rows, reference)
    print(table)
    if args.out:
        body = "scheduler,mean_reward,ratio_vs_ref\n" + "".join(
            f"{name},{mean!r},{ratio!r}\n" for name, mean, ratio in rows)
        with open(args.out, "w") as fh:
            fh.write(body)
        print(f"wrote {args.out}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="schedlab",
        description="Downlink packet-scheduling lab: datasets, training, "
                    "evaluation, comparison.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="write a reusable episode dataset")
    _add_common(p)
    p.add_argument("--out", required=True, help="dataset file path")
    p.add_argument("--episodes", type=int, help="override test_episodes")
    p.set_defaults(func=_cmd_gen_dataset)

    p = sub.add_parser("train", help="train the DDPG scheduler")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a scheduler on a dataset")
    _add_common(p)
    p.add_argument("--scheduler",
                   choices=("rr", "mt", "pf", "edf", "lwdf", "ddpg", "ke-ddpg"))
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", help="checkpoint dir for ddpg/ke-ddpg")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("compare", help="summarize eval CSVs")
    p.add_argument("csvs", nargs="+")
    p.add_argument("--ref", help="reference scheduler name")
    p.add_argument("--out", help="optional summary CSV path")
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"schedlab: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
