import os
import sys
import json
import logging
import argparse
from functools import lru_cache

now_dir = os.getcwd()
sys.path.append(now_dir)

from ssmst.cert.labels import load_labels
from ssmst.cert.verify import verify_labels
from ssmst.harness.fleet import run_fleet, write_csv
from ssmst.harness.trial import resolve_k, run_trial, summarize
from ssmst.lib.graph import graph_from_spec
from ssmst.lib.milestones import describe, milestone_set
from ssmst.sim.corrupt import CorruptionPolicy
from ssmst.sim.scheduler import SchedulerKind


def str2bool(value):
    if value.lower() in ("y", "yes", "t", "true", "on", "1"):
        return True
    if value.lower() in ("n", "no", "f", "false", "off", "0"):
        return False
    raise argparse.ArgumentTypeError(f"Invalid truth value {value!r}.")


@lru_cache(maxsize=1)
def get_config():
    from ssmst.configs.config import Config

    return Config()


# Simulate
def run_simulate_script(
    graph: str,
    k: str,
    scheduler: str,
    corrupt: str,
    seed: int,
    max_rounds: int = None,
    out: str = None,
    trace: str = None,
    labels_out: str = None,
    alpha: str = None,
    polynomial_weights: bool = None,
):
    config = get_config()
    if alpha is not None:
        print(config.set_alpha(alpha))
    if polynomial_weights is None:
        polynomial_weights = config.polynomial_weights
    if trace is None and config.trace_dump and out:
        trace = f"{out}.trace.jsonl"
    g = graph_from_spec(graph, polynomial_weights=polynomial_weights)
    result = run_trial(
        g,
        k,
        scheduler,
        corrupt,
        seed,
        max_rounds=max_rounds,
        graph_name=graph,
        trace_path=trace,
        labels_path=labels_out,
    )
    record = json.dumps(result.to_dict(), sort_keys=True)
    if out:
        with open(out, "w") as f:
            f.write(record + "\n")
    print(record)
    return result.passed


# Milestones
def run_milestones_script(n: int, k: str):
    print(json.dumps(describe(milestone_set(n, resolve_k(k, n)))))
    return True


# Fleet
def run_fleet_script(spec: str, jobs: int = None, out: str = None, csv_path: str = None):
    results = run_fleet(spec, jobs=jobs, out_path=out)
    if csv_path:
        write_csv(results, csv_path)
    print(json.dumps(summarize(results), indent=2, sort_keys=True))
    return all(result.passed for result in results)


# Verify
def run_verify_script(labels: str, graph: str, k: str, polynomial_weights: bool = None):
    config = get_config()
    if polynomial_weights is None:
        polynomial_weights = config.polynomial_weights
    g = graph_from_spec(graph, polynomial_weights=polynomial_weights)
    ms = milestone_set(g.n, resolve_k(k, g.max_weight), top=g.max_weight)
    with open(labels, "r") as f:
        dumped = load_labels(f.read())
    missing = sorted(set(g.nodes) - set(dumped))
    if missing:
        print(f"Labels missing for nodes {missing}.")
        return False
    rejecting = sorted(verify_labels(g, dumped, ms))
    print(json.dumps({"accepted": not rejecting, "rejecting": rejecting}))
    return not rejecting


# Parse arguments
def parse_arguments():
    parser = argparse.ArgumentParser(
        description="Simulator for a silent self-stabilizing approximate MST algorithm."
    )
    parser.add_argument(
        "--log_level",
        type=str,
        help="Logging level of the simulator.",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default="WARNING",
    )
    subparsers = parser.add_subparsers(
        title="subcommands", dest="mode", help="Choose a mode"
    )

    # Parser for 'simulate' mode
    simulate_parser = subparsers.add_parser(
        "simulate", help="Run one trial from a corrupted configuration until silence."
    )
    simulate_parser.add_argument(
        "--graph",
        type=str,
        help="Graph file or generator spec gen:kind:n:dist[:seed].",
        required=True,
    )
    simulate_parser.add_argument(
        "--k",
        type=str,
        help="Trade-off parameter, or 'min' / 'max'.",
        default="0",
    )
    simulate_parser.add_argument(
        "--scheduler",
        type=str,
        help="Scheduler policy.",
        choices=[kind.value for kind in SchedulerKind],
        default=SchedulerKind.ALL_ENABLED.value,
    )
    simulate_parser.add_argument(
        "--corrupt",
        type=str,
        help="Corruption applied to the clean configuration.",
        choices=[policy.value for policy in CorruptionPolicy],
        default=CorruptionPolicy.NONE.value,
    )
    simulate_parser.add_argument(
        "--seed", type=int, help="Seed of the scheduler and corruption.", default=0
    )
    simulate_parser.add_argument(
        "--max_rounds",
        "--max-rounds",
        dest="max_rounds",
        type=int,
        help="Round budget of the run.",
        default=None,
    )
    simulate_parser.add_argument(
        "--out", type=str, help="Path of the JSON result.", default=None
    )
    simulate_parser.add_argument(
        "--trace", type=str, help="Path of a JSON-lines step dump.", default=None
    )
    simulate_parser.add_argument(
        "--labels_out",
        "--labels-out",
        dest="labels_out",
        type=str,
        help="Path where the final labels are dumped.",
        default=None,
    )
    simulate_parser.add_argument(
        "--alpha",
        type=str,
        help="Memory cap constant (integer or p/q).",
        default=None,
    )
    simulate_parser.add_argument(
        "--polynomial_weights",
        type=str2bool,
        choices=[True, False],
        help="Accept weights up to n^3.",
        default=None,
    )

    # Parser for 'milestones' mode
    milestones_parser = subparsers.add_parser(
        "milestones", help="Print the milestone set for n and k."
    )
    milestones_parser.add_argument("--n", type=int, help="Number of nodes.", required=True)
    milestones_parser.add_argument(
        "--k", type=str, help="Trade-off parameter, or 'min' / 'max'.", default="0"
    )

    # Parser for 'fleet' mode
    fleet_parser = subparsers.add_parser("fleet", help="Run a fleet of trials.")
    fleet_parser.add_argument(
        "--spec", type=str, help="Fleet specification (.json or .toml).", required=True
    )
    fleet_parser.add_argument(
        "--jobs", type=int, help="Number of worker processes.", default=None
    )
    fleet_parser.add_argument(
        "--out", type=str, help="Path of the JSON-lines results.", default=None
    )
    fleet_parser.add_argument(
        "--csv", dest="csv_path", type=str, help="Flattened CSV copy.", default=None
    )

    # Parser for 'verify' mode
    verify_parser = subparsers.add_parser(
        "verify", help="Run the label verifier on dumped labels."
    )
    verify_parser.add_argument(
        "--labels", type=str, help="Dumped labels (JSON lines).", required=True
    )
    verify_parser.add_argument(
        "--graph", type=str, help="Graph file or generator spec.", required=True
    )
    verify_parser.add_argument(
        "--k", type=str, help="Trade-off parameter, or 'min' / 'max'.", default="0"
    )
    verify_parser.add_argument(
        "--polynomial_weights",
        type=str2bool,
        choices=[True, False],
        help="Accept weights up to n^3.",
        default=None,
    )

    return parser.parse_args()


def main():
    if len(sys.argv) == 1:
        print("Please run the script with '-h' for more information.")
        sys.exit(1)

    args = parse_arguments()
    logging.basicConfig(level=getattr(logging, args.log_level))

    ok = False
    try:
        if args.mode == "simulate":
            ok = run_simulate_script(
                graph=args.graph,
                k=args.k,
                scheduler=args.scheduler,
                corrupt=args.corrupt,
                seed=args.seed,
                max_rounds=args.max_rounds,
                out=args.out,
                trace=args.trace,
                labels_out=args.labels_out,
                alpha=args.alpha,
                polynomial_weights=args.polynomial_weights,
            )
        elif args.mode == "milestones":
            ok = run_milestones_script(n=args.n, k=args.k)
        elif args.mode == "fleet":
            ok = run_fleet_script(
                spec=args.spec,
                jobs=args.jobs,
                out=args.out,
                csv_path=args.csv_path,
            )
        elif args.mode == "verify":
            ok = run_verify_script(
                labels=args.labels,
                graph=args.graph,
                k=args.k,
                polynomial_weights=args.polynomial_weights,
            )
    except Exception as error:
        print(f"An error occurred during execution: {error}")

        import traceback

        traceback.print_exc()

    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
