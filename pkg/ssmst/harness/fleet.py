import concurrent.futures
import csv
import itertools
import json
import logging
import os
from dataclasses import dataclass, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from tqdm import tqdm

from ssmst.configs.config import Config
from ssmst.harness.trial import TrialResult, run_trial
from ssmst.lib.graph import graph_from_spec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialParams:
    index: int
    graph: str
    k: object
    scheduler: str
    corruption: str
    seed: int
    max_rounds: int = None
    polynomial_weights: bool = False


def load_fleet_spec(path):
    """Reads a fleet specification from a .toml file or, otherwise, a JSON file."""
    if path.endswith(".toml"):
        with open(path, "rb") as f:
            return tomllib.load(f)
    with open(path, "r") as f:
        return json.load(f)


def _seeds(value):
    if isinstance(value, dict):
        start = int(value.get("start", 0))
        return list(range(start, start + int(value["count"])))
    return [int(s) for s in value]


def expand(spec):
    """Cartesian product graphs x k x schedulers x corruptions x seeds, in that order."""
    config = Config()
    axes = itertools.product(
        spec.get("graphs", []),
        spec.get("k", [0]),
        spec.get("schedulers", ["all_enabled"]),
        spec.get("corruptions", ["none"]),
        _seeds(spec.get("seeds", [0])),
    )
    polynomial = bool(spec.get("polynomial_weights", config.polynomial_weights))
    return [
        TrialParams(i, g, k, sch, cor, seed, spec.get("max_rounds"), polynomial)
        for i, (g, k, sch, cor, seed) in enumerate(axes)
    ]


def run_params(params):
    """Worker entry point; a failing trial becomes a result with its error set."""
    try:
        g = graph_from_spec(params.graph, polynomial_weights=params.polynomial_weights)
        return run_trial(
            g,
            params.k,
            params.scheduler,
            params.corruption,
            params.seed,
            max_rounds=params.max_rounds,
            graph_name=params.graph,
        )
    except Exception as error:
        logger.warning("trial %d on %s failed: %s", params.index, params.graph, error)
        return TrialResult(
            graph=params.graph,
            n=0,
            k=params.k if isinstance(params.k, int) else 0,
            scheduler=params.scheduler,
            corruption=params.corruption,
            seed=params.seed,
            error=f"{type(error).__name__}: {error}",
        )


def _write(out, result):
    if out:
        out.write(json.dumps(result.to_dict(), sort_keys=True) + "\n")
        out.flush()


def run_fleet(spec_path, jobs=None, out_path=None):
    """
    Runs every trial of a fleet spec. Results are written in trial order whatever
    the parallelism, so the same spec always yields the same file.
    """
    params = expand(load_fleet_spec(spec_path))
    jobs = jobs or Config().fleet_jobs
    results = [None] * len(params)
    out = open(out_path, "w") if out_path else None
    written = 0
    try:
        with tqdm(total=len(params), desc="Trials") as pbar:
            if jobs <= 1:
                for p in params:
                    results[p.index] = run_params(p)
                    _write(out, results[p.index])
                    pbar.update(1)
            else:
                with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
                    futures = {executor.submit(run_params, p): p.index for p in params}
                    for future in concurrent.futures.as_completed(futures):
                        results[futures[future]] = future.result()
                        while written < len(results) and results[written] is not None:
                            _write(out, results[written])
                            written += 1
                        pbar.update(1)
    finally:
        if out:
            out.close()
    logger.info("fleet %s finished %d trials", os.path.basename(spec_path), len(results))
    return results


def write_csv(results, path):
    columns = [f.name for f in fields(TrialResult)] + ["passed"]
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns)
        writer.writeheader()
        for result in results:
            writer.writerow(result.to_dict())
