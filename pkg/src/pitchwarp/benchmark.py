"""Algorithm registry and the synthetic PAA benchmark."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__
from .ctw import CTWParams, ctw_align
from .curve import SEMITONE, HZ, PitchCurve, interpolate_unvoiced, z_normalize
from .dtw import AlignmentPath, dtw, euclidean_cost
from .metrics import DEFAULT_TOLERANCE, paa
from .sadtw import SADTWParams, sadtw
from .synth import CorpusParams, SynthPair, gen_pair, pair_in_unit, pair_seed

ALGORITHMS = ("dtw", "ndtw", "ctw", "sadtw")
UNITS = (HZ, SEMITONE)


class BenchmarkError(ValueError):
    pass


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def parse_algo(label: str) -> tuple[str, dict]:
    """``"sadtw:half_width=16,freq_scale=0.5"`` -> ("sadtw", {...})."""
    name, _, rest = label.partition(":")
    name = name.strip().lower()
    if name not in ALGORITHMS:
        raise BenchmarkError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    options = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise BenchmarkError(f"bad option {item!r} in {label!r}")
        options[key.strip()] = _coerce(value.strip())
    return name, options


def align(algo: str, amateur: PitchCurve, template: PitchCurve, band=None, **options) -> AlignmentPath:
    """Run one alignment algorithm on two same-unit curves."""
    if options and algo in ("dtw", "ndtw"):
        raise BenchmarkError(f"{algo} takes no options")
    amateur = interpolate_unvoiced(amateur)
    template = interpolate_unvoiced(template)
    if algo == "dtw":
        path = dtw(euclidean_cost(amateur, template), band=band)
        path.meta = {"algo": "dtw"}
    elif algo == "ndtw":
        path = dtw(euclidean_cost(z_normalize(amateur), z_normalize(template)), band=band)
        path.meta = {"algo": "ndtw"}
    elif algo == "ctw":
        path = ctw_align(amateur, template, replace(CTWParams(), **options), band=band)
    elif algo == "sadtw":
        path = sadtw(amateur, template, replace(SADTWParams(), **options), band=band)
    else:
        raise BenchmarkError(f"unknown algorithm {algo!r}")
    path.meta["unit"] = amateur.unit
    return path


def _score_pair(job):
    corpus, seed, algos, tolerance, units = job
    pair = gen_pair(corpus, seed)
    return score_pair(pair, algos, tolerance, units)


def score_pair(pair: SynthPair, algos, tolerance=DEFAULT_TOLERANCE, units=UNITS) -> dict:
    scores = {}
    for unit in units:
        amateur, template = pair_in_unit(pair, unit)
        scores[unit] = {}
        for label in algos:
            name, options = parse_algo(label)
            scores[unit][label] = paa(align(name, amateur, template, **options), pair.gt_map, tolerance)
    return {
        "seed": pair.seed,
        "n_amateur": len(pair.amateur),
        "n_template": len(pair.template),
        "paa": scores,
    }


def run_benchmark(
    corpus: CorpusParams | None = None,
    n_pairs: int = 200,
    algorithms=ALGORITHMS,
    tolerance: int = DEFAULT_TOLERANCE,
    master_seed: int = 0,
    units=UNITS,
    threads: int = 1,
) -> dict:
    """Mean/std PAA of each algorithm over a generated corpus.

    Pair k is generated from a seed derived from ``master_seed`` and k, so
    the report does not depend on ``threads``.
    """
    corpus = corpus or CorpusParams()
    if n_pairs < 1:
        raise BenchmarkError("n_pairs must be >= 1")
    algorithms = list(algorithms)
    for label in algorithms:
        parse_algo(label)
    for unit in units:
        if unit not in UNITS:
            raise BenchmarkError(f"unknown unit {unit!r}")
    jobs = [(corpus, pair_seed(master_seed, k), algorithms, tolerance, tuple(units))
            for k in range(n_pairs)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_score_pair, jobs, chunksize=max(1, n_pairs // (4 * threads))))
    else:
        rows = [_score_pair(job) for job in jobs]

    summary = {}
    for unit in units:
        summary[unit] = {}
        for label in algorithms:
            vals = np.array([r["paa"][unit][label] for r in rows])
            summary[unit][label] = {
                "mean": float(vals.mean()),
                "std": float(vals.std()),
                "min": float(vals.min()),
                "max": float(vals.max()),
            }
    return {
        "tool": "pitchwarp",
        "version": __version__,
        "metric": "PAA (%)",
        "params": {
            "master_seed": master_seed,
            "n_pairs": n_pairs,
            "tolerance_frames": tolerance,
            "algorithms": algorithms,
            "units": list(units),
            "corpus": corpus.as_dict(),
            "sadtw_defaults": SADTWParams().as_dict(),
            "ctw_defaults": CTWParams().as_dict(),
        },
        "summary": summary,
        "pairs": rows,
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_table(report: dict) -> str:
    """Aligned-column text rendering of a benchmark summary."""
    units = report["params"]["units"]
    algos = report["params"]["algorithms"]
    width = max(len("algorithm"), *(len(a) for a in algos))
    header = f"{'algorithm':<{width}}" + "".join(f"  {u + ' PAA':>18}" for u in units)
    lines = [
        f"pairs={report['params']['n_pairs']} seed={report['params']['master_seed']} "
        f"tolerance={report['params']['tolerance_frames']} frames",
        header,
        "-" * len(header),
    ]
    for label in algos:
        cells = []
        for unit in units:
            s = report["summary"][unit][label]
            cells.append(f"  {s['mean']:>9.2f} ± {s['std']:>6.2f}")
        lines.append(f"{label:<{width}}" + "".join(cells))
    return "\n".join(lines) + "\n"
