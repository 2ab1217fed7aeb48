"""Machine-readable result files: summary JSON and plot-ready CSVs.

Summaries are byte-identical for identical configurations; the wall
clock lives in the single isolated ``timestamp`` field so consumers can
strip it before comparing.
"""

import csv
import datetime
import json
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_summary(out_dir, payload: dict, name: str = "summary.json") -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(_jsonable(payload))
    doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    path = out_dir / name
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def load_summary(path, drop_timestamp: bool = False) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if drop_timestamp:
        doc.pop("timestamp", None)
    return doc


def canonical_summary_bytes(path) -> bytes:
    """Summary content with the timestamp stripped, for byte comparison."""
    doc = load_summary(path, drop_timestamp=True)
    return json.dumps(doc, sort_keys=True, indent=2).encode()


def write_csv(out_dir, name: str, header, rows) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(v) for v in row])
    return path


def _format(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_, bool)):
        return int(v)
    return v


def write_trajectory_csv(out_dir, result, name: str = "trajectory.csv") -> Path:
    """Flip log with the front after each event: time, site, old, new, front."""
    flips = result.flips
    if flips is None:
        raise ValueError("run was not recorded with record_flips")
    fronts = result.front_path.position_at(flips.times) if result.front_path else \
        np.zeros(flips.times.size, dtype=int)
    rows = [(t, s, 1 - int(nv), int(nv), f)
            for t, s, nv, f in zip(flips.times, flips.sites, flips.new_values, fronts)]
    return write_csv(out_dir, name, ("time", "site", "old", "new", "front"), rows)


def write_probes_csv(out_dir, times, observable_ids, values,
                     name: str = "probes.csv") -> Path:
    rows = zip(times, observable_ids, values)
    return write_csv(out_dir, name, ("time", "observable_id", "value"), rows)


def write_runs_csv(out_dir, header, rows, name: str = "runs.csv") -> Path:
    return write_csv(out_dir, name, header, rows)


def write_restart_csv(out_dir, outcomes, name: str = "runs.csv") -> Path:
    rows = [(r, o.L, o.T, o.Y, o.survived, o.horizon)
            for r, o in enumerate(outcomes)]
    return write_csv(out_dir, name,
                     ("run_id", "L", "T", "Y", "survived", "horizon"), rows)


def write_distribution_csv(out_dir, probs, name: str) -> Path:
    rows = [(i, p) for i, p in enumerate(probs)]
    return write_csv(out_dir, name, ("state_index", "value"), rows)


def write_generator_csv(out_dir, gen, name: str = "generator.csv") -> Path:
    """Sparse generator dump: one CSV row per transition rate."""
    coo = gen.matrix.tocoo()
    rows = sorted(zip(coo.row, coo.col, coo.data))
    return write_csv(out_dir, name, ("state_index", "target_index", "rate"), rows)


def write_lag_csv(out_dir, lags, values, stderrs, name: str = "covariances.csv") -> Path:
    return write_csv(out_dir, name, ("lag", "value", "stderr"),
                     zip(lags, values, stderrs))


def write_curve_csv(out_dir, times, values, stderrs, name: str) -> Path:
    return write_csv(out_dir, name, ("time", "value", "stderr"),
                     zip(times, values, stderrs))
