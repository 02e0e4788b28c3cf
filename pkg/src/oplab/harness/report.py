"""CSV and plot-data exports from a result log."""
import csv
import json
import os

from .runner import read_log

BASE_COLUMNS = ["suite", "instance", "seed", "config_hash"]


def _table(records):
    names = []
    for r in records:
        for k in r.quantities:
            if k not in names:
                names.append(k)
    header = BASE_COLUMNS + names
    rows = []
    for r in records:
        row = [r.suite, r.instance, r.seed, r.config_hash]
        row += [r.quantities[k]["value"] if k in r.quantities else "" for k in names]
        rows.append(row)
    return header, rows


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def emit_report(log_path, out, fmt="csv"):
    """Render ``log_path`` into ``out`` (a directory). Returns the files written.

    Always writes ``table.csv``; for each record holding a series witness it
    adds a two-column file ``profile_*.csv`` (theta, M), ``blowup_*.csv``
    (s, ratio) or ``trace_*.csv`` (iteration, objective). ``fmt="jsonl"`` writes ``records.jsonl`` instead of the table.
    """
    records = read_log(log_path)
    os.makedirs(out, exist_ok=True)
    files = []
    if fmt == "jsonl":
        path = os.path.join(out, "records.jsonl")
        with open(path, "w") as fh:
            for r in records:
                fh.write(json.dumps({**r.quantity_fields(), "witnesses": r.witnesses}, sort_keys=True) + "\n")
        files.append(path)
    elif fmt == "csv":
        files.append(_write_csv(os.path.join(out, "table.csv"), *_table(records)))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    series = {"profile": ("theta", "M"), "blowup": ("s", "ratio"), "trace": ("iteration", "objective")}
    for r in records:
        for key, (xname, yname) in series.items():
            w = r.witnesses.get(key)
            if w is None:
                continue
            pairs = list(zip(w[xname], w[yname])) if isinstance(w, dict) else [tuple(t) for t in w]
            path = os.path.join(out, f"{key}_{r.suite}_{r.instance:04d}.csv")
            files.append(_write_csv(path, [xname, yname], pairs))
    return files
