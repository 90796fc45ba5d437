#!/usr/bin/env python3
"""Recompute per (dataset, selector) medians from bench.csv and timings.csv
and compare them with bench.json. Exit 0 when everything matches."""
import csv
import json
import statistics
import sys
from collections import defaultdict
from pathlib import Path


def close(a, b):
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= 1e-8 * max(1.0, abs(a), abs(b))


def main(out_dir):
    out = Path(out_dir)
    rows = list(csv.DictReader(open(out / "bench.csv")))
    times = {(r["mesh"], r["seed"], r["selector"]): r for r in csv.DictReader(open(out / "timings.csv"))}
    manifest = json.load(open(out / "bench.json"))
    groups = defaultdict(list)
    for r in rows:
        groups[(r["dataset"], r["selector"])].append(r)

    def med(values):
        values = [float(v) for v in values if v != ""]
        return statistics.median(values) if values else None

    expected = {}
    for key, rs in groups.items():
        pcols = [c for c in rs[0] if c.startswith("pDI_")]
        t = [times[(r["mesh"], r["seed"], r["selector"])] for r in rs]
        expected[key] = {
            "samples": len(rs),
            "accuracy": med(r["accuracy"] for r in rs),
            "mAP": med(r["mAP"] for r in rs),
            "F1": med(r["F1"] for r in rs),
            "percent_DI": [med(r[c] for r in rs) for c in pcols],
            "n_faces": med(r["n_faces"] for r in rs),
            "seg_time": med(x["seg_time"] for x in t),
            "uv_time": med(x["uv_time"] for x in t),
        }
    got = {(m["dataset"], m["selector"]): m for m in manifest["medians"]}
    bad = 0
    if set(got) != set(expected):
        print("groups differ:", sorted(got), sorted(expected))
        return 1
    for key, e in expected.items():
        g = got[key]
        for field, v in e.items():
            if field == "samples":
                ok = g[field] == v
            elif field == "percent_DI":
                ok = len(v) == len(g[field]) and all(close(a, b) for a, b in zip(v, g[field]))
            else:
                ok = close(v, g[field])
            if not ok:
                bad += 1
                print(f"{key} {field}: bench.json {g[field]} vs csv {v}")
    print(f"{len(expected)} groups checked, {bad} mismatches")
    return 1 if bad else 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("usage: recompute_medians.py BENCH_OUT_DIR", file=sys.stderr)
        sys.exit(2)
    sys.exit(main(sys.argv[1]))
