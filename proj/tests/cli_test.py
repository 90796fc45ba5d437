#!/usr/bin/env python3
"""End-to-end checks of the flatsel command line. argv: flatsel binary, tools dir."""
import csv
import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path

BIN = sys.argv[1]
TOOLS = Path(sys.argv[2])
failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(*args, cwd):
    return subprocess.run([BIN, *args], cwd=cwd, capture_output=True, text=True)


def cylinder_obj(n=32, h=10):
    lines = [f"v {math.cos(2 * math.pi * i / n)} {math.sin(2 * math.pi * i / n)} {2 * j / h}"
             for j in range(h + 1) for i in range(n)]
    for j in range(h):
        for i in range(n):
            a, b = j * n + i + 1, j * n + (i + 1) % n + 1
            lines += [f"f {a} {b} {b + n}", f"f {a} {b + n} {a + n}"]
    return "\n".join(lines) + "\n"


with tempfile.TemporaryDirectory() as tmp:
    d = Path(tmp)
    (d / "cyl.obj").write_text(cylinder_obj())

    r = run("select", "--mesh", "cyl.obj", "--seed", "42", "--selector", "greedy", cwd=d)
    check(r.returncode == 0, "select exits 0")
    for name in ("patch.json", "out_uv.obj", "report.json"):
        check((d / name).exists(), f"select writes {name}")
    patch = json.loads((d / "patch.json").read_text())
    report = json.loads((d / "report.json").read_text())
    check(42 in patch["faces"], "seed in patch")
    check(patch["is_disk"], "patch is a disk")
    check(report["N"] == len(patch["faces"]), "report N matches patch")
    check(report["max_DI"] < 0.05, "developable side flattens below 0.05")
    uv = (d / "out_uv.obj").read_text().splitlines()
    check(sum(l.startswith("f ") for l in uv) == len(patch["faces"]), "UV OBJ has one face per patch face")

    check(run("select", "--mesh", "cyl.obj", "--seed", "42", "--selector", "nope", cwd=d).returncode == 2,
          "unknown selector exits 2")
    check(run("select", "--mesh", "cyl.obj", cwd=d).returncode == 2, "missing flag exits 2")
    check(run("frobnicate", cwd=d).returncode == 2, "unknown subcommand exits 2")
    r = run("select", "--mesh", "cyl.obj", "--seed", "100000", cwd=d)
    check(r.returncode == 1 and "error" in r.stderr, "bad seed exits 1 with a message")
    check(run("select", "--mesh", "cyl.obj", "--seed", "1", "--config", '{"bogus": 1}', cwd=d).returncode == 1,
          "bad config exits 1")

    r = run("param", "--mesh", "cyl.obj", "--patch", "patch.json", "--uv-out", "p.obj", "--report-out", "p.json",
            cwd=d)
    check(r.returncode == 0 and (d / "p.obj").exists(), "param flattens a patch file")

    r = run("--rng-seed", "11", "gen-dataset", "--out", "ds", "--count", "3", "--resolution", "4", cwd=d)
    check(r.returncode == 0, "gen-dataset exits 0")
    r = run("gen-dataset", "--out", "ds2", "--count", "3", "--resolution", "4", "--rng-seed", "11", cwd=d)
    same = all((d / "ds" / p.relative_to(d / "ds2")).read_bytes() == p.read_bytes()
               for p in (d / "ds2").rglob("*") if p.is_file())
    check(same, "same --rng-seed regenerates identical files")

    seeds = sum(len(json.loads(p.read_text())["seeds"]) for p in (d / "ds").glob("shape_*/seeds.json"))
    r = run("eval", "--dataset", "ds", "--selectors", "greedy,logmap", "--out", "b1", cwd=d)
    check(r.returncode == 0, "eval exits 0")
    rows = list(csv.DictReader(open(d / "b1" / "bench.csv")))
    check(len(rows) == 2 * seeds, f"one row per (mesh, seed, selector): {len(rows)} == 2 * {seeds}")
    run("eval", "--dataset", "ds", "--selectors", "greedy,logmap", "--out", "b2", cwd=d)
    check((d / "b1" / "bench.csv").read_bytes() == (d / "b2" / "bench.csv").read_bytes(), "eval CSV is byte-stable")
    r = subprocess.run([sys.executable, str(TOOLS / "recompute_medians.py"), str(d / "b1")], capture_output=True,
                       text=True)
    check(r.returncode == 0, "medians match an independent recomputation: " + r.stdout.strip())

    r = run("eval", "--dataset", "ds", "--out", "b0", cwd=d)
    check(r.returncode == 0 and len((d / "b0" / "bench.csv").read_text().splitlines()) == 1,
          "empty selector list gives an empty table")

print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
