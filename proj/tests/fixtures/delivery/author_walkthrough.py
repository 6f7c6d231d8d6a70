#!/usr/bin/env python3
"""Regenerates walkthrough.json from the brute-force oracle subcommands.

Usage: author_walkthrough.py path/to/capmap
Run from this directory after reference_learn.py has produced learned.json.
"""
import json
import subprocess
import sys

QUERIES = [
    "has_money, in_van -> delivered",
    "has_money -> has_trolley",
    "has_trolley, in_van, near_destination -> delivered",
    "in_van -> delivered",
    "in_van, !has_money -> delivered, !has_trolley",
    "true -> delivered",
]
BUDGETS = [0, 1, 2, 3]


def probability(cli, *args):
    out = subprocess.run([cli, "oracle", *args], check=True, capture_output=True, text=True).stdout
    line = [l for l in out.splitlines() if "probability:" in l][-1]
    return float(line.split(":")[1])


def main(cli):
    doc = {
        "simulate": {"count": 500, "seed": 42, "observability": 0.8},
        "learn": {"transitions": 3145, "skipped": 0},
        "queries": [
            {"spec": s, "probability": probability(cli, "query", "--model", "learned.json", "--spec", s)}
            for s in QUERIES
        ],
        "plan": {"success_probability": probability(cli, "plan", "--problem", "problem.json")},
        "plan_cond": [
            {
                "budget": b,
                "max_depth": 20,
                "success_probability": probability(
                    cli, "plan-cond", "--problem", "problem.json", "--budget", str(b)),
            }
            for b in BUDGETS
        ],
    }
    with open("walkthrough.json", "w") as f:
        f.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
