#!/usr/bin/env python3
"""Recompute benchmark aggregates (p, median t, median J) from a raw report
CSV, independently of the harness. Prints one line per instance in the same
format the bench subcommand prints."""

import argparse
import csv
import statistics


def aggregate(rows):
    by_instance = {}
    order = []
    for row in rows:
        name = row["instance"]
        if name not in by_instance:
            by_instance[name] = []
            order.append(name)
        by_instance[name].append(row)

    out = []
    for name in order:
        group = by_instance[name]
        successes = [r for r in group if r["success"] == "1"]
        p = len(successes) / len(group)
        med_t = statistics.median(float(r["t_first_s"]) for r in successes) if successes else -1.0
        med_j = statistics.median(float(r["J_first_s"]) for r in successes) if successes else -1.0
        out.append((name, p, med_t, med_j))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv_path")
    args = ap.parse_args()
    with open(args.csv_path, newline="") as f:
        rows = list(csv.DictReader(f))
    print("instance,p,median_t_s,median_J_s")
    for name, p, med_t, med_j in aggregate(rows):
        print(f"{name},{p:g},{med_t:g},{med_j:g}")


if __name__ == "__main__":
    main()
