#!/usr/bin/env python3
"""Stub converter: flat event CSV -> fmpp space.json + data.jsonl.

Input: one row per event with columns  id,t,<dim1>,<dim2>,...
Marker values are arbitrary strings; each dimension's distinct values become
its labels, in sorted order. No profile features are produced. Edit
PROFILE_COLUMNS and DURATION below for real data.

    python3 convert_csv.py events.csv out_dir
"""

import csv
import json
import os
import sys
from collections import defaultdict

PROFILE_COLUMNS = []  # e.g. ["age", "years_of_education"], numeric, constant per id
DURATION = None       # e.g. {"dimension": "stay", "intervals": [[0, 1], [1, 3], [3, None]], "midpoints": [0.5, 2, 5]}


def main(src, out_dir):
    with open(src, newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        sys.exit("no rows")
    fixed = {"id", "t", *PROFILE_COLUMNS}
    dims = [c for c in rows[0].keys() if c not in fixed]

    labels = {d: sorted({r[d] for r in rows}) for d in dims}
    index = {d: {v: i + 1 for i, v in enumerate(labels[d])} for d in dims}

    space = {"format": "fmpp-marker-space", "version": 1,
             "profile_dim": len(PROFILE_COLUMNS), "dimensions": []}
    for d in dims:
        entry = {"name": d, "cardinality": len(labels[d]), "labels": labels[d]}
        if DURATION and DURATION["dimension"] == d:
            entry["duration"] = {"intervals": DURATION["intervals"], "midpoints": DURATION["midpoints"]}
        space["dimensions"].append(entry)

    seqs = defaultdict(list)
    profiles = {}
    for r in rows:
        seqs[r["id"]].append((float(r["t"]), [index[d][r[d]] for d in dims]))
        profiles.setdefault(r["id"], [float(r[c]) for c in PROFILE_COLUMNS])

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "space.json"), "w") as f:
        json.dump(space, f, indent=2)
        f.write("\n")
    with open(os.path.join(out_dir, "data.jsonl"), "w") as f:
        for sid in sorted(seqs):
            events = sorted(seqs[sid], key=lambda e: e[0])
            rec = {"id": sid, "profile": profiles[sid], "start": min(0.0, events[0][0]),
                   "events": [{"t": t, "markers": m} for t, m in events]}
            f.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
