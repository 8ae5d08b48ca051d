"""Run artifacts on disk: draw files, manifests, tables.

Formats are deliberately boring:

    chain_###.csv   header iter,cum_grads,accepted_stage,accepted_eps,
                    theta_1..theta_D; row 0 is the initial state
    manifest.json   config echo, per-chain seeds and counters; sorted keys,
                    no timestamps, so reruns are byte-identical
    timing.json     wall-clock sidecar, explicitly outside the
                    determinism contract
    *.csv tables    plain delimited output for any plotting tool

Floats are written with repr-exact %.17g.  Writes go to a temp file in
the target directory followed by an atomic rename, so failures never
leave partial outputs behind.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .samplers import ChainResult


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".17g")
    return str(value)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.parent / f".tmp-{path.name}"
    tmp.write_text(text)
    os.replace(tmp, path)


def write_table(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_table(path):
    """Returns (header, list-of-row-lists) with numeric cells parsed."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        row = []
        for cell in line.split(","):
            try:
                row.append(float(cell))
            except ValueError:
                row.append(cell)
        rows.append(row)
    return header, rows


def write_json(path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_matrix_csv(path, matrix, columns) -> None:
    write_table(path, columns, np.asarray(matrix, dtype=float))


def read_matrix_csv(path) -> np.ndarray:
    _, rows = read_table(path)
    return np.asarray(rows, dtype=float)


def chain_file_name(index: int) -> str:
    return f"chain_{index:03d}.csv"


def write_chain_csv(path, result: ChainResult) -> None:
    dim = result.draws.shape[1]
    header = ["iter", "cum_grads", "accepted_stage", "accepted_eps"] + [
        f"theta_{i + 1}" for i in range(dim)
    ]
    rows = []
    for i in range(result.draws.shape[0]):
        rows.append(
            [i, int(result.cum_grads[i]), int(result.accepted_stage[i]),
             result.accepted_eps[i]]
            + list(result.draws[i])
        )
    write_table(path, header, rows)


def read_chain_csv(path) -> ChainResult:
    header, rows = read_table(path)
    data = np.asarray(rows, dtype=float)
    dim = len(header) - 4
    cum = data[:, 1].astype(np.int64)
    return ChainResult(
        draws=data[:, 4 : 4 + dim],
        cum_grads=cum,
        accepted_stage=data[:, 2].astype(np.int64),
        accepted_eps=data[:, 3],
        grad_evals=int(cum[-1]),
        divergences=0,
        balance_guards=0,
    )


def load_run(run_dir):
    """Manifest plus the chain results of one sample run, in chain order."""
    run_dir = Path(run_dir)
    manifest = read_json(run_dir / "manifest.json")
    chains = []
    for i in range(manifest["chains"]):
        chains.append(read_chain_csv(run_dir / chain_file_name(i)))
    return manifest, chains
