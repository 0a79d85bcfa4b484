"""Small synthetic datasets used by the tests and the demo scripts."""

import csv
import json

import numpy as np

from .data_model import CATEGORICAL, NUMERIC, ColumnSpec, Schema, Table


def bimodal_minority(n=256, seed=0, centers=(0.25, 0.75), std=0.05):
    """Minority-only table with one numeric column drawn from two modes."""
    rng = np.random.default_rng(seed)
    half = n // 2
    vals = np.concatenate([
        rng.normal(centers[0], std, half),
        rng.normal(centers[1], std, n - half),
    ])
    vals = np.clip(vals, 0.0, 1.0)
    rng.shuffle(vals)
    schema = Schema(
        (ColumnSpec("value", NUMERIC),),
        label="target", positive_label="yes", label_levels=("no", "yes"),
    )
    return Table(schema, vals[:, None], np.ones(n, dtype=int))


def rare_category_minority(n=400, rare_fraction=0.05, seed=0):
    """Minority-only table: one numeric column plus a skewed binary category."""
    rng = np.random.default_rng(seed)
    flag = (rng.random(n) < rare_fraction).astype(float)
    vals = rng.normal(0.3 + 0.4 * flag, 0.05, n)
    schema = Schema(
        (ColumnSpec("value", NUMERIC),
         ColumnSpec("group", CATEGORICAL, ("common", "rare"))),
        label="target", positive_label="yes", label_levels=("no", "yes"),
    )
    X = np.column_stack([vals, flag])
    return Table(schema, X, np.ones(n, dtype=int))


def blobs_imbalanced(n_majority=950, n_minority=50, seed=0,
                     centers=((0.0, 0.0), (1.8, 1.8)), std=1.0):
    """Two overlapping 2-D Gaussian blobs at a skewed class ratio."""
    rng = np.random.default_rng(seed)
    neg = rng.normal(centers[0], std, (n_majority, 2))
    pos = rng.normal(centers[1], std, (n_minority, 2))
    X = np.vstack([neg, pos])
    y = np.concatenate([np.zeros(n_majority, dtype=int), np.ones(n_minority, dtype=int)])
    order = rng.permutation(len(y))
    schema = Schema(
        (ColumnSpec("x1", NUMERIC), ColumnSpec("x2", NUMERIC)),
        label="target", positive_label="yes", label_levels=("no", "yes"),
    )
    return Table(schema, X[order], y[order])


def mixed_imbalanced(n_majority=400, n_minority=60, seed=0):
    """Numeric + categorical features with class-dependent distributions."""
    rng = np.random.default_rng(seed)
    n = n_majority + n_minority
    y = np.concatenate([np.zeros(n_majority, dtype=int), np.ones(n_minority, dtype=int)])
    x1 = rng.normal(0.0 + 1.5 * y, 1.0)
    x2 = rng.normal(1.0 - 1.0 * y, 0.8)
    cat_p = np.where(y == 1, 0.7, 0.2)
    cat = (rng.random(n) < cat_p).astype(float)
    schema = Schema(
        (ColumnSpec("amount", NUMERIC),
         ColumnSpec("tenure", NUMERIC),
         ColumnSpec("segment", CATEGORICAL, ("basic", "premium"))),
        label="target", positive_label="yes", label_levels=("no", "yes"),
    )
    X = np.column_stack([x1, x2, cat])
    order = rng.permutation(n)
    return Table(schema, X[order], y[order])


def table_to_csv(table, path):
    schema = table.schema
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(schema.names + [schema.label])
        for row, label in zip(table.X, table.y):
            cells = []
            for j, col in enumerate(schema.columns):
                if col.kind == NUMERIC:
                    cells.append(repr(float(row[j])))
                else:
                    cells.append(col.categories[int(row[j])])
            cells.append(schema.positive_label if label == 1 else schema.negative_label)
            writer.writerow(cells)


def write_fixture_files(out_dir):
    """Emit the toy datasets as CSV + schema JSON pairs; returns the paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, table in (
        ("bimodal_minority", bimodal_minority()),
        ("rare_category_minority", rare_category_minority()),
        ("blobs_imbalanced", blobs_imbalanced()),
        ("mixed_imbalanced", mixed_imbalanced()),
    ):
        csv_path = os.path.join(out_dir, f"{name}.csv")
        schema_path = os.path.join(out_dir, f"{name}.schema.json")
        table_to_csv(table, csv_path)
        with open(schema_path, "w", encoding="utf-8") as f:
            json.dump(table.schema.to_dict(), f, indent=2)
        written.extend([csv_path, schema_path])
    return written
