"""Load a skewed dataset, standardize it, and take a stratified split.

Shows the Table/Schema data model and why splits are stratified: a naive
split of a 95:5 dataset can easily leave a fold with almost no minority rows.
"""

import numpy as np

from fingan import apply_preprocess, fit_preprocess, stratified_holdout
from fingan.fixtures import mixed_imbalanced


def main():
    table = mixed_imbalanced(400, 60, seed=0)
    print(f"dataset: {table.n_rows} rows, "
          f"{table.n_positive} positive ({table.n_positive / table.n_rows:.1%})")

    train, test = stratified_holdout(table, 0.8, seed=0)
    print(f"train: {train.n_rows} rows ({train.n_positive} positive)")
    print(f"test:  {test.n_rows} rows ({test.n_positive} positive)")
    print("both sides keep the original class ratio\n")

    # standardization params come from the training side only
    params = fit_preprocess(train)
    std_train = apply_preprocess(train, params, "forward")
    for j in table.schema.numeric_indices:
        col = std_train.X[:, j]
        name = table.schema.columns[j].name
        print(f"{name}: standardized mean {col.mean():+.3f}, std {col.std():.3f}")

    # the inverse transform restores the original values
    back = apply_preprocess(std_train, params, "inverse")
    err = np.abs(back.X - train.X).max()
    print(f"\nround-trip error after inverse transform: {err:.2e}")


if __name__ == "__main__":
    main()
