"""Export the small public classification datasets used by the desk-scale
benchmark to data/desk/<name>.csv (numeric features, label in last column,
no header).

Sources: scikit-learn's bundled copies of iris and wine, MASS::fgl (forensic
glass) and MASS::crabs via the `rdatasets` package, and `palmerpenguins`.

    pip install rdatasets palmerpenguins scikit-learn
    python3 scripts/export_desk_datasets.py
"""

import os
import sys

import pandas as pd

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "desk")


def write(name, features, labels):
    df = pd.DataFrame(features).reset_index(drop=True)
    df["label"] = pd.Series(labels).reset_index(drop=True).astype(str)
    path = os.path.join(OUT, f"{name}.csv")
    df.to_csv(path, header=False, index=False, float_format="%.10g")
    print(f"{path}: {df.shape[0]} rows, {df.shape[1] - 1} features, "
          f"{df['label'].nunique()} classes")


def main():
    os.makedirs(OUT, exist_ok=True)

    from sklearn.datasets import load_iris, load_wine

    for name, loader in [("iris", load_iris), ("wine", load_wine)]:
        b = loader()
        write(name, b.data, [b.target_names[t] for t in b.target])

    import rdatasets

    fgl = rdatasets.data("MASS", "fgl")
    write("glass", fgl[["RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe"]], fgl["type"])

    crabs = rdatasets.data("MASS", "crabs")
    write("crabs", crabs[["FL", "RW", "CL", "CW", "BD"]], crabs["sp"] + "-" + crabs["sex"])

    from palmerpenguins import load_penguins

    cols = ["bill_length_mm", "bill_depth_mm", "flipper_length_mm", "body_mass_g"]
    p = load_penguins().dropna(subset=cols)
    write("penguins", p[cols], p["species"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
