"""Rebuild the bundled benchmark CSVs under src/granod/data/.

Sources are public UCI datasets as redistributed on PyPI:

* iris, wine, wdbc           -- scikit-learn's bundled copies
* ionosphere                 -- Orange3 wheel, Orange/tests/datasets/ionosphere.tab
* breast (Wisconsin, 683)    -- keel_ds wheel, keel_ds/data/balanced/raw/wisconsin.dat
* hepatitis (UCI, 155 rows)  -- imbalanced_databases wheel, data/hepatitis/hepatitis.data.txt

Outlier classes are downsampled with ``numpy.random.default_rng(0)`` where the
outlier-detection variant keeps only a handful of them.

Usage::

    pip download --no-deps -d wheels orange3 keel_ds imbalanced_databases
    python scripts/build_benchmarks.py wheels
"""

import csv
import glob
import io
import os
import sys
import zipfile

import numpy as np
from sklearn import datasets

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "src", "granod", "data")


def _wheel_member(wheel_dir, pattern, member):
    (path,) = glob.glob(os.path.join(wheel_dir, pattern))
    with zipfile.ZipFile(path) as zf:
        return zf.read(member).decode("utf-8")


def _downsample(rng, idx, k):
    return np.sort(rng.choice(idx, size=k, replace=False))


def _write(name, header, rows, labels, kinds):
    with open(os.path.join(OUT, f"{name}.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header) + ["label"])
        for row, lab in zip(rows, labels):
            w.writerow([_fmt(v) for v in row] + [int(lab)])
    with open(os.path.join(OUT, f"{name}.schema"), "w", encoding="utf-8") as fh:
        for col, kind in zip(header, kinds):
            fh.write(f"{col}: {kind}\n")
        fh.write("label: label\n")
    print(f"{name}: n={len(rows)} outliers={int(np.sum(labels))} attrs={len(header)}")


def _fmt(v):
    if isinstance(v, str):
        return v
    return repr(float(v)) if not float(v).is_integer() else str(int(v))


def _sk(name, loader, outlier_class, k, seed=0):
    bunch = loader()
    X, y = bunch.data, bunch.target
    rng = np.random.default_rng(seed)
    out_idx = _downsample(rng, np.flatnonzero(y == outlier_class), k)
    in_idx = np.flatnonzero(y != outlier_class)
    keep = np.concatenate([in_idx, out_idx])
    header = [str(c).replace(" ", "_").replace("(", "").replace(")", "") for c in bunch.feature_names]
    labels = np.isin(keep, out_idx).astype(int)
    _write(name, header, X[keep], labels, ["numerical"] * X.shape[1])


def build_ionosphere(wheel_dir):
    text = _wheel_member(wheel_dir, "orange3-*.whl", "Orange/tests/datasets/ionosphere.tab")
    lines = text.splitlines()
    header = lines[0].split("\t")[:-1]
    body = [ln.split("\t") for ln in lines[3:] if ln.strip()]
    X = np.array([[float(v) for v in r[:-1]] for r in body])
    y = np.array([r[-1] for r in body])
    rng = np.random.default_rng(0)
    out_idx = _downsample(rng, np.flatnonzero(y == "b"), 24)
    in_idx = np.flatnonzero(y == "g")
    keep = np.concatenate([in_idx, out_idx])
    labels = np.isin(keep, out_idx).astype(int)
    _write("ionosphere", header, X[keep], labels, ["numerical"] * X.shape[1])


def build_breast(wheel_dir):
    text = _wheel_member(wheel_dir, "keel_ds-*.whl", "keel_ds/data/balanced/raw/wisconsin.dat")
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    X = np.array([[float(v) for v in r[:-1]] for r in rows])
    y = np.array([int(r[-1]) for r in rows])
    header = ["clump_thickness", "cell_size", "cell_shape", "marginal_adhesion",
              "epithelial_size", "bare_nuclei", "bland_chromatin", "normal_nucleoli", "mitoses"]
    _write("breast", header, X, (y == 4).astype(int), ["numerical"] * 9)


def build_hepatitis(wheel_dir):
    text = _wheel_member(wheel_dir, "imbalanced_databases-*.whl",
                         "imbalanced_databases/data/hepatitis/hepatitis.data.txt")
    rows = [r for r in csv.reader(io.StringIO(text)) if r and "?" not in r]
    header = ["age", "sex", "steroid", "antivirals", "fatigue", "malaise", "anorexia",
              "liver_big", "liver_firm", "spleen_palpable", "spiders", "ascites",
              "varices", "bilirubin", "alk_phosphate", "sgot", "albumin", "protime",
              "histology"]
    numerical = {"age", "bilirubin", "alk_phosphate", "sgot", "albumin", "protime"}
    kinds = ["numerical" if h in numerical else "nominal" for h in header]
    feats = [[v if k == "nominal" else float(v) for v, k in zip(r[1:], kinds)] for r in rows]
    labels = np.array([int(r[0]) == 1 for r in rows]).astype(int)
    _write("hepatitis", header, feats, labels, kinds)


def main(wheel_dir):
    os.makedirs(OUT, exist_ok=True)
    _sk("iris", datasets.load_iris, outlier_class=2, k=11)
    _sk("wine", datasets.load_wine, outlier_class=0, k=10)
    _sk("wdbc", datasets.load_breast_cancer, outlier_class=0, k=39)
    build_ionosphere(wheel_dir)
    build_breast(wheel_dir)
    build_hepatitis(wheel_dir)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "wheels")
