"""Mixed nominal/numerical tables: loading, min-max scaling and outlier injection."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

NOMINAL = "nominal"
NUMERICAL = "numerical"
KINDS = (NOMINAL, NUMERICAL)
SIDECAR_ROLES = (NOMINAL, NUMERICAL, "label", "ignore")
MISSING_TOKENS = {"", "?", "na", "nan", "null", "none"}
OUTLIER_TOKENS = {"1", "outlier", "true", "yes", "o", "anomaly"}
INLIER_TOKENS = {"0", "inlier", "false", "no", "n", "normal"}


class DataError(ValueError):
    """Raised for malformed input tables or schemas."""


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: str = NUMERICAL
    role: str = "feature"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in ("feature", "label", "ignore"):
            raise DataError(f"column {self.name!r}: unknown role {self.role!r}")


@dataclass(frozen=True, eq=False)
class MixedDataset:
    """Samples x feature attributes.

    ``values`` is a float matrix; nominal columns hold interned category codes
    (indices into ``categories[j]``). ``labels`` is 1 for outliers, 0 for inliers.
    """

    schema: tuple[AttributeSchema, ...]
    values: np.ndarray
    labels: np.ndarray | None = None
    categories: Mapping[int, tuple[str, ...]] = field(default_factory=dict)
    normalized: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise DataError("values must be a 2-d array")
        if v.shape[0] < 1:
            raise DataError("no samples")
        if v.shape[1] != len(self.schema) or not self.schema:
            raise DataError("schema arity does not match values")
        if not np.all(np.isfinite(v)):
            raise DataError("non-finite value in dataset")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=int)
            if lab.shape != (v.shape[0],):
                raise DataError("labels length does not match sample count")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def nominal_mask(self) -> np.ndarray:
        return np.array([a.kind == NOMINAL for a in self.schema])

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.schema]

    def subset(self, idx) -> "MixedDataset":
        idx = np.asarray(idx)
        labels = None if self.labels is None else self.labels[idx]
        return replace(self, values=self.values[idx], labels=labels)


def read_schema(path) -> dict[str, str]:
    """Parse a sidecar file of ``column: role`` lines ('#' starts a comment)."""
    if not os.path.exists(path):
        raise DataError(f"schema file not found: {path}")
    roles = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sep = ":" if ":" in line else ("=" if "=" in line else ",")
            if sep not in line:
                raise DataError(f"{path}:{lineno}: expected 'column: role'")
            name, role = (s.strip() for s in line.split(sep, 1))
            role = role.lower()
            if role not in SIDECAR_ROLES:
                raise DataError(f"{path}:{lineno}: unknown role {role!r} for column {name!r}")
            if name in roles:
                raise DataError(f"{path}:{lineno}: column {name!r} listed twice")
            roles[name] = role
    return roles


def _resolve_schema(header, schema) -> list[AttributeSchema]:
    if schema is None:
        roles = {}
    elif isinstance(schema, (str, os.PathLike)):
        roles = read_schema(schema)
    elif isinstance(schema, Mapping):
        roles = {k: v.lower() for k, v in schema.items()}
    else:
        by_name = {a.name: a for a in schema}
        if "label" in header and "label" not in by_name:
            by_name["label"] = AttributeSchema("label", NOMINAL, "label")
        unknown = set(by_name) - set(header)
        if unknown:
            raise DataError(f"schema names columns absent from header: {sorted(unknown)}")
        return [by_name.get(h, AttributeSchema(h)) for h in header]

    unknown = set(roles) - set(header)
    if unknown:
        raise DataError(f"schema names columns absent from header: {sorted(unknown)}")
    out = []
    for h in header:
        # a column literally called "label" is the label unless the schema says otherwise
        role = roles.get(h, "label" if h == "label" else NUMERICAL)
        if role in KINDS:
            out.append(AttributeSchema(h, role, "feature"))
        else:
            out.append(AttributeSchema(h, NOMINAL, role))
    return out


def _parse_label(token, row, col):
    t = token.strip().lower()
    if t in OUTLIER_TOKENS:
        return 1
    if t in INLIER_TOKENS:
        return 0
    raise DataError(f"row {row}, column {col}: unrecognised label {token!r}")


def load_dataset(path, schema=None) -> MixedDataset:
    """Read a comma-separated file with a header row.

    ``schema`` may be a sidecar path, a ``{column: role}`` mapping, or a list of
    :class:`AttributeSchema`. Columns not mentioned default to numerical features,
    except one named ``label``.
    Rows and columns in error messages are 1-based file positions.
    """
    if not os.path.exists(path):
        raise DataError(f"input file not found: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        return _parse_table(fh.read(), schema, source=str(path))


def parse_dataset(text: str, schema=None) -> MixedDataset:
    return _parse_table(text, schema, source="<string>")


def _parse_table(text, schema, source):
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{source}: empty file") from None
    if len(set(header)) != len(header):
        raise DataError(f"{source}: duplicate column names in header")
    attrs = _resolve_schema(header, schema)
    label_cols = [j for j, a in enumerate(attrs) if a.role == "label"]
    if len(label_cols) > 1:
        names = [header[j] for j in label_cols]
        raise DataError(f"{source}: duplicate label columns {names} (columns {[j + 1 for j in label_cols]})")
    feat_cols = [j for j, a in enumerate(attrs) if a.role == "feature"]
    if not feat_cols:
        raise DataError(f"{source}: schema leaves no feature columns")

    interned: dict[int, dict[str, int]] = {j: {} for j in feat_cols if attrs[j].kind == NOMINAL}
    rows, labels = [], []
    for lineno, cells in enumerate(reader, 2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise DataError(
                f"{source}: row {lineno} has {len(cells)} cells, expected {len(header)}")
        vals = []
        for j in feat_cols:
            cell = cells[j].strip()
            if cell.lower() in MISSING_TOKENS:
                raise DataError(f"{source}: row {lineno}, column {j + 1} ({header[j]}): missing value")
            if attrs[j].kind == NOMINAL:
                codes = interned[j]
                vals.append(codes.setdefault(cell, len(codes)))
            else:
                try:
                    x = float(cell)
                except ValueError:
                    raise DataError(
                        f"{source}: row {lineno}, column {j + 1} ({header[j]}): "
                        f"cannot parse {cell!r} as a number") from None
                if not math.isfinite(x):
                    raise DataError(f"{source}: row {lineno}, column {j + 1} ({header[j]}): non-finite value")
                vals.append(x)
        rows.append(vals)
        if label_cols:
            labels.append(_parse_label(cells[label_cols[0]], lineno, label_cols[0] + 1))
    if not rows:
        raise DataError(f"{source}: no samples")

    feats = tuple(attrs[j] for j in feat_cols)
    categories = {k: tuple(interned[j]) for k, j in enumerate(feat_cols) if j in interned}
    return MixedDataset(
        schema=feats,
        values=np.array(rows, dtype=float),
        labels=np.array(labels) if label_cols else None,
        categories=categories,
    )


def normalize(ds: MixedDataset) -> MixedDataset:
    """Min-max scale numerical columns to [0, 1]; constant columns become 0."""
    if ds.normalized:
        return ds
    v = np.array(ds.values)
    num = ~ds.nominal_mask
    if num.any():
        cols = v[:, num]
        lo = cols.min(axis=0)
        span = cols.max(axis=0) - lo
        safe = np.where(span > 0, span, 1.0)
        v[:, num] = np.where(span > 0, (cols - lo) / safe, 0.0)
    return replace(ds, values=v, normalized=True)


def inlier_pool(ds: MixedDataset) -> MixedDataset:
    """Rows labelled inlier (all rows if unlabelled)."""
    if ds.labels is None:
        return ds
    return ds.subset(np.flatnonzero(ds.labels == 0))


@dataclass(frozen=True)
class InjectionSpec:
    kind: str
    ratio: float
    seed: int = 0
    scale_alpha: float = 5.0

    def __post_init__(self):
        if self.kind not in ("local", "global", "group"):
            raise DataError(f"unknown injection kind {self.kind!r}")
        if not 0.0 < self.ratio < 1.0:
            raise DataError(f"ratio must lie in (0, 1), got {self.ratio}")
        if self.scale_alpha <= 0:
            raise DataError("scale_alpha must be positive")
        if self.seed < 0:
            raise DataError("seed must be non-negative")


def injection_count(n: int, ratio: float) -> int:
    # ratio*n is computed in floating point; shave off representation noise before ceil
    return int(math.ceil(ratio * n - 1e-9))


def inject_outliers(ds: MixedDataset, spec: InjectionSpec) -> MixedDataset:
    """Append ``ceil(ratio * n)`` synthetic outliers to a normalized numerical dataset.

    local:  draws from N(mean, alpha^2 * diag(var)) of the inliers
    global: uniform over the inlier bounding box widened by 10% per side, rejecting
            points that fall inside the original box
    group:  tight Gaussian cluster (variance / alpha^2) centred alpha pooled standard
            deviations away from the inlier mean along a random unit direction
    """
    if not ds.normalized:
        raise DataError("inject_outliers expects a normalized dataset")
    if ds.nominal_mask.any():
        bad = [a.name for a in ds.schema if a.kind == NOMINAL]
        raise DataError(f"injection supports numerical features only; nominal: {bad}")
    if ds.labels is not None and ds.labels.any():
        raise DataError("dataset already contains labelled outliers; pass inlier_pool(ds)")

    X = ds.values
    n, m = X.shape
    k = injection_count(n, spec.ratio)
    if k < 1:
        raise DataError("ratio * n rounds to zero injected rows")
    rng = np.random.default_rng(spec.seed)
    mean = X.mean(axis=0)
    var = X.var(axis=0)
    a = spec.scale_alpha

    if spec.kind == "local":
        new = rng.normal(mean, a * np.sqrt(var), size=(k, m))
    elif spec.kind == "global":
        lo, hi = X.min(axis=0), X.max(axis=0)
        pad = 0.1 * (hi - lo)
        out = []
        while len(out) < k:
            cand = rng.uniform(lo - pad, hi + pad, size=(k, m))
            inside = np.all((cand >= lo) & (cand <= hi), axis=1)
            out.extend(cand[~inside])
        new = np.array(out[:k])
    else:
        pooled = math.sqrt(float(var.mean()))
        direction = rng.normal(size=m)
        direction /= np.linalg.norm(direction)
        centre = mean + a * pooled * direction
        new = rng.normal(centre, np.sqrt(var) / a, size=(k, m))

    values = np.vstack([X, new])
    labels = np.concatenate([np.zeros(n, dtype=int), np.ones(k, dtype=int)])
    return replace(ds, values=values, labels=labels)


def to_csv(ds: MixedDataset, label_column: str = "label") -> str:
    """Serialise with a header; nominal codes are written back as category strings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ds.names + ([label_column] if ds.labels is not None else [])
    w.writerow(header)
    for i, row in enumerate(ds.values):
        cells = []
        for j, x in enumerate(row):
            if j in ds.categories:
                cells.append(ds.categories[j][int(x)])
            else:
                cells.append(repr(float(x)))
        if ds.labels is not None:
            cells.append(str(int(ds.labels[i])))
        w.writerow(cells)
    return buf.getvalue()


def write_csv(ds: MixedDataset, path, label_column: str = "label") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(ds, label_column))


def from_arrays(X, kinds: Sequence[str] | None = None, labels=None,
                names: Sequence[str] | None = None) -> MixedDataset:
    """Build a dataset from a numeric matrix (nominal columns given as integer codes)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    m = X.shape[1]
    kinds = list(kinds) if kinds is not None else [NUMERICAL] * m
    names = list(names) if names is not None else [f"x{j}" for j in range(m)]
    schema = tuple(AttributeSchema(nm, kd) for nm, kd in zip(names, kinds))
    categories = {}
    for j, kd in enumerate(kinds):
        if kd == NOMINAL:
            codes = X[:, j]
            if np.any(codes != np.round(codes)) or np.any(codes < 0):
                raise DataError(f"nominal column {j} must hold non-negative integer codes")
            categories[j] = tuple(str(c) for c in range(int(codes.max()) + 1))
    return MixedDataset(schema=schema, values=X, labels=labels, categories=categories)
