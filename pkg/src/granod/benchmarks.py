"""Bundled UCI-derived outlier benchmarks and their published settings."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .dataset import MixedDataset, load_dataset


@dataclass(frozen=True)
class Benchmark:
    name: str
    file: str
    contamination: float
    lam: float
    delta: float
    reported_auroc: float


# contamination, lambda, delta and AUROC as published for the full method
BENCHMARKS = {
    "iris": Benchmark("Iris", "iris", 0.0991, 10.0, 0.1, 1.0000),
    "ionosphere": Benchmark("Iono", "ionosphere", 0.0963, 10.0, 0.1, 1.0000),
    "wine": Benchmark("Wine", "wine", 0.0775, 10.0, 0.1, 0.9992),
    "breast": Benchmark("Breast", "breast", 0.3499, 10.0, 0.1, 0.9960),
    "wdbc": Benchmark("WDBC", "wdbc", 0.0985, 10.0, 0.4, 0.9971),
    "hepatitis": Benchmark("Hepat", "hepatitis", 0.1625, 10.0, 1.3, 0.8553),
}


def data_path(filename: str):
    return resources.files("granod") / "data" / filename


def load_benchmark(key: str) -> MixedDataset:
    b = BENCHMARKS[key]
    with resources.as_file(data_path(f"{b.file}.csv")) as csv_path, \
            resources.as_file(data_path(f"{b.file}.schema")) as schema_path:
        return load_dataset(csv_path, schema_path)
