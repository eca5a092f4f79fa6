"""Overhead and throughput experiments.

Sizes are reported against the single-split container with the same lane
count and quantization level; throughput is raw bytes over decode wall time,
averaged over repeated runs.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from . import datasets
from .conventional import PartitionedContainer, conventional_decode, conventional_encode
from .decoder import parallel_decode
from .interleaved import interleaved_encode
from .metadata import read_container, write_container
from .model import histogram, quantize_model
from .splitter import choose_splits

CSV_FIELDS = ["dataset", "mode", "W", "n", "splits", "threads", "encoded_bytes", "overhead_bytes",
              "overhead_pct", "throughput_Bps"]

SWEEP_COUNTS = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 2176]


@dataclass
class BenchRow:
    dataset: str
    mode: str
    W: int
    n: int
    splits: int
    threads: int
    encoded_bytes: int
    overhead_bytes: int
    overhead_pct: float
    throughput_Bps: float = float("nan")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in CSV_FIELDS}


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    raw_sizes: dict[str, int] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            d = row.as_dict()
            d["overhead_pct"] = f"{row.overhead_pct:.4f}"
            d["throughput_Bps"] = "" if np.isnan(row.throughput_Bps) else f"{row.throughput_Bps:.0f}"
            writer.writerow(d)
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        for r in self.rows:
            tp = "" if np.isnan(r.throughput_Bps) else f"  {r.throughput_Bps / 1e6:9.1f} MB/s"
            lines.append(f"{r.dataset:>10} {r.mode:>12} W={r.W:<3} n={r.n:<2} splits={r.splits:<5} "
                         f"threads={r.threads:<2} {r.encoded_bytes:>10} B  {r.overhead_bytes:+9d} B "
                         f"({r.overhead_pct:+.2f}%){tp}")
        if self.timings:
            lines.append("phase timings (s): " + ", ".join(f"{k}={v:.3f}" for k, v in self.timings.items()))
        return "\n".join(lines)


def builtin_dataset(name: str, size: int = 10 * datasets.MB) -> np.ndarray:
    """``exp<lambda>`` (e.g. ``exp100``) or ``text``."""
    if name == "text":
        return datasets.text_like(size)
    if name.startswith("exp"):
        return datasets.exponential_bytes(float(name[3:]), size)
    raise ValueError(f"unknown dataset {name!r}")


def _tick(report: BenchReport, key: str, start: float) -> float:
    now = time.perf_counter()
    report.timings[key] = report.timings.get(key, 0.0) + now - start
    return now


def overhead_sweep(report: BenchReport, name: str, data: np.ndarray, counts=SWEEP_COUNTS, *,
                   lanes: int = 32, n: int = 11) -> None:
    """Encoded size against split / partition count for both modes."""
    t = time.perf_counter()
    model = quantize_model(histogram(data), n)
    encoded = interleaved_encode(data, model, lanes)
    t = _tick(report, "encode", t)
    sizes = {}
    for m in sorted(set(counts) | {1}):
        table = choose_splits(encoded.log, encoded.count, len(encoded.words), lanes, m, encoded.final_states)
        t = _tick(report, "split_placement", t)
        sizes[m] = len(write_container(table, model, encoded.words))
        t = _tick(report, "container_write", t)
    base = sizes[1]
    report.raw_sizes[name] = len(data)
    for m in counts:
        report.rows.append(_row(name, "recoil", lanes, n, m, 0, sizes[m], base))
    for p in counts:
        size = len(conventional_encode(data, model, lanes, p).to_bytes())
        t = _tick(report, "conventional_encode", t)
        report.rows.append(_row(name, "conventional", lanes, n, p, 0, size, base))


def throughput_sweep(report: BenchReport, name: str, data: np.ndarray, threads=(1, 2, 4, 8), *,
                     splits: int = 2176, lanes: int = 32, n: int = 11, runs: int = 10) -> None:
    """Decode throughput of both modes at equal split / partition count."""
    model = quantize_model(histogram(data), n)
    encoded = interleaved_encode(data, model, lanes)
    base = len(write_container(choose_splits(encoded.log, encoded.count, len(encoded.words), lanes, 1,
                                             encoded.final_states), model, encoded.words))
    table = choose_splits(encoded.log, encoded.count, len(encoded.words), lanes, splits, encoded.final_states)
    recoil = read_container(write_container(table, model, encoded.words))
    conv_bytes = conventional_encode(data, model, lanes, splits).to_bytes()
    conv = PartitionedContainer.from_bytes(conv_bytes)
    report.raw_sizes[name] = len(data)
    contenders = [("recoil", lambda k: parallel_decode(recoil, k), len(write_container(table, model, encoded.words))),
                  ("conventional", lambda k: conventional_decode(conv, k), len(conv_bytes))]
    for mode, fn, size in contenders:
        fn(1)  # warm-up, includes kernel compilation on first use
        for k in threads:
            tp = measure_throughput(fn, k, len(data), runs)
            report.rows.append(_row(name, mode, lanes, n, splits, k, size, base, tp))


def measure_throughput(fn, workers: int, raw_bytes: int, runs: int = 10) -> float:
    elapsed = 0.0
    for _ in range(runs):
        start = time.perf_counter()
        fn(workers)
        elapsed += time.perf_counter() - start
    return raw_bytes * runs / elapsed


def _row(name, mode, lanes, n, splits, threads, size, base, throughput=float("nan")) -> BenchRow:
    over = size - base
    return BenchRow(name, mode, lanes, n, splits, threads, size, over, 100.0 * over / base, throughput)


def run_bench(names=("exp10", "exp50", "exp100", "exp200", "exp500", "text"), *, size: int = 10 * datasets.MB,
              counts=SWEEP_COUNTS, threads=(1, 2, 4, 8), lanes: int = 32, n: int = 11, runs: int = 10,
              splits: int = 2176) -> BenchReport:
    report = BenchReport()
    for name in names:
        data = builtin_dataset(name, size)
        overhead_sweep(report, name, data, counts, lanes=lanes, n=n)
        if threads:
            throughput_sweep(report, name, data, threads, splits=splits, lanes=lanes, n=n, runs=runs)
    return report
