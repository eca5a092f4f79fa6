"""Command line: encode, decode, combine, inspect, bench."""

from __future__ import annotations

import argparse
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np

from . import bench
from .conventional import MAGIC as CONVENTIONAL_MAGIC
from .conventional import PartitionedContainer
from .estimator import ConventionalCodec, RecoilCodec, combine, decode
from .exceptions import RecoilError
from .metadata import HEADER, MAGIC, read_container, section_sizes
from .validation import check_symbols

EXIT_USAGE = 2
EXIT_IO = 3


def _read(path: str) -> bytes:
    return sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()


def _write(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(path).write_bytes(data)


def _say(args, msg: str) -> None:
    # keep stdout clean when it carries the payload
    print(msg, file=sys.stderr if args.output == "-" else sys.stdout)


def cmd_encode(args) -> int:
    raw = _read(args.input)
    symbols = check_symbols(raw, args.symbol_width)
    common = dict(lanes=args.lanes, quant_bits=args.quant_bits, symbol_width=args.symbol_width)
    if args.mode == "recoil":
        codec = RecoilCodec(splits=args.splits, **common)
    else:
        codec = ConventionalCodec(partitions=args.splits, **common)
    t0 = time.perf_counter()
    blob = codec.fit(symbols).transform(symbols)
    elapsed = time.perf_counter() - t0
    _write(args.output, blob)
    _say(args, f"{len(raw)} -> {len(blob)} bytes ({args.mode}, {elapsed:.3f} s)")
    if args.mode == "recoil":
        for name, size in section_sizes(blob).items():
            _say(args, f"  {name:<14}{size:>12}")
    return 0


def cmd_decode(args) -> int:
    blob = _read(args.input)
    t0 = time.perf_counter()
    out = decode(blob, threads=args.threads)
    elapsed = max(time.perf_counter() - t0, 1e-9)
    _write(args.output, out.astype(out.dtype.newbyteorder("<"), copy=False).tobytes())
    _say(args, f"decoded {out.nbytes} bytes in {elapsed:.3f} s ({out.nbytes / elapsed / 1e6:.1f} MB/s, "
               f"threads={args.threads})")
    return 0


def cmd_combine(args) -> int:
    blob = _read(args.input)
    result = combine(blob, args.splits)
    _write(args.output, result)
    _say(args, f"saved {len(blob) - len(result)} bytes ({len(blob)} -> {len(result)})")
    return 0


def cmd_inspect(args) -> int:
    blob = _read(args.input)
    if blob[:4] == CONVENTIONAL_MAGIC:
        c = PartitionedContainer.from_bytes(blob)
        print(f"conventional container: {c.parts} partitions, lanes={c.lanes}, n={c.model.n}, "
              f"symbols={c.count}, symbol_width={c.symbol_width}, words={len(c.words)}")
        return 0
    container = read_container(blob)
    table = container.table
    _, version, sw, n, lanes, splits, count, n_words = HEADER.unpack_from(blob, 0)
    print(f"magic={MAGIC.decode()} version={version} symbol_width={sw} n={n} lanes={lanes} "
          f"splits={splits} symbols={count} words={n_words}")
    print("sections (bytes):")
    for name, size in section_sizes(blob).items():
        print(f"  {name:<14}{size:>12}")
    sizes = np.array([hi - lo + 1 for lo, hi in table.committed_ranges()])
    if count:
        print(f"committed range size: min={sizes.min()} avg={sizes.mean():.1f} max={sizes.max()}")
    syncs = [p.sync_length for p in table.points]
    if syncs:
        print("sync section length histogram:")
        buckets = Counter(1 << (s - 1).bit_length() for s in syncs)
        for top in sorted(buckets):
            print(f"  <= {top:<8}{buckets[top]:>8}")
    return 0


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def cmd_bench(args) -> int:
    report = bench.run_bench(args.datasets.split(","), size=args.size, counts=_int_list(args.counts),
                             threads=_int_list(args.threads), lanes=args.lanes, n=args.quant_bits,
                             runs=args.runs, splits=args.splits)
    print(report.to_text())
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recoil", description="Parallel-decodable interleaved rANS codec")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="compress a file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mode", choices=("recoil", "conventional"), default="recoil")
    p.add_argument("--lanes", type=int, default=32)
    p.add_argument("--quant-bits", type=int, default=11)
    p.add_argument("--splits", type=int, default=1, help="split count (partition count in conventional mode)")
    p.add_argument("--symbol-width", type=int, choices=(8, 16), default=8)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decompress either container kind")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("combine", help="reduce the split count without re-encoding")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--splits", type=int, required=True)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("inspect", help="describe a container")
    p.add_argument("input")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("bench", help="overhead and throughput sweeps on synthetic data")
    p.add_argument("--datasets", default="exp10,exp50,exp100,exp200,exp500,text")
    p.add_argument("--size", type=int, default=10 * (1 << 20))
    p.add_argument("--counts", default=",".join(map(str, bench.SWEEP_COUNTS)))
    p.add_argument("--threads", default="1,2,4,8")
    p.add_argument("--splits", type=int, default=2176, help="split count for the throughput sweep")
    p.add_argument("--lanes", type=int, default=32)
    p.add_argument("--quant-bits", type=int, default=11)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RecoilError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
