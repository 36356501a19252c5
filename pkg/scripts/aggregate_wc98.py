#!/usr/bin/env python3
"""Aggregate World Cup '98 binary request logs into a per-second rate CSV.

The archive stores one fixed-width 20-byte record per HTTP request:

    uint32 timestamp   (seconds, network byte order)
    uint32 clientID
    uint32 objectID
    uint32 size
    uint8  method
    uint8  status
    uint8  type
    uint8  server

Only the timestamp is needed here: the output is ``second,requests`` for
every second between the first and last request seen (zeros included), with
the time axis re-based to 0. Feed the CSV to ``consolidsim derive-demand``
(scale factor and capacity calibration happen there, not here).

Usage:
    python3 scripts/aggregate_wc98.py traces/wc_day3*.gz traces/wc_day4*.gz \
        traces/wc_day5*.gz -o traces/wc98_requests.csv
"""

from __future__ import annotations

import argparse
import gzip
import struct
import sys
from collections import Counter
from pathlib import Path

RECORD = struct.Struct("!IIIIBBBB")


def count_requests(path: Path, counts: Counter) -> int:
    opener = gzip.open if path.suffix == ".gz" else open
    n = 0
    with opener(path, "rb") as fh:
        while True:
            chunk = fh.read(RECORD.size * 65536)
            if not chunk:
                break
            usable = len(chunk) - len(chunk) % RECORD.size
            for (ts, *_rest) in RECORD.iter_unpack(chunk[:usable]):
                counts[ts] += 1
                n += 1
            if usable != len(chunk):
                print(f"warning: {path} ends mid-record", file=sys.stderr)
                break
    return n


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("logs", nargs="+", help="wc_day*.gz binary log files")
    parser.add_argument("-o", "--out", required=True, help="CSV to write")
    args = parser.parse_args()

    counts: Counter = Counter()
    total = 0
    for name in args.logs:
        path = Path(name)
        if not path.is_file():
            print(f"error: {path} not found", file=sys.stderr)
            return 2
        total += count_requests(path, counts)
        print(f"{path.name}: running total {total} requests")

    if not counts:
        print("error: no records parsed", file=sys.stderr)
        return 2

    first, last = min(counts), max(counts)
    with Path(args.out).open("w") as out:
        out.write("timestamp_seconds,requests_per_second\n")
        for ts in range(first, last + 1):
            out.write(f"{ts - first},{counts.get(ts, 0)}\n")
    span_days = (last - first + 1) / 86400
    print(f"wrote {args.out}: {last - first + 1} seconds ({span_days:.2f} days), "
          f"{total} requests, peak {max(counts.values())}/s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
