#!/usr/bin/env python3
"""Fetch the public workload traces used by the full-scale experiment.

The traces are not vendored (size and licensing); this script downloads
them into ./traces and records sha256 digests in traces/CHECKSUMS.sha256
on first fetch. Later fetches verify against the recorded digests, so a
changed upstream file is flagged instead of silently swapped in.

Sources:
  * SDSC Blue Horizon batch log (SWF), parallel workloads archive:
      https://www.cs.huji.ac.il/labs/parallel/workload/l_sdsc_blue/
  * World Cup '98 request logs (binary, one file per day), internet
    traffic archive:
      ftp://ita.ee.lbl.gov/traces/WorldCup/
    The experiment uses the two weeks starting June 7 1998, which are
    day files 39 through 52. After downloading, run
    scripts/aggregate_wc98.py to produce the per-second request CSV.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import urllib.request
from pathlib import Path

SDSC_URL = ("https://www.cs.huji.ac.il/labs/parallel/workload/"
            "l_sdsc_blue/SDSC-BLUE-2000-4.2-cln.swf.gz")
# June 7 1998 is day 39 of the World Cup collection; two weeks follow.
WC98_DAYS = range(39, 53)
WC98_URL = "ftp://ita.ee.lbl.gov/traces/WorldCup/wc_day{day}_{part}.gz"
WC98_PARTS_PER_DAY = 12  # the archive splits busy days; missing parts are fine


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_checksums(path: Path) -> dict[str, str]:
    if not path.is_file():
        return {}
    out = {}
    for line in path.read_text().splitlines():
        if line.strip():
            digest, name = line.split(None, 1)
            out[name.strip()] = digest
    return out


def save_checksums(path: Path, checksums: dict[str, str]) -> None:
    lines = [f"{digest}  {name}" for name, digest in sorted(checksums.items())]
    path.write_text("\n".join(lines) + "\n")


def fetch(url: str, dest: Path, checksums: dict[str, str], required: bool) -> bool:
    name = dest.name
    if dest.is_file():
        digest = sha256_of(dest)
        if name in checksums and checksums[name] != digest:
            print(f"!! {name}: checksum mismatch with the recorded digest", file=sys.stderr)
            return False
        checksums.setdefault(name, digest)
        print(f"ok {name} (already present)")
        return True
    try:
        print(f".. {name} <- {url}")
        with urllib.request.urlopen(url, timeout=120) as resp, dest.open("wb") as out:
            while chunk := resp.read(1 << 20):
                out.write(chunk)
    except OSError as exc:
        if dest.exists():
            dest.unlink()
        level = "!!" if required else "--"
        print(f"{level} {name}: {exc}", file=sys.stderr)
        return not required
    digest = sha256_of(dest)
    if name in checksums and checksums[name] != digest:
        print(f"!! {name}: downloaded digest differs from the recorded one", file=sys.stderr)
        return False
    checksums.setdefault(name, digest)
    print(f"ok {name} sha256={digest[:16]}...")
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default="traces", help="download directory (default ./traces)")
    parser.add_argument("--skip-wc98", action="store_true",
                        help="fetch only the SDSC Blue Horizon log")
    args = parser.parse_args()

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    checksum_file = dest / "CHECKSUMS.sha256"
    checksums = load_checksums(checksum_file)

    ok = fetch(SDSC_URL, dest / Path(SDSC_URL).name, checksums, required=True)
    if not args.skip_wc98:
        for day in WC98_DAYS:
            for part in range(1, WC98_PARTS_PER_DAY + 1):
                url = WC98_URL.format(day=day, part=part)
                # parts beyond the real count 404; treat those as optional
                fetch(url, dest / Path(url).name, checksums, required=False)

    save_checksums(checksum_file, checksums)
    print(f"digests recorded in {checksum_file}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
