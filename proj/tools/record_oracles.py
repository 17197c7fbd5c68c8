# Copyright 2026 The urbanscene Authors
# SPDX-License-Identifier: Apache-2.0

"""Records external reference values that the tests compare against.

  geodesic  Random pairs under 10 km with geographiclib solutions on the
            6,371 km sphere and on WGS84, written as CSV.
  tokens    Token counts of a scene description under tiktoken encodings.

Needs `pip install geographiclib tiktoken`.
"""

import argparse
import csv
import hashlib
import os
import random
import shutil
import sys
import tempfile

R = 6371000.0


def geodesic(args):
    from geographiclib.geodesic import Geodesic

    sphere = Geodesic(R, 0.0)
    wgs84 = Geodesic.WGS84
    rng = random.Random(args.seed)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["lon1", "lat1", "lon2", "lat2", "sphere_m", "sphere_deg", "wgs84_m", "wgs84_deg"])
        for _ in range(args.count):
            lat = rng.uniform(-80.0, 80.0)
            lon = rng.uniform(-180.0, 180.0)
            g = sphere.Direct(lat, lon, rng.uniform(0.0, 360.0), rng.uniform(1.0, 9999.0))
            lat2 = round(g["lat2"], 9)
            lon2 = round((g["lon2"] + 540.0) % 360.0 - 180.0, 9)
            lat, lon = round(lat, 9), round(lon, 9)
            s = sphere.Inverse(lat, lon, lat2, lon2)
            e = wgs84.Inverse(lat, lon, lat2, lon2)
            w.writerow([f"{lon:.9f}", f"{lat:.9f}", f"{lon2:.9f}", f"{lat2:.9f}",
                        f"{s['s12']:.6f}", f"{s['azi1'] % 360.0:.9f}",
                        f"{e['s12']:.6f}", f"{e['azi1'] % 360.0:.9f}"])


RANK_URLS = {
    "o200k_base": "https://openaipublic.blob.core.windows.net/encodings/o200k_base.tiktoken",
    "cl100k_base": "https://openaipublic.blob.core.windows.net/encodings/cl100k_base.tiktoken",
    "r50k_base": "https://openaipublic.blob.core.windows.net/encodings/r50k_base.tiktoken",
}


def seed_cache(ranks):
    """Places local rank files where tiktoken looks before downloading."""
    if not ranks:
        return
    cache = tempfile.mkdtemp(prefix="tiktoken-")
    for item in ranks:
        name, path = item.split("=", 1)
        key = hashlib.sha1(RANK_URLS[name].encode()).hexdigest()
        shutil.copyfile(path, os.path.join(cache, key))
    os.environ["TIKTOKEN_CACHE_DIR"] = cache


def tokens(args):
    seed_cache(args.ranks)
    import tiktoken

    data = open(args.ssd, "rb").read()
    text = data.decode("utf-8")
    print(f"sha256 {hashlib.sha256(data).hexdigest()}")
    print(f"bytes {len(data)}")
    for name in args.encodings:
        enc = tiktoken.get_encoding(name)
        print(f"{name} {len(enc.encode(text, disallowed_special=()))}")


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="cmd", required=True)
    g = sub.add_parser("geodesic")
    g.add_argument("--out", required=True)
    g.add_argument("--count", type=int, default=1000)
    g.add_argument("--seed", type=int, default=20260101)
    g.set_defaults(fn=geodesic)
    t = sub.add_parser("tokens")
    t.add_argument("ssd")
    t.add_argument("--encodings", nargs="+", default=["o200k_base", "cl100k_base", "r50k_base"])
    t.add_argument("--ranks", nargs="*", default=[], metavar="NAME=PATH",
                   help="local rank file for an encoding, for offline use")
    t.set_defaults(fn=tokens)
    args = p.parse_args()
    args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
