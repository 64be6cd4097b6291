#!/usr/bin/env python3
"""Build a small MNIST subset in IDX format.

The 5000-sample MNIST excerpt shipped inside the mlxtend wheel is used as the
source, so no network access beyond a package index is needed. Samples are
taken in file order, `--per-class` of each digit in `--digits`.

    python3 tools/make_mnist_subset.py --out data/mnist04
"""
import argparse
import glob
import gzip
import os
import struct
import subprocess
import tempfile
import zipfile


def source_rows(wheel):
    with zipfile.ZipFile(wheel) as z:
        raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz"))
    for line in raw.decode().strip().split("\n"):
        values = [int(float(v)) for v in line.split(",")]
        yield values[:-1], values[-1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--digits", default="0,1,2,3,4")
    ap.add_argument("--per-class", type=int, default=200)
    ap.add_argument("--wheel", help="path to an mlxtend wheel (downloaded if absent)")
    args = ap.parse_args()

    wheel = args.wheel
    if wheel is None:
        tmp = tempfile.mkdtemp()
        subprocess.check_call(["pip", "download", "mlxtend", "--no-deps", "-q", "-d", tmp])
        wheel = glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]

    digits = [int(d) for d in args.digits.split(",")]
    taken = {d: 0 for d in digits}
    images, labels = [], []
    for pixels, label in source_rows(wheel):
        if label in taken and taken[label] < args.per_class:
            taken[label] += 1
            images.append(bytes(pixels))
            labels.append(label)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "images.idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(images), 28, 28))
        for img in images:
            f.write(img)
    with open(os.path.join(args.out, "labels.idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(bytes(labels))
    print(f"wrote {len(images)} samples: {taken}")


if __name__ == "__main__":
    main()
