#!/usr/bin/env python3
"""Rebuild data/mnist/*.gz from the `mnist` npm package (cazala/mnist 1.1.0).

The package stores each digit class as a flat JSON array of intensities
rounded to three decimals (p / 255). Three decimals are enough to recover
the original byte exactly, so the IDX files written here hold the original
MNIST pixel values. Classes are interleaved round-robin.

usage: npm pack mnist && tar xzf mnist-1.1.0.tgz
       python3 scripts/mnist_from_npm.py package/src/digits data/mnist
"""
import gzip
import json
import struct
import sys
from pathlib import Path

SIZE = 28 * 28


def main(src: Path, dst: Path) -> None:
    per_digit = []
    for d in range(10):
        raw = json.loads((src / f"{d}.json").read_text())["data"]
        assert len(raw) % SIZE == 0
        pixels = bytes(round(v * 255) for v in raw)
        per_digit.append([pixels[i:i + SIZE] for i in range(0, len(pixels), SIZE)])

    images, labels = [], []
    depth = max(len(p) for p in per_digit)
    for i in range(depth):
        for d in range(10):
            if i < len(per_digit[d]):
                images.append(per_digit[d][i])
                labels.append(d)

    dst.mkdir(parents=True, exist_ok=True)
    n = len(images)
    with gzip.GzipFile(dst / "images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        for img in images:
            f.write(img)
    with gzip.GzipFile(dst / "labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes(labels))
    print(f"wrote {n} images")


if __name__ == "__main__":
    main(Path(sys.argv[1]), Path(sys.argv[2]))
