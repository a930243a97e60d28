#!/usr/bin/env python3
# Copyright 2026 The vaeprobe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds a 10k-digit MNIST subset as standard IDX files.

The original MNIST mirrors are not always reachable, but the npm `mnist`
package ships 10,000 real MNIST digits. They are shuffled with a fixed seed
and split 8,000 / 2,000 into train / test IDX files:

  <out>/train-images-idx3-ubyte  <out>/train-labels-idx1-ubyte
  <out>/test-images-idx3-ubyte   <out>/test-labels-idx1-ubyte

If the full MNIST IDX files are available, point the configs at them
instead; nothing downstream depends on this subset.
"""

import argparse
import json
import pathlib
import struct
import subprocess
import sys
import tarfile
import tempfile

import numpy as np

TRAIN_SIZE = 8000


def fetch_npm_digits(workdir):
    subprocess.run(["npm", "pack", "mnist@1.1.0"], cwd=workdir, check=True,
                   stdout=subprocess.DEVNULL)
    tgz = next(pathlib.Path(workdir).glob("mnist-*.tgz"))
    images, labels = [], []
    with tarfile.open(tgz) as tar:
        for digit in range(10):
            member = tar.extractfile(f"package/src/digits/{digit}.json")
            flat = np.asarray(json.load(member)["data"], dtype=np.float64)
            rows = flat.reshape(-1, 784)
            images.append(np.rint(rows * 255.0).astype(np.uint8))
            labels.append(np.full(len(rows), digit, dtype=np.uint8))
    return np.vstack(images), np.concatenate(labels)


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        f.write(images.tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.tobytes())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data/mnist")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        images, labels = fetch_npm_digits(tmp)

    keys = {row.tobytes() for row in images}
    if len(keys) != len(images):
        sys.exit("duplicate digits in source package")

    order = np.random.default_rng(args.seed).permutation(len(images))
    images, labels = images[order], labels[order]
    write_idx_images(out / "train-images-idx3-ubyte", images[:TRAIN_SIZE])
    write_idx_labels(out / "train-labels-idx1-ubyte", labels[:TRAIN_SIZE])
    write_idx_images(out / "test-images-idx3-ubyte", images[TRAIN_SIZE:])
    write_idx_labels(out / "test-labels-idx1-ubyte", labels[TRAIN_SIZE:])
    print(f"wrote {TRAIN_SIZE} train / {len(images) - TRAIN_SIZE} test digits to {out}")


if __name__ == "__main__":
    main()
