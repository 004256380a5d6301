"""Build the desk-scale benchmark collection in this directory.

Real datasets are converted from the copies bundled in the sktime 1.2.0
and tslearn 0.9.0 wheels. The *Gen datasets are regenerated from the
published generator descriptions with a fixed seed; they are not the
archive files themselves.

usage: python3 prepare.py SKTIME_WHEEL TSLEARN_WHEEL
"""
import io
import sys
import zipfile
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent


def write(name, split, X, y):
    lines = []
    for label, row in zip(y, X):
        lines.append(",".join([str(label)] + [repr(float(v)) for v in row]))
    (OUT / f"{name}_{split}.txt").write_text("\n".join(lines) + "\n")


def parse_ts(text):
    X, y = [], []
    data = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("%"):
            continue
        if line.lower() == "@data":
            data = True
            continue
        if not data:
            continue
        body, label = line.rsplit(":", 1)
        X.append([float(v) for v in body.split(",")])
        y.append(label)
    return np.array(X), y


def from_sktime(wheel):
    z = zipfile.ZipFile(wheel)
    for src, dst in [("ArrowHead", "ArrowHead"), ("GunPoint", "GunPoint"), ("UnitTest", "ChinatownCut")]:
        for split in ["TRAIN", "TEST"]:
            text = z.read(f"sktime/datasets/data/{src}/{src}_{split}.ts").decode()
            X, y = parse_ts(text)
            write(dst, split, X, y)


def from_tslearn(wheel):
    z = zipfile.ZipFile(wheel)
    d = np.load(io.BytesIO(z.read("tslearn/.cached_datasets/Trace.npz")))
    write("Trace", "TRAIN", d["X_train"][:, :, 0], d["y_train"])
    write("Trace", "TEST", d["X_test"][:, :, 0], d["y_test"])


def znorm(X):
    X = np.asarray(X, dtype=float)
    mu = X.mean(axis=1, keepdims=True)
    sd = X.std(axis=1, keepdims=True)
    sd[sd == 0] = 1.0
    return (X - mu) / sd


def cbf(rng, n):
    m = 128
    t = np.arange(1, m + 1)
    X, y = [], []
    for i in range(n):
        c = i % 3 + 1
        a = rng.integers(16, 33)
        b = a + rng.integers(32, 97)
        eta = rng.normal()
        chi = ((t >= a) & (t <= b)).astype(float)
        if c == 1:
            shape = chi
        elif c == 2:
            shape = chi * (t - a) / (b - a)
        else:
            shape = chi * (b - t) / (b - a)
        X.append((6 + eta) * shape + rng.normal(size=m))
        y.append(c)
    return znorm(X), y


def synthetic_control(rng, n):
    m = 60
    t = np.arange(1, m + 1)
    X, y = [], []
    for i in range(n):
        c = i % 6 + 1
        base = 30 + 2 * rng.uniform(-3, 3, size=m)
        if c == 2:
            base += rng.uniform(10, 15) * np.sin(2 * np.pi * t / rng.uniform(10, 15))
        elif c in (3, 4):
            g = rng.uniform(0.2, 0.5)
            base += g * t if c == 3 else -g * t
        elif c in (5, 6):
            t3 = rng.integers(20, 41)
            x = rng.uniform(7.5, 20)
            base += (x if c == 5 else -x) * (t >= t3)
        X.append(base)
        y.append(c)
    return np.array(X), y


def two_patterns(rng, n):
    m = 128
    X, y = [], []
    for i in range(n):
        c = i % 4 + 1
        up = [c in (1, 2), c in (1, 3)]
        x = rng.normal(size=m)
        l1, l2 = rng.integers(16, 33, size=2)
        s1 = rng.integers(0, m // 2 - l1)
        s2 = rng.integers(m // 2, m - l2)
        for start, length, u in [(s1, l1, up[0]), (s2, l2, up[1])]:
            half = length // 2
            pattern = np.r_[-5 * np.ones(half), 5 * np.ones(length - half)]
            x[start:start + length] = pattern if u else -pattern
        X.append(x)
        y.append(c)
    return np.array(X), y


def bell(m, centre, width, height):
    t = np.arange(m)
    return height * np.exp(-0.5 * ((t - centre) / width) ** 2)


def bme(rng, n):
    m = 128
    X, y = [], []
    for i in range(n):
        c = i % 3 + 1
        x = rng.normal(scale=0.3, size=m)
        x[44:84] += 1.0
        if c == 1:
            x += bell(m, rng.uniform(8, 30), rng.uniform(3, 6), 1.5)
        elif c == 3:
            x += bell(m, rng.uniform(98, 120), rng.uniform(3, 6), 1.5)
        X.append(x)
        y.append(c)
    return znorm(X), y


def umd(rng, n):
    m = 150
    X, y = [], []
    for i in range(n):
        c = i % 3 + 1
        x = rng.normal(scale=0.3, size=m)
        centre = rng.uniform(30, 120)
        if c == 1:
            x += bell(m, centre, rng.uniform(4, 8), 2.0)
        elif c == 3:
            x -= bell(m, centre, rng.uniform(4, 8), 2.0)
        X.append(x)
        y.append(c)
    return znorm(X), y


def smooth_subspace(rng, n):
    m = 15
    X, y = [], []
    for i in range(n):
        c = i % 3 + 1
        x = rng.uniform(-1, 1, size=m)
        seg = slice((c - 1) * 5, c * 5)
        x[seg] = rng.uniform(-1, 1) + rng.normal(scale=0.05, size=5)
        X.append(x)
        y.append(c)
    return np.array(X), y


GENERATED = [
    ("CBFGen", cbf, 30, 300),
    ("SyntheticControlGen", synthetic_control, 300, 300),
    ("TwoPatternsGen", two_patterns, 100, 400),
    ("BMEGen", bme, 30, 150),
    ("UMDGen", umd, 36, 144),
    ("SmoothSubspaceGen", smooth_subspace, 150, 150),
]


def generate():
    for k, (name, fn, n_train, n_test) in enumerate(GENERATED):
        rng = np.random.default_rng(20190000 + k)
        X, y = fn(rng, n_train + n_test)
        order = rng.permutation(n_train + n_test)
        X = np.asarray(X)[order]
        y = [y[j] for j in order]
        write(name, "TRAIN", X[:n_train], y[:n_train])
        write(name, "TEST", X[n_train:], y[n_train:])


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    from_sktime(sys.argv[1])
    from_tslearn(sys.argv[2])
    generate()
