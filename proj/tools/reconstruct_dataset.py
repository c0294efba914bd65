#!/usr/bin/env python3
"""Rebuild data/heart_reconstructed.csv from two public PyPI wheels.

The 1190-row combined heart-disease file is not redistributed on PyPI. This
script approximates it from:

  heart-dissease-classifier-dgcr  918 rows (Cleveland, Hungarian, Switzerland,
                                  Long Beach VA, de-duplicated), text-coded
  keel-ds                         270 Statlog rows in KEEL format

Statlog rows keep their order after the 918 rows. KEEL stores most oldpeak
values times ten; a value is divided by ten when the scaled row matches one of
the 918 rows exactly, and kept as is otherwise.

Usage: python3 tools/reconstruct_dataset.py [output.csv]
Needs pip access to a package index.
"""

import csv
import glob
import io
import subprocess
import sys
import tempfile
import zipfile

HEADER = ("age,sex,chest pain type,resting bp s,cholesterol,fasting blood sugar,resting ecg,"
          "max heart rate,exercise angina,oldpeak,ST slope,target")

CHEST_PAIN = {"TA": 1, "ATA": 2, "NAP": 3, "ASY": 4}
ECG = {"Normal": 0, "ST": 1, "LVH": 2}
SLOPE = {"Up": 1, "Flat": 2, "Down": 3}


def wheel(package, workdir):
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", workdir, package],
                   check=True)
    (path,) = glob.glob(f"{workdir}/*.whl")
    return zipfile.ZipFile(path)


def rows_918(z):
    rows = []
    for name in ("classifier_model/datasets/train.csv", "classifier_model/datasets/test.csv"):
        reader = csv.reader(io.TextIOWrapper(z.open(name), encoding="utf-8"))
        next(reader)
        for x in reader:
            rows.append((int(x[0]), 1 if x[1] == "M" else 0, CHEST_PAIN[x[2]], int(x[3]), int(x[4]), int(x[5]),
                         ECG[x[6]], int(x[7]), 1 if x[8] == "Y" else 0, float(x[9]), SLOPE[x[10]], int(x[11])))
    return rows


def rows_statlog(z):
    rows = []
    for line in z.read("keel_ds/data/balanced/raw/heart.dat").decode().splitlines():
        v = line.strip().split(",")
        if len(v) < 14:
            continue
        rows.append([int(v[0]), int(v[1]), int(v[2]), int(v[3]), int(v[4]), int(v[5]), int(v[6]), int(v[7]),
                     int(v[8]), float(v[9]), int(v[10]), int(v[13]) - 1])
    return rows


def fmt(v):
    if isinstance(v, float):
        return str(int(v)) if v == int(v) else repr(v)
    return str(v)


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "data/heart_reconstructed.csv"
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        base = rows_918(wheel("heart-dissease-classifier-dgcr", a))
        statlog = rows_statlog(wheel("keel-ds", b))
    known = set(base)
    out = list(base)
    for s in statlog:
        scaled = tuple(s[:9] + [s[9] / 10] + s[10:])
        out.append(scaled if scaled in known else tuple(s))
    with open(out_path, "w", newline="") as f:
        f.write(HEADER + "\n")
        for r in out:
            f.write(",".join(fmt(v) for v in r) + "\n")
    positives = sum(r[-1] for r in out)
    print(f"{out_path}: {len(out)} rows, {positives} positive, {len(out) - positives} negative")


if __name__ == "__main__":
    main()
