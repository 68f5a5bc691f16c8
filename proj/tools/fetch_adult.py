#!/usr/bin/env python3
"""Fetch the UCI Adult dataset and write a single header-bearing CSV.

The train (adult.data) and test (adult.test) splits are concatenated in that
order. Values are trimmed and the trailing '.' on test labels is removed.
Missing entries keep the UCI '?' token.

Sources, tried in order:
  1. https://archive.ics.uci.edu/ml/machine-learning-databases/adult/
  2. the copy bundled in the `responsibly` wheel on PyPI (same files).
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/"
COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]


def from_uci():
    out = {}
    for name in ("adult.data", "adult.test"):
        with urllib.request.urlopen(UCI + name, timeout=30) as r:
            out[name] = r.read().decode("utf-8")
    return out


def from_wheel():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps",
             "--dest", tmp, "responsibly==0.1.2"],
            check=True, stdout=subprocess.DEVNULL)
        wheel = next(pathlib.Path(tmp).glob("responsibly-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            return {
                name: z.read(f"responsibly/dataset/adult/{name}").decode("utf-8")
                for name in ("adult.data", "adult.test")
            }


def rows(text):
    for line in io.StringIO(text):
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(COLUMNS):
            continue
        cells[-1] = cells[-1].rstrip(".")
        yield cells


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(
        pathlib.Path(__file__).resolve().parent.parent / "data" / "adult" / "adult.csv"))
    args = ap.parse_args()

    try:
        files = from_uci()
    except Exception as err:  # network blocked, fall back to PyPI
        print(f"UCI download failed ({err}); using PyPI copy", file=sys.stderr)
        files = from_wheel()

    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with out.open("w", newline="\n") as f:
        f.write(",".join(COLUMNS) + "\n")
        for name in ("adult.data", "adult.test"):
            for cells in rows(files[name]):
                f.write(",".join(cells) + "\n")
                n += 1
    print(f"wrote {n} rows to {out}")


if __name__ == "__main__":
    main()
