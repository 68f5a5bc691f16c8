#!/usr/bin/env python3
"""Fetch the UCI Census-Income (KDD) dataset and write its dataset config.

The train and test files are concatenated in that order into one
header-bearing CSV. The 'instance weight' column is dropped (it is a survey
weight, not a feature). The class labels are '- 50000.' and '50000+.'; the
trailing '.' is removed. Missing entries keep the UCI '?' token.

The nominal domains are too long to maintain by hand, so the dataset config
is produced by `farf infer-schema` on the fetched file and then given the
race ordering used for the Adult preset.

Source: https://archive.ics.uci.edu/ml/machine-learning-databases/census-income-mld/
"""
import argparse
import gzip
import io
import json
import pathlib
import subprocess
import urllib.request

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases/census-income-mld/"
FILES = ("census-income.data.gz", "census-income.test.gz")
COLUMNS = [
    "age", "class-of-worker", "industry-code", "occupation-code", "education",
    "wage-per-hour", "enrolled-in-edu-inst", "marital-status",
    "major-industry", "major-occupation", "race", "hispanic-origin", "sex",
    "labor-union", "unemployment-reason", "employment-status",
    "capital-gains", "capital-losses", "dividends", "tax-filer-status",
    "previous-region", "previous-state", "household-stat",
    "household-summary", "instance-weight", "migration-msa", "migration-reg",
    "migration-within-reg", "same-house-1y", "migration-sunbelt",
    "num-persons-employer", "family-under-18", "birth-country-father",
    "birth-country-mother", "birth-country-self", "citizenship",
    "self-employed", "veterans-questionnaire", "veterans-benefits",
    "weeks-worked", "year", "income",
]
DROP = "instance-weight"


def rows(text):
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(COLUMNS):
            continue
        cells[-1] = cells[-1].rstrip(".")
        yield [c for name, c in zip(COLUMNS, cells) if name != DROP]


def quote(cell):
    return f'"{cell}"' if "," in cell else cell


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(root / "data" / "census" / "census.csv"))
    ap.add_argument("--config", default=str(root / "configs" / "census.json"))
    ap.add_argument("--farf", default=str(root / "build" / "farf"),
                    help="farf binary used for schema inference")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with out.open("w", newline="\n") as f:
        f.write(",".join(c for c in COLUMNS if c != DROP) + "\n")
        for name in FILES:
            with urllib.request.urlopen(UCI + name, timeout=60) as r:
                text = gzip.decompress(r.read()).decode("utf-8")
            for cells in rows(text):
                f.write(",".join(quote(c) for c in cells) + "\n")
                n += 1
    print(f"wrote {n} rows to {out}")

    subprocess.run([args.farf, "infer-schema", "--csv", str(out),
                    "--sensitive", "sex", "--sensitive-value", "Female",
                    "--class", "income", "--positive", "50000+",
                    "--out", args.config], check=True)
    config_path = pathlib.Path(args.config)
    config = json.loads(config_path.read_text())
    config["path"] = str(pathlib.Path("..") / out.relative_to(root)) \
        if out.is_relative_to(root) else str(out)
    config["order_by"] = "race"
    config["order_direction"] = "asc"
    config_path.write_text(json.dumps(config, indent=2) + "\n")
    print(f"wrote {config_path}")


if __name__ == "__main__":
    main()
