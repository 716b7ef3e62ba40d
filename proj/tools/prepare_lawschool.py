#!/usr/bin/env python3
# Copyright 2026 The cfx Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts the LSAC bar-passage study CSV into the 10-feature CSV used by cfx.

Expects the widely mirrored `bar_pass_prediction.csv` layout (columns lsat,
ugpa, decile1b, decile3, zfygpa, fam_inc, tier, fulltime, race1 or race,
male or sex, pass_bar). Rows with any missing field are dropped.

Usage: prepare_lawschool.py path/to/bar_pass_prediction.csv data/lawschool.csv
"""

import csv
import sys

CONTINUOUS = ["lsat", "ugpa", "decile1b", "decile3", "zfygpa", "fam_inc"]
OUT_COLUMNS = CONTINUOUS + ["tier", "fulltime", "race", "sex", "pass_bar"]
MISSING = {"", "na", "nan", "?"}


def number(value):
    if value.strip().lower() in MISSING:
        raise ValueError("missing")
    return float(value)


def as_int_text(value):
    return str(int(number(value)))


def race(rec):
    if "race1" in rec and rec["race1"].strip():
        return "white" if rec["race1"].strip().lower() == "white" else "non_white"
    # LSAC numeric coding: 7 is white.
    return "white" if as_int_text(rec["race"]) == "7" else "non_white"


def sex(rec):
    if "male" in rec and rec["male"].strip():
        return "male" if as_int_text(rec["male"]) == "1" else "female"
    # LSAC numeric coding: 1 female, 2 male.
    return "male" if as_int_text(rec["sex"]) == "2" else "female"


def main(src, dst):
    kept = dropped = 0
    with open(src, newline="") as fin, open(dst, "w", newline="") as fout:
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow(OUT_COLUMNS)
        for rec in csv.DictReader(fin):
            try:
                values = [repr(number(rec[c])) for c in CONTINUOUS]
                tier = as_int_text(rec["tier"])
                fulltime = "yes" if as_int_text(rec["fulltime"]) == "1" else "no"
                passed = as_int_text(rec["pass_bar"])
                row = values + [tier, fulltime, race(rec), sex(rec), passed]
            except (KeyError, ValueError):
                dropped += 1
                continue
            if tier not in {"1", "2", "3", "4", "5", "6"} or passed not in {"0", "1"}:
                dropped += 1
                continue
            writer.writerow(row)
            kept += 1
    print(f"wrote {kept} rows to {dst} ({dropped} dropped)")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
