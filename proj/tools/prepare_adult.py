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
"""Converts the UCI `adult.data` file into the 8-feature CSV used by cfx.

Categories are grouped the way most counterfactual benchmarks group them
(workclass/occupation/education/marital status/race coarsened) and all
category names are lower-cased with '-' and '/' mapped to '_'. Unknown
workclass/occupation ('?') become 'other_unknown', so no rows are dropped.

Usage: prepare_adult.py path/to/adult.data data/adult.csv
"""

import csv
import sys

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "gender",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]

WORKCLASS = {
    "Federal-gov": "Government", "State-gov": "Government",
    "Local-gov": "Government", "Self-emp-not-inc": "Self-Employed",
    "Self-emp-inc": "Self-Employed", "Without-pay": "Other/Unknown",
    "Never-worked": "Other/Unknown", "?": "Other/Unknown",
}
OCCUPATION = {
    "Adm-clerical": "White-Collar", "Craft-repair": "Blue-Collar",
    "Exec-managerial": "White-Collar", "Farming-fishing": "Blue-Collar",
    "Handlers-cleaners": "Blue-Collar", "Machine-op-inspct": "Blue-Collar",
    "Other-service": "Service", "Priv-house-serv": "Service",
    "Prof-specialty": "Professional", "Protective-serv": "Service",
    "Tech-support": "Service", "Transport-moving": "Blue-Collar",
    "Armed-Forces": "Other/Unknown", "?": "Other/Unknown",
}
MARITAL = {
    "Married-civ-spouse": "Married", "Married-AF-spouse": "Married",
    "Married-spouse-absent": "Married", "Never-married": "Single",
}
RACE = {"Black": "Other", "Asian-Pac-Islander": "Other",
        "Amer-Indian-Eskimo": "Other"}
EDUCATION = {
    "Assoc-voc": "Assoc", "Assoc-acdm": "Assoc", "11th": "School",
    "10th": "School", "7th-8th": "School", "9th": "School", "12th": "School",
    "5th-6th": "School", "1st-4th": "School", "Preschool": "School",
}

OUT_COLUMNS = ["age", "hours_per_week", "workclass", "education",
               "marital_status", "occupation", "race", "gender", "income"]


def norm(value):
    return value.lower().replace("-", "_").replace("/", "_")


def main(src, dst):
    rows = 0
    with open(src, newline="") as fin, open(dst, "w", newline="") as fout:
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow(OUT_COLUMNS)
        for raw in csv.reader(fin, skipinitialspace=True):
            if not raw:
                continue
            rec = dict(zip(COLUMNS, (v.strip() for v in raw)))
            writer.writerow([
                rec["age"],
                rec["hours_per_week"],
                norm(WORKCLASS.get(rec["workclass"], rec["workclass"])),
                norm(EDUCATION.get(rec["education"], rec["education"])),
                norm(MARITAL.get(rec["marital_status"], rec["marital_status"])),
                norm(OCCUPATION.get(rec["occupation"], rec["occupation"])),
                norm(RACE.get(rec["race"], rec["race"])),
                norm(rec["gender"]),
                rec["income"].rstrip("."),
            ])
            rows += 1
    print(f"wrote {rows} rows to {dst}")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
