"""Regenerate the regression files under tests/golden/.

Run from the repository root::

    python tests/make_golden.py

Only rerun this after an intentional numerical change, and review the diff.
"""
import csv
import hashlib
import json
import tempfile
from pathlib import Path

import numpy as np

from tensoralign.cli import main
from tensoralign.data import write_tensor

GOLDEN = Path(__file__).parent / "golden"
GEN_SEEDS = (0, 1, 2)
GEN_FILES = ("source.dten", "target.dten", "source_labels.csv", "target_labels.csv")


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def decompose_input():
    """The fixed tensor behind the decompose regression (PCG64, seed 2024)."""
    r = np.random.Generator(np.random.PCG64(2024))
    return r.standard_normal((6, 5, 4))


def gen_records(tmp):
    records = {}
    for seed in GEN_SEEDS:
        out = Path(tmp) / f"gen{seed}"
        assert main(["gen", "--golden", "--seed", str(seed), "--out", str(out)]) == 0
        records[str(seed)] = {name: sha256(out / name) for name in GEN_FILES}
    return records


def run_golden_align(tmp, method="tda-o"):
    data = Path(tmp) / "gen0"
    if not data.exists():
        main(["gen", "--golden", "--seed", "0", "--out", str(data)])
    out = Path(tmp) / method
    rc = main(["align", "--config", str(GOLDEN / "benchmark.conf"), "--method", method,
               "--source", str(data / "source.dten"), "--target", str(data / "target.dten"),
               "--out", str(out)])
    assert rc == 0
    return out


def run_golden_decompose(tmp):
    src = Path(tmp) / "decomp_input.dten"
    write_tensor(src, decompose_input())
    out = Path(tmp) / "decompose"
    assert main(["decompose", "--input", str(src), "--ranks", "3,2", "--out", str(out)]) == 0
    return out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        (GOLDEN / "gen_sha256.json").write_text(
            json.dumps(gen_records(tmp), indent=2, sort_keys=True) + "\n")
        out = run_golden_align(tmp)
        (GOLDEN / "tda_o_loss_trace.csv").write_text((out / "loss_trace.csv").read_text())
        out = run_golden_decompose(tmp)
        (GOLDEN / "decompose_fit_trace.csv").write_text((out / "fit_trace.csv").read_text())
    print("golden files written to", GOLDEN)
