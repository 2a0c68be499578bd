"""Regenerates the synthetic fixtures under data/. Deterministic."""
import json
import math
import pathlib
import random

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"
LETTERS = "AGCT"


def write_matrix(path, rows, row_labels, col_labels):
    with open(path, "w") as f:
        f.write("," + ",".join(col_labels) + "\n")
        for label, row in zip(row_labels, rows):
            f.write(label + "," + ",".join(str(v) for v in row) + "\n")


def nine_block():
    rng = random.Random(11)
    dists = [
        (0.7, 0.1, 0.1, 0.1), (0.1, 0.7, 0.1, 0.1), (0.1, 0.1, 0.7, 0.1),
        (0.1, 0.1, 0.1, 0.7), (0.4, 0.4, 0.1, 0.1), (0.1, 0.1, 0.4, 0.4),
        (0.4, 0.1, 0.4, 0.1), (0.1, 0.4, 0.1, 0.4), (0.4, 0.1, 0.1, 0.4),
    ]
    size = 10
    rows = []
    for i in range(3 * size):
        row = []
        for j in range(3 * size):
            p = dists[(i // size) * 3 + j // size]
            row.append(rng.choices(LETTERS, weights=p)[0])
        rows.append(row)
    write_matrix(DATA / "nine_block.csv", rows, [f"r{i}" for i in range(30)], [f"c{j}" for j in range(30)])
    groups = [i // size for i in range(3 * size)]
    with open(DATA / "nine_block_blocks.json", "w") as f:
        json.dump({"row_assignment": groups, "col_assignment": groups}, f)
        f.write("\n")


def checkerboard():
    # 12 x 10, rows split 7/5 and columns 4/6, one constant per block.
    value = [[1, 6], [5, 2]]
    rows = [[value[i >= 7][j >= 4] for j in range(10)] for i in range(12)]
    write_matrix(DATA / "checkerboard.csv", rows, [f"g{i}" for i in range(12)], [f"s{j}" for j in range(10)])


def planted():
    # 60 points in three discs around an equilateral triangle.
    rng = random.Random(5)
    centers = [(0.0, 0.0), (30.0, 0.0), (15.0, 15.0 * math.sqrt(3))]
    rows, labels = [], []
    for k, (cx, cy) in enumerate(centers):
        for t in range(20):
            r = 1.5 * math.sqrt(rng.random())
            a = 2 * math.pi * rng.random()
            rows.append([round(cx + r * math.cos(a), 6), round(cy + r * math.sin(a), 6)])
            labels.append(f"k{k}_{t}")
    write_matrix(DATA / "planted.csv", rows, labels, ["x", "y"])


SEQS = {
    "s1": "A---G----TTCA-----",
    "s2": "A-TTC----TTCGATG--",
    "s3": "ACTTG----TTCAATGCA",
    "s4": "ACTAG----TACAATGCA",
    "s5": "--TTCGG--TTCGATG--",
}


def alignments():
    with open(DATA / "example.fasta", "w") as f:
        for name, seq in SEQS.items():
            f.write(f">{name}\n{seq[:10]}\n{seq[10:]}\n")
    with open(DATA / "example.aln", "w") as f:
        f.write("CLUSTAL W (1.83) multiple sequence alignment\n\n\n")
        for lo, hi in ((0, 10), (10, 18)):
            for name, seq in SEQS.items():
                f.write(f"{name:<8}{seq[lo:hi]}\n")
            f.write(" " * 8 + "*" * (hi - lo) + "\n\n")


if __name__ == "__main__":
    nine_block()
    checkerboard()
    planted()
    alignments()
