#!/usr/bin/env python3
"""Regenerate data/toy_corpus from data/api_vocabulary.txt.

Usage: make_toy_corpus.py [--seed N] [--root DIR]
"""
import argparse
import pathlib
import random

SUSPICIOUS = (
    "SmsManager", "getDeviceId", "getSubscriberId", "getLine1Number", "Runtime.exec",
    "DexClassLoader", "Method.invoke", "DevicePolicyManager", "getRunningTasks",
    "getInstalledPackages", "Cipher", "Base64.decode", "setComponentEnabledSetting",
    "AudioRecord", "getAccounts",
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20140917)
    ap.add_argument("--root", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    root = pathlib.Path(args.root)
    vocab = [l.strip() for l in (root / "api_vocabulary.txt").read_text().splitlines()
             if l.strip() and not l.startswith("#")]
    bad = [v for v in vocab if any(s in v for s in SUSPICIOUS)]
    common = [v for v in vocab if v not in bad]
    rng = random.Random(args.seed)

    out = root / "toy_corpus"
    logs = out / "logs"
    logs.mkdir(parents=True, exist_ok=True)
    for old in logs.glob("*.log"):
        old.unlink()

    rows = []
    for i in range(50):
        label = 2 if i % 5 in (1, 3) else 1
        calls = rng.sample(common, rng.randint(12, 30))
        if label == 2:
            calls += rng.sample(bad, rng.randint(5, 10))
        elif rng.random() < 0.3:
            calls += rng.sample(bad, 1)
        # Repeats, unknown APIs and junk lines exercise the parser.
        calls += rng.choices(calls, k=rng.randint(0, 10))
        calls.append("com.example.toy.Helper.doWork")
        rng.shuffle(calls)
        lines = [f"{c} pid={1000 + i} t={t}" for t, c in enumerate(calls)]
        lines.insert(rng.randrange(len(lines)), "--- trace marker ---")
        name = f"app_{i:03d}.log"
        (logs / name).write_text("\n".join(lines) + "\n")
        rows.append((name, label if i < 20 else ""))

    with open(out / "labels.csv", "w") as f:
        f.write("file,label\n")
        for name, label in rows:
            f.write(f"{name},{label}\n")


if __name__ == "__main__":
    main()
