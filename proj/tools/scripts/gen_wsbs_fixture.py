#!/usr/bin/env python3
"""Writes data/wsbs_fixture.csv: a synthetic stand-in for the WSB sentiment
dataset with the same class balance (2920 samples, 1509 unanimous).

Columns: id,text,label,ann1,ann2. Unanimous rows carry two equal annotations;
resolved rows carry two different ones, one of which is the gold label.
The output is fully determined by SEED.
"""
import csv
import random
import sys
from pathlib import Path

SEED = 20240117
LABELS = ("positive", "negative", "neutral")
UNANIMOUS = {"positive": 652, "negative": 498, "neutral": 359}
RESOLVED = {"positive": 481, "negative": 359, "neutral": 571}
TICKERS = ("GME", "AMC", "TSLA", "SPY", "NVDA", "AAPL", "PLTR", "BB")

PHRASES = {
    "positive": (
        "{t} is going to the moon, holding every share",
        "Loaded up on {t} calls before earnings",
        "{t} squeeze is just getting started",
        "Diamond hands on {t}, this dip is a gift",
        "Bullish on {t} after that guidance",
        "{t} breaking out, adding to my position",
    ),
    "negative": (
        "{t} is a bag, I'm out",
        "Puts on {t}, this thing is overvalued",
        "{t} guidance was a disaster, selling tomorrow",
        "Lost half my account on {t} this week",
        "Bearish on {t}, the chart looks terrible",
        "{t} will keep bleeding until the offering",
    ),
    "neutral": (
        "{t} earnings are on Thursday after close",
        "What is the options volume on {t} today?",
        "{t} announced a new board member",
        "Anyone know when {t} reports?",
        "{t} moved to a different exchange listing",
        "Financial terms of the {t} deal were not disclosed",
    ),
}


def text_for(rng, label, n):
    phrase = rng.choice(PHRASES[label]).format(t=rng.choice(TICKERS))
    return f"{phrase} (#{n})"


def main(out_path):
    rng = random.Random(SEED)
    rows = []
    for label in LABELS:
        for _ in range(UNANIMOUS[label]):
            rows.append((label, label, label))
        others = [l for l in LABELS if l != label]
        for i in range(RESOLVED[label]):
            other = others[i % 2]
            pair = (label, other) if rng.random() < 0.5 else (other, label)
            rows.append((label, *pair))
    rng.shuffle(rows)
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "text", "label", "ann1", "ann2"])
        for n, (label, a1, a2) in enumerate(rows, start=1):
            w.writerow([f"wsbs-{n:05d}", text_for(rng, label, n), label, a1, a2])


if __name__ == "__main__":
    default = Path(__file__).resolve().parents[2] / "data" / "wsbs_fixture.csv"
    main(sys.argv[1] if len(sys.argv) > 1 else default)
