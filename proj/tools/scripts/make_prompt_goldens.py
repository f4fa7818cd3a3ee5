#!/usr/bin/env python3
"""Writes tests/golden/*.txt: the expected prompt bytes for the worked example
sentence, built from the literal template here (independently of the C++
renderer) and data/instruction_default.json."""
import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
TEXT = "Financial terms were not disclosed."
LABELS = ("positive", "negative", "neutral")


def instruction(identifier):
    return (f"Instruction: What is the sentiment of this {identifier}? "
            "Please choose an answer from {negative/neutral/positive}\n")


def target(text):
    return f"Input: {text}\nAnswer: "


def main():
    spec = json.loads((ROOT / "data" / "instruction_default.json").read_text(encoding="utf-8"))
    definition = "Definitions:\n" + "".join(f"- {l}: {spec['definition'][l]}\n" for l in LABELS)
    grounding = f"Grounding: {spec['grounding']}\n"
    examples = "Examples:\n" + "".join(f"- {l}: {spec['example'][l]['text']}\n" for l in LABELS)

    out = {}
    for ident in ("input", "news", "tweet"):
        out[f"base_{ident}.txt"] = instruction(ident) + target(TEXT)
    blocks = {"D": definition, "DG": definition + grounding, "DGE": definition + grounding + examples}
    for tag, block in blocks.items():
        out[f"aiap_{tag}.txt"] = instruction("input") + block + target(TEXT)
    for k in (1, 2, 3):
        shots = "".join(f"Input: {spec['example'][l]['text']}\nAnswer: {l}\n" for l in LABELS[:k])
        out[f"fewshot_{k}.txt"] = instruction("input") + shots + target(TEXT)

    golden = ROOT / "tests" / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    for name, content in out.items():
        (golden / name).write_bytes(content.encode("utf-8"))


if __name__ == "__main__":
    main()
