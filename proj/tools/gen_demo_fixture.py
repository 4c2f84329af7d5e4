#!/usr/bin/env python3
"""Regenerates data/demo/problems.jsonl and data/demo/fixture.jsonl.

The fixture scripts every backend call the offline demo makes:
rewrite/verify calls for the forge stage and k=4 evaluee samples per
(model, problem, variant) for the sample stage.
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "data", "demo")

# id, question, original answer, masked value (the single numeric span)
PROBLEMS = [
    ("p01", "A baker made 24 muffins and sold half of them before noon. How many muffins were sold before noon?", "12", "24"),
    ("p02", "A farmer collects 20 eggs each morning and sells them all at the market. How many eggs does the farmer sell at the market each morning?", "20", "20"),
    ("p03", "A train covers 180 kilometers in an hour and a half at a steady speed. How many kilometers does it cover in a single hour?", "120", "180"),
    ("p04", "Maya reads 45 pages of her novel every evening. How many pages does she read over the course of a week?", "315", "45"),
    ("p05", "A jar holds 60 marbles, and a quarter of them are blue. How many marbles in the jar are blue?", "15", "60"),
    ("p06", "Tom saves 8 dollars every day in March. How many dollars does he save during the whole month?", "248", "8"),
    ("p07", "A rope 96 meters long is cut into equal quarters. How many meters long is each piece?", "24", "96"),
    ("p08", "Lena buys a dozen cupcakes and pays 36 dollars in total. How many dollars does each cupcake cost?", "3", "36"),
    ("p09", "A water tank drains at 5 liters per minute. How many minutes does it take to empty a full tank holding a thousand liters?", "200", "5"),
    ("p10", "During the sale a jacket's price drops by half to 75 dollars. How many dollars did the jacket cost before the sale?", "150", "75"),
]

REWRITES = {
    "p01": "A baker made a batch of muffins and sold half of them before noon, selling exactly 12 muffins. How many muffins did the baker make?",
    "p02": "A farmer collects a basket of eggs each morning and sells all of them at the market, earning sales of 20 eggs per morning. How many eggs does the farmer collect each morning?",
    "p03": "A train travels at a steady speed of 120 kilometers per hour for an hour and a half. How many kilometers does it cover in that time?",
    "p04": "Maya reads the same number of pages of her novel every evening and finishes 315 pages over the course of a week. How many pages does she read each evening?",
    "p05": "A quarter of the marbles in a jar are blue, and exactly 15 marbles are blue. How many marbles does the jar hold?",
    "p06": "Tom saves the same number of dollars every day in March and ends the month with 248 dollars saved. How many dollars does he save each day?",
    "p07": "A rope is cut into equal quarters, and each piece is 24 meters long. How many meters long was the rope?",
    "p08": "Lena buys a dozen cupcakes, and each cupcake costs 3 dollars. How many dollars does she pay in total?",
    "p09": "A water tank holding a thousand liters empties in 200 minutes when drained at a constant rate. How many liters drain per minute?",
}

MODELS = ["alpha-7b", "alpha-32b", "beta-7b"]
K = 4

# (orig correct of 4, rev correct of 4, reversed responses anchored to the
# original answer when not correct)
OUTCOMES = {
    "alpha-7b": {
        "p01": (4, 4, False), "p02": (4, 3, False), "p03": (4, 0, True),
        "p04": (1, 4, False), "p05": (0, 1, False), "p06": (3, 4, False),
        "p07": (4, 1, True), "p08": (4, 4, False), "p09": (1, 3, False),
    },
    "alpha-32b": {
        "p01": (4, 4, False), "p02": (4, 4, False), "p03": (4, 1, True),
        "p04": (4, 4, False), "p05": (1, 4, False), "p06": (4, 4, False),
        "p07": (3, 0, False), "p08": (4, 3, False), "p09": (4, 4, False),
    },
    "beta-7b": {
        "p01": (3, 4, False), "p02": (4, 2, False), "p03": (4, 4, False),
        "p04": (0, 1, False), "p05": (3, 1, False), "p06": (4, 4, False),
        "p07": (4, 3, False), "p08": (1, 4, False), "p09": (3, 4, False),
    },
}


def response(correct, gold, wrong):
    tail = gold if correct else wrong
    return f"Working through the quantities step by step gives the result. The answer is \\boxed{{{tail}}}."


def main():
    os.makedirs(OUT, exist_ok=True)
    with open(os.path.join(OUT, "problems.jsonl"), "w") as f:
        for pid, question, answer, _ in PROBLEMS:
            f.write(json.dumps({
                "id": pid, "question": question, "answer": answer,
                "dataset": "demo", "language": "en"}) + "\n")

    entries = []
    for pid, _, answer, masked in PROBLEMS:
        if pid == "p10":  # scripted to fail verification on every attempt
            for ordinal in range(2):
                entries.append(("rewrite:" + pid, ordinal,
                                "During the sale a jacket's price drops by half, and the jacket cost 150 dollars before the sale. How many dollars does it cost now?"))
                entries.append(("verify:" + pid, ordinal, "LEAK"))
            continue
        entries.append(("rewrite:" + pid, 0, REWRITES[pid]))
        entries.append(("verify:" + pid, 0, f"\\boxed{{{masked}}}"))

    for model in MODELS:
        for pid, _, answer, masked in PROBLEMS:
            if pid == "p10":
                continue
            orig_n, rev_n, anchored = OUTCOMES[model][pid]
            for i in range(K):
                entries.append((f"sample:{model}:{pid}:original", i,
                                response(i < orig_n, answer, "999")))
            wrong = answer if anchored else "999"
            for i in range(K):
                entries.append((f"sample:{model}:{pid}:reversed", i,
                                response(i < rev_n, masked, wrong)))

    with open(os.path.join(OUT, "fixture.jsonl"), "w") as f:
        for tag, ordinal, text in entries:
            f.write(json.dumps({"tag": tag, "ordinal": ordinal,
                                "response": text}) + "\n")
    print(f"wrote {len(PROBLEMS)} problems, {len(entries)} fixture entries")


if __name__ == "__main__":
    main()
