"""Regenerates survey.csv, the synthetic end-to-end fixture (seeded)."""
import csv
import math
import random

rng = random.Random(20240611)
rows = []
for i in range(600):
    female = 1 if rng.random() < 0.5 else 0
    age = round(rng.gauss(15, 1.5), 1)
    income = round(rng.gauss(0, 1), 3)
    region = rng.choice([1, 2, 3])
    sport = 1 if rng.random() < 0.4 + 0.1 * income else 0
    screen = min(7.0, max(0.0, round(rng.gauss(3 - 0.5 * sport + 0.3 * female, 1.5), 1)))
    bullied = 1 if rng.random() < 0.2 + 0.1 * female else 0
    noise = rng.gauss(0, 1)
    wellbeing = (-0.6 * screen / 7 - 0.8 * (bullied - 0.5) + 0.3 * income
                 + 0.2 * (sport - 0.5) - 0.2 * (female - 0.5) * (bullied - 0.5) + noise)
    anxiety = 0.5 * screen / 7 + 0.1 * income + 0.7 * noise + rng.gauss(0, 0.7)
    logit = -1.0 + 1.2 * screen / 7 + 0.9 * (bullied - 0.5) - 0.2 * income
    depressed = 1 if rng.random() < 1 / (1 + math.exp(-logit)) else 0
    row = {
        "id": i + 1, "wellbeing": round(wellbeing, 4), "anxiety": round(anxiety, 4),
        "depressed": depressed, "screen_hours": screen, "bullied": bullied,
        "female": female, "age": age, "income": income, "region": region, "sport": sport,
    }
    if i % 97 == 5:
        row["income"] = ""
    rows.append(row)

with open("survey.csv", "w", newline="") as f:
    w = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
