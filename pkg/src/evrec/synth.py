"""Synthetic survey-style datasets with a known ground-truth scoring function.

Used by the test suite and handy for exercising the training pipeline: the
generator fabricates labels, events, and users, computes the true factors,
and emits observed scores as ground-truth + Gaussian noise, clipped to the
score interval (the default truth keeps predictions well inside it, so the
clip almost never binds).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .model import Config, DEFAULT_CONFIG

THEMES = ("fish", "coffee", "wine", "beer", "cheese", "cold cuts", "oil", "chocolate")
TYPES = ("workshop", "tasting", "debate", "dinner")

# Coefficients over (thi, tyi, rat, rch, frn) plus intercept. Chosen so the
# noiseless score stays inside [1, 9.5]: clipping then cannot bias a fit.
DEFAULT_TRUTH = {"thi": 0.30, "tyi": 0.20, "rat": 0.10, "rch": 0.15,
                 "frn": 0.10, "intercept": 1.0}

DEFAULT_INIT_TRUTH = {"thi": 0.55, "tyi": 0.30, "intercept": 0.5}


def generate_dataset(out_dir, n_users: int = 40, n_events: int = 15,
                     seed: int = 0, truth: dict | None = None,
                     init_truth: dict | None = None, noise_sd: float = 0.5,
                     config: Config = DEFAULT_CONFIG) -> Path:
    """Write a four-file dataset directory; returns its path."""
    truth = dict(DEFAULT_TRUTH if truth is None else truth)
    init_truth = dict(DEFAULT_INIT_TRUTH if init_truth is None else init_truth)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xE7EC]))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lb, ub = config.score_interval.lb, config.score_interval.ub

    events = []
    for i in range(n_events):
        n_themes = int(rng.integers(1, 3))
        themes = list(rng.choice(THEMES, size=n_themes, replace=False))
        etype = str(rng.choice(TYPES))
        dist = 0.0 if rng.random() < 0.5 else float(np.round(rng.uniform(1, 80), 1))
        friends = int(rng.integers(0, config.k_friends + 1))
        rating = float(np.round(rng.uniform(1, 10), 1))
        events.append((f"e_{i:03d}", themes, etype, dist, friends, rating))

    users = []
    for i in range(n_users):
        mov = float(np.round(rng.uniform(20, 100), 1))
        weights = tuple(int(rng.integers(0, 11)) for _ in range(3))
        interests = {}
        for label in THEMES:
            interests[("theme", label)] = int(rng.integers(0, 11))
        for label in TYPES:
            interests[("type", label)] = int(rng.integers(0, 11))
        users.append((f"u_{i:03d}", mov, weights, interests))

    def true_factors(user, event):
        _, mov, _, interests = user
        _, themes, etype, dist, friends, rating = event
        thi = float(np.mean([interests[("theme", t)] for t in themes]))
        tyi = float(interests[("type", etype)])
        reach = 0.0 + config.default_event_radius_km + mov
        rch = max(lb, (lb - ub) / reach * dist + ub)
        frn = lb + (ub - lb) / np.log(config.k_friends + 1) * np.log(friends + 1)
        return {"thi": thi, "tyi": tyi, "rat": rating, "rch": rch, "frn": frn}

    with (out / "events.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["event_id", "themes", "event_type", "dist_km",
                         "friends_count", "avg_rating"])
        for event_id, themes, etype, dist, friends, rating in events:
            writer.writerow([event_id, ";".join(themes), etype,
                             repr(dist), friends, repr(rating)])

    with (out / "users.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "mov_km", "w_rat", "w_rch", "w_frn"])
        for user_id, mov, weights, _ in users:
            writer.writerow([user_id, repr(mov), *weights])

    with (out / "interests.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "label", "kind", "value"])
        for user_id, _, _, interests in users:
            for (kind, label), value in interests.items():
                writer.writerow([user_id, label, kind, value])

    with (out / "responses.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "event_id", "score_init", "score_fin"])
        for user in users:
            for event in events:
                factors = true_factors(user, event)
                fin = truth["intercept"] + sum(
                    truth.get(k, 0.0) * v for k, v in factors.items())
                fin = float(np.clip(fin + rng.normal(0, noise_sd), lb, ub))
                init = init_truth["intercept"] + sum(
                    init_truth.get(k, 0.0) * factors[k] for k in ("thi", "tyi"))
                init = float(np.clip(init + rng.normal(0, noise_sd), lb, ub))
                writer.writerow([user[0], event[0], repr(init), repr(fin)])
    return out
