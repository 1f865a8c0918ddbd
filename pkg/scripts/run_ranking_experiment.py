#!/usr/bin/env python3
"""Repeat the rf / j48 / knn ranking over many seeds of noisy synthetic data.
Usage: python scripts/run_ranking_experiment.py --seeds 10 --n 600 --noise 0.25
"""
import argparse
import time
from collections import Counter

from app.config import configure_logging
from app.ml.cross_validation import evaluate_algorithms
from app.ml.metrics import rank_models
from app.ml.synthetic import generate_labeled_dataset
from app.services.reporting import rank_table


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--n", type=int, default=600)
    parser.add_argument("--noise", type=float, default=0.25)
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--algo", default="rf,j48,knn")
    args = parser.parse_args()
    configure_logging("WARNING")

    tags = [tag.strip() for tag in args.algo.split(",") if tag.strip()]
    winners = Counter()
    forest_not_worse = 0
    t0 = time.time()
    for seed in range(1, args.seeds + 1):
        dataset = generate_labeled_dataset(args.n, seed=seed, noise_fraction=args.noise)
        reports = evaluate_algorithms(tags, dataset, args.folds, seed)
        ranking = rank_models(reports)
        accuracy = {r.algorithm: r.accuracy for r in reports}
        winners[ranking[0].algorithm] += 1
        if "random_forest" in accuracy and "j48" in accuracy:
            forest_not_worse += accuracy["random_forest"] >= accuracy["j48"]
        print(f"Seed {seed}")
        print(rank_table(ranking))
    t1 = time.time()

    print("Summary:")
    print(f"Seeds: {args.seeds} in {t1 - t0:.1f}s")
    for algorithm, wins in winners.most_common():
        print(f"Ranked first: {algorithm} x{wins}")
    print(f"Random forest >= J48: {forest_not_worse}/{args.seeds}")


if __name__ == "__main__":
    main()
