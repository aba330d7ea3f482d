"""
Run the desk-scale acceptance experiments and write a summary report
"""
import argparse
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from tqdm import tqdm

from src.config.settings import config, setup_logging
from src.core.models import IndexSet
from src.data_io.reports import build_report, write_report, write_table
from src.penalty.selo import SeloTuning
from src.selection.bic import bic_ordering_check, sn_value
from src.simulation.dgp import generate, make_error_dist
from src.simulation.harness import rate_ladder, run_replications
from src.simulation.models import SimScenario

SIGNAL = [2.0, -2.0, 1.5]
LADDER = [100, 200, 400, 800]


def check(name: str, passed: bool, detail: str, outcomes: dict) -> None:
    outcomes[name] = {"passed": passed, "detail": detail}
    print(f"  {'✓' if passed else '✗'} {name}: {detail}")


def rate_and_recovery(seed: int, threads: int, outcomes: dict) -> dict:
    base = SimScenario.ladder(LADDER[0], SIGNAL, make_error_dist("normal"), seed, 100)
    ladder = rate_ladder(LADDER, base, threads=threads, progress=True)
    check("rate_slope", 0.7 <= ladder.slope <= 2.2, f"slope {ladder.slope:.3f}", outcomes)

    rates = ladder.recovery_rates
    drops = [a - b for a, b in zip(rates, rates[1:]) if b < a]
    check(
        "recovery_monotone",
        len(drops) <= 1 and all(drop <= 0.02 for drop in drops),
        f"rates {[round(r, 3) for r in rates]}",
        outcomes,
    )
    return ladder.to_dict()


def heavy_tails(seed: int, threads: int, outcomes: dict) -> dict:
    results = {}
    for kind, param, threshold in (("normal", 1.0, 0.90), ("student_t", 3.0, 0.90), ("cauchy", 1.0, 0.75)):
        sc = SimScenario.ladder(800, SIGNAL, make_error_dist(kind, param), seed, 100)
        metrics = run_replications(sc, threads=threads, progress=True)
        check(f"recovery_{kind}", metrics.exact_recovery_rate >= threshold,
              f"{metrics.exact_recovery_rate:.3f} (need {threshold})", outcomes)
        results[kind] = metrics.to_dict()
    return results


def normality(seed: int, threads: int, outcomes: dict, out_dir: Path) -> dict:
    sc = SimScenario.ladder(800, SIGNAL, make_error_dist("normal"), seed, 500)
    metrics = run_replications(sc, threads=threads, progress=True)
    check("ks_to_normal", metrics.ks_to_normal is not None and metrics.ks_to_normal <= 0.10,
          f"{metrics.ks_to_normal} over {len(metrics.z_samples)} statistics", outcomes)
    check("ci_coverage", metrics.ci_coverage is not None and 0.92 <= metrics.ci_coverage <= 0.98,
          f"{metrics.ci_coverage}", outcomes)
    write_table(metrics.qq_frame(), out_dir / "acceptance_qq_plot.csv")
    return metrics.to_dict()


def bic(seed: int, threads: int, outcomes: dict) -> dict:
    beta0 = [2.0, -2.0, 2.0] + [0.0] * 37
    sc = SimScenario(n=800, beta0=beta0, error=make_error_dist("normal"), seed=seed, reps=200, with_bic=True)
    metrics = run_replications(sc, threads=threads, progress=True)
    check("bic_recovery", metrics.bic_recovery_rate >= 0.85, f"{metrics.bic_recovery_rate:.3f}", outcomes)

    strong = SimScenario(n=800, beta0=beta0, error=make_error_dist("normal", 0.5), seed=seed + 1, reps=200)
    truth = strong.support
    over = truth.union(IndexSet.of([3], strong.d))
    under = IndexSet.of([0, 1], strong.d)
    t = SeloTuning(lambda_=1e-4, gamma=1.0)
    sn = sn_value(strong.n, strong.d)
    wins = 0
    for rep in tqdm(range(strong.reps), desc="ordering"):
        ds, _ = generate(strong, rep)
        ordering = bic_ordering_check(ds, truth, strong.tau, t, sn, over, under)
        wins += ordering.bic_true < min(ordering.bic_over, ordering.bic_under)
    check("bic_ordering", wins >= 0.85 * strong.reps, f"{wins}/{strong.reps}", outcomes)
    return {"metrics": metrics.to_dict(), "ordering_wins": wins}


def run_acceptance(seed: int, threads: int, out_dir: Path) -> bool:
    """Run every experiment; returns True when all criteria pass"""
    print("=" * 60)
    print("Acceptance experiments")
    print("=" * 60)

    outcomes: dict = {}
    results = {}
    print("\n[1/4] Error rate along the n ladder...")
    results["ladder"] = rate_and_recovery(seed, threads, outcomes)
    print("\n[2/4] Support recovery under heavy tails...")
    results["heavy_tails"] = heavy_tails(seed + 1, threads, outcomes)
    print("\n[3/4] Normality and interval coverage...")
    results["normality"] = normality(seed + 2, threads, outcomes, out_dir)
    print("\n[4/4] BIC selection...")
    results["bic"] = bic(seed + 3, threads, outcomes)

    report = build_report("acceptance", {"seed": seed}, results, outcomes)
    path = write_report(report, out_dir / "acceptance.json")

    passed = all(item["passed"] for item in outcomes.values())
    print("\n" + "=" * 60)
    print(f"{'✓' if passed else '✗'} {sum(item['passed'] for item in outcomes.values())}/{len(outcomes)} criteria passed")
    print(f"✓ Report written to {path}")
    print("=" * 60)
    return passed


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    parser.add_argument("--threads", type=int, default=config.DEFAULT_THREADS)
    parser.add_argument("--output", type=Path, default=config.OUTPUT_DIR)
    args = parser.parse_args()

    setup_logging()
    try:
        ok = run_acceptance(args.seed, args.threads, args.output)
    except Exception as e:
        print(f"\n✗ Error during acceptance run: {e}")
        sys.exit(1)
    sys.exit(0 if ok else 1)
