# Checks that a model sits inside the regime the error guarantees assume.
from predsub import (
    assumption_report,
    coherence,
    condition_number,
    eigen_scaling_check,
    generate_mmsb,
    subsample_size,
    truncated_eigs,
)

N = 2000
D = 3
RHO = 0.1
SEED = 17


def main():
    model = generate_mmsb(N, D, RHO, seed=SEED)
    m = subsample_size(N, 2.0)

    pairs = truncated_eigs(model.operator(), D)
    print(f"top |eigenvalues| of P: {[f'{v:.1f}' for v in pairs.values]}")
    print(f"coherence (1 = perfectly flat, sqrt(n) = spiked): {coherence(pairs.vectors):.2f}")
    print(f"condition number of the truncated part: {condition_number(pairs.values):.2f}")

    # Subgraph eigenvalues should track (m/n) times the full ones.
    report = eigen_scaling_check(model, m, trials=50, seed=SEED,
                                 tolerance=0.3, min_fraction=0.95)
    frac = report.values["fraction_within_tolerance"]
    print(f"\neigenvalue scaling, m={m}: max normalized deviation within 0.3 "
          f"in {frac:.0%} of trials "
          f"({'ok' if report.flags['deviation_within_tolerance'] else 'OFF REGIME'})")

    report = assumption_report(model, m)
    print("\nassumptions:")
    width = max(len(k) for k in report.flags)
    for key, ok in sorted(report.flags.items()):
        print(f"  {key:<{width}}  {'pass' if ok else 'FAIL'}")
    print("all pass" if report.all_pass else "some checks failed")


if __name__ == "__main__":
    main()
