"""Plot the CSV written by `nesterov-cert rates`.

    nesterov-cert rates --kappa-min 1 --kappa-max 1e4 --points 200 --out rates.csv
    python scripts/plot_rates.py rates.csv rates.png
"""
import csv
import sys

import matplotlib.pyplot as plt


def main(src, dst):
    with open(src) as fh:
        rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]
    kappa = [r["kappa"] for r in rows]
    fig, (ax_rate, ax_beta) = plt.subplots(1, 2, figsize=(10, 4))
    for col, label in [
        ("tau_bp", "BP"),
        ("tau_lq", "LQ"),
        ("tau_nq", "NQ"),
        ("tau_ours", "certified"),
        ("tau_ng", "NG"),
    ]:
        ax_rate.semilogx(kappa, [r[col] for r in rows], label=label)
    ax_rate.set_xlabel("kappa")
    ax_rate.set_ylabel("rate")
    ax_rate.legend()
    ax_beta.semilogx(kappa, [r["beta_classic"] for r in rows], label="classic")
    ax_beta.semilogx(kappa, [r["beta_opt"] for r in rows], "--", label="tuned")
    ax_beta.set_xlabel("kappa")
    ax_beta.set_ylabel("beta")
    ax_beta.legend()
    fig.tight_layout()
    fig.savefig(dst, dpi=150)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else "rates.png")
