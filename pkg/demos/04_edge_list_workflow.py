# File-based workflow driven through the command line interface.
#
# Writes two edge lists to a scratch directory, then runs the same commands a
# shell user would (the node count comes from the edge-list header):
#   predsub estimate --input g1.txt --d 3 --m 300 --seed 5
#   predsub test --input g1.txt --input2 g2.txt ...
import json
import tempfile
from pathlib import Path

from predsub import generate_mmsb, perturbed_model, sample_adjacency
from predsub.cli import main
from predsub.graph import save_edge_list

N = 2000
D = 3
RHO = 0.1
SEED = 5


def run(argv):
    print("$ predsub " + " ".join(argv))
    code = main(argv)
    if code != 0:
        raise SystemExit(code)


def main_demo():
    model = generate_mmsb(N, D, RHO, seed=SEED)
    g1 = sample_adjacency(model, seed=SEED + 1)
    g2 = sample_adjacency(perturbed_model(model, 0.3), seed=SEED + 2)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        save_edge_list(g1, tmp / "g1.txt")
        save_edge_list(g2, tmp / "g2.txt")

        run(["estimate", "--input", str(tmp / "g1.txt"),
             "--d", str(D), "--m", "300", "--seed", "5",
             "--output", str(tmp / "est.json")])
        est = json.loads((tmp / "est.json").read_text())
        rec = est["records"][0]
        print(f"  -> m={rec['m']}  signature=({rec['p_hat']},{rec['q_hat']})  "
              f"isolated={rec['isolated_count']}\n")

        run(["test", "--input", str(tmp / "g1.txt"), "--input2", str(tmp / "g2.txt"),
             "--d", str(D), "--m", "300", "--b", "100", "--seed", "6",
             "--output", str(tmp / "test.json")])
        res = json.loads((tmp / "test.json").read_text())
        rec = res["records"][0]
        print(f"  -> T0={rec['t0']:.3f}  p={rec['p_value']}  reject={rec['reject']}")


if __name__ == "__main__":
    main_demo()
