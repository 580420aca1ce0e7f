"""Where the initial atom-atom entanglement ends up for a range of coupling ratios.

For each g2/g1 the script reports the predicted destination pair and the
largest concurrence each pair reaches on the time window.
"""

import argparse

import numpy as np

from entlab import double_jc as djc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ratios", default="0.25,0.333333333333,0.5,1,1.5,2,3,4")
    ap.add_argument("--t-max", type=float, default=40.0, help="window in units of 1/g1")
    ap.add_argument("--points", type=int, default=40001)
    args = ap.parse_args()
    gt = np.linspace(0.0, args.t_max, args.points)
    print("ratio,destination," + ",".join("sup_" + k for k in djc.PAIRS))
    for ratio in (float(x) for x in args.ratios.split(",")):
        pc = djc.steered_transfer(ratio, gt)
        sups = [float(np.max(getattr(pc, "c_" + k))) for k in djc.PAIRS]
        print(f"{ratio:.6g},{djc.transfer_destination(ratio) or '-'}," + ",".join(f"{s:.6f}" for s in sups))


if __name__ == "__main__":
    main()
