"""Death time of the correlated-q state versus q and atom separation.

Independent atoms use the closed-form root; interacting atoms use the first
downward crossing of the concurrence criterion on a fine grid.
"""

import argparse

import numpy as np

from entlab import events
from entlab import free_space as fs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qs", default="0.4,0.5,0.6,0.7,0.8,0.9,0.95")
    ap.add_argument("--separations", default="0,0.05,0.1,0.25,0.5,1", help="r12/lambda, 0 = independent")
    ap.add_argument("--t-max", type=float, default=20.0)
    args = ap.parse_args()
    t = np.linspace(0.0, args.t_max, 20001)
    print("r12_over_lambda,q,first_death_gamma_t,closed_form_independent")
    for sep in (float(x) for x in args.separations.split(",")):
        p = fs.independent_params() if sep == 0 else fs.collective_params(fs.kr_from_separation(sep))
        for q in (float(x) for x in args.qs.split(",")):
            c1, c2 = fs.correlated_q_criteria(q, p, t)
            c = np.maximum(c1, c2)
            down = [x for x, kind in events.crossings(t, c, kind="down")]
            ref = fs.sudden_death_time(q)
            print(f"{sep:g},{q:g},{down[0] if down else float('nan'):.6f},{ref if ref is not None else float('nan'):.6f}")


if __name__ == "__main__":
    main()
