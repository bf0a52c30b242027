"""Exact versus unit Jacobian on the sphere: the J = 1 bias against m2 * int f G.

    python scripts/jacobian_bias.py
"""

import math

from ibim.experiments import dyadic
from ibim.geometry import Sphere
from ibim.lattice import LatticeFrame
from ibim.quadrature import INTEGRANDS, ibim_integrate
from ibim.reference import reference_integral
from ibim.weights import WeightFunction


def main():
    b, f = Sphere(0.75, (0.05, -0.1, 0.02)), INTEGRANDS["test3d"]
    ref = reference_integral(b, f)
    print(f"{'h':>10} {'exact err':>12} {'unity err':>12} {'predicted bias':>15}")
    for h in dyadic(3, 7):
        w = WeightFunction("hat", 2 * h)
        frame = LatticeFrame(h, (0.3, 0.1, 0.6))
        ex = ibim_integrate(b, f, w, frame, "exact").value
        un = ibim_integrate(b, f, w, frame, "unity").value
        m2 = w.eps**2 / 6  # second moment of the triangle weight
        print(f"{h:10.5f} {abs(ex - ref):12.3e} {abs(un - ref):12.3e} {m2 * ref / b.r**2:15.3e}")


if __name__ == "__main__":
    main()
