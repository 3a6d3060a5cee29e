#!/usr/bin/env python3
"""Build the reduced 10-machine swing-model parameter file for the 39-bus system.

Loads are converted to constant admittances at the solved operating point,
generator transient reactances are added as extra internal buses and the
network is Kron-reduced onto the internal EMF nodes.  Requires pypower.

    python3 tools/make_ne39_params.py --damping 100 > data/ne39_reduced.params
"""
import argparse

import numpy as np
from pypower.api import case39, ppoption, runpf
from pypower.idx_bus import BUS_I, PD, QD, VM, VA, GS, BS
from pypower.idx_gen import GEN_BUS, PG, QG
from pypower.ext2int import ext2int
from pypower.makeYbus import makeYbus

# Classical-model data, generators ordered by bus 30..39 (100 MVA base).
H = [42.0, 30.3, 35.8, 28.6, 26.0, 34.8, 26.4, 24.3, 34.5, 500.0]
XD_PRIME = [0.031, 0.0697, 0.0531, 0.0436, 0.132, 0.050, 0.049, 0.057, 0.057, 0.006]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--damping", type=float, default=100.0)
    ap.add_argument("--f0", type=float, default=60.0)
    args = ap.parse_args()

    ppc = case39()
    res, ok = runpf(ppc, ppoption(VERBOSE=0, OUT_ALL=0))
    if not ok:
        raise SystemExit("power flow did not converge")
    res = ext2int(res)
    base = res["baseMVA"]
    bus, gen, branch = res["bus"], res["gen"], res["branch"]
    nb = bus.shape[0]
    v = bus[:, VM] * np.exp(1j * np.deg2rad(bus[:, VA]))

    ybus, _, _ = makeYbus(base, bus, branch)
    ybus = ybus.toarray()
    # Loads as constant admittance.
    sload = (bus[:, PD] + 1j * bus[:, QD]) / base
    ybus += np.diag(np.conj(sload) / np.abs(v) ** 2)

    order = np.argsort(gen[:, GEN_BUS])
    gen = gen[order]
    m = gen.shape[0]
    gbus = [int(b) for b in gen[:, GEN_BUS]]
    sg = (gen[:, PG] + 1j * gen[:, QG]) / base
    ig = np.conj(sg / v[gbus])
    emf = v[gbus] + 1j * np.array(XD_PRIME) * ig

    # Augment with internal nodes and reduce.
    y = np.zeros((nb + m, nb + m), dtype=complex)
    y[:nb, :nb] = ybus
    for k, b in enumerate(gbus):
        yk = 1.0 / (1j * XD_PRIME[k])
        y[nb + k, nb + k] += yk
        y[b, b] += yk
        y[nb + k, b] -= yk
        y[b, nb + k] -= yk
    ynn, yne = y[:nb, :nb], y[:nb, nb:]
    yen, yee = y[nb:, :nb], y[nb:, nb:]
    yred = yee - yen @ np.linalg.solve(ynn, yne)

    e = np.abs(emf)
    delta = np.angle(emf)
    pe = np.real(emf * np.conj(yred @ emf))

    def row(vals):
        return " ".join(f"{x:.17g}" for x in vals)

    print("# Reduced 10-machine model of the 39-bus system (classical generators).")
    print("# Generated by tools/make_ne39_params.py; generators ordered by bus 30..39.")
    print(f"m = {m}")
    print(f"f0 = {args.f0:.17g}")
    print(f"D = {args.damping:.17g}")
    print(f"H = {row(H)}")
    print(f"E = {row(e)}")
    print(f"Pm = {row(pe)}")
    print("G =")
    for r in yred.real:
        print(f"  {row(r)}")
    print("B =")
    for r in yred.imag:
        print(f"  {row(r)}")
    print(f"delta_eq = {row(delta)}")


if __name__ == "__main__":
    main()
