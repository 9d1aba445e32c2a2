#!/usr/bin/env python3
"""Independent Z2 oracle for the doubled QWZ model.

Two routes, neither shares code with the C++ library:
  * inversion parities at the four TRIMs (Pi = 1 (x) sigma_3 commutes with
    H and with theta), Fu-Kane product of one parity per Kramers pair;
  * lattice (plaquette) Chern number of the upper 2x2 block, reduced mod 2.

Writes qwz_z2_expected.json next to this file.
"""
import json
import os

import numpy as np

S1 = np.array([[0, 1], [1, 0]], complex)
S2 = np.array([[0, -1j], [1j, 0]], complex)
S3 = np.array([[1, 0], [0, -1]], complex)


def h_block(k1, k2, u):
    c1, c2 = np.cos(2 * np.pi * k1), np.cos(2 * np.pi * k2)
    return np.sin(2 * np.pi * k1) * S1 + np.sin(2 * np.pi * k2) * S2 + (u + c1 + c2) * S3


def h_full(k1, k2, u):
    H = np.zeros((4, 4), complex)
    H[:2, :2] = h_block(k1, k2, u)
    H[2:, 2:] = np.conj(h_block(-k1, -k2, u))
    return H


def parity_route(u):
    Pi = np.kron(np.eye(2), S3)
    prod = 1.0
    for k in [(0, 0), (0.5, 0), (0, 0.5), (0.5, 0.5)]:
        w, v = np.linalg.eigh(h_full(*k, u))
        occ = v[:, :2]
        xi = np.linalg.eigvalsh(occ.conj().T @ Pi @ occ)
        assert abs(xi[0] - xi[1]) < 1e-10, "Kramers partners must share parity"
        prod *= np.sign(xi[0])
    return 0 if prod > 0 else 1


def chern_route(u, n=48):
    vecs = np.empty((n, n, 2), complex)
    for i in range(n):
        for j in range(n):
            _, v = np.linalg.eigh(h_block(i / n, j / n, u))
            vecs[i, j] = v[:, 0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            a = vecs[i, j]
            b = vecs[(i + 1) % n, j]
            c = vecs[(i + 1) % n, (j + 1) % n]
            d = vecs[i, (j + 1) % n]
            loop = np.vdot(a, b) * np.vdot(b, c) * np.vdot(c, d) * np.vdot(d, a)
            total += np.angle(loop)
    ch = total / (2 * np.pi)
    assert abs(ch - round(ch)) < 1e-8
    return int(round(ch))


def main():
    rows = []
    for u in [-3.0, -1.0, 1.0, 3.0]:
        z_par = parity_route(u)
        ch = chern_route(u)
        assert z_par == ch % 2, (u, z_par, ch)
        rows.append({"u": u, "z2": z_par, "block_chern": ch})
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "qwz_z2_expected.json")
    with open(out, "w") as f:
        json.dump({"model": "doubled_qwz", "cases": rows}, f, indent=2)
        f.write("\n")
    for r in rows:
        print(r)


if __name__ == "__main__":
    main()
