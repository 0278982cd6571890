"""Regenerate the driver-derived catalog entries.

Each entry is produced by running the jamming driver from a fixed seed, then
polishing the detected tangency system with Gauss-Newton (free centers plus a
common radius scale) so that contact gaps sit at roundoff. The result is written
to src/diskjam/_catalog_data.py as literal constants.

    python3 scripts/derive_catalog.py
"""

from __future__ import annotations

import pathlib
import pprint

import numpy as np

from diskjam.dynamics import DriverConfig, jam, seed_random
from diskjam.geometry import LatticeBasis
from diskjam.packing import Packing, density, detect_contacts
from diskjam.rigidity import analyze

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "diskjam" / "_catalog_data.py"

# name -> (n, ratios, lattice, seed, required (k_spine, n_spine, rattlers))
RUNS = {
    "n3": (3, None, (1.0, 0.0, 1.0), 0, (5, 3, 0)),
    "rattler7": (7, None, (1.0, 0.0, 1.0), 6, (12, 6, 1)),
    "fivedisk_generic": (5, (1.0, 1.02, 1.05, 1.11, 1.23), (1.0, 0.0, 1.0), 42, (9, 5, 0)),
}


def polish(P: Packing, iters: int = 20) -> Packing:
    G = detect_contacts(P, 1e-6 * float(P.radii.mean()))
    L = P.lattice
    ratios = P.radii / P.radii[0]
    x = np.concatenate([P.centers[1:].ravel(), [P.radii[0]]])

    def residual(x):
        c = np.vstack([[0.0, 0.0], x[:-1].reshape(-1, 2)])
        out = []
        for ct in G.contacts:
            e = c[ct.i] - c[ct.j] + L.vector(*ct.lift)
            out.append(np.hypot(*e) - x[-1] * (ratios[ct.i] + ratios[ct.j]))
        return np.array(out)

    for _ in range(iters):
        f = residual(x)
        if np.max(np.abs(f)) < 1e-15:
            break
        J = np.zeros((f.size, x.size))
        h = 1e-7
        for k in range(x.size):
            xp = x.copy()
            xp[k] += h
            J[:, k] = (residual(xp) - f) / h
        x = x - np.linalg.lstsq(J, f, rcond=None)[0]
    centers = np.vstack([[0.0, 0.0], x[:-1].reshape(-1, 2)])
    # back off by a hair so no gap is negative after rounding
    radii = x[-1] * ratios * (1.0 - 1e-14)
    return Packing(L, centers, radii)


def main() -> None:
    data = {}
    for name, (n, ratios, lat, seed, want) in RUNS.items():
        L = LatticeBasis(*lat)
        P, _, _ = jam(seed_random(n, ratios, L, seed), DriverConfig(seed=seed))
        Q = polish(P)
        rep = analyze(Q)
        got = (rep.k_spine, rep.n_spine, len(rep.rattlers))
        if got != want or not rep.jammed:
            raise SystemExit(f"{name}: got {got}, jammed={rep.jammed}; expected {want}")
        print(f"{name}: density {density(Q):.12f} k={rep.k} spine={rep.n_spine}")
        data[name] = {
            "container": "torus",
            "lattice": list(Q.lattice.as_list()),
            "centers": [[float(a), float(b)] for a, b in Q.centers],
            "radii": [float(r) for r in Q.radii],
            "provenance": f"jam(seed_random(n={n}, ratios={ratios}, lattice={lat}, seed={seed})), "
                          f"Gauss-Newton polish",
        }
    body = (
        '"""Generated by scripts/derive_catalog.py; do not edit by hand."""\n\n'
        f"FROZEN = {pprint.pformat(data, width=100, sort_dicts=True)}\n"
    )
    OUT.write_text(body, encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
