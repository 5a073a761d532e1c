#!/usr/bin/env python3
"""Regenerates the tables under data/.

Attenuation: Compton (incoherent, free-electron Klein-Nishina) part only,
mu = rho * (Z/A) * N_A * sigma_KN(E). Photoelectric absorption and pair
production are ignored, which underestimates mu for aluminium and steel below
a few hundred keV.

Scattering function: smooth closed-form approximation
S(q, Z) = Z * (1 - (1 + (q / q_Z)^2)^-2), q_Z = 0.5 Z^(2/3) / angstrom,
standing in for tabulated values; it has the right limits (0 at q = 0, Z for
large q) but is not fitted to any reference data.
"""
import json
import math
import pathlib

E0 = 510.99895  # keV
RE_CM = 2.8179403262e-13
NA = 6.02214076e23

# name: (density g/cm^3, Z/A)
MATERIALS = {
    "water": (1.0, 0.5551),
    "polyethylene": (0.94, 0.5703),
    "rubber": (0.92, 0.5578),
    "aluminium": (2.699, 0.4818),
    "teflon": (2.2, 0.4799),
    "pvc": (1.38, 0.5120),
    "pom": (1.41, 0.5329),
    "steel": (7.874, 0.4656),
    "air": (0.001205, 0.4992),
}

SCENARIOS = {
    "small-low-z": {"ball": "rubber", "stairs": "water", "block": "polyethylene", "sheet": "aluminium"},
    "large-high-z": {"ball": "pom", "stairs": "pvc", "block": "teflon", "sheet": "steel"},
}


def sigma_kn(e_kev):
    """Total Klein-Nishina cross section per electron, cm^2."""
    k = e_kev / E0
    l = math.log1p(2 * k)
    return 2 * math.pi * RE_CM**2 * (
        (1 + k) / k**2 * (2 * (1 + k) / (1 + 2 * k) - l / k) + l / (2 * k) - (1 + 3 * k) / (1 + 2 * k) ** 2
    )


def log_space(lo, hi, n):
    return [lo * (hi / lo) ** (i / (n - 1)) for i in range(n)]


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "data"
    mu_dir = root / "materials" / "mu"
    mu_dir.mkdir(parents=True, exist_ok=True)
    energies = log_space(20.0, 3000.0, 41)
    for name, (rho, z_over_a) in MATERIALS.items():
        lines = ["energy_keV,mu_per_cm"]
        lines += [f"{e:.6g},{rho * z_over_a * NA * sigma_kn(e):.6e}" for e in energies]
        (mu_dir / f"{name}.csv").write_text("\n".join(lines) + "\n")
    for scenario, labels in SCENARIOS.items():
        d = root / "materials" / scenario
        d.mkdir(parents=True, exist_ok=True)
        doc = {"labels": {label: f"../mu/{mat}.csv" for label, mat in labels.items()}}
        (d / "materials.json").write_text(json.dumps(doc, indent=2) + "\n")

    s_lines = ["q_inverse_angstrom,Z,S"]
    for z in (1, 6, 7, 8, 13, 26):
        qz = 0.5 * z ** (2.0 / 3.0)
        for q in [0.0] + log_space(1e-3, 1e3, 49):
            s_lines.append(f"{q:.6g},{z},{z * (1 - (1 + (q / qz) ** 2) ** -2):.6e}")
    (root / "scattering_function.csv").write_text("\n".join(s_lines) + "\n")

    # Kramers-like bremsstrahlung shape (E_m - E) / E, zero at E_m = 150 keV
    spec = root / "spectra"
    spec.mkdir(parents=True, exist_ok=True)
    em = 150.0
    rows = ["energy_keV,flux"] + [f"{e:g},{(em - e) / e:.6e}" for e in range(20, 151, 5)]
    (spec / "kramers150.csv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
