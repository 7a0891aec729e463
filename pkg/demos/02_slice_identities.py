"""Identities that hold on any single slice (g, Omega) with f = log(dV_g / Omega).

Run with ``python demos/02_slice_identities.py`` (about 1 s).
"""

from wentropy.identity_bench import (
    check_bianchi_perelman,
    check_magic_heat_slice,
    check_ricci_decomposition,
    random_slice,
)

for seed in range(5):
    state, omega = random_slice(seed)
    rows = [check_bianchi_perelman(state, omega)]
    rows += check_ricci_decomposition(state, omega)
    rows += check_magic_heat_slice(state, omega)
    print(f"seed {seed}: " + ", ".join(f"{r.tag} {r.residual:.1e}" for r in rows))
