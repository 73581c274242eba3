"""Lattice scalar field: Alice kicks the vacuum at one site, a single mode
pair's occupation (or a one-particle state) is measured projectively, and
Bob reads local expectation values at a distance.

Unlike the spin and oscillator cases, the signaling terms here come with
universal suppression factors: the mode-volume factor 1/V (IR) for any
single-mode measurement, and exp(-lam^2 ginv_xx / 2hbar) (UV) for the
verification, since ginv_xx grows as the lattice spacing shrinks.  This
script prints the raw responses and both cutoff scalings, with the
truncated-Fock oracle cross-checking the closed forms on the small fixture.

Run:  python demos/field_cutoff_suppression.py
"""

import numpy as np

from causalprobe.field_oracle import numeric_oracle_qndsv, phi2_comparison
from causalprobe.fieldtheory import (
    KickSpec,
    max_signaling,
    naive_np_expectations,
    qndsv_phi_y,
    suppression_factor,
)
from causalprobe.harness import power_fit
from causalprobe.lattice import LatticeSpec, build_modes


def banner(text):
    print()
    print("=" * 72)
    print(text)
    print("=" * 72)


LAM = 0.3
lat = LatticeSpec(dim=1, n_sites=4, spacing=1.0, mass=1.0)
modes = build_modes(lat)
p = modes.mode_index(1)
kick = KickSpec(site=0, strength=LAM)

banner("1. Closed forms vs the truncated-Fock oracle (d=1, N=4, trunc 6)")
print("  naive pair-occupation measurement, observation site y:")
print("  y   quantity   closed form        oracle             |diff|")
for y in (1, 2):
    rep = numeric_oracle_qndsv(modes, kick, y, p, 6, scheme_kind="naive")
    closed = naive_np_expectations(modes, kick, y, p).as_dict()
    for name in ("pi_y", "phi2_y", "pi2_y"):
        a, b = closed[name], rep.values[name]
        print(f"  {y}   {name:8s}   {a:+.12f}   {b:+.12f}   {abs(a-b):.2e}")
rep = numeric_oracle_qndsv(modes, kick, 1, p, 6, scheme_kind="qndsv",
                           observables=("phi_y",))
a = qndsv_phi_y(modes, kick, 1, p)
print(f"  1   phi_y(V)   {a:+.12f}   {rep.values['phi_y']:+.12f}   "
      f"{abs(a - rep.values['phi_y']):.2e}   (verification scheme)")

banner("2. The verification second moment: report, don't adjudicate")
cmp2 = phi2_comparison(modes, kick, 1, p, 6)
print(f"  closed-form candidate:   {cmp2.closed_form:.12f}")
print(f"  truncated-Fock oracle:   {cmp2.oracle:.12f}")
print(f"  difference:              {cmp2.difference:+.12f}")
print("  The two disagree already at lam = 0, so both values are reported")
print("  side by side; the other closed forms above match the oracle to")
print("  rounding.")

banner("3. IR suppression: responses fall like 1/V")
print("  N    V     |<pi_y>| response    |<phi_y>| verification")
pis, phis, ns = [], [], (4, 8, 16, 32)
for n in ns:
    li = LatticeSpec(dim=1, n_sites=n, spacing=1.0, mass=1.0)
    mi = build_modes(li)
    pi_i = mi.mode_index(n // 4)             # fixed physical wave vector pi/2
    pis.append(abs(naive_np_expectations(mi, kick, 2, pi_i).pi))
    phis.append(abs(qndsv_phi_y(mi, kick, 1, pi_i)))
    print(f"  {n:3d}  {n:4.0f}   {pis[-1]:.12f}      {phis[-1]:.12f}")
print(f"  power-law fits: exponent {power_fit(ns, pis).exponent:+.4f} and "
      f"{power_fit(ns, phis).exponent:+.4f} (1/V on the nose)")

banner("4. UV suppression of the verification signal")
print("  a       ginv_xx     exp factor at lam=0.5   strongest possible signal")
for n, a in ((8, 1.0), (16, 0.5), (32, 0.25), (64, 0.125)):
    li = LatticeSpec(dim=1, n_sites=n, spacing=a, mass=1.0)
    mi = build_modes(li)
    from causalprobe.lattice import kernel_ginv
    gxx = kernel_ginv(mi, 0, 0)
    damp = suppression_factor(mi, KickSpec(0, 0.5))
    ms = max_signaling(mi, 0)
    print(f"  {a:5.3f}   {gxx:8.5f}    {damp:18.12f}   "
          f"{ms.amplitude:.12f} at lam* = {ms.lambda_star:.5f}")
print("  Finer lattices (higher UV cutoff) damp the signal harder; its best")
print("  case sqrt(hbar / e ginv_xx) sinks monotonically with the spacing.")
print()
print("  Both cutoffs push every response toward zero: with the box taken")
print("  large and the spacing small, these projective prescriptions are")
print("  effectively causal even though none of them is exactly so.")
