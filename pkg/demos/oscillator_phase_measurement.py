"""Two identical oscillators, Alice kicks hers, then the center-of-mass
occupation number (a spatially nonlocal variable) is measured projectively.

The naive rule - collapse only the center-of-mass factor, leave the relative
factor alone - hands Bob's momentum a term -lam/2 that tracks Alice's kick.
Restricting the post-measurement states to number states times fixed-parity
phase states removes every trace of lam from Bob's first moments, at the
price of pumping his second moments up linearly with the phase-state cutoff
(the finite-cutoff stand-in for an infinite energy cost).

Run:  python demos/oscillator_phase_measurement.py
"""

import numpy as np

from causalprobe.oscillators import (
    KickParams,
    OscParams,
    coherent_prestate,
    local_moments_b,
    naive_nplus_ensemble,
    phase_coefficients,
    phase_ensemble_moments,
)

params = OscParams(mass=1.0, frequency=1.0, hbar=1.0)
P_A, P_B = 0.3, -0.2


def banner(text):
    print()
    print("=" * 72)
    print(text)
    print("=" * 72)


banner("1. Naive center-of-mass collapse leaks the kick into <P_B>")
print("  lam     <P_B> after      -(p_A - p_B + lam)/2")
for lam in (-1.0, -0.5, 0.0, 0.5, 1.0):
    pre = coherent_prestate(params, KickParams(P_A, P_B, lam), 40)
    m = local_moments_b(naive_nplus_ensemble(pre), params)
    print(f"  {lam:+.2f}   {m.p:+.12f}   {-(P_A - P_B + lam) / 2:+.12f}")
print("  The slope d<P_B>/dlam = -1/2 is Alice's signal.")

banner("2. Number-times-phase-state measurement erases it")
print("  lam     <Q_B>    <P_B>    <Q_B^2>        <P_B^2>")
for lam in (-1.0, 0.0, 1.0):
    m = phase_ensemble_moments(params, KickParams(P_A, P_B, lam), s_cut=16, n_max=30)
    print(f"  {lam:+.2f}   {m.q:+.4f}  {m.p:+.4f}  {m.q2:12.8f}  {m.p2:12.8f}")
print("  First moments vanish outcome by outcome (number states on the")
print("  center of mass, fixed-parity phase states on the relative mode).")
print("  The residual lam dependence of the second moments is buried in a")
print("  value that grows without bound as the cutoff is raised:")

banner("3. The energy cost: <Q_B^2> grows linearly with the cutoff")
cuts = np.array([4, 8, 16, 32, 64], dtype=int)
vals = [phase_ensemble_moments(params, KickParams(lam=0.2), int(s), 20).q2
        for s in cuts]
print("  s_cut   <Q_B^2>")
for s, v in zip(cuts, vals):
    print(f"  {s:5d}   {v:10.5f}")
design = np.vstack([cuts.astype(float), np.ones(len(cuts))]).T
coef, *_ = np.linalg.lstsq(design, np.array(vals), rcond=None)
print(f"  linear fit: slope {coef[0]:.5f} per unit of cutoff "
      f"(hbar/2mOmega per level), intercept {coef[1]:.5f}")
print("  Diverging second moments are what hide the kick from Bob; at any")
print("  finite cutoff a trace of lam survives in them.")

banner("4. Where the kick went: expansion coefficients")
c = phase_coefficients(params, KickParams(P_A, P_B, 0.4), s_cut=4, n_max=6)
w_n = np.sum(np.abs(c) ** 2, axis=(1, 2))
w_b = np.sum(np.abs(c) ** 2, axis=(0, 2))
print(f"  weight by center-of-mass occupation n: {np.round(w_n, 5)}")
print(f"  weight by relative-mode parity (even, odd): {np.round(w_b, 5)}")
print("  All lam dependence sits in these weights; every outcome state")
print("  gives Bob the same (vanishing) first moments.")
