"""Complex spectrum of a dense Google matrix and what it says about relaxation.

For one AB network this prints the share of (numerically) zero eigenvalues,
the spectral gap gamma_c against the damping bound 2|ln alpha|, a coarse
view of the relaxation-rate density W(gamma) and the mean IPR of the
eigenvectors in a few gamma windows.

Run:  python3 demos/spectrum_and_gap.py
"""

import numpy as np

from googlematrix import AbParams, GoogleOperator, ab_generate, density_w, full_spectrum, materialize_dense
from googlematrix.locstats import estimate_gap, ipr_vs_gamma
from googlematrix.spectra import attach_eigenvectors, gamma_window

N = 1024

for q in (0.1, 0.7):
    g = materialize_dense(GoogleOperator.from_graph(ab_generate(AbParams(5, 0.2, q, N, seed=7))))
    spec = full_spectrum(g)
    gap = estimate_gap(spec)
    print(f"q = {q}, N = {N}")
    print(f"  eigenvalues with |lambda| < 1e-8: {spec.zero_fraction:.1%}")
    print(f"  gamma_c = {gap.gamma_c:.3f}  (damping bound {gap.gamma_alpha:.3f})")

    w = density_w(spec.eigenvalues, bin_width=1.0)
    bars = "  ".join(f"[{lo:.0f},{hi:.0f}):{v:.2f}" for lo, hi, v in zip(w.bin_edges, w.bin_edges[1:], w.w) if v)
    print(f"  W(gamma) per unit bin: {bars}")

    attach_eigenvectors(spec, g, select=gamma_window(0.0, 6.0))
    curve = ipr_vs_gamma(spec, bin_width=1.0)
    cells = [f"[{lo:.0f},{hi:.0f}):{x:.0f}" for lo, hi, x in zip(curve.bin_edges, curve.bin_edges[1:], curve.mean_xi)
             if np.isfinite(x)]
    print(f"  mean IPR per unit bin: {'  '.join(cells)}")
    unverified = sum(not p.verified for p in spec.pairs)
    print(f"  {len(spec.pairs)} eigenvectors by inverse iteration, {unverified} above the residual threshold\n")
