"""Linear stability of rest points, including degenerate ones."""

from pathlib import Path

import numpy as np

from seqdyn import analyze_stability, build_normal_form, build_sequence_form, tiebreak_variants
from seqdyn.io import load_game, load_json, sequence_profile
from seqdyn.stability import rest_point_residual

DATA = Path(__file__).parent / "data"
np.set_printoptions(precision=3, suppress=True)


def show(name, sf, x1, x2, tiebreak=None):
    rep = analyze_stability(sf, x1, x2, tiebreak)
    print(f"{name}: residual {rest_point_residual(sf, x1, x2):.1e}")
    print("  full spectrum   ", np.round(rep.eigenvalues, 6), rep.classification)
    print("  tangent spectrum", np.round(rep.tangent_eigenvalues, 6), rep.tangent_classification)
    return rep


# %% matching pennies: the mixed equilibrium is a center, eigenvalues +-i
g = load_game(DATA / "mp.json")
sf = build_sequence_form(g)
x1, x2 = sequence_profile(load_json(DATA / "mp_eq.json"), sf, build_normal_form(g))
show("matching pennies", sf, x1, x2)

# %% the running example at a pure profile: the infosets after R1 are never
# reached, so their rows of G come from best responses, and ties are possible
g = load_game(DATA / "fig1.json")
sf = build_sequence_form(g)
x1, x2 = np.array([1.0, 1, 0, 0, 0, 0, 0]), np.array([1.0, 1, 0])
spectra = []
for tb in tiebreak_variants(sf, x1, x2):
    rep = show(f"tie-break {tb}", sf, x1, x2, tb)
    spectra.append(rep.eigenvalues)
spread = max(np.abs(s - spectra[0]).max() for s in spectra)
print(f"spectrum spread over {len(spectra)} tie-breaks: {spread:.1e}")
