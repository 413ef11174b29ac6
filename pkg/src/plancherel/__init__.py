"""Distribution of the first two rows of Plancherel-random Young diagrams.

Exact combinatorics (:mod:`.combinat`), RSK sampling (:mod:`.rsk`),
Toeplitz-side determinant formulas (:mod:`.detform`), Fredholm determinants
of the integrable kernel (:mod:`.fredholm`) and the Painleve II limit laws
(:mod:`.painleve`).
"""

__version__ = "0.1.0"
