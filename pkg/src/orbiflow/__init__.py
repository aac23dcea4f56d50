"""orbiflow: executable low-dimensional orbifold topology and Ricci-flow kernels.

Subpackages by theme:

* ``orb2``          -- closed/bounded orientable 2-orbifold signatures, exact
                       Euler characteristics, geometry classification, and the
                       mapping class groups of the closed Euclidean signatures.
* ``orb3``          -- labelled trivalent singular graphs for orientable
                       3-orbifolds, discal/solid-toric tokens, 0-surgery.
* ``graphdec``      -- weak/strong graph orbifolds and the normalization engine
                       (fibration merges, Dehn merges, base cuts, terminal-base
                       recognition, compressible-boundary splitting).
* ``ricciflow2d``   -- rotationally symmetric Ricci flow on cone surfaces,
                       Gauss-Bonnet bookkeeping, and the teardrop soliton.
* ``surgeryflow3d`` -- doubly warped Ricci flow with neck detection, standard
                       caps, surgery, pinching/noncollapsing monitors.
* ``lfunc``         -- space-time action (L-functional), reduced length and
                       reduced volume on analytic model flows.
* ``cli``           -- the ``orbiflow`` command line front end.

Numerically hot kernels live in ``_kernels`` and are JIT-compiled with numba
by default; set ``ORBIFLOW_NUMBA=0`` to force the pure-numpy fallback.
"""

__version__ = "0.1.0"

__all__ = [
    "orb2",
    "orb3",
    "graphdec",
    "ricciflow2d",
    "surgeryflow3d",
    "lfunc",
    "cli",
]
