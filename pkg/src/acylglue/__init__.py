"""acylglue: computable pieces of asymptotically cylindrical gluing theory.

Subpackages/modules:
  spectral  -- torus cross-section spectra and indicial root data
  fredholm  -- weighted index calculus over multi-ended cylinders
  curves    -- rational-curve rigidity and gluing-hypothesis checks
  catalog   -- Fano family dataset and example records
  gluer     -- exactly solvable neck-stretching model and experiments
  service   -- FastAPI front end; cli -- thin command-line client
"""

__version__ = "0.1.0"

from . import catalog, curves, errors, fredholm, gluer, spectral  # noqa: F401
