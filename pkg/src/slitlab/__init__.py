"""Double-slit self-interference toolkit: probability currents, winding
numbers, split-step slit propagation and fringe predictors."""

__version__ = "0.1.0"

from slitlab.fields import (  # noqa: E402
    ComplexField2D,
    DiracField2D,
    GridSpec,
    PauliField2D,
    VectorField2D,
    make_grid,
)

__all__ = ["ComplexField2D", "DiracField2D", "GridSpec", "PauliField2D", "VectorField2D", "make_grid",
           "__version__"]
