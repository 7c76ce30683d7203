"""Circle reparametrizations that make functions orthogonal to Chebyshev
systems, Hobby-Rice sign partitions, and reparametrized Hill potentials."""

__version__ = "0.1.0"
