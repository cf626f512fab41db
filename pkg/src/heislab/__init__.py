"""Numerical laboratory for singular integrals on curves in the Heisenberg group.

Submodules
----------
geometry    group law, dilations, norms, projections, cones
kernels     the kernel zoo and standard-kernel certification
tame        tame maps: constants, extension, rescaling, iLG conversion
corona      dyadic trees, Lipschitz/tame corona decompositions, Whitney regions
ilg         intrinsic Lipschitz graphs and discretized curves
sio         truncated singular integral operators as dense matrices
kernels1d   Calderon commutators and exponential kernels on the line
fourier     Fourier decomposition of graph kernels
auxkernels  zero-mean auxiliary kernels with prescribed Fourier decay
beta        beta-numbers, dyadic cubes on curves, projection geometry
flags       Lipschitz flags and 3-dimensional operator sweeps
cli         batch experiment runner
"""

__version__ = "0.1.0"
