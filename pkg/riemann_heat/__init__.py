"""
Heat kernels for 0-, 1- and 2-forms on the euclidean plane, the unit sphere,
the hyperbolic plane, and quotients of the flat and hyperbolic planes by
abelian covering groups.
"""
