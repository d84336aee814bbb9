"""twistlab: a numerical and combinatorial laboratory for composite symplectic Dehn twists."""

__version__ = "0.1.0"
