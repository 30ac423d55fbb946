__version__ = "0.1.0"
__project__ = "SUBSPACE_MEMORY"
