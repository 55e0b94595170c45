"""
Loewner Lab Package

Numerics for univalent self-maps of the unit disk with prescribed boundary
regular fixed points: Herglotz and Pick representations, Berkson-Porta
generators, semigroup flows, Loewner-Kufarev evolution families and
boundary diagnostics.
"""

__version__ = "0.1.0"
__license__ = "MIT"

_EXPORTS = {
    "main": "loewner_lab.cli",
    "Generator": "loewner_lab.generators",
    "PickGenerator": "loewner_lab.generators",
    "semigroup_flow": "loewner_lab.generators",
    "synthesize_generator": "loewner_lab.generators",
    "Schedule": "loewner_lab.evolution",
    "EvolutionMap": "loewner_lab.evolution",
    "evolve_point": "loewner_lab.evolution",
    "HerglotzFunction": "loewner_lab.herglotz",
    "ClarkMeasure": "loewner_lab.herglotz",
    "PickFunction": "loewner_lab.herglotz",
    "SolverConfig": "loewner_lab.config",
}


# Lazy imports keep ``import loewner_lab`` free of numpy/scipy/matplotlib
def __getattr__(name):
    """Lazy import of the public API."""
    if name in _EXPORTS:
        import importlib

        return getattr(importlib.import_module(_EXPORTS[name]), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [*_EXPORTS, "__version__", "__license__"]
