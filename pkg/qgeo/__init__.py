"""qgeo: geometry of isospectral density-operator orbits and mixed-state uncertainty bounds."""
from qgeo.core.config import settings

__version__ = settings.VERSION
