"""Total detection probability of quantum walks under stroboscopic detection."""

__version__ = "0.1.0"
