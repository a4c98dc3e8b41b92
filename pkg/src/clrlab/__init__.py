"""Constants of Cwikel-Lieb-Rozenblum type bounds from the splitting method."""

__version__ = "0.1.0"
