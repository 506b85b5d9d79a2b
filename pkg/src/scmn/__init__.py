"""Density evolution for spatially-coupled MacKay-Neal and Hsu-Anastasopoulos protographs over the BEC."""

__version__ = "0.1.0"
