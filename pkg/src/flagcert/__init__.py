"""Flag-algebra SDP certificates for monochromatic clique density bounds."""

__version__ = "0.1.0"
