"""Contrails - Segmentação de trilhas de condensação em imagens de satélite"""

__version__ = "1.0.0"
