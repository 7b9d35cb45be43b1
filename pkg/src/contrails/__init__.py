"""Toolkit de segmentação de contrails com SR Loss baseada na transformada de Hough"""

from .main_pipeline import ContrailPipeline

__all__ = ["ContrailPipeline"]
