"""pupilclean: cleaning, batch processing and inspection of pupillary
time series."""

from .model import (Channel, GazePoint, GazeSeries, ModelError, Recording,
                    Sample, Series, is_missing, validate_recording)

__all__ = [
    "Channel", "GazePoint", "GazeSeries", "ModelError", "Recording",
    "Sample", "Series", "is_missing", "validate_recording",
]

__version__ = "0.1.0"
